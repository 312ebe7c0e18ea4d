"""Build the CLI golden fixture under tests/data/golden.

Renders a small synthetic database at width 256, trains one quality and
one QoE model through the CLI, and records the score of one held-out
stereo pair. Rerun only when the pipeline intentionally changes; the test
suite compares against the files written here.
"""
import contextlib
import io
import json
import sys
import tempfile
from pathlib import Path

from stereo360 import cli
from stereo360.dataset import load_image, save_image
from stereo360.synthetic import SyntheticSpec, distort, generate_database, scene, stereo_pair

out = Path(sys.argv[1] if len(sys.argv) > 1 else "tests/data/golden")
out.mkdir(parents=True, exist_ok=True)


def run(*argv) -> str:
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = cli.main(list(argv))
    if code:
        raise SystemExit(f"stereo360 {argv[0]} exited with {code}")
    return buf.getvalue()


with tempfile.TemporaryDirectory() as tmp:
    manifest = generate_database(tmp, SyntheticSpec(n_contents=3, width=256, seed=11))
    for target in ("quality", "qoe"):
        run("train", "--manifest", str(manifest), "--target", target, "--out", str(out / f"{target}.json"))

# a content the models never saw, medium disparity, asymmetric blur
left, right = stereo_pair(scene(500, 256), 2)
save_image(out / "ref_L.png", left)
save_image(out / "ref_R.png", right)
save_image(out / "dist_L.png", distort(left, "blur", 1))
save_image(out / "dist_R.png", distort(right, "blur", 3))
assert load_image(out / "dist_L.png").shape == (128, 256)

images = [f"--{role}-{side}={out / f'{role}_{side[0].upper()}.png'}"
          for role in ("ref", "dist") for side in ("left", "right")]
text = run("score", *images, "--model", str(out / "quality.json"), "--model", str(out / "qoe.json"),
           "--format", "json")
scores = {r["target"]: r["score"] for r in json.loads(text)}
(out / "golden.json").write_text(json.dumps(scores, indent=1, sort_keys=True) + "\n")
print(scores)
