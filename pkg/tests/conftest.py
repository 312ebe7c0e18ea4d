from pathlib import Path

import hypothesis
import numpy as np
import pytest

np.seterr(all="warn", under="ignore")

hypothesis.settings.register_profile("default", max_examples=50, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=10, deadline=None)
hypothesis.settings.load_profile("default")

DATA = Path(__file__).parent / "data"

# criterion label -> (PASS | FAIL | SKIP, detail); filled in by test_acceptance.py
ACCEPTANCE: dict[str, tuple[str, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(ACCEPTANCE, key=lambda s: int(s.split(".")[0])):
        status, detail = ACCEPTANCE[label]
        terminalreporter.write_line(f"{status}  {label}  {detail}")


@pytest.fixture(scope="session")
def natural_images():
    """Five 128x128 grayscale crops of scikit-image sample photos, float64 on 0-255."""
    from skimage import color, data, transform

    out = []
    for name in ("camera", "astronaut", "coffee", "chelsea", "rocket"):
        img = getattr(data, name)()
        if img.ndim == 3:
            img = color.rgb2gray(img) * 255.0
        img = img.astype(np.float64)
        side = min(img.shape[:2])
        img = img[:side, :side]
        out.append(transform.resize(img, (128, 128), anti_aliasing=True, preserve_range=True))
    return out


@pytest.fixture(scope="session")
def fsim_fixture():
    from stereo360.dataset import load_image

    return (load_image(DATA / "fsim_ref.png").astype(np.float64),
            load_image(DATA / "fsim_dist.png").astype(np.float64))
