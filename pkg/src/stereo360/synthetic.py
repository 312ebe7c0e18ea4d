"""Procedural stereo ERP scenes and a small labelled database.

The generated study mirrors the composition of a real one: several source
contents, two distortion types at three strengths, symmetric and asymmetric
eye pairings, and three disparity levels. Opinion scores are assigned by a
fixed monotone rule, so any reasonable quality model should rank them well.
"""
from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image
from scipy import ndimage

from .dataset import ManifestEntry, save_image, write_manifest

DISPARITY_SHIFT = {"zero": 0, "medium": 3, "large": 8}     # columns at width 512
DISTORTIONS = ("jpeg", "blur")
JPEG_QUALITY = {1: 40, 2: 15, 3: 5}
BLUR_SIGMA = {1: 1.0, 2: 2.0, 3: 3.5}
# per-eye impairment on the 5-point scale
IMPAIRMENT = {0: 0.0, 1: 0.9, 2: 1.8, 3: 2.7}
ASYM_PAIRS = {1: (1, 0), 2: (0, 2), 3: (3, 1)}


def scene(seed: int, width: int = 512) -> np.ndarray:
    """Textured grayscale ERP (uint8, ``width x width/2``) with edges at several scales."""
    h = width // 2
    rng = np.random.default_rng(seed)
    img = np.zeros((h, width))
    for sigma, amp in ((24, 60.0), (8, 35.0), (2.5, 20.0), (1.0, 8.0)):
        field = ndimage.gaussian_filter(rng.normal(size=(h, width)), sigma, mode="wrap")
        img += amp * field / (field.std() + 1e-12)
    yy, xx = np.mgrid[0:h, 0:width]
    for _ in range(40):
        cy, cx = rng.integers(0, h), rng.integers(0, width)
        ry, rx = rng.integers(4, h // 6), rng.integers(4, width // 10)
        level = rng.normal(0.0, 45.0)
        if rng.random() < 0.5:
            mask = (np.abs(yy - cy) < ry) & (np.minimum(np.abs(xx - cx), width - np.abs(xx - cx)) < rx)
        else:
            dx = np.minimum(np.abs(xx - cx), width - np.abs(xx - cx))
            mask = ((yy - cy) / ry) ** 2 + (dx / rx) ** 2 < 1.0
        img[mask] += level
    img = 128.0 + img * (50.0 / (img.std() + 1e-12))
    return np.clip(np.rint(img), 0, 255).astype(np.uint8)


def stereo_pair(base: np.ndarray, shift: int) -> tuple[np.ndarray, np.ndarray]:
    """Left/right views separated by a horizontal disparity of ``shift`` columns."""
    return base.copy(), np.roll(base, shift, axis=1)


def distort(img: np.ndarray, kind: str, strength: int) -> np.ndarray:
    if strength == 0:
        return img.copy()
    if kind == "jpeg":
        buf = io.BytesIO()
        Image.fromarray(img).save(buf, format="JPEG", quality=JPEG_QUALITY[strength])
        buf.seek(0)
        return np.asarray(Image.open(buf).convert("L"), dtype=np.uint8)
    if kind == "blur":
        out = ndimage.gaussian_filter(img.astype(np.float64), BLUR_SIGMA[strength], mode="wrap")
        return np.clip(np.rint(out), 0, 255).astype(np.uint8)
    raise ValueError(f"unknown distortion {kind!r}")


def quality_mos(s_left: int, s_right: int) -> float:
    worse, better = sorted((IMPAIRMENT[s_left], IMPAIRMENT[s_right]), reverse=True)
    return 5.0 - (0.65 * worse + 0.35 * better) if s_left != s_right else 5.0 - worse


def qoe_mos(q: float, disparity: str) -> float:
    bonus = {"zero": 0.0, "medium": 0.45, "large": 0.9}[disparity]
    return 1.0 + 0.75 * (q - 1.0) + bonus


@dataclass(frozen=True)
class SyntheticSpec:
    n_contents: int = 6
    width: int = 512
    seed: int = 2019


def disparity_for(content: int, kind_index: int, strength: int) -> str:
    return ("zero", "medium", "large")[(content + kind_index + strength) % 3]


def generate_database(root, spec: SyntheticSpec = SyntheticSpec()) -> Path:
    """Write images and ``manifest.csv`` under ``root``; returns the manifest path.

    Each content yields 2 distortion types x 3 strengths x {symmetric,
    asymmetric} = 12 distorted stereo images.
    """
    root = Path(root)
    img_dir = root / "images"
    img_dir.mkdir(parents=True, exist_ok=True)
    scale = spec.width / 512
    entries = []
    refs_written = set()
    for c in range(spec.n_contents):
        cid = f"C{c + 1}"
        base = scene(spec.seed + c, spec.width)
        for ki, kind in enumerate(DISTORTIONS):
            for s in (1, 2, 3):
                disp = disparity_for(c, ki, s)
                left, right = stereo_pair(base, int(round(DISPARITY_SHIFT[disp] * scale)))
                ref_l, ref_r = img_dir / f"{cid}_{disp}_L.png", img_dir / f"{cid}_{disp}_R.png"
                if (cid, disp) not in refs_written:
                    save_image(ref_l, left)
                    save_image(ref_r, right)
                    refs_written.add((cid, disp))
                for sym, (sl, sr) in (("symmetric", (s, s)), ("asymmetric", ASYM_PAIRS[s])):
                    tag = f"{cid}_{disp}_{kind}{s}_{sym[:4]}"
                    dl, dr = img_dir / f"{tag}_L.png", img_dir / f"{tag}_R.png"
                    save_image(dl, distort(left, kind, sl))
                    save_image(dr, distort(right, kind, sr))
                    q = quality_mos(sl, sr)
                    entries.append(ManifestEntry(cid, str(ref_l), str(ref_r), str(dl), str(dr),
                                                 round(q, 4), round(qoe_mos(q, disp), 4), sym, kind, disp))
    manifest = root / "manifest.csv"
    write_manifest(entries, manifest, relative_to=root)
    return manifest


def full_layout() -> list[tuple[str, int, int]]:
    """Per-kind (symmetry, left level, right level) grid of a full-size study.

    Seven symmetric levels plus sixteen asymmetric pairings (one eye pristine,
    or a three-level gap) give 23 pairs per distortion kind, so two kinds
    and six contents make 84 symmetric and 192 asymmetric entries.
    """
    sym = [("symmetric", lv, lv) for lv in range(1, 8)]
    asym = []
    for lv in range(1, 5):
        asym += [("asymmetric", 0, lv), ("asymmetric", lv, 0),
                 ("asymmetric", lv, lv + 3), ("asymmetric", lv + 3, lv)]
    return sym + asym


def write_layout_manifest(root, n_contents: int = 6) -> Path:
    """Write a manifest for the full-size layout without rendering any images.

    Image paths point under ``root/images``; MOS values follow the same
    monotone rule as :func:`quality_mos`, spread over seven levels.
    """
    root = Path(root)
    entries = []
    for c in range(n_contents):
        cid = f"C{c + 1}"
        for ki, kind in enumerate(DISTORTIONS):
            for sym, sl, sr in full_layout():
                disp = ("zero", "medium", "large")[(c + ki) % 3]
                tag = f"images/{cid}_{kind}_{sl}{sr}"
                worse, better = sorted((sl * 2.7 / 7, sr * 2.7 / 7), reverse=True)
                q = 5.0 - worse if sl == sr else 5.0 - (0.65 * worse + 0.35 * better)
                entries.append(ManifestEntry(cid, f"images/{cid}_L.png", f"images/{cid}_R.png",
                                             f"{tag}_L.png", f"{tag}_R.png", round(q, 4),
                                             round(qoe_mos(q, disp), 4), sym, kind, disp))
    root.mkdir(parents=True, exist_ok=True)
    manifest = root / "manifest.csv"
    write_manifest(entries, manifest)
    return manifest
