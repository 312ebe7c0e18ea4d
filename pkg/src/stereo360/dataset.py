"""Manifest CSV, image loading and report/feature persistence."""
from __future__ import annotations

import csv
import hashlib
import json
import os
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import InvalidInputError, ManifestError
from .projection import StereoErpPair, check_erp

MANIFEST_COLUMNS = ("content_id", "ref_left", "ref_right", "dist_left", "dist_right",
                    "mos_quality", "mos_qoe", "symmetry", "distortion", "disparity")
OPTIONAL_COLUMNS = ("mos_depth",)
SYMMETRY_TAGS = ("symmetric", "asymmetric")
MOS_RANGE = (1.0, 5.0)
CACHE_ENV = "STEREO360_CACHE_DIR"


@dataclass(frozen=True)
class ManifestEntry:
    content_id: str
    ref_left: str
    ref_right: str
    dist_left: str
    dist_right: str
    mos_quality: float
    mos_qoe: float
    symmetry: str
    distortion: str = ""
    disparity: str = ""
    mos_depth: float | None = None

    def paths(self) -> tuple[str, str, str, str]:
        return self.ref_left, self.ref_right, self.dist_left, self.dist_right

    def target(self, name: str) -> float:
        if name == "quality":
            return self.mos_quality
        if name == "qoe":
            return self.mos_qoe
        raise InvalidInputError(f"unknown target {name!r}; expected 'quality' or 'qoe'")


def _mos(value: str, column: str, row: int, required: bool = True) -> float | None:
    if value is None or value.strip() == "":
        if required:
            raise ManifestError(f"row {row}: {column} is empty")
        return None
    try:
        v = float(value)
    except ValueError:
        raise ManifestError(f"row {row}: {column}={value!r} is not a number") from None
    lo, hi = MOS_RANGE
    if not lo <= v <= hi:
        raise ManifestError(f"row {row}: {column}={v} outside [{lo:g}, {hi:g}]")
    return v


def load_manifest(path, check_paths: bool = True) -> list[ManifestEntry]:
    """Parse and validate a manifest CSV.

    Relative image paths are resolved against the manifest's directory.
    Row numbers in errors count the header as row 1.
    """
    path = Path(path)
    base = path.parent
    entries: list[ManifestEntry] = []
    seen: set = set()
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in MANIFEST_COLUMNS if c not in header]
        if missing:
            raise ManifestError(f"{path}: missing column(s) {', '.join(missing)}")
        for row_no, row in enumerate(reader, start=2):
            cid = (row["content_id"] or "").strip()
            if not cid:
                raise ManifestError(f"row {row_no}: empty content_id")
            paths = {}
            for col in ("ref_left", "ref_right", "dist_left", "dist_right"):
                raw = (row[col] or "").strip()
                if not raw:
                    raise ManifestError(f"row {row_no}: {col} is empty")
                p = Path(raw)
                resolved = p if p.is_absolute() else base / p
                if check_paths and not resolved.is_file():
                    raise ManifestError(f"row {row_no}: {col} not readable: {resolved}")
                paths[col] = str(resolved)
            sym = (row["symmetry"] or "").strip().lower()
            if sym not in SYMMETRY_TAGS:
                raise ManifestError(f"row {row_no}: symmetry must be one of {SYMMETRY_TAGS}, got {sym!r}")
            key = (cid, paths["dist_left"], paths["dist_right"])
            if key in seen:
                raise ManifestError(f"row {row_no}: duplicate entry for content {cid!r}")
            seen.add(key)
            entries.append(ManifestEntry(
                cid, paths["ref_left"], paths["ref_right"], paths["dist_left"], paths["dist_right"],
                _mos(row["mos_quality"], "mos_quality", row_no), _mos(row["mos_qoe"], "mos_qoe", row_no),
                sym, (row["distortion"] or "").strip(), (row["disparity"] or "").strip(),
                _mos(row.get("mos_depth"), "mos_depth", row_no, required=False)))
    return entries


def write_manifest(entries, path, relative_to=None) -> None:
    """Write entries as CSV; paths are made relative to ``relative_to`` when given."""
    path = Path(path)
    cols = list(MANIFEST_COLUMNS)
    if any(e.mos_depth is not None for e in entries):
        cols.append("mos_depth")
    with path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for e in entries:
            row = asdict(e)
            if relative_to is not None:
                for col in ("ref_left", "ref_right", "dist_left", "dist_right"):
                    row[col] = os.path.relpath(row[col], relative_to)
            row = {k: ("" if row[k] is None else row[k]) for k in cols}
            for k in ("mos_quality", "mos_qoe", "mos_depth"):
                if k in row and row[k] != "":
                    row[k] = repr(float(row[k]))
            w.writerow(row)


def load_image(path) -> np.ndarray:
    """Decode an 8-bit PNG/PPM/PGM into a uint8 array (H, W) or (H, W, 3)."""
    try:
        with Image.open(path) as im:
            if im.mode in ("I;16", "I", "F"):
                raise InvalidInputError(f"{path}: only 8-bit images are supported (mode {im.mode})")
            if im.mode not in ("L", "RGB"):
                im = im.convert("RGB")
            return np.asarray(im, dtype=np.uint8)
    except (OSError, ValueError) as exc:
        raise InvalidInputError(f"cannot decode {path}: {exc}") from exc


def load_erp_pair(left_path, right_path, role: str = "distorted") -> StereoErpPair:
    left = load_image(left_path)
    right = load_image(right_path)
    for p, img in ((left_path, left), (right_path, right)):
        try:
            check_erp(img)
        except InvalidInputError as exc:
            raise InvalidInputError(f"{p}: {exc}") from None
    return StereoErpPair(left, right, role)


def save_image(path, img: np.ndarray) -> None:
    arr = np.clip(np.rint(np.asarray(img, dtype=np.float64)), 0, 255).astype(np.uint8)
    Image.fromarray(arr).save(path)


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, sort_keys=True, indent=1) + "\n")


def array_digest(*arrays: np.ndarray) -> str:
    h = hashlib.sha256()
    for a in arrays:
        a = np.ascontiguousarray(a)
        h.update(str((a.shape, a.dtype.str)).encode())
        h.update(a.tobytes())
    return h.hexdigest()


def provenance_digest(provenance: dict) -> str:
    return hashlib.sha256(json.dumps(provenance, sort_keys=True).encode()).hexdigest()


def cache_dir() -> Path | None:
    d = os.environ.get(CACHE_ENV)
    return Path(d) if d else None

