"""Equirectangular (ERP) images and rectilinear viewport rendering.

ERP convention: row 0 is the +90 latitude edge, column 0 the longitude-0
edge, ``width == 2 * height``. Continuous coordinates put pixel ``k`` on
``[k, k + 1)`` so its center is ``k + 0.5``.

Viewports use a gnomonic projection. Pixel ``(V // 2, V // 2)`` is the
optical center and the pixel pitch on the tangent plane is
``2 * tan(fov / 2) / V``.
"""
from __future__ import annotations

import math
from fractions import Fraction
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, InvalidParameterError
from .viewpoints import SphericalViewpoint

LUMA_WEIGHTS = (0.299, 0.587, 0.114)


@dataclass
class StereoErpPair:
    left: np.ndarray
    right: np.ndarray
    role: str = "distorted"

    def __post_init__(self):
        check_erp(self.left)
        check_erp(self.right)
        if self.left.shape != self.right.shape:
            raise InvalidInputError(
                f"left/right ERP shape mismatch: {self.left.shape} vs {self.right.shape}")
        if self.role not in ("reference", "distorted"):
            raise InvalidParameterError(f"unknown role {self.role!r}")


def check_erp(erp: np.ndarray) -> None:
    if erp.ndim not in (2, 3):
        raise InvalidInputError(f"ERP must be 2-D or 3-D, got shape {erp.shape}")
    h, w = erp.shape[:2]
    if w != 2 * h:
        raise InvalidInputError(f"ERP must have a 2:1 aspect ratio, got {w}x{h}")


def to_gray(img: np.ndarray) -> np.ndarray:
    """BT.601 luma as float64; grayscale input is passed through as float64."""
    img = np.asarray(img)
    if img.ndim == 2:
        return img.astype(np.float64)
    if img.ndim == 3 and img.shape[2] == 1:
        return img[..., 0].astype(np.float64)
    if img.ndim == 3 and img.shape[2] in (3, 4):
        rgb = img[..., :3].astype(np.float64)
        r, g, b = LUMA_WEIGHTS
        return r * rgb[..., 0] + g * rgb[..., 1] + b * rgb[..., 2]
    raise InvalidInputError(f"unsupported image shape {img.shape}")


def sphere_to_erp(lat, lon, width: int, height: int):
    """Fractional ERP coordinates of a direction; works on scalars or arrays.

    ``y`` is clamped to ``[0, height]``.
    """
    lon = np.mod(lon, 360.0)
    x = lon / 360.0 * width
    y = (90.0 - np.asarray(lat, dtype=np.float64)) / 180.0 * height
    y = np.clip(y, 0.0, height)
    if np.ndim(x) == 0:
        return float(x), float(y)
    return x, y


def _bilinear(erp: np.ndarray, col0: np.ndarray, fx: np.ndarray, yi: np.ndarray) -> np.ndarray:
    # col0 integer (pre-wrap), fx in [0, 1); yi continuous row index, clamped here
    h, w = erp.shape[:2]
    yi = np.clip(yi, 0.0, h - 1)
    r0 = np.floor(yi).astype(np.intp)
    r0 = np.minimum(r0, h - 2) if h > 1 else r0
    fy = yi - r0
    r1 = np.minimum(r0 + 1, h - 1)
    c0 = np.mod(col0, w)
    c1 = np.mod(col0 + 1, w)
    if erp.ndim == 3:
        fx = fx[..., None]
        fy = fy[..., None]
    top = erp[r0, c0] * (1.0 - fx) + erp[r0, c1] * fx
    bot = erp[r1, c0] * (1.0 - fx) + erp[r1, c1] * fx
    return top * (1.0 - fy) + bot * fy


def sample_erp(erp: np.ndarray, lat, lon) -> np.ndarray:
    """Bilinear ERP lookup at spherical coordinates (longitude wraps, latitude clamps)."""
    erp = np.asarray(erp, dtype=np.float64)
    h, w = erp.shape[:2]
    x, y = sphere_to_erp(lat, lon, w, h)
    xi = np.asarray(x, dtype=np.float64) - 0.5
    col0 = np.floor(xi)
    fx = xi - col0
    return _bilinear(erp, col0.astype(np.intp), fx, np.asarray(y, dtype=np.float64) - 0.5)


def viewport_directions(lat0: float, fov: float, size: int):
    """Latitude and longitude offset (degrees) of each viewport pixel for a view at ``(lat0, 0)``."""
    half = math.tan(math.radians(fov) / 2.0)
    pitch = 2.0 * half / size
    c = size // 2
    idx = np.arange(size, dtype=np.float64)
    u = (idx - c) * pitch              # rightwards
    v = (c - idx) * pitch              # upwards, indexed by row
    uu, vv = np.meshgrid(u, v)
    phi = math.radians(lat0)
    sp, cp = math.sin(phi), math.cos(phi)
    # forward (cp, 0, sp), right (0, 1, 0), up (-sp, 0, cp) in a z-up frame
    dx = cp - vv * sp
    dy = uu
    dz = sp + vv * cp
    lat = np.degrees(np.arctan2(dz, np.hypot(dx, dy)))
    dlon = np.degrees(np.arctan2(dy, dx))
    return lat, dlon


def extract_viewport(erp: np.ndarray, vp: SphericalViewpoint, fov: float = 90.0,
                     size: int | None = None) -> np.ndarray:
    """Render the rectilinear viewport of ``erp`` centred at ``vp``.

    ``size`` defaults to ``width // 4``. The result keeps the channel layout
    of the source and is float64.
    """
    erp = np.asarray(erp)
    check_erp(erp)
    if not 0.0 < fov < 180.0:
        raise InvalidParameterError(f"fov must be in (0, 180), got {fov}")
    h, w = erp.shape[:2]
    if size is None:
        size = w // 4
    if size < 16:
        raise InvalidParameterError(f"viewport size must be >= 16, got {size}")
    if not -90.0 <= vp.latitude <= 90.0:
        raise InvalidParameterError(f"latitude out of range: {vp.latitude}")

    lat, dlon = viewport_directions(vp.latitude, fov, size)
    # Whole-column part of the longitude offset, split off in exact rational
    # arithmetic so that rolling the ERP by k columns and moving the view by
    # k * 360 / width degrees gives bit-identical output.
    offset = Fraction(vp.longitude) % 360 * w / 360
    whole = math.floor(offset)
    rest = float(offset - whole)
    xi = dlon / 360.0 * w + rest - 0.5
    col0 = np.floor(xi)
    fx = xi - col0
    yi = (90.0 - lat) / 180.0 * h - 0.5
    return _bilinear(erp.astype(np.float64), col0.astype(np.intp) + whole, fx, yi)
