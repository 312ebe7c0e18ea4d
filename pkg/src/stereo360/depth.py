"""Depth-perception features of the distorted left/right difference map."""
from __future__ import annotations

import numpy as np

from .errors import InvalidInputError, InvalidParameterError

DEPTH_KINDS = ("entropy", "mean", "stddev")


def difference_map(dist_left, dist_right) -> np.ndarray:
    """``|left - right|`` on the 8-bit gray scale, as float64."""
    a = np.asarray(dist_left, dtype=np.float64)
    b = np.asarray(dist_right, dtype=np.float64)
    if a.shape != b.shape:
        raise InvalidInputError(f"shape mismatch: {a.shape} vs {b.shape}")
    return np.abs(a - b)


def gray_levels(diff: np.ndarray) -> np.ndarray:
    return np.clip(np.rint(diff), 0, 255).astype(np.int64)


def entropy(diff) -> float:
    """Shannon entropy in bits of the 256-bin histogram of rounded gray levels."""
    diff = np.asarray(diff)
    if diff.size == 0:
        raise InvalidInputError("empty difference map")
    counts = np.bincount(gray_levels(diff).ravel(), minlength=256)
    p = counts[counts > 0] / diff.size
    h = -np.sum(p * np.log2(p))
    return float(h) + 0.0  # turn -0.0 into 0.0


def diff_mean(diff) -> float:
    diff = np.asarray(diff, dtype=np.float64)
    if diff.size == 0:
        raise InvalidInputError("empty difference map")
    return float(diff.mean())


def diff_stddev(diff) -> float:
    diff = np.asarray(diff, dtype=np.float64)
    if diff.size == 0:
        raise InvalidInputError("empty difference map")
    return float(diff.std())


def depth_feature(diff, kind: str = "entropy") -> float:
    if kind == "entropy":
        return entropy(diff)
    if kind == "mean":
        return diff_mean(diff)
    if kind == "stddev":
        return diff_stddev(diff)
    raise InvalidParameterError(f"unknown depth feature {kind!r}; expected one of {DEPTH_KINDS}")
