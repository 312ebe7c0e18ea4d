"""Binocular rivalry weighting from local-variance energy maps."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import DegenerateEnergyError, DegenerateReferenceError, InvalidInputError, InvalidParameterError

WINDOW = 11
SIGMA = 1.5
REF_ENERGY_EPS = 1e-8


def gaussian_window(size: int = WINDOW, sigma: float = SIGMA) -> np.ndarray:
    ax = np.arange(size) - (size - 1) / 2
    g = np.exp(-ax ** 2 / (2 * sigma ** 2))
    w = np.outer(g, g)
    return w / w.sum()


def local_energy(img) -> np.ndarray:
    """Local variance under an 11x11 Gaussian window (sigma 1.5), symmetric borders."""
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 2 or min(img.shape) < WINDOW:
        raise InvalidInputError(f"local_energy needs a 2-D image with side >= {WINDOW}, got {img.shape}")
    # variance is shift invariant; centring keeps flat regions at exactly zero
    img = img - img.mean()
    w = gaussian_window()
    mu = ndimage.correlate(img, w, mode="reflect")
    mu2 = ndimage.correlate(img * img, w, mode="reflect")
    return np.maximum(mu2 - mu * mu, 0.0)


@dataclass(frozen=True)
class EnergyMaps:
    e_dl: np.ndarray
    e_rl: np.ndarray
    e_dr: np.ndarray
    e_rr: np.ndarray

    @classmethod
    def from_viewports(cls, ref_left, ref_right, dist_left, dist_right) -> "EnergyMaps":
        return cls(local_energy(dist_left), local_energy(ref_left),
                   local_energy(dist_right), local_energy(ref_right))

    def swapped(self) -> "EnergyMaps":
        return EnergyMaps(self.e_dr, self.e_rr, self.e_dl, self.e_rl)


def dominance(e_dist: np.ndarray, e_ref: np.ndarray) -> float:
    """Energy-weighted mean of the distorted/reference energy ratio.

    Pixels whose reference energy is below ``REF_ENERGY_EPS`` are left out
    of both sums.
    """
    mask = e_ref >= REF_ENERGY_EPS
    if not mask.any():
        raise DegenerateReferenceError("reference energy map is identically zero")
    ed = e_dist[mask]
    den = ed.sum()
    if den == 0.0:
        return 0.0
    return float(np.sum(ed * (ed / e_ref[mask])) / den)


def rivalry_weights(energy: EnergyMaps) -> tuple[float, float]:
    shapes = {m.shape for m in (energy.e_dl, energy.e_rl, energy.e_dr, energy.e_rr)}
    if len(shapes) != 1:
        raise InvalidInputError(f"energy maps differ in shape: {sorted(shapes)}")
    g_l = dominance(energy.e_dl, energy.e_rl)
    g_r = dominance(energy.e_dr, energy.e_rr)
    return weights_from_dominance(g_l, g_r)


def weights_from_dominance(g_l: float, g_r: float) -> tuple[float, float]:
    gl2, gr2 = g_l * g_l, g_r * g_r
    if gl2 + gr2 == 0.0:
        raise DegenerateEnergyError("both eyes have zero dominance")
    w_l = gl2 / (gl2 + gr2)
    # computing w_r the same way keeps eye swaps exact; the sum is 1 to within an ulp
    w_r = gr2 / (gl2 + gr2)
    return w_l, w_r


def fuse_viewport(q_left: float, q_right: float, w_left: float, w_right: float) -> float:
    if abs(w_left + w_right - 1.0) > 1e-9:
        raise InvalidParameterError(f"weights must sum to 1, got {w_left} + {w_right}")
    return w_left * q_left + w_right * q_right


@dataclass(frozen=True)
class BinocularViewportQuality:
    q_left: float
    q_right: float
    g_left: float
    g_right: float
    w_left: float
    w_right: float
    q_fused: float


def binocular_quality(q_left: float, q_right: float, energy: EnergyMaps) -> BinocularViewportQuality:
    """Fuse per-eye qualities; degenerate energy falls back to equal weights with a warning."""
    try:
        g_l = dominance(energy.e_dl, energy.e_rl)
        g_r = dominance(energy.e_dr, energy.e_rr)
        w_l, w_r = weights_from_dominance(g_l, g_r)
    except DegenerateEnergyError as exc:
        warnings.warn(f"{exc}; using equal eye weights", RuntimeWarning, stacklevel=2)
        g_l = g_r = float("nan")
        w_l = w_r = 0.5
    return BinocularViewportQuality(q_left, q_right, g_l, g_r, w_l, w_r,
                                    fuse_viewport(q_left, q_right, w_l, w_r))
