"""Feature-similarity (FSIM) index on luminance.

Phase congruency follows Kovesi's oriented log-Gabor formulation with the
noise compensation used by the FSIM reference code. Intensities are on the
0-255 scale; the stabilising constants assume it.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from functools import lru_cache

import numpy as np
from scipy import ndimage, signal

from .errors import InvalidInputError

SCHARR_X = np.array([[3.0, 0.0, -3.0], [10.0, 0.0, -10.0], [3.0, 0.0, -3.0]]) / 16.0
SCHARR_Y = SCHARR_X.T.copy()


@dataclass(frozen=True)
class FsimParams:
    scales: int = 4
    orientations: int = 4
    min_wavelength: float = 6.0
    mult: float = 2.0
    sigma_on_f: float = 0.55
    d_theta_on_sigma: float = 1.2
    k: float = 2.0
    noise_rescale: float = 1.7
    t1: float = 0.85
    t2: float = 160.0
    downsample: bool = True
    grad_boundary: str = "zero"
    epsilon: float = 1e-4

    @property
    def theta_sigma(self) -> float:
        return math.pi / self.orientations / self.d_theta_on_sigma

    def as_dict(self) -> dict:
        return asdict(self)


DEFAULT_PARAMS = FsimParams()


def _centered_range(n: int) -> np.ndarray:
    if n % 2:
        return np.arange(-(n - 1) / 2, (n - 1) / 2 + 1) / (n - 1)
    return np.arange(-n / 2, n / 2) / n


def lowpass_filter(shape: tuple[int, int], cutoff: float = 0.45, order: int = 15) -> np.ndarray:
    """Butterworth low-pass transfer function with DC at index (0, 0)."""
    rows, cols = shape
    x, y = np.meshgrid(_centered_range(cols), _centered_range(rows))
    radius = np.sqrt(x ** 2 + y ** 2)
    return np.fft.ifftshift(1.0 / (1.0 + (radius / cutoff) ** (2 * order)))


@dataclass(frozen=True)
class LogGaborBank:
    filters: np.ndarray         # (orientations, scales, rows, cols), DC at the corner
    spatial: np.ndarray         # real part of each filter's inverse FFT, power-rescaled
    em_n: np.ndarray            # per orientation: sum of squared smallest-scale filter
    sum_an2: np.ndarray         # per orientation
    sum_aiaj: np.ndarray        # per orientation


@lru_cache(maxsize=32)
def log_gabor_bank(shape: tuple[int, int], params: FsimParams = DEFAULT_PARAMS) -> LogGaborBank:
    rows, cols = shape
    x, y = np.meshgrid(_centered_range(cols), _centered_range(rows))
    radius = np.fft.ifftshift(np.sqrt(x ** 2 + y ** 2))
    theta = np.fft.ifftshift(np.arctan2(-y, x))
    radius[0, 0] = 1.0
    sintheta, costheta = np.sin(theta), np.cos(theta)
    lp = lowpass_filter(shape)

    radial = np.empty((params.scales, rows, cols))
    for s in range(params.scales):
        fo = 1.0 / (params.min_wavelength * params.mult ** s)
        lg = np.exp(-(np.log(radius / fo)) ** 2 / (2 * math.log(params.sigma_on_f) ** 2))
        lg *= lp
        lg[0, 0] = 0.0
        radial[s] = lg

    angular = np.empty((params.orientations, rows, cols))
    for o in range(params.orientations):
        angl = o * math.pi / params.orientations
        ds = sintheta * math.cos(angl) - costheta * math.sin(angl)
        dc = costheta * math.cos(angl) + sintheta * math.sin(angl)
        dtheta = np.abs(np.arctan2(ds, dc))
        angular[o] = np.exp(-dtheta ** 2 / (2 * params.theta_sigma ** 2))

    filters = angular[:, None] * radial[None, :]
    spatial = np.real(np.fft.ifft2(filters)) * math.sqrt(rows * cols)
    em_n = np.sum(filters[:, 0] ** 2, axis=(-2, -1))
    sum_an2 = np.sum(spatial ** 2, axis=(1, 2, 3))
    sum_aiaj = np.zeros(params.orientations)
    for si in range(params.scales - 1):
        for sj in range(si + 1, params.scales):
            sum_aiaj += np.sum(spatial[:, si] * spatial[:, sj], axis=(-2, -1))
    for arr in (filters, spatial, em_n, sum_an2, sum_aiaj):
        arr.flags.writeable = False
    return LogGaborBank(filters, spatial, em_n, sum_an2, sum_aiaj)


def _check_gray(img, min_side: int, name: str = "image") -> np.ndarray:
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 2:
        raise InvalidInputError(f"{name} must be a 2-D grayscale array, got shape {img.shape}")
    if min(img.shape) < min_side:
        raise InvalidInputError(f"{name} side must be >= {min_side}, got {img.shape}")
    return img


def phase_congruency(img, params: FsimParams = DEFAULT_PARAMS) -> np.ndarray:
    """Phase-congruency map in [0, 1], summed over all orientations."""
    img = _check_gray(img, 32)
    bank = log_gabor_bank(img.shape, params)
    eo = np.fft.ifft2(np.fft.fft2(img)[None, None] * bank.filters)
    even, odd = eo.real, eo.imag
    an = np.abs(eo)

    sum_e = even.sum(axis=1)
    sum_o = odd.sum(axis=1)
    x_energy = np.sqrt(sum_e ** 2 + sum_o ** 2) + params.epsilon
    mean_e = (sum_e / x_energy)[:, None]
    mean_o = (sum_o / x_energy)[:, None]
    energy = np.sum(even * mean_e + odd * mean_o - np.abs(even * mean_o - odd * mean_e), axis=1)

    energy_all = np.zeros(img.shape)
    for o in range(params.orientations):
        median_e2n = np.median(an[o, 0] ** 2)
        mean_e2n = -median_e2n / math.log(0.5)
        noise_power = mean_e2n / bank.em_n[o]
        noise_energy2 = 2 * noise_power * bank.sum_an2[o] + 4 * noise_power * bank.sum_aiaj[o]
        tau = math.sqrt(noise_energy2 / 2)
        threshold = tau * math.sqrt(math.pi / 2) + params.k * math.sqrt((2 - math.pi / 2) * tau ** 2)
        threshold /= params.noise_rescale
        energy_all += np.maximum(energy[o] - threshold, 0.0)
    an_all = an.sum(axis=(0, 1))
    return energy_all / (an_all + params.epsilon)


def gradient_magnitude(img, boundary: str = "zero") -> np.ndarray:
    """Scharr gradient magnitude. ``boundary`` is ``"zero"`` (reference behaviour) or ``"symmetric"``."""
    img = _check_gray(img, 3)
    if boundary == "symmetric":
        gx = ndimage.convolve(img, SCHARR_X, mode="reflect")
        gy = ndimage.convolve(img, SCHARR_Y, mode="reflect")
    elif boundary == "zero":
        gx = signal.convolve2d(img, SCHARR_X, mode="same", boundary="fill")
        gy = signal.convolve2d(img, SCHARR_Y, mode="same", boundary="fill")
    else:
        raise ValueError(f"unknown boundary mode {boundary!r}")
    return np.sqrt(gx ** 2 + gy ** 2)


def downsample_factor(shape: tuple[int, int]) -> int:
    # round half away from zero, as the reference does
    return max(1, int(math.floor(min(shape) / 256 + 0.5)))


def downsample(img: np.ndarray) -> np.ndarray:
    f = downsample_factor(img.shape)
    if f == 1:
        return img
    kernel = np.full((f, f), 1.0 / (f * f))
    return signal.convolve2d(img, kernel, mode="same")[::f, ::f]


def similarity(a: np.ndarray, b: np.ndarray, t: float) -> np.ndarray:
    return (2 * a * b + t) / (a ** 2 + b ** 2 + t)


def fsim_maps(ref, dist, params: FsimParams = DEFAULT_PARAMS):
    """Return ``(pc_ref, pc_dist, grad_ref, grad_dist)`` after optional downsampling."""
    ref = _check_gray(ref, 32, "reference")
    dist = _check_gray(dist, 32, "distorted")
    if ref.shape != dist.shape:
        raise InvalidInputError(f"shape mismatch: {ref.shape} vs {dist.shape}")
    if params.downsample:
        ref, dist = downsample(ref), downsample(dist)
    return (phase_congruency(ref, params), phase_congruency(dist, params),
            gradient_magnitude(ref, params.grad_boundary),
            gradient_magnitude(dist, params.grad_boundary))


def fsim(ref, dist, params: FsimParams = DEFAULT_PARAMS) -> float:
    """FSIM score of ``dist`` against ``ref``; 1.0 for identical inputs."""
    pc1, pc2, g1, g2 = fsim_maps(ref, dist, params)
    s_l = similarity(pc1, pc2, params.t1) * similarity(g1, g2, params.t2)
    pcm = np.maximum(pc1, pc2)
    total = pcm.sum()
    if total <= 0.0:
        # no structure anywhere: fall back to an unweighted mean
        return float(s_l.mean())
    return float(np.sum(s_l * pcm) / total)
