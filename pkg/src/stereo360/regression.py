"""Feature assembly and RBF epsilon-SVR training/prediction."""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import IncompleteFeaturesError, InvalidInputError, InvalidParameterError, ProvenanceError
from .smo import rbf_kernel, solve_epsilon_svr

MODEL_VERSION = 1
ASSEMBLIES = ("WQA", "QA", "QC")
LAYOUTS = ("quality", "quality+depth")
C_GRID = tuple(2.0 ** k for k in range(-3, 8))
GAMMA_GRID = tuple(2.0 ** k for k in range(-9, 2))


def assemble_features(viewports: Sequence, layout: str = "quality", assembly: str = "WQA",
                      depth_kind: str = "entropy", n_expected: int | None = None) -> np.ndarray:
    """Per-image feature vector in canonical viewpoint order.

    ``viewports`` items expose ``q_left``, ``q_right``, ``q_fused`` and a
    ``depth`` mapping keyed by feature kind (see ``pipeline.ViewportFeatures``).
    """
    if layout not in LAYOUTS:
        raise InvalidParameterError(f"unknown layout {layout!r}")
    if assembly not in ASSEMBLIES:
        raise InvalidParameterError(f"unknown assembly {assembly!r}")
    if n_expected is not None and len(viewports) != n_expected:
        raise IncompleteFeaturesError(f"expected {n_expected} viewports, got {len(viewports)}")
    if any(v is None for v in viewports):
        raise IncompleteFeaturesError("missing viewport entries")
    if assembly == "WQA":
        quality = [v.q_fused for v in viewports]
    elif assembly == "QA":
        quality = [(v.q_left + v.q_right) / 2 for v in viewports]
    else:
        quality = [q for v in viewports for q in (v.q_left, v.q_right)]
    if layout == "quality":
        return np.asarray(quality, dtype=np.float64)
    try:
        depth = [v.depth[depth_kind] for v in viewports]
    except KeyError as exc:
        raise IncompleteFeaturesError(f"missing depth feature {depth_kind!r}") from exc
    return np.asarray(quality + depth, dtype=np.float64)


def feature_length(n_viewports: int, layout: str, assembly: str) -> int:
    q = 2 * n_viewports if assembly == "QC" else n_viewports
    return q + (n_viewports if layout == "quality+depth" else 0)


@dataclass
class MinMaxScaler:
    lo: np.ndarray
    hi: np.ndarray

    @classmethod
    def fit(cls, X: np.ndarray) -> "MinMaxScaler":
        lo, hi = X.min(axis=0), X.max(axis=0)
        flat = np.flatnonzero(hi == lo)
        if flat.size:
            warnings.warn(f"constant feature dimension(s) {flat.tolist()} scaled to 0",
                          RuntimeWarning, stacklevel=3)
        return cls(lo, hi)

    def transform(self, X: np.ndarray) -> np.ndarray:
        span = self.hi - self.lo
        safe = np.where(span > 0, span, 1.0)
        out = (X - self.lo) / safe
        return np.where(span > 0, out, 0.0)


@dataclass
class SvrModel:
    support_vectors: np.ndarray
    coefficients: np.ndarray
    bias: float
    gamma: float
    C: float
    epsilon: float
    scaler: MinMaxScaler
    provenance: dict = field(default_factory=dict)

    @property
    def n_features(self) -> int:
        return self.scaler.lo.shape[0]

    def decision(self, Xs: np.ndarray) -> np.ndarray:
        if self.support_vectors.shape[0] == 0:
            return np.full(Xs.shape[0], self.bias)
        k = rbf_kernel(Xs, self.support_vectors, self.gamma)
        return k @ self.coefficients + self.bias

    def to_dict(self) -> dict:
        return {
            "version": MODEL_VERSION,
            "provenance": self.provenance,
            "scaling": {"min": self.scaler.lo.tolist(), "max": self.scaler.hi.tolist()},
            "svr": {
                "C": self.C,
                "gamma": self.gamma,
                "epsilon": self.epsilon,
                "bias": self.bias,
                "support_vectors": self.support_vectors.tolist(),
                "coefficients": self.coefficients.tolist(),
            },
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SvrModel":
        if d.get("version") != MODEL_VERSION:
            raise ProvenanceError(f"unsupported model version {d.get('version')!r}")
        svr = d["svr"]
        n = len(d["scaling"]["min"])
        sv = np.asarray(svr["support_vectors"], dtype=np.float64).reshape(-1, n)
        return cls(sv, np.asarray(svr["coefficients"], dtype=np.float64), float(svr["bias"]),
                   float(svr["gamma"]), float(svr["C"]), float(svr["epsilon"]),
                   MinMaxScaler(np.asarray(d["scaling"]["min"], dtype=np.float64),
                                np.asarray(d["scaling"]["max"], dtype=np.float64)),
                   d.get("provenance", {}))

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1) + "\n"

    def save(self, path) -> None:
        Path(path).write_text(self.dumps())

    @classmethod
    def load(cls, path) -> "SvrModel":
        return cls.from_dict(json.loads(Path(path).read_text()))


def _check_xy(X, y=None):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise InvalidInputError(f"feature matrix must be 2-D, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise InvalidInputError("non-finite feature values")
    if y is None:
        return X
    y = np.asarray(y, dtype=np.float64).ravel()
    if y.shape[0] != X.shape[0]:
        raise InvalidInputError(f"{X.shape[0]} samples but {y.shape[0]} targets")
    if not np.all(np.isfinite(y)):
        raise InvalidInputError("non-finite targets")
    if X.shape[0] < 2:
        raise InvalidInputError("need at least 2 training samples")
    return X, y


def train(X, y, C: float = 1.0, gamma: float | None = None, epsilon: float = 0.1,
          tol: float = 1e-3, provenance: dict | None = None) -> SvrModel:
    """Fit an RBF epsilon-SVR on min-max scaled features.

    ``gamma`` defaults to ``1 / n_features``.
    """
    X, y = _check_xy(X, y)
    if C <= 0 or epsilon < 0:
        raise InvalidParameterError(f"need C > 0 and epsilon >= 0, got C={C}, epsilon={epsilon}")
    if gamma is None:
        gamma = 1.0 / X.shape[1]
    scaler = MinMaxScaler.fit(X)
    Xs = scaler.transform(X)
    res = solve_epsilon_svr(rbf_kernel(Xs, Xs, gamma), y, C, epsilon, tol=tol)
    sv = np.flatnonzero(res.coef != 0.0)
    return SvrModel(Xs[sv], res.coef[sv], res.bias, float(gamma), float(C), float(epsilon),
                    scaler, dict(provenance or {}))


def predict(model: SvrModel, X, provenance: dict | None = None) -> np.ndarray:
    """Decision values for one feature vector (returns a float) or a matrix."""
    if provenance is not None:
        check_provenance(model.provenance, provenance)
    single = np.ndim(X) == 1
    X = np.asarray(X, dtype=np.float64)
    X = X[None, :] if single else _check_xy(X)
    if X.shape[1] != model.n_features:
        raise ProvenanceError(f"model expects {model.n_features} features, got {X.shape[1]}")
    out = model.decision(model.scaler.transform(X))
    return float(out[0]) if single else out


PROVENANCE_KEYS = ("n0", "viewport_size", "fov", "fsim_flags", "layout", "assembly", "entropy_base",
                   "depth_kind")


def check_provenance(trained: dict, requested: dict) -> None:
    for key in PROVENANCE_KEYS:
        if key in trained and key in requested and trained[key] != requested[key]:
            raise ProvenanceError(
                f"pipeline mismatch on {key!r}: model has {trained[key]!r}, run has {requested[key]!r}")


def kfold_indices(n: int, k: int = 5, seed: int = 0) -> list[np.ndarray]:
    perm = np.random.default_rng(seed).permutation(n)
    return [f for f in np.array_split(perm, min(k, n)) if f.size]


def grid_search(X, y, epsilon: float = 0.1, folds: int = 5, seed: int = 0,
                C_grid: Sequence[float] = C_GRID, gamma_grid: Sequence[float] = GAMMA_GRID):
    """Pick (C, gamma) by k-fold mean squared error on the given training data only.

    Ties keep the first grid point in (C, gamma) order.
    """
    X, y = _check_xy(X, y)
    splits = kfold_indices(X.shape[0], folds, seed)
    best = (np.inf, None, None)
    for C in C_grid:
        for gamma in gamma_grid:
            sse = 0.0
            for test in splits:
                train_idx = np.setdiff1d(np.arange(X.shape[0]), test)
                if train_idx.size < 2:
                    continue
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", RuntimeWarning)
                    m = train(X[train_idx], y[train_idx], C=C, gamma=gamma, epsilon=epsilon)
                sse += float(np.sum((predict(m, X[test]) - y[test]) ** 2))
            mse = sse / X.shape[0]
            if mse < best[0]:
                best = (mse, C, gamma)
    return best[1], best[2], best[0]
