"""Performance measures and the content-split cross-validation protocol."""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import expit
from scipy.stats import rankdata

from .errors import InvalidInputError, ProtocolError, UndefinedCorrelationError
from . import regression

log = logging.getLogger(__name__)

SUBSETS = ("all", "symmetric", "asymmetric")


def _pair(pred, mos, min_len: int):
    pred = np.asarray(pred, dtype=np.float64).ravel()
    mos = np.asarray(mos, dtype=np.float64).ravel()
    if pred.shape != mos.shape:
        raise InvalidInputError(f"length mismatch: {pred.size} vs {mos.size}")
    if pred.size < min_len:
        raise InvalidInputError(f"need at least {min_len} points, got {pred.size}")
    return pred, mos


def pearson(a, b) -> float:
    a, b = _pair(a, b, 2)
    da, db = a - a.mean(), b - b.mean()
    den = math.sqrt(float(da @ da) * float(db @ db))
    if den == 0.0:
        raise UndefinedCorrelationError("correlation undefined for a constant vector")
    return float(np.clip((da @ db) / den, -1.0, 1.0))


def srocc(pred, mos) -> float:
    """Spearman correlation with mid-ranks for ties."""
    pred, mos = _pair(pred, mos, 3)
    return pearson(rankdata(pred), rankdata(mos))


def rmse(a, b) -> float:
    a, b = _pair(a, b, 1)
    return float(np.sqrt(np.mean((a - b) ** 2)))


def plcc_rmse(mapped, mos) -> tuple[float, float]:
    return pearson(mapped, mos), rmse(mapped, mos)


def logistic5(x, beta) -> np.ndarray:
    b1, b2, b3, b4, b5 = beta
    x = np.asarray(x, dtype=np.float64)
    return b1 * (0.5 - expit(-b2 * (x - b3))) + b4 * x + b5


def _jacobian(x, beta) -> np.ndarray:
    b1, b2, b3, _, _ = beta
    s = expit(-b2 * (x - b3))        # 1 / (1 + exp(b2 (x - b3)))
    ds = s * (1.0 - s)
    return np.column_stack([0.5 - s, b1 * ds * (x - b3), -b1 * ds * b2, x, np.ones_like(x)])


@dataclass
class LogisticFit:
    beta: np.ndarray
    sse: float
    iterations: int
    converged: bool

    def __call__(self, x) -> np.ndarray:
        return logistic5(x, self.beta)


def fit_logistic5(pred, mos, max_iter: int = 1000, rtol: float = 1e-8) -> LogisticFit:
    """Least-squares fit of the five-parameter logistic by Levenberg-Marquardt.

    After the start point and after every accepted damped step the three
    linear parameters (amplitude, linear slope, offset) are re-solved exactly
    for the current (steepness, centre) pair; this never raises the residual.
    """
    x, z = _pair(pred, mos, 6)
    sd = x.std()
    if sd == 0.0:
        raise InvalidInputError("predictions are constant")
    beta = np.array([z.max() - z.min(), 1.0 / sd, x.mean(), 0.0, z.mean()])

    def sse_of(b):
        r = z - logistic5(x, b)
        return float(r @ r), r

    sse, _ = sse_of(beta)
    beta, sse = _polish_linear(x, z, beta, sse)
    sse, r = sse_of(beta)
    lam = 1e-3
    converged = False
    it = 0
    floor = 1e-30 * max(1.0, float(z @ z))
    while it < max_iter:
        it += 1
        if sse <= floor:
            converged = True
            break
        J = _jacobian(x, beta)
        jtj = J.T @ J
        d = np.diag(jtj).copy()
        d[d <= 0] = 1e-12 * max(1.0, d.max())
        accepted = False
        while lam < 1e16:
            A = np.vstack([J, np.diag(np.sqrt(lam * d))])
            rhs = np.concatenate([r, np.zeros(5)])
            step = np.linalg.lstsq(A, rhs, rcond=None)[0]
            cand = beta + step
            cand_sse, cand_r = sse_of(cand)
            if np.isfinite(cand_sse) and cand_sse < sse:
                accepted = True
                lam = max(lam / 10.0, 1e-12)
                break
            lam *= 10.0
        if not accepted:
            converged = True           # no descent direction left
            break
        cand, cand_sse = _polish_linear(x, z, cand, cand_sse)
        cand_sse, cand_r = sse_of(cand)
        rel = (sse - cand_sse) / max(sse, floor)
        beta, sse, r = cand, cand_sse, cand_r
        if rel < rtol:
            converged = True
            break

    if not converged:
        log.debug("logistic fit stopped after %d iterations without converging", it)
    return LogisticFit(beta, sse, it, converged)


def _polish_linear(x, z, beta, sse):
    basis = np.column_stack([0.5 - expit(-beta[1] * (x - beta[2])), x, np.ones_like(x)])
    coef = np.linalg.lstsq(basis, z, rcond=None)[0]
    cand = np.array([coef[0], beta[1], beta[2], coef[1], coef[2]])
    r = z - logistic5(x, cand)
    cand_sse = float(r @ r)
    if np.isfinite(cand_sse) and cand_sse <= sse:
        return cand, cand_sse
    return beta, sse


@dataclass
class EvaluationReport:
    plcc: float
    srocc: float
    rmse: float
    n: int
    subset: str = "all"
    beta: list = field(default_factory=list)
    logistic_converged: bool = True
    split: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return asdict(self)


def evaluate_predictions(pred, mos, subset: str = "all", split: dict | None = None) -> EvaluationReport:
    """SROCC on raw predictions; PLCC and RMSE after the logistic mapping."""
    pred, mos = _pair(pred, mos, 6)
    fit = fit_logistic5(pred, mos)
    mapped = fit(pred)
    p, e = plcc_rmse(mapped, mos)
    return EvaluationReport(p, srocc(pred, mos), e, int(pred.size), subset, fit.beta.tolist(),
                            fit.converged, dict(split or {}))


def subset_mask(symmetry: Sequence[str] | None, subset: str, n: int) -> np.ndarray:
    if subset not in SUBSETS:
        raise InvalidInputError(f"unknown subset {subset!r}")
    if subset == "all":
        return np.ones(n, dtype=bool)
    if symmetry is None:
        raise InvalidInputError("subset filtering needs symmetry tags")
    return np.asarray([s == subset for s in symmetry], dtype=bool)


def content_split(contents: Sequence[str], train_fraction: float, rng: np.random.Generator):
    """Random partition of distinct content ids into (train, test)."""
    uniq = sorted(set(contents))
    n_train = int(round(train_fraction * len(uniq)))
    n_train = min(max(n_train, 1), len(uniq) - 1)
    perm = rng.permutation(len(uniq))
    train_ids = sorted(uniq[i] for i in perm[:n_train])
    test_ids = sorted(uniq[i] for i in perm[n_train:])
    return train_ids, test_ids


@dataclass
class CrossValidationReport:
    target: str
    n_iter: int
    seed: int
    train_fraction: float
    median: dict
    iterations: dict          # subset -> list of per-iteration report dicts
    svr_params: dict
    failures: dict

    def as_dict(self) -> dict:
        return asdict(self)


def cross_validate(X, y, contents: Sequence[str], symmetry: Sequence[str] | None = None,
                   subsets: Sequence[str] = ("all",), n_iter: int = 1000, train_fraction: float = 0.67,
                   seed: int = 0, svr_params: dict | None = None, grid_search: bool = False,
                   target: str = "", workers: int = 1) -> CrossValidationReport:
    """Repeated random content-level splits; medians of PLCC/SROCC/RMSE per subset.

    Iteration ``i`` draws its split from ``default_rng([seed, i])`` so the
    result does not depend on ``workers``. Iterations whose correlation is
    undefined (e.g. constant predictions) are counted in ``failures`` and
    left out of the medians.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    contents = list(contents)
    if len(set(contents)) < 3:
        raise ProtocolError(f"need at least 3 distinct contents, got {len(set(contents))}")
    if X.shape[0] != len(contents) or y.shape[0] != len(contents):
        raise InvalidInputError("features, targets and content ids differ in length")
    masks = {s: subset_mask(symmetry, s, len(contents)) for s in subsets}
    params = dict(svr_params or {})

    def run(i: int):
        rng = np.random.default_rng([seed, i])
        train_ids, test_ids = content_split(contents, train_fraction, rng)
        tr = np.isin(contents, train_ids)
        te = ~tr
        p = dict(params)
        if grid_search:
            c, g, _ = regression.grid_search(X[tr], y[tr], epsilon=p.get("epsilon", 0.1))
            p.update(C=c, gamma=g)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            model = regression.train(X[tr], y[tr], **p)
            pred = regression.predict(model, X)
        split = {"iteration": i, "train": train_ids, "test": test_ids}
        out = {}
        for s, m in masks.items():
            sel = te & m
            try:
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", RuntimeWarning)
                    out[s] = evaluate_predictions(pred[sel], y[sel], s, split).as_dict()
            except (UndefinedCorrelationError, InvalidInputError) as exc:
                out[s] = {"error": str(exc), "split": split}
        return out

    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(workers) as ex:
            results = list(ex.map(run, range(n_iter)))
    else:
        results = [run(i) for i in range(n_iter)]

    iterations = {s: [r[s] for r in results] for s in subsets}
    median, failures = {}, {}
    for s, reps in iterations.items():
        ok = [r for r in reps if "error" not in r]
        failures[s] = len(reps) - len(ok)
        if ok:
            median[s] = {k: float(np.median([r[k] for r in ok])) for k in ("plcc", "srocc", "rmse")}
        else:
            median[s] = {k: float("nan") for k in ("plcc", "srocc", "rmse")}
    return CrossValidationReport(target, n_iter, seed, train_fraction, median, iterations,
                                 {**params, "grid_search": grid_search}, failures)
