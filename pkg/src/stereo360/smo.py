"""Sequential minimal optimisation for the epsilon-SVR dual.

The dual is written over ``2n`` variables ``a = [alpha; alpha*]`` with labels
``y = [+1; -1]``::

    min 1/2 a^T Q a + p^T a   s.t.  y^T a = 0,  0 <= a <= C

where ``Q_st = y_s y_t K(s mod n, t mod n)`` and ``p = [eps - z; eps + z]``.
Working pairs are chosen with second-order information (Fan, Chen & Lin,
2005); shrinking is not used so runs are reproducible.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

TAU = 1e-12


@dataclass
class SmoResult:
    coef: np.ndarray        # alpha - alpha*, length n
    alpha: np.ndarray       # length 2n
    bias: float
    iterations: int
    converged: bool
    objective: float


def rbf_kernel(a: np.ndarray, b: np.ndarray, gamma: float) -> np.ndarray:
    sq = (np.sum(a * a, axis=1)[:, None] + np.sum(b * b, axis=1)[None, :] - 2.0 * a @ b.T)
    return np.exp(-gamma * np.maximum(sq, 0.0))


def solve_epsilon_svr(kernel: np.ndarray, targets: np.ndarray, C: float, epsilon: float,
                      tol: float = 1e-3, max_iter: int = 10_000_000) -> SmoResult:
    """Solve the epsilon-SVR dual for a precomputed kernel matrix."""
    z = np.asarray(targets, dtype=np.float64)
    n = z.shape[0]
    K = np.asarray(kernel, dtype=np.float64)
    y = np.concatenate([np.ones(n), -np.ones(n)])
    idx = np.concatenate([np.arange(n), np.arange(n)])
    qd = np.diag(K)[idx]
    p = np.concatenate([epsilon - z, epsilon + z])
    a = np.zeros(2 * n)
    grad = p.copy()

    def q_col(i: int) -> np.ndarray:
        return y[i] * y * K[idx[i], idx]

    it = 0
    converged = False
    while it < max_iter:
        yg = y * grad
        up = ((y > 0) & (a < C)) | ((y < 0) & (a > 0))
        low = ((y > 0) & (a > 0)) | ((y < 0) & (a < C))
        if not up.any() or not low.any():
            converged = True
            break
        cand = np.where(up, -yg, -np.inf)
        i = int(np.argmax(cand))
        g_max = cand[i]
        g_max2 = np.max(np.where(low, yg, -np.inf))
        if g_max + g_max2 < tol:
            converged = True
            break
        grad_diff = g_max + yg
        qi = q_col(i)
        quad = qd[i] + qd - 2.0 * y[i] * y * qi
        quad = np.where(quad > 0, quad, TAU)
        ok = low & (grad_diff > 0)
        obj = np.where(ok, -(grad_diff * grad_diff) / quad, np.inf)
        j = int(np.argmin(obj))
        if not np.isfinite(obj[j]):
            converged = True
            break
        qj = q_col(j)
        ai_old, aj_old = a[i], a[j]
        _update_pair(a, grad, y, qd, qi, i, j, C)
        d_i, d_j = a[i] - ai_old, a[j] - aj_old
        grad += qi * d_i + qj * d_j
        it += 1
    if not converged:
        warnings.warn(f"SMO hit the iteration cap ({max_iter})", RuntimeWarning, stacklevel=2)

    bias = -_rho(a, grad, y, C)
    coef = a[:n] - a[n:]
    objective = 0.5 * float(coef @ K @ coef) + float(epsilon * a.sum() - z @ coef)
    return SmoResult(coef, a, bias, it, converged, objective)


def _update_pair(a, grad, y, qd, qi, i, j, C):
    q_ij = qi[j]
    if y[i] != y[j]:
        quad = qd[i] + qd[j] + 2.0 * q_ij
        if quad <= 0:
            quad = TAU
        delta = (-grad[i] - grad[j]) / quad
        diff = a[i] - a[j]
        a[i] += delta
        a[j] += delta
        if diff > 0:
            if a[j] < 0:
                a[j] = 0.0
                a[i] = diff
        elif a[i] < 0:
            a[i] = 0.0
            a[j] = -diff
        if diff > 0:
            if a[i] > C:
                a[i] = C
                a[j] = C - diff
        elif a[j] > C:
            a[j] = C
            a[i] = C + diff
    else:
        quad = qd[i] + qd[j] - 2.0 * q_ij
        if quad <= 0:
            quad = TAU
        delta = (grad[i] - grad[j]) / quad
        total = a[i] + a[j]
        a[i] -= delta
        a[j] += delta
        if total > C:
            if a[i] > C:
                a[i] = C
                a[j] = total - C
        elif a[j] < 0:
            a[j] = 0.0
            a[i] = total
        if total > C:
            if a[j] > C:
                a[j] = C
                a[i] = total - C
        elif a[i] < 0:
            a[i] = 0.0
            a[j] = total


def _rho(a, grad, y, C) -> float:
    yg = y * grad
    at_upper = a >= C
    at_lower = a <= 0
    free = ~(at_upper | at_lower)
    if free.any():
        return float(yg[free].mean())
    ub_mask = (at_upper & (y < 0)) | (at_lower & (y > 0))
    lb_mask = (at_upper & (y > 0)) | (at_lower & (y < 0))
    ub = yg[ub_mask].min() if ub_mask.any() else np.inf
    lb = yg[lb_mask].max() if lb_mask.any() else -np.inf
    return float((ub + lb) / 2)
