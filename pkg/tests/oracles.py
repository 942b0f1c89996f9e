"""Independent oracles the tests check the library against.

Everything here deliberately avoids the code paths under test: quantiles
come from bisection on stdlib/mpmath special functions, optimizers from
exhaustive simplex grid search, and risk functionals from direct
enumeration.
"""

from __future__ import annotations

import math
from typing import Callable

import mpmath
import numpy as np


def bisect_normal_quantile(p: float, tol: float = 1e-12) -> float:
    """Standard normal quantile by bisection on the erf-based CDF."""

    def cdf(x: float) -> float:
        return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))

    lo, hi = -40.0, 40.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if cdf(mid) < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def bisect_chi2_quantile(dof: int, p: float, tol: float = 1e-11) -> float:
    """Chi-square quantile by bisection on the regularized lower gamma CDF."""

    def cdf(x: float) -> float:
        return float(mpmath.gammainc(dof / 2.0, 0, x / 2.0, regularized=True))

    lo, hi = 0.0, 10.0 * dof + 200.0
    while hi - lo > tol * max(1.0, lo):
        mid = 0.5 * (lo + hi)
        if cdf(mid) < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def simplex_grid(k: int, step: float) -> np.ndarray:
    """All points of the k-simplex on a grid of the given step (k <= 3)."""
    if k == 1:
        return np.array([[1.0]])
    n = int(round(1.0 / step))
    if k == 2:
        p = np.linspace(0.0, 1.0, n + 1)
        return np.column_stack([p, 1.0 - p])
    if k == 3:
        i, j = np.meshgrid(np.arange(n + 1), np.arange(n + 1), indexing="ij")
        keep = (i + j) <= n
        p1 = i[keep] * step
        p2 = j[keep] * step
        p3 = np.clip(1.0 - p1 - p2, 0.0, 1.0)
        return np.column_stack([p1, p2, p3])
    raise ValueError("grid oracle supports k <= 3 only")


def _box_grid(center: np.ndarray, half_width: float, step: float) -> np.ndarray:
    """Simplex points near ``center`` on a fine grid."""
    k = center.size
    if k == 1:
        return np.array([[1.0]])
    n = int(round(2 * half_width / step))
    offsets = np.linspace(-half_width, half_width, n + 1)
    if k == 2:
        p = np.clip(center[0] + offsets, 0.0, 1.0)
        return np.column_stack([p, 1.0 - p])
    p1 = np.clip(center[0] + offsets, 0.0, 1.0)
    p2 = np.clip(center[1] + offsets, 0.0, 1.0)
    g1, g2 = np.meshgrid(p1, p2, indexing="ij")
    keep = (g1 + g2) <= 1.0 + 1e-12
    a = g1[keep]
    b = g2[keep]
    return np.column_stack([a, b, np.clip(1.0 - a - b, 0.0, 1.0)])


def grid_minimize(
    objective: Callable[[np.ndarray], np.ndarray],
    k: int,
    step: float = 1e-3,
    refine_step: float = 1e-5,
) -> tuple[float, np.ndarray]:
    """Exhaustive simplex grid search with local refinement.

    ``objective`` maps an (n, k) block of simplex points to n values.
    """
    points = simplex_grid(k, step)
    values = objective(points)
    best = int(np.argmin(values))
    center = points[best]
    fine = _box_grid(center, 2.0 * step, refine_step)
    fine_values = objective(fine)
    fine_best = int(np.argmin(fine_values))
    if fine_values[fine_best] < values[best]:
        return float(fine_values[fine_best]), fine[fine_best]
    return float(values[best]), center


def minmax_objective_batch(
    points: np.ndarray, arm_values: np.ndarray, loadings: np.ndarray, nu: np.ndarray
) -> np.ndarray:
    """Vectorized min-max-norm objective over a block of policies."""
    means = arm_values[None, :] - (points @ arm_values)[:, None]
    proj = points @ loadings.T
    sq = (
        np.sum(loadings**2, axis=0)[None, :]
        - 2.0 * proj @ loadings
        + np.sum(proj**2, axis=1)[:, None]
    )
    devs = np.sqrt(np.clip(sq, 0.0, None))
    return np.max(means + nu[None, :] * devs, axis=1)


def cvar_objective_batch(
    points: np.ndarray, scenarios: np.ndarray, delta: float
) -> np.ndarray:
    """Vectorized scenario-CVaR objective (uniform probabilities)."""
    j = scenarios.shape[0]
    g = scenarios.max(axis=1)
    losses = g[None, :] - points @ scenarios.T
    m = min(max(math.ceil((1.0 - delta) * j - 1e-9), 1), j)
    var = np.partition(losses, m - 1, axis=1)[:, m - 1]
    tail = np.clip(losses - var[:, None], 0.0, None).mean(axis=1)
    return var + tail / delta


def worst_case_objective_batch(points: np.ndarray, scenarios: np.ndarray) -> np.ndarray:
    g = scenarios.max(axis=1)
    return np.max(g[None, :] - points @ scenarios.T, axis=1)


def hc_return_objective_batch(
    points: np.ndarray, arm_values: np.ndarray, loadings: np.ndarray, z: float
) -> np.ndarray:
    """Negated high-confidence return, so grid_minimize maximizes it."""
    returns = points @ arm_values
    norms = np.linalg.norm(points @ loadings.T, axis=1)
    return -(returns - z * norms)


def xi_objective_batch(
    points: np.ndarray, means: np.ndarray, stds: np.ndarray, delta: float
) -> np.ndarray:
    """Tail-split objective over unit-simplex points scaled by delta."""
    tails = np.clip(points * delta, 1e-300, None)
    with np.errstate(divide="ignore"):
        coeff = np.sqrt(2.0 * np.log(1.0 / tails))
    terms = means[None, :] + np.where(stds[None, :] > 0.0, stds[None, :] * coeff, 0.0)
    return np.max(terms, axis=1)
