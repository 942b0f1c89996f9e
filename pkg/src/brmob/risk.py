"""Analytical and empirical risk functionals.

Gaussian value-at-risk and entropic value-at-risk in closed form,
sub-Gaussian EVaR bounds, standard-normal and chi-square quantiles, and
order-statistic VaR / Rockafellar-Uryasev CVaR estimators for samples.
All functions are pure; risk levels follow the cost orientation (larger
values are worse, quantiles are taken from the upper tail).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import chdtri, ndtri

from .errors import EmptySample, OutOfRange


@dataclass(frozen=True)
class RiskLevel:
    """Quantile level ``alpha`` in [0, 1)."""

    alpha: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha < 1.0:
            raise OutOfRange(f"risk level must lie in [0, 1), got {self.alpha}")


@dataclass(frozen=True)
class GaussianScalar:
    """Scalar Gaussian with mean and nonnegative standard deviation."""

    mean: float
    std: float

    def __post_init__(self) -> None:
        if not self.std >= 0.0:
            raise OutOfRange(f"std must be nonnegative, got {self.std}")


def normal_quantile(p: float) -> float:
    """Quantile of the standard normal distribution.

    Delegates to ``scipy.special.ndtri`` (machine-precision inverse CDF);
    the test suite checks it against an independent bisection oracle.
    """
    if not 0.0 < p < 1.0:
        raise OutOfRange(f"quantile level must lie in (0, 1), got {p}")
    return float(ndtri(p))


def var_gaussian(g: GaussianScalar, level: RiskLevel) -> float:
    """Value-at-risk ``mean + std * z_alpha`` of a Gaussian cost."""
    if g.std == 0.0:
        return g.mean
    if level.alpha == 0.0:
        return -math.inf
    return g.mean + g.std * normal_quantile(level.alpha)


def evar_gaussian(g: GaussianScalar, level: RiskLevel) -> float:
    """Entropic value-at-risk ``mean + std * sqrt(-2 log(1 - alpha))``."""
    return g.mean + g.std * math.sqrt(-2.0 * math.log1p(-level.alpha))


def subgaussian_evar_bound(mean: float, variance_factor: float, level: RiskLevel) -> float:
    """EVaR upper bound for a sub-Gaussian variable with the given variance factor.

    Coincides with :func:`evar_gaussian` when the variable is exactly Gaussian
    with variance equal to the factor.
    """
    if variance_factor < 0.0:
        raise OutOfRange(f"variance factor must be nonnegative, got {variance_factor}")
    return mean + math.sqrt(variance_factor) * math.sqrt(-2.0 * math.log1p(-level.alpha))


def chi2_quantile(dof: int, p: float) -> float:
    """Quantile of the chi-square distribution with ``dof`` degrees of freedom."""
    if dof < 1 or int(dof) != dof:
        raise OutOfRange(f"degrees of freedom must be a positive integer, got {dof}")
    if not 0.0 < p < 1.0:
        raise OutOfRange(f"quantile level must lie in (0, 1), got {p}")
    return float(chdtri(dof, 1.0 - p))


def _order_statistic_index(alpha: float, n: int) -> int:
    # ceil(alpha * n) in exact arithmetic; the 1e-9 backoff absorbs float
    # representation error in alpha * n (e.g. 0.9 * 10 -> 9.000000000000002).
    return min(max(math.ceil(alpha * n - 1e-9), 1), n)


def empirical_var(samples: np.ndarray, level: RiskLevel) -> float:
    """Empirical VaR as the ascending order statistic at index ``ceil(alpha*N)``.

    The index is 1-based and clamped to [1, N]; this is the conservative
    (upper) convention for cost samples.
    """
    arr = np.asarray(samples, dtype=float).ravel()
    if arr.size == 0:
        raise EmptySample("empirical VaR of an empty sample")
    idx = _order_statistic_index(level.alpha, arr.size)
    return float(np.partition(arr, idx - 1)[idx - 1])


def empirical_cvar(samples: np.ndarray, level: RiskLevel) -> float:
    """Empirical CVaR via the Rockafellar-Uryasev representation.

    Minimizes ``z + mean(max(x - z, 0)) / (1 - alpha)`` exactly; the
    piecewise-linear objective attains its minimum at a sample point, so
    only those candidates are scanned.
    """
    arr = np.sort(np.asarray(samples, dtype=float).ravel())
    if arr.size == 0:
        raise EmptySample("empirical CVaR of an empty sample")
    n = arr.size
    # suffix[i] = sum of arr[i:], so mean(max(x - arr[i], 0)) uses arr[i+1:].
    suffix = np.concatenate([np.cumsum(arr[::-1])[::-1], [0.0]])
    tail = suffix[1:] - (n - 1 - np.arange(n)) * arr
    values = arr + tail / ((1.0 - level.alpha) * n)
    return float(np.min(values))
