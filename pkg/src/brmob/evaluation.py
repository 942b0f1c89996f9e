"""Monte-Carlo regret evaluation and the closed-form theoretical bounds.

Estimates the high-confidence Bayesian regret of any policy by sampling
the posterior, with a bootstrap standard error on the quantile, and
evaluates the data-coverage regret bounds for the bound minimizer and the
LCB baseline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bounds import Policy
from .errors import InsufficientSamples, OutOfRange
from .linalg import max_eigenvalue
from .posterior import BanditDomain, CoverageEstimate, GaussianPosterior, sample_posterior
from .risk import RiskLevel, empirical_var
from .rng import make_generator

#: Bootstrap resample count for the quantile standard error.
BOOTSTRAP_RESAMPLES = 50


@dataclass(frozen=True)
class RegretEstimate:
    """Empirical VaR of regret with its Monte-Carlo confidence scale."""

    var_estimate: float
    mc_std_error: float
    samples: int
    delta: float


def estimate_regret(
    domain: BanditDomain,
    post: GaussianPosterior,
    pi: Policy,
    delta: float,
    samples: int,
    seed: int,
) -> RegretEstimate:
    """Empirical (1-delta)-VaR of the regret of ``pi`` over posterior draws.

    The standard error is a nonparametric bootstrap over whole-sample
    resamples with a fixed sub-seed, so estimates are reproducible.
    """
    if not 0.0 < delta < 1.0:
        raise OutOfRange(f"delta must lie in (0, 1), got {delta}")
    if samples < 100.0 / delta:
        raise InsufficientSamples(
            f"need at least {math.ceil(100 / delta)} samples at delta={delta}"
        )
    draws = sample_posterior(post, samples, seed)
    rewards = draws @ domain.features
    regrets = rewards.max(axis=1) - rewards @ pi.weights
    level = RiskLevel(1.0 - delta)
    estimate = empirical_var(regrets, level)

    order = min(max(math.ceil((1.0 - delta) * samples - 1e-9), 1), samples)
    rng = make_generator(seed, "bootstrap")
    values = np.empty(BOOTSTRAP_RESAMPLES)
    for b in range(BOOTSTRAP_RESAMPLES):
        idx = rng.integers(0, samples, samples)
        values[b] = np.partition(regrets[idx], order - 1)[order - 1]
    return RegretEstimate(
        var_estimate=float(estimate),
        mc_std_error=float(np.std(values, ddof=1)),
        samples=samples,
        delta=delta,
    )


def _coverage_denominator(domain: BanditDomain, coverage: CoverageEstimate) -> float:
    prior_scale = 1.0 / max_eigenvalue(domain.prior_cov)
    return prior_scale + coverage.gamma * coverage.n / domain.noise_std**2


def brmob_coverage_bound(
    domain: BanditDomain, coverage: CoverageEstimate, delta: float, k: int, d: int
) -> float:
    """Coverage-based regret bound of the bound minimizer.

    ``2 sqrt(min(2 log(k/delta), 5 d log(1/delta)) / (lmax(S0)^-1 + gamma n / s^2))``;
    an uncovered arm (gamma = 0) yields an infinite sentinel.
    """
    if not 0.0 < delta < 1.0:
        raise OutOfRange(f"delta must lie in (0, 1), got {delta}")
    if coverage.gamma <= 0.0:
        return math.inf
    numerator = min(2.0 * math.log(k / delta), 5.0 * d * math.log(1.0 / delta))
    return 2.0 * math.sqrt(numerator / _coverage_denominator(domain, coverage))


def flatopo_coverage_bound(
    domain: BanditDomain, coverage: CoverageEstimate, delta: float, d: int
) -> float:
    """Coverage-based regret bound of the LCB baseline (larger by design)."""
    if not 0.0 < delta < 1.0:
        raise OutOfRange(f"delta must lie in (0, 1), got {delta}")
    if coverage.gamma <= 0.0:
        return math.inf
    numerator = 5.0 * d**2 * math.log(1.0 / delta)
    return 2.0 * math.sqrt(numerator / _coverage_denominator(domain, coverage))
