"""Analytical upper bounds on high-confidence Bayesian regret.

Projects the posterior onto per-arm regret Gaussians, then evaluates the
two closed-form bounds (tail-union over arms with an allocation of the
failure mass, and robust maximization over the credible ellipsoid), their
per-arm combination, and the resulting bound for any fixed policy.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, OutOfRange
from .linalg import SpdMatrix
from .posterior import BanditDomain, GaussianPosterior
from .risk import chi2_quantile, normal_quantile

#: Tail weights below this floor are lifted before quantile evaluation so
#: the union bound stays finite.
XI_FLOOR = 1e-9


class Family(str, enum.Enum):
    """Posterior tail family assumed by the bound coefficients."""

    GAUSSIAN = "gaussian"
    SUBGAUSSIAN = "subgaussian"


@dataclass(frozen=True)
class Policy:
    """Point on the k-simplex; the decision object every algorithm returns."""

    weights: np.ndarray

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or w.size < 1:
            raise DimensionMismatch("policy weights must be a nonempty vector")
        if np.any(w < -1e-12):
            raise OutOfRange(f"policy has a negative weight: {w.min()}")
        if abs(w.sum() - 1.0) > 1e-9:
            raise OutOfRange(f"policy weights sum to {w.sum()}, expected 1")
        w = w.copy()
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)

    @property
    def k(self) -> int:
        return self.weights.size

    @staticmethod
    def one_hot(k: int, arm: int) -> "Policy":
        """Deterministic policy on ``arm`` (0-based)."""
        w = np.zeros(k)
        w[arm] = 1.0
        return Policy(w)

    @staticmethod
    def uniform(k: int) -> "Policy":
        return Policy(np.full(k, 1.0 / k))


@dataclass(frozen=True)
class RegretProjection:
    """Per-arm mean and deviation of the regret-against-arm Gaussians."""

    means: np.ndarray
    stds: np.ndarray

    def __post_init__(self) -> None:
        means = np.asarray(self.means, dtype=float)
        stds = np.asarray(self.stds, dtype=float)
        if means.shape != stds.shape or means.ndim != 1:
            raise DimensionMismatch("means and stds must be equal-length vectors")
        if np.any(stds < 0.0):
            raise OutOfRange("projection deviations must be nonnegative")
        means = means.copy()
        stds = stds.copy()
        means.flags.writeable = False
        stds.flags.writeable = False
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "stds", stds)

    @property
    def k(self) -> int:
        return self.means.size


@dataclass(frozen=True)
class TailWeights:
    """Positive allocation of tail mass across arms.

    Two conventions appear: the union bound takes weights on the unit
    simplex (tail level ``delta * xi_a`` per arm), while the tightening
    program returns absolute tail levels summing to ``delta``.  Totals are
    validated at the point of use.
    """

    xi: np.ndarray

    def __post_init__(self) -> None:
        xi = np.asarray(self.xi, dtype=float)
        if xi.ndim != 1 or xi.size < 1:
            raise DimensionMismatch("tail weights must be a nonempty vector")
        if np.any(xi <= 0.0):
            raise OutOfRange("tail weights must be strictly positive")
        xi = xi.copy()
        xi.flags.writeable = False
        object.__setattr__(self, "xi", xi)

    @property
    def total(self) -> float:
        return float(self.xi.sum())

    @staticmethod
    def uniform(k: int) -> "TailWeights":
        return TailWeights(np.full(k, 1.0 / k))


@dataclass(frozen=True)
class BoundCoefficients:
    """Per-arm multipliers on the regret deviation."""

    nu: np.ndarray
    family: Family

    def __post_init__(self) -> None:
        nu = np.asarray(self.nu, dtype=float)
        if nu.ndim != 1 or nu.size < 1:
            raise DimensionMismatch("coefficients must be a nonempty vector")
        if np.any(nu <= 0.0):
            raise OutOfRange("coefficients must be strictly positive")
        nu = nu.copy()
        nu.flags.writeable = False
        object.__setattr__(self, "nu", nu)


@dataclass(frozen=True)
class CredibleEllipsoid:
    """Posterior ellipsoid covering the parameter with probability 1 - delta."""

    center: np.ndarray
    shape: SpdMatrix
    radius_sq: float

    @staticmethod
    def from_posterior(post: GaussianPosterior, delta: float) -> "CredibleEllipsoid":
        if not 0.0 < delta < 1.0:
            raise OutOfRange(f"delta must lie in (0, 1), got {delta}")
        return CredibleEllipsoid(
            center=post.mean,
            shape=post.cov,
            radius_sq=chi2_quantile(post.dim, 1.0 - delta),
        )


def regret_projection(
    domain: BanditDomain, post: GaussianPosterior, pi: Policy
) -> RegretProjection:
    """Per-arm Gaussian marginals of the regret of ``pi``.

    Arm ``a`` contributes mean ``mu.T Phi (e_a - pi)`` and deviation
    ``norm(Phi (e_a - pi))`` in the covariance-weighted norm, computed
    through the Cholesky factor.
    """
    if pi.k != domain.k or post.dim != domain.d:
        raise DimensionMismatch("policy/posterior dimensions do not match domain")
    phi = domain.features
    arm_values = phi.T @ post.mean
    means = arm_values - float(arm_values @ pi.weights)
    m = post.factor.lower.T @ phi
    stds = np.linalg.norm(m - (m @ pi.weights)[:, None], axis=0)
    return RegretProjection(means, stds)


def floor_tail_weights(xi: np.ndarray) -> np.ndarray:
    """Lift entries to the floor and renormalize so the total is preserved."""
    lifted = np.maximum(np.asarray(xi, dtype=float), XI_FLOOR)
    return lifted * (np.sum(xi) / lifted.sum())


def action_set_bound(proj: RegretProjection, delta: float, xi: TailWeights) -> float:
    """Tail-union regret bound for an allocation ``xi`` on the unit simplex.

    Evaluates ``max_a mean_a + std_a * z_{1 - delta * xi_a}`` with exact
    normal quantiles.
    """
    if not 0.0 < delta < 1.0:
        raise OutOfRange(f"delta must lie in (0, 1), got {delta}")
    if xi.xi.size != proj.k:
        raise DimensionMismatch("tail weights length does not match projection")
    if abs(xi.total - 1.0) > 1e-9:
        raise OutOfRange(f"tail weights must sum to 1, got {xi.total}")
    levels = 1.0 - delta * floor_tail_weights(xi.xi)
    coeffs = np.array([normal_quantile(p) for p in levels])
    return float(np.max(proj.means + proj.stds * coeffs))


def parameter_space_bound(proj: RegretProjection, delta: float, d: int) -> float:
    """Credible-ellipsoid regret bound ``max_a mean_a + std_a * sqrt(chi2_d(1-delta))``."""
    if not 0.0 < delta < 1.0:
        raise OutOfRange(f"delta must lie in (0, 1), got {delta}")
    radius = math.sqrt(chi2_quantile(d, 1.0 - delta))
    return float(np.max(proj.means + proj.stds * radius))


def combined_nu(delta: float, k: int, d: int, family: Family) -> BoundCoefficients:
    """Per-arm coefficient combining both bound families.

    Gaussian: ``min(sqrt(chi2_d(1-delta)), z_{1-delta/k})`` per arm.
    Sub-Gaussian: ``sqrt(2 log(k/delta))`` per arm.
    """
    if not 0.0 < delta <= 0.5:
        raise OutOfRange(f"delta must lie in (0, 1/2], got {delta}")
    if k < 1 or d < 1:
        raise OutOfRange("k and d must be positive")
    if family is Family.SUBGAUSSIAN:
        value = math.sqrt(2.0 * math.log(k / delta))
    else:
        value = min(
            math.sqrt(chi2_quantile(d, 1.0 - delta)),
            normal_quantile(1.0 - delta / k),
        )
    return BoundCoefficients(np.full(k, value), family)


def bound_for_policy(
    domain: BanditDomain,
    post: GaussianPosterior,
    pi: Policy,
    delta: float,
    family: Family = Family.GAUSSIAN,
) -> float:
    """Regret bound of a fixed policy under the combined coefficients."""
    proj = regret_projection(domain, post, pi)
    nu = combined_nu(delta, domain.k, domain.d, family)
    return float(np.max(proj.means + proj.stds * nu.nu))
