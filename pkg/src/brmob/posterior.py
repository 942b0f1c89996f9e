"""Conjugate Bayesian linear regression for offline bandit data.

Holds the problem instance (features, Gaussian prior, reward noise), the
logged dataset with its CSV round-trip, the conjugate posterior update,
posterior sampling through a counter-based generator, and the empirical
data-coverage constant used by the theoretical regret bounds.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import linalg
from .errors import DimensionMismatch, EmptyDataset, OutOfRange, SpecInvalid
from .rng import make_generator

#: Slack allowed on the unit-norm feature requirement.
FEATURE_NORM_TOL = 1e-9


@dataclass(frozen=True)
class BanditDomain:
    """Linear bandit instance: features, Gaussian prior, and reward noise.

    ``features`` is d x k with one column per arm; every column must have
    Euclidean norm at most one.
    """

    features: np.ndarray
    prior_mean: np.ndarray
    prior_cov: linalg.SpdMatrix
    noise_std: float

    def __post_init__(self) -> None:
        phi = np.asarray(self.features, dtype=float)
        mean = np.asarray(self.prior_mean, dtype=float)
        if phi.ndim != 2:
            raise DimensionMismatch(f"features must be a d x k matrix, got {phi.shape}")
        d, k = phi.shape
        if d < 1 or k < 1 or d > linalg.MAX_DIM or k > linalg.MAX_DIM:
            raise OutOfRange(f"dimensions ({d}, {k}) outside [1, {linalg.MAX_DIM}]")
        if mean.shape != (d,):
            raise DimensionMismatch(f"prior mean must have shape ({d},), got {mean.shape}")
        if self.prior_cov.dim != d:
            raise DimensionMismatch("prior covariance dimension does not match features")
        norms = np.linalg.norm(phi, axis=0)
        if np.any(norms > 1.0 + FEATURE_NORM_TOL):
            raise SpecInvalid(f"feature column norm {norms.max():.6f} exceeds 1")
        if not self.noise_std > 0.0:
            raise OutOfRange(f"noise std must be positive, got {self.noise_std}")
        phi = phi.copy()
        mean = mean.copy()
        phi.flags.writeable = False
        mean.flags.writeable = False
        object.__setattr__(self, "features", phi)
        object.__setattr__(self, "prior_mean", mean)

    @property
    def k(self) -> int:
        return self.features.shape[1]

    @property
    def d(self) -> int:
        return self.features.shape[0]


@dataclass(frozen=True)
class LoggedDataset:
    """Sequence of (action, reward) records with 1-based action indices."""

    actions: np.ndarray
    rewards: np.ndarray
    k: int

    def __post_init__(self) -> None:
        actions = np.asarray(self.actions, dtype=int)
        rewards = np.asarray(self.rewards, dtype=float)
        if actions.ndim != 1 or rewards.shape != actions.shape:
            raise DimensionMismatch("actions and rewards must be equal-length vectors")
        if actions.size and (actions.min() < 1 or actions.max() > self.k):
            raise OutOfRange(f"action indices must lie in 1..{self.k}")
        actions = actions.copy()
        rewards = rewards.copy()
        actions.flags.writeable = False
        rewards.flags.writeable = False
        object.__setattr__(self, "actions", actions)
        object.__setattr__(self, "rewards", rewards)

    def __len__(self) -> int:
        return self.actions.size

    def prefix(self, n: int) -> "LoggedDataset":
        """First ``n`` records, for the varying-data-size protocol."""
        if n < 0 or n > len(self):
            raise OutOfRange(f"prefix length {n} outside [0, {len(self)}]")
        return LoggedDataset(self.actions[:n], self.rewards[:n], self.k)

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["action", "reward"])
            for a, y in zip(self.actions, self.rewards):
                writer.writerow([int(a), repr(float(y))])

    @staticmethod
    def from_csv(path: str | Path, k: int) -> "LoggedDataset":
        actions: list[int] = []
        rewards: list[float] = []
        with open(path, newline="") as handle:
            reader = csv.reader(handle)
            header = next(reader, None)
            if header != ["action", "reward"]:
                raise SpecInvalid(f"expected header 'action,reward', got {header!r}")
            for row in reader:
                if len(row) != 2:
                    raise SpecInvalid(f"malformed dataset row {row!r}")
                actions.append(int(row[0]))
                rewards.append(float(row[1]))
        return LoggedDataset(np.array(actions, dtype=int), np.array(rewards), k)


@dataclass(frozen=True)
class GaussianPosterior:
    """Gaussian belief over the reward parameter with a cached factor."""

    mean: np.ndarray
    cov: linalg.SpdMatrix
    factor: linalg.SpdFactor = field(init=False)

    def __post_init__(self) -> None:
        mean = np.asarray(self.mean, dtype=float)
        if mean.shape != (self.cov.dim,):
            raise DimensionMismatch("posterior mean and covariance dimensions differ")
        mean = mean.copy()
        mean.flags.writeable = False
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "factor", linalg.cholesky(self.cov))

    @property
    def dim(self) -> int:
        return self.cov.dim


@dataclass(frozen=True)
class CoverageEstimate:
    """Largest gamma with ``G_n >= gamma * n * phi_a phi_a.T`` for every arm."""

    gamma: float
    n: int


def posterior_update(domain: BanditDomain, data: LoggedDataset) -> GaussianPosterior:
    """Conjugate update of the Gaussian prior with the logged records.

    The Gram matrix of observed features is accumulated as a running d x d
    sum, so memory is independent of the dataset size.
    """
    if data.k != domain.k:
        raise DimensionMismatch("dataset arm count does not match domain")
    d = domain.d
    gram = np.zeros((d, d))
    moment = np.zeros(d)
    if len(data):
        counts = np.bincount(data.actions - 1, minlength=domain.k).astype(float)
        weighted = np.bincount(
            data.actions - 1, weights=data.rewards, minlength=domain.k
        )
        phi = domain.features
        gram = (phi * counts) @ phi.T
        moment = phi @ weighted
    prior_prec = linalg.spd_inverse(domain.prior_cov).entries
    noise_prec = domain.noise_std ** -2
    precision = linalg.SpdMatrix(prior_prec + noise_prec * gram)
    cov = linalg.spd_inverse(precision)
    mean = cov.entries @ (prior_prec @ domain.prior_mean + noise_prec * moment)
    return GaussianPosterior(mean, cov)


def prior_posterior(domain: BanditDomain) -> GaussianPosterior:
    """The data-free posterior, i.e. the prior itself."""
    return GaussianPosterior(domain.prior_mean, domain.prior_cov)


def coverage_gamma(domain: BanditDomain, data: LoggedDataset) -> CoverageEstimate:
    """Tightest empirical coverage constant of the logged data.

    For each arm, the largest c with ``G_n >= c * phi phi.T`` is
    ``1 / (phi.T pinv(G_n) phi)`` when phi lies in the range of the Gram
    matrix and zero otherwise; gamma is the minimum of ``c / n`` over arms.
    Arms with a zero feature vector impose no constraint.
    """
    n = len(data)
    if n == 0:
        raise EmptyDataset("coverage requires at least one record")
    counts = np.bincount(data.actions - 1, minlength=domain.k).astype(float)
    phi = domain.features
    gram = (phi * counts) @ phi.T
    pinv = np.linalg.pinv(gram, hermitian=True)
    gamma = math.inf
    for a in range(domain.k):
        col = phi[:, a]
        norm = np.linalg.norm(col)
        if norm == 0.0:
            continue
        residual = np.linalg.norm(gram @ (pinv @ col) - col)
        if residual > 1e-8 * norm:
            gamma = 0.0
            break
        quad = float(col @ pinv @ col)
        if quad <= 0.0:
            continue
        gamma = min(gamma, 1.0 / (n * quad))
    if math.isinf(gamma):
        gamma = 0.0
    return CoverageEstimate(gamma=gamma, n=n)


def sample_posterior(post: GaussianPosterior, count: int, seed: int) -> np.ndarray:
    """Draw ``count`` posterior samples, one per row, deterministically in ``seed``."""
    if count < 1:
        raise OutOfRange(f"sample count must be positive, got {count}")
    rng = make_generator(seed, "posterior-samples")
    z = rng.standard_normal((count, post.dim))
    return post.mean + z @ post.factor.lower.T


def simulate_logged_data(
    domain: BanditDomain,
    theta_star: np.ndarray,
    logging_policy: Sequence[float] | np.ndarray,
    n: int,
    seed: int,
) -> LoggedDataset:
    """Sample a logged dataset: i.i.d. actions, Gaussian rewards around the truth."""
    weights = np.asarray(logging_policy, dtype=float)
    if weights.shape != (domain.k,):
        raise DimensionMismatch("logging policy length does not match arm count")
    if np.any(weights < -1e-12) or abs(weights.sum() - 1.0) > 1e-9:
        raise OutOfRange("logging policy must lie on the probability simplex")
    theta = np.asarray(theta_star, dtype=float)
    if theta.shape != (domain.d,):
        raise DimensionMismatch("theta_star dimension does not match domain")
    if n < 0:
        raise OutOfRange("dataset size must be nonnegative")
    rng = make_generator(seed, "logged-data")
    probs = np.clip(weights, 0.0, None)
    probs = probs / probs.sum()
    actions = rng.choice(domain.k, size=n, p=probs) + 1
    mean_rewards = domain.features.T @ theta
    rewards = mean_rewards[actions - 1] + domain.noise_std * rng.standard_normal(n)
    return LoggedDataset(actions, rewards, domain.k)
