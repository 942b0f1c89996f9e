"""Policy-computing algorithms for offline linear bandits.

The two-phase bound minimizer (first the combined-coefficient cone
program, then optional alternating tail-weight tightening), the
deterministic LCB baseline, the greedy posterior-mean policy, three
scenario-sampling methods, the high-confidence-return policy, and the
factor-space projection used for solution geometry figures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bounds import (
    BoundCoefficients,
    Family,
    Policy,
    combined_nu,
    regret_projection,
)
from .errors import InsufficientSamples, OutOfRange
from .posterior import BanditDomain, GaussianPosterior, sample_posterior
from .programs import (
    SolveStatus,
    solve_cvar_lp,
    solve_hc_return,
    solve_min_max_norm,
    solve_worst_case,
    solve_xi_tightening,
)
from .risk import RiskLevel, empirical_var, normal_quantile

#: Tightened coefficients are kept strictly positive so the cone program
#: stays in its efficiently solvable regime.
NU_FLOOR = 1e-6


@dataclass(frozen=True)
class BrmobConfig:
    """Knobs of the bound minimizer: tolerance, tightening steps, tail family."""

    delta: float = 0.1
    tighten_iters: int = 0
    family: Family = Family.GAUSSIAN
    solver_tol: float = 1e-7

    def __post_init__(self) -> None:
        if not 0.0 < self.delta <= 0.5:
            raise OutOfRange(f"delta must lie in (0, 1/2], got {self.delta}")
        if self.tighten_iters < 0:
            raise OutOfRange("tightening iteration count must be nonnegative")
        if not self.solver_tol > 0.0:
            raise OutOfRange("solver tolerance must be positive")


@dataclass(frozen=True)
class BrmobIteration:
    """One recorded phase step: bound value and the tail split that produced it."""

    index: int
    rho: float
    xi: np.ndarray | None
    status: SolveStatus


@dataclass(frozen=True)
class BrmobResult:
    """Best policy across phases with its certified bound and the full trace."""

    policy: Policy
    bound: float
    trace: list[BrmobIteration] = field(default_factory=list)

    @property
    def status(self) -> SolveStatus:
        best = min(range(len(self.trace)), key=lambda i: self.trace[i].rho)
        return self.trace[best].status


def brmob(
    domain: BanditDomain, post: GaussianPosterior, cfg: BrmobConfig
) -> BrmobResult:
    """Two-phase Bayesian regret bound minimization.

    Phase one minimizes the bound with the combined per-arm coefficient.
    Phase two alternates: re-split the tail mass optimally for the
    incumbent policy, then re-solve the cone program with exact quantiles
    at that split.  The returned policy is the one with the smallest
    recorded bound, so extra iterations never hurt.
    """
    nu0 = combined_nu(cfg.delta, domain.k, domain.d, cfg.family)
    report = solve_min_max_norm(domain, post, nu0, tol=cfg.solver_tol)
    trace = [BrmobIteration(0, report.objective, None, report.status)]
    policies = [report.argmin]
    incumbent = report.argmin
    for i in range(1, cfg.tighten_iters + 1):
        proj = regret_projection(domain, post, incumbent)
        tight = solve_xi_tightening(proj, cfg.delta, tol=cfg.solver_tol)
        tails = tight.argmin.xi
        nu_i = BoundCoefficients(
            np.maximum([normal_quantile(1.0 - t) for t in tails], NU_FLOOR),
            cfg.family,
        )
        step = solve_min_max_norm(domain, post, nu_i, tol=cfg.solver_tol)
        trace.append(BrmobIteration(i, step.objective, tails, step.status))
        policies.append(step.argmin)
        incumbent = step.argmin
    best = min(range(len(trace)), key=lambda i: trace[i].rho)
    return BrmobResult(policy=policies[best], bound=trace[best].rho, trace=trace)


@dataclass(frozen=True)
class FlatOpoConfig:
    """Optional override of the LCB penalty coefficient."""

    beta: float | None = None

    def __post_init__(self) -> None:
        if self.beta is not None and not self.beta > 0.0:
            raise OutOfRange("beta override must be positive")


def default_flatopo_beta(d: int, delta: float) -> float:
    return math.sqrt(5.0 * d * math.log(1.0 / delta))


def flatopo(
    domain: BanditDomain,
    post: GaussianPosterior,
    delta: float,
    cfg: FlatOpoConfig = FlatOpoConfig(),
) -> Policy:
    """Deterministic LCB baseline: maximize mean minus scaled deviation."""
    beta = cfg.beta if cfg.beta is not None else default_flatopo_beta(domain.d, delta)
    m = post.factor.lower.T @ domain.features
    lcb = domain.features.T @ post.mean - beta * np.linalg.norm(m, axis=0)
    return Policy.one_hot(domain.k, int(np.argmax(lcb)))


def greedy(domain: BanditDomain, post: GaussianPosterior) -> Policy:
    """Deterministic policy on the arm with the largest posterior mean reward."""
    return Policy.one_hot(domain.k, int(np.argmax(domain.features.T @ post.mean)))


def _scenario_rewards(
    domain: BanditDomain, post: GaussianPosterior, count: int, seed: int
) -> np.ndarray:
    draws = sample_posterior(post, count, seed)
    return draws @ domain.features


def scenario_var_deterministic(
    domain: BanditDomain,
    post: GaussianPosterior,
    delta: float,
    samples: int,
    seed: int,
) -> Policy:
    """Deterministic arm with the smallest sampled VaR of regret."""
    if not 0.0 < delta < 1.0:
        raise OutOfRange(f"delta must lie in (0, 1), got {delta}")
    if samples < 1.0 / delta:
        raise InsufficientSamples(f"need at least {math.ceil(1 / delta)} samples")
    rewards = _scenario_rewards(domain, post, samples, seed)
    best = rewards.max(axis=1)
    level = RiskLevel(1.0 - delta)
    scores = [empirical_var(best - rewards[:, a], level) for a in range(domain.k)]
    return Policy.one_hot(domain.k, int(np.argmin(scores)))


def scenario_worst_case(
    domain: BanditDomain,
    post: GaussianPosterior,
    delta: float,
    samples: int | None = None,
    seed: int = 0,
) -> Policy:
    """Randomized policy minimizing worst-case regret over sampled scenarios.

    The default scenario count is deliberately small (twice ``ceil(1/delta)``):
    the worst case over many samples is overly pessimistic.
    """
    if samples is None:
        samples = 2 * math.ceil(1.0 / delta)
    if samples < 1:
        raise InsufficientSamples("need at least one scenario")
    rewards = _scenario_rewards(domain, post, samples, seed)
    return solve_worst_case(rewards).argmin


def scenario_cvar(
    domain: BanditDomain,
    post: GaussianPosterior,
    delta: float,
    samples: int,
    seed: int,
) -> Policy:
    """Randomized policy minimizing sampled CVaR of regret (the LP route)."""
    if samples * delta < 10.0:
        raise InsufficientSamples(
            f"need samples * delta >= 10 to resolve the tail, got {samples * delta}"
        )
    rewards = _scenario_rewards(domain, post, samples, seed)
    probs = np.full(samples, 1.0 / samples)
    return solve_cvar_lp(rewards, probs, delta, max_scenarios=max(samples, 1)).argmin


def hc_return_policy(
    domain: BanditDomain, post: GaussianPosterior, delta: float
) -> Policy:
    """Policy maximizing the high-confidence return."""
    return solve_hc_return(domain, post, delta).argmin


def chebyshev_projection_data(
    domain: BanditDomain,
    post: GaussianPosterior,
    policies: list[Policy],
) -> tuple[np.ndarray, np.ndarray]:
    """Factor-space points for solution geometry figures.

    Maps each arm to ``S^(1/2) phi_a`` using the symmetric square root of
    the posterior covariance, and each policy to the matching convex
    combination.  Returns (k x d arm points, len(policies) x d policy
    points).
    """
    eigvals, eigvecs = np.linalg.eigh(post.cov.entries)
    root = eigvecs @ np.diag(np.sqrt(np.clip(eigvals, 0.0, None))) @ eigvecs.T
    arm_points = (root @ domain.features).T
    policy_points = np.array([arm_points.T @ p.weights for p in policies])
    return arm_points, policy_points.reshape(len(policies), domain.d)
