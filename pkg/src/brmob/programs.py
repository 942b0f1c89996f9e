"""Certified solvers for the convex programs behind the regret bounds.

Four programs: the min-max-norm epigraph program over policies (a
second-order cone program), the tail-weight tightening program (solved
exactly by monotone bisection on its value), the scenario CVaR linear
program, and the high-confidence-return program.  Conic solves are
delegated to cvxpy/Clarabel and LPs to HiGHS, but every report carries an
independently computed optimality gap: weak-duality lower bounds built
from normalized epigraph multipliers and unit dual directions, LP duality
from the returned marginals, or the bisection bracket.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Union

import cvxpy as cp
import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from .bounds import (
    XI_FLOOR,
    BoundCoefficients,
    Policy,
    RegretProjection,
    TailWeights,
)
from .errors import DimensionMismatch, OutOfRange
from .posterior import BanditDomain, GaussianPosterior
from .risk import normal_quantile

#: Default absolute tolerance on reported objectives.
DEFAULT_TOL = 1e-7

#: Iteration cap across solver attempts.
DEFAULT_MAX_ITER = 10**5

#: Memory guardrail on scenario counts in the CVaR linear program.
MAX_SCENARIOS = 10**4

_CONIC_SOLVERS = ("CLARABEL", "SCS")


class SolveStatus(str, enum.Enum):
    OPTIMAL = "optimal"
    TOLERANCE_NOT_MET = "tolerance-not-met"


@dataclass(frozen=True)
class SolveReport:
    """Solution with an honestly reported optimality gap."""

    objective: float
    argmin: Union[Policy, TailWeights]
    iterations: int
    achieved_tol: float
    status: SolveStatus


@dataclass(frozen=True)
class MinMaxNormProblem:
    """Data of the epigraph program: arm values, factor loadings, coefficients.

    ``arm_values`` is ``Phi.T mu`` and ``loadings`` is ``L.T Phi`` for the
    posterior factor L, so the objective at policy pi is
    ``max_a arm_values_a - arm_values.pi + nu_a * norm(loadings_a - loadings.pi)``.
    """

    arm_values: np.ndarray
    loadings: np.ndarray
    nu: BoundCoefficients

    @staticmethod
    def build(
        domain: BanditDomain, post: GaussianPosterior, nu: BoundCoefficients
    ) -> "MinMaxNormProblem":
        if nu.nu.size != domain.k:
            raise DimensionMismatch("coefficient length does not match arm count")
        if post.dim != domain.d:
            raise DimensionMismatch("posterior dimension does not match domain")
        return MinMaxNormProblem(
            arm_values=domain.features.T @ post.mean,
            loadings=post.factor.lower.T @ domain.features,
            nu=nu,
        )

    @property
    def k(self) -> int:
        return self.arm_values.size

    def objective(self, weights: np.ndarray) -> float:
        """Exact objective value at a policy weight vector."""
        means = self.arm_values - float(self.arm_values @ weights)
        devs = np.linalg.norm(
            self.loadings - (self.loadings @ weights)[:, None], axis=0
        )
        return float(np.max(means + self.nu.nu * devs))

    def lower_bound(self, weights: np.ndarray, lam: np.ndarray) -> float:
        """Weak-duality lower bound on the optimal value.

        Fixes unit directions ``u_a`` along the norm arguments at
        ``weights`` and a simplex multiplier ``lam`` over arms; the
        resulting affine minorant is minimized over the simplex in closed
        form, so the bound is valid for any inputs and tight at a saddle
        point.
        """
        resid = self.loadings - (self.loadings @ weights)[:, None]
        norms = np.linalg.norm(resid, axis=0)
        safe = np.where(norms > 0.0, norms, 1.0)
        u = resid / safe
        u[:, norms == 0.0] = 0.0
        scaled = u * (lam * self.nu.nu)
        constant = float(
            lam @ self.arm_values + np.einsum("ia,ia->", scaled, self.loadings)
        )
        linear = -(self.arm_values + self.loadings.T @ scaled.sum(axis=1))
        return constant + float(np.min(linear))


def _clean_policy(weights: np.ndarray) -> Policy:
    w = np.clip(np.asarray(weights, dtype=float), 0.0, None)
    total = w.sum()
    if total <= 0.0:
        raise OutOfRange("solver returned a degenerate policy")
    return Policy(w / total)


def solve_min_max_norm(
    domain: BanditDomain,
    post: GaussianPosterior,
    nu: BoundCoefficients,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> SolveReport:
    """Minimize the combined regret bound over the policy simplex.

    The epigraph form is a second-order cone program; the reported
    objective is re-evaluated exactly at the cleaned-up policy and the
    gap is certified with :meth:`MinMaxNormProblem.lower_bound`.
    """
    if not tol > 0.0:
        raise OutOfRange("tolerance must be positive")
    problem = MinMaxNormProblem.build(domain, post, nu)
    k = problem.k
    if k == 1:
        return SolveReport(0.0, Policy(np.ones(1)), 0, 0.0, SolveStatus.OPTIMAL)

    r = problem.arm_values
    m = problem.loadings
    best: tuple[float, np.ndarray, np.ndarray] | None = None
    iterations = 0
    for solver in _CONIC_SOLVERS:
        pi = cp.Variable(k, nonneg=True)
        t = cp.Variable()
        cons = [cp.sum(pi) == 1]
        epigraph = []
        for a in range(k):
            expr = r[a] - r @ pi + nu.nu[a] * cp.norm(m[:, a] - m @ pi, 2)
            constraint = expr <= t
            epigraph.append(constraint)
            cons.append(constraint)
        prob = cp.Problem(cp.Minimize(t), cons)
        try:
            if solver == "SCS":
                prob.solve(solver=solver, max_iters=max_iter, eps=1e-9)
            else:
                prob.solve(solver=solver)
        except cp.error.SolverError:
            continue
        if pi.value is None:
            continue
        iterations += int(prob.solver_stats.num_iters or 0)
        policy = _clean_policy(pi.value)
        duals = np.array([max(float(c.dual_value or 0.0), 0.0) for c in epigraph])
        if duals.sum() > 0.0:
            lam = duals / duals.sum()
        else:
            lam = np.zeros(k)
            lam[int(np.argmax(r - r @ policy.weights))] = 1.0
        value = problem.objective(policy.weights)
        gap = value - problem.lower_bound(policy.weights, lam)
        if best is None or value < best[0]:
            best = (value, policy.weights, lam)
        if gap <= tol:
            return SolveReport(value, policy, iterations, max(gap, 0.0), SolveStatus.OPTIMAL)
    if best is None:
        # All conic attempts failed outright; fall back to the uniform policy.
        weights = np.full(k, 1.0 / k)
        lam = np.full(k, 1.0 / k)
        best = (problem.objective(weights), weights, lam)
    value, weights, lam = best
    gap = value - problem.lower_bound(weights, lam)
    status = SolveStatus.OPTIMAL if gap <= tol else SolveStatus.TOLERANCE_NOT_MET
    return SolveReport(value, _clean_policy(weights), iterations, max(gap, 0.0), status)


def _tail_requirement(t: float, means: np.ndarray, stds: np.ndarray) -> np.ndarray:
    req = np.zeros_like(means)
    active = stds > 0.0
    gap = np.maximum(t - means[active], 0.0)
    req[active] = np.exp(-(gap**2) / (2.0 * stds[active] ** 2))
    return req


def solve_xi_tightening(
    proj: RegretProjection, delta: float, tol: float = DEFAULT_TOL
) -> SolveReport:
    """Optimal tail-mass allocation for the union regret bound.

    Minimizes ``max_a mean_a + std_a * sqrt(2 log(1 / xi_a))`` over
    positive allocations summing to ``delta``.  For a target value t the
    cheapest feasible allocation needs mass
    ``exp(-(t - mean_a)^2 / (2 std_a^2))`` per arm, which decreases
    monotonically in t, so the optimum is the root of a scalar equation
    and bisection yields the exact value with a bracket certificate.
    """
    if not 0.0 < delta <= 0.5:
        raise OutOfRange(f"delta must lie in (0, 1/2], got {delta}")
    if not tol > 0.0:
        raise OutOfRange("tolerance must be positive")
    means, stds = proj.means, proj.stds
    k = proj.k
    t_low = float(np.max(means))
    iterations = 0
    if not np.any(stds > 0.0):
        tau = np.full(k, delta / k)
        value = t_low
    else:
        if float(np.sum(_tail_requirement(t_low, means, stds))) <= delta:
            t_high = t_low
        else:
            t_high = t_low + float(np.max(stds)) * math.sqrt(2.0 * math.log(k / delta))
            while float(np.sum(_tail_requirement(t_high, means, stds))) > delta:
                t_high = t_low + 2.0 * (t_high - t_low)
            lo = t_low
            span = max(abs(t_low), abs(t_high), 1.0)
            while t_high - lo > min(tol * 1e-3, 1e-13 * span):
                iterations += 1
                mid = 0.5 * (lo + t_high)
                if float(np.sum(_tail_requirement(mid, means, stds))) > delta:
                    lo = mid
                else:
                    t_high = mid
                if iterations >= 200:
                    break
            t_low = lo
        tau = _tail_requirement(t_high, means, stds)
        slack = delta - float(tau.sum())
        if slack > 0.0:
            if tau.sum() > 0.0:
                tau = tau * (delta / tau.sum())
            else:
                tau = np.full(k, delta / k)
        value = t_high
    tau = np.maximum(tau, XI_FLOOR)
    excess = float(tau.sum()) - delta
    if excess > 0.0:
        tau[int(np.argmax(tau))] -= excess
    weights = TailWeights(tau)
    with np.errstate(divide="ignore"):
        terms = means + np.where(
            stds > 0.0, stds * np.sqrt(2.0 * np.log(1.0 / tau)), 0.0
        )
    value = float(np.max(terms))
    gap = max(value - t_low, 0.0)
    status = SolveStatus.OPTIMAL if gap <= tol else SolveStatus.TOLERANCE_NOT_MET
    return SolveReport(value, weights, iterations, gap, status)


def _weighted_cvar(losses: np.ndarray, probs: np.ndarray, delta: float) -> float:
    """Rockafellar-Uryasev CVaR at level 1-delta with scenario probabilities."""
    order = np.argsort(losses)
    x = losses[order]
    p = probs[order]
    suffix = np.concatenate([np.cumsum((x * p)[::-1])[::-1], [0.0]])
    psuffix = np.concatenate([np.cumsum(p[::-1])[::-1], [0.0]])
    tail = suffix[1:] - psuffix[1:] * x
    return float(np.min(x + tail / delta))


def solve_cvar_lp(
    scenarios: np.ndarray,
    probs: np.ndarray,
    delta: float,
    max_scenarios: int = MAX_SCENARIOS,
) -> SolveReport:
    """Minimize scenario CVaR of regret over randomized policies.

    ``scenarios`` is J x k with per-arm mean rewards of each sampled
    parameter.  The linear program carries one tail variable per scenario;
    the duality gap is recomputed from the HiGHS marginals and the
    reported objective is the exact CVaR of the returned policy's regret.
    """
    s = np.asarray(scenarios, dtype=float)
    p = np.asarray(probs, dtype=float)
    if s.ndim != 2:
        raise DimensionMismatch("scenarios must be a J x k matrix")
    j, k = s.shape
    if j > max_scenarios:
        raise OutOfRange(f"scenario count {j} exceeds cap {max_scenarios}")
    if p.shape != (j,) or np.any(p < 0.0) or abs(p.sum() - 1.0) > 1e-9:
        raise OutOfRange("probs must lie on the scenario simplex")
    if not 0.0 < delta < 1.0:
        raise OutOfRange(f"delta must lie in (0, 1), got {delta}")

    g = s.max(axis=1)
    c = np.concatenate([np.zeros(k), [1.0], p / delta])
    a_ub = sp.hstack(
        [sp.csr_matrix(-s), -np.ones((j, 1)), -sp.identity(j, format="csr")],
        format="csr",
    )
    b_ub = -g
    a_eq = sp.csr_matrix(
        (np.ones(k), (np.zeros(k, dtype=int), np.arange(k))), shape=(1, k + 1 + j)
    )
    bounds = [(0.0, None)] * k + [(None, None)] + [(0.0, None)] * j
    res = linprog(
        c,
        A_ub=a_ub,
        b_ub=b_ub,
        A_eq=a_eq,
        b_eq=[1.0],
        bounds=bounds,
        method="highs",
        options={
            "primal_feasibility_tolerance": 1e-9,
            "dual_feasibility_tolerance": 1e-9,
        },
    )
    if not res.success:
        raise OutOfRange(f"CVaR linear program failed: {res.message}")
    policy = _clean_policy(res.x[:k])
    losses = g - s @ policy.weights
    value = _weighted_cvar(losses, p, delta)
    dual = float(res.ineqlin.marginals @ b_ub + res.eqlin.marginals @ [1.0])
    gap = max(abs(value - dual), abs(value - float(res.fun)))
    status = SolveStatus.OPTIMAL if gap <= 1e-6 else SolveStatus.TOLERANCE_NOT_MET
    iterations = int(getattr(res, "nit", 0))
    return SolveReport(value, policy, iterations, gap, status)


def solve_worst_case(scenarios: np.ndarray) -> SolveReport:
    """Minimize the worst-case scenario regret over randomized policies."""
    s = np.asarray(scenarios, dtype=float)
    if s.ndim != 2:
        raise DimensionMismatch("scenarios must be a J x k matrix")
    j, k = s.shape
    g = s.max(axis=1)
    c = np.concatenate([np.zeros(k), [1.0]])
    a_ub = np.hstack([-s, -np.ones((j, 1))])
    a_eq = np.concatenate([np.ones(k), [0.0]])[None, :]
    bounds = [(0.0, None)] * k + [(None, None)]
    res = linprog(
        c,
        A_ub=a_ub,
        b_ub=-g,
        A_eq=a_eq,
        b_eq=[1.0],
        bounds=bounds,
        method="highs",
    )
    if not res.success:
        raise OutOfRange(f"worst-case linear program failed: {res.message}")
    policy = _clean_policy(res.x[:k])
    value = float(np.max(g - s @ policy.weights))
    dual = float(res.ineqlin.marginals @ (-g) + res.eqlin.marginals @ [1.0])
    gap = max(abs(value - dual), abs(value - float(res.fun)))
    status = SolveStatus.OPTIMAL if gap <= 1e-6 else SolveStatus.TOLERANCE_NOT_MET
    return SolveReport(value, policy, int(getattr(res, "nit", 0)), gap, status)


def solve_hc_return(
    domain: BanditDomain,
    post: GaussianPosterior,
    delta: float,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> SolveReport:
    """Maximize the high-confidence return over randomized policies.

    Objective ``pi.T Phi.T mu - z_{1-delta} * norm(Phi pi)`` in the
    covariance-weighted norm; concave for ``delta <= 1/2``.  The
    certificate fixes the unit dual direction at the solution, giving the
    closed-form upper bound ``max_a (Phi.T mu - z M.T u)_a``.
    """
    if not 0.0 < delta <= 0.5:
        raise OutOfRange(f"delta must lie in (0, 1/2], got {delta}")
    r = domain.features.T @ post.mean
    m = post.factor.lower.T @ domain.features
    z = normal_quantile(1.0 - delta)
    k = domain.k

    def value_at(weights: np.ndarray) -> float:
        return float(r @ weights - z * np.linalg.norm(m @ weights))

    def upper_bound(weights: np.ndarray) -> float:
        mw = m @ weights
        norm = np.linalg.norm(mw)
        u = mw / norm if norm > 0.0 else np.zeros_like(mw)
        return float(np.max(r - z * (m.T @ u)))

    best: tuple[float, np.ndarray] | None = None
    iterations = 0
    for solver in _CONIC_SOLVERS:
        pi = cp.Variable(k, nonneg=True)
        objective = r @ pi - z * cp.norm(m @ pi, 2)
        prob = cp.Problem(cp.Maximize(objective), [cp.sum(pi) == 1])
        try:
            if solver == "SCS":
                prob.solve(solver=solver, max_iters=max_iter, eps=1e-9)
            else:
                prob.solve(solver=solver)
        except cp.error.SolverError:
            continue
        if pi.value is None:
            continue
        iterations += int(prob.solver_stats.num_iters or 0)
        policy = _clean_policy(pi.value)
        value = value_at(policy.weights)
        gap = upper_bound(policy.weights) - value
        if best is None or value > best[0]:
            best = (value, policy.weights)
        if gap <= tol:
            return SolveReport(value, policy, iterations, max(gap, 0.0), SolveStatus.OPTIMAL)
    if best is None:
        weights = np.full(k, 1.0 / k)
        best = (value_at(weights), weights)
    value, weights = best
    gap = upper_bound(weights) - value
    status = SolveStatus.OPTIMAL if gap <= tol else SolveStatus.TOLERANCE_NOT_MET
    return SolveReport(value, _clean_policy(weights), iterations, max(gap, 0.0), status)
