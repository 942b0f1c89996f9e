"""Experiment pipeline: domain generators, the varying-data-size protocol,
CSV emission, and bound diagnostics.

A run draws a true parameter from the prior, samples one large logged
dataset under uniform logging, and re-fits the posterior on growing
prefixes; every (algorithm, n, run) cell derives its own random stream
from the master seed, so results are byte-reproducible and cells are
independent.
"""

from __future__ import annotations

import csv
import enum
import json
import math
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .algorithms import (
    BrmobConfig,
    brmob,
    flatopo,
    greedy,
    hc_return_policy,
    scenario_cvar,
    scenario_var_deterministic,
    scenario_worst_case,
)
from .bounds import (
    Family,
    Policy,
    RegretProjection,
    TailWeights,
    action_set_bound,
)
from .errors import BrmobError, ConfigError, SpecInvalid
from .evaluation import estimate_regret
from .linalg import SpdMatrix
from .posterior import BanditDomain, posterior_update, simulate_logged_data
from .programs import solve_xi_tightening
from .risk import RiskLevel, empirical_var
from .rng import derive_key, make_generator


class DomainKind(str, enum.Enum):
    IDENTITY_ZERO_MEAN = "identity-zero-mean"
    IDENTITY_SQRT_MEAN = "identity-sqrt-mean"
    RANDOM_LINF_BALL = "random-linf-ball"


@dataclass(frozen=True)
class DomainSpec:
    """Synthetic domain description: kind, sizes, and generation seed."""

    kind: DomainKind
    k: int
    d: int
    feature_seed: int = 0
    noise_std: float = 1.0

    def __post_init__(self) -> None:
        if self.k < 1 or self.d < 1:
            raise SpecInvalid("k and d must be positive")
        if self.kind is not DomainKind.RANDOM_LINF_BALL and self.k != self.d:
            raise SpecInvalid(f"{self.kind.value} requires k = d")
        if not self.noise_std > 0.0:
            raise SpecInvalid("noise std must be positive")

    @property
    def label(self) -> str:
        return f"{self.kind.value}-k{self.k}-d{self.d}"


def build_domain(spec: DomainSpec) -> BanditDomain:
    """Materialize a synthetic domain.

    Identity kinds use the identity feature matrix and unit prior
    covariance, with prior mean zero or ``sqrt(arm index)``.  The random
    kind draws feature columns uniformly from the unit-cube and rescales
    any column with norm above one back to the unit sphere.
    """
    if spec.kind is DomainKind.RANDOM_LINF_BALL:
        rng = make_generator(spec.feature_seed, "features", spec.k, spec.d)
        phi = rng.uniform(-1.0, 1.0, size=(spec.d, spec.k))
        norms = np.linalg.norm(phi, axis=0)
        phi /= np.maximum(norms, 1.0)
        mean = np.zeros(spec.d)
    else:
        phi = np.eye(spec.d)
        if spec.kind is DomainKind.IDENTITY_SQRT_MEAN:
            mean = np.sqrt(np.arange(1, spec.d + 1, dtype=float))
        else:
            mean = np.zeros(spec.d)
    return BanditDomain(
        features=phi,
        prior_mean=mean,
        prior_cov=SpdMatrix.identity(spec.d),
        noise_std=spec.noise_std,
    )


ALGORITHMS = (
    "brmob",
    "flatopo",
    "greedy",
    "scenario-var",
    "scenario-worst-case",
    "scenario-cvar",
    "hc-return",
)


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a reproduction run needs, JSON-serializable."""

    master_seed: int
    n_grid: tuple[int, ...]
    domain: DomainSpec
    delta: float = 0.1
    runs: int = 100
    eval_samples: int = 20000
    algorithms: tuple[str, ...] = ("brmob", "flatopo", "greedy", "scenario-cvar")
    tighten_m: int = 0
    family: Family = Family.GAUSSIAN
    scenario_samples: int = 10000

    def __post_init__(self) -> None:
        if self.runs < 1:
            raise SpecInvalid("runs must be at least 1")
        grid = tuple(int(n) for n in self.n_grid)
        if not grid or any(b <= a for a, b in zip(grid, grid[1:])):
            raise SpecInvalid("n grid must be nonempty and strictly increasing")
        if any(n < 0 for n in grid):
            raise SpecInvalid("n grid entries must be nonnegative")
        if not 0.0 < self.delta < 1.0:
            raise SpecInvalid("delta must lie in (0, 1)")
        unknown = set(self.algorithms) - set(ALGORITHMS)
        if unknown:
            raise SpecInvalid(f"unknown algorithms: {sorted(unknown)}")
        object.__setattr__(self, "n_grid", grid)
        object.__setattr__(self, "algorithms", tuple(self.algorithms))


_CONFIG_KEYS = {
    "master_seed",
    "n_grid",
    "domain",
    "delta",
    "runs",
    "eval_samples",
    "algorithms",
    "tighten_m",
    "family",
    "scenario_samples",
}

_DOMAIN_KEYS = {"kind", "k", "d", "feature_seed", "noise_std"}


def domain_spec_from_dict(payload: dict) -> DomainSpec:
    unknown = set(payload) - _DOMAIN_KEYS
    if unknown:
        raise ConfigError(f"unknown domain keys: {sorted(unknown)}")
    try:
        kind = DomainKind(payload["kind"])
        return DomainSpec(
            kind=kind,
            k=int(payload["k"]),
            d=int(payload["d"]),
            feature_seed=int(payload.get("feature_seed", 0)),
            noise_std=float(payload.get("noise_std", 1.0)),
        )
    except KeyError as exc:
        raise ConfigError(f"missing domain key: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def config_from_dict(payload: dict) -> ExperimentConfig:
    unknown = set(payload) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    try:
        return ExperimentConfig(
            master_seed=int(payload["master_seed"]),
            n_grid=tuple(int(n) for n in payload["n_grid"]),
            domain=domain_spec_from_dict(payload["domain"]),
            delta=float(payload.get("delta", 0.1)),
            runs=int(payload.get("runs", 100)),
            eval_samples=int(payload.get("eval_samples", 20000)),
            algorithms=tuple(payload.get("algorithms", ("brmob", "flatopo", "greedy", "scenario-cvar"))),
            tighten_m=int(payload.get("tighten_m", 0)),
            family=Family(payload.get("family", "gaussian")),
            scenario_samples=int(payload.get("scenario_samples", 10000)),
        )
    except KeyError as exc:
        raise ConfigError(f"missing config key: {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        payload = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(payload, dict):
        raise ConfigError("config must be a JSON object")
    return config_from_dict(payload)


@dataclass(frozen=True)
class ResultRow:
    """One evaluated cell of the experiment matrix."""

    domain: str
    algorithm: str
    n: int
    run: int
    regret: float | None
    bound: float | None
    ms: float


def run_algorithm(
    name: str,
    domain: BanditDomain,
    post,
    cfg: ExperimentConfig,
    seed: int,
) -> tuple[Policy, float | None]:
    """Dispatch one algorithm; returns its policy and analytic bound if any."""
    if name == "brmob":
        result = brmob(
            domain,
            post,
            BrmobConfig(delta=cfg.delta, tighten_iters=cfg.tighten_m, family=cfg.family),
        )
        return result.policy, result.bound
    if name == "flatopo":
        return flatopo(domain, post, cfg.delta), None
    if name == "greedy":
        return greedy(domain, post), None
    if name == "scenario-var":
        return (
            scenario_var_deterministic(domain, post, cfg.delta, cfg.scenario_samples, seed),
            None,
        )
    if name == "scenario-worst-case":
        return scenario_worst_case(domain, post, cfg.delta, seed=seed), None
    if name == "scenario-cvar":
        return scenario_cvar(domain, post, cfg.delta, cfg.scenario_samples, seed), None
    if name == "hc-return":
        return hc_return_policy(domain, post, cfg.delta), None
    raise ConfigError(f"unknown algorithm {name!r}")


def run_experiment(cfg: ExperimentConfig) -> list[ResultRow]:
    """Execute the full (run x n x algorithm) matrix.

    Per-cell failures become rows with missing regret rather than
    aborting the sweep.
    """
    domain = build_domain(cfg.domain)
    label = cfg.domain.label
    n_max = max(cfg.n_grid)
    rows: list[ResultRow] = []
    for run in range(cfg.runs):
        prior_rng = make_generator(cfg.master_seed, "theta", label, run)
        theta = domain.prior_mean + np.linalg.cholesky(
            domain.prior_cov.entries
        ) @ prior_rng.standard_normal(domain.d)
        data = simulate_logged_data(
            domain,
            theta,
            np.full(domain.k, 1.0 / domain.k),
            n_max,
            seed=derive_key(cfg.master_seed, "data", label, run),
        )
        for n in cfg.n_grid:
            post = posterior_update(domain, data.prefix(n))
            for name in cfg.algorithms:
                alg_seed = derive_key(cfg.master_seed, "alg", label, name, n, run)
                eval_seed = derive_key(cfg.master_seed, "eval", label, name, n, run)
                start = time.perf_counter()
                try:
                    policy, bound = run_algorithm(name, domain, post, cfg, alg_seed)
                    elapsed = (time.perf_counter() - start) * 1000.0
                    estimate = estimate_regret(
                        domain, post, policy, cfg.delta, cfg.eval_samples, eval_seed
                    )
                    rows.append(
                        ResultRow(label, name, n, run, estimate.var_estimate, bound, elapsed)
                    )
                except BrmobError:
                    elapsed = (time.perf_counter() - start) * 1000.0
                    rows.append(ResultRow(label, name, n, run, None, None, elapsed))
    return rows


CSV_HEADER = ("domain", "algorithm", "n", "run", "regret", "bound", "ms")


def _format_cell(value: float | None) -> str:
    return "NA" if value is None else repr(float(value))


def emit_csv(rows: Sequence[ResultRow], path: str | Path) -> None:
    """Write result rows with IEEE-754 round-trip decimal formatting."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(CSV_HEADER)
        for row in rows:
            writer.writerow(
                [
                    row.domain,
                    row.algorithm,
                    row.n,
                    row.run,
                    _format_cell(row.regret),
                    _format_cell(row.bound),
                    repr(float(row.ms)),
                ]
            )


def read_csv(path: str | Path) -> list[ResultRow]:
    rows: list[ResultRow] = []
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if tuple(header or ()) != CSV_HEADER:
            raise ConfigError(f"expected header {','.join(CSV_HEADER)}, got {header!r}")
        for record in reader:
            if len(record) != len(CSV_HEADER):
                raise ConfigError(f"malformed row {record!r}")
            rows.append(
                ResultRow(
                    domain=record[0],
                    algorithm=record[1],
                    n=int(record[2]),
                    run=int(record[3]),
                    regret=None if record[4] == "NA" else float(record[4]),
                    bound=None if record[5] == "NA" else float(record[5]),
                    ms=float(record[6]),
                )
            )
    return rows


DIAGNOSTIC_FAMILIES = ("iid", "varying-variance", "varying-mean")


@dataclass(frozen=True)
class DiagnosticsRow:
    """Uniform vs tightened union bound vs the sampled VaR for one sweep point."""

    family: str
    k: int
    uniform_bound: float
    tightened_bound: float
    mc_var: float
    mc_std_error: float


def _diagnostic_projection(family: str, k: int) -> RegretProjection:
    arms = np.arange(1, k + 1, dtype=float)
    if family == "iid":
        return RegretProjection(np.zeros(k), np.ones(k))
    if family == "varying-variance":
        return RegretProjection(np.zeros(k), arms / math.sqrt(k))
    if family == "varying-mean":
        return RegretProjection(arms / k, arms / math.sqrt(k))
    raise ConfigError(f"unknown diagnostic family {family!r}")


def bound_diagnostics(
    delta: float = 0.1,
    k_grid: Sequence[int] = (2, 5, 10, 20, 50),
    samples: int = 100000,
    seed: int = 0,
) -> list[DiagnosticsRow]:
    """Sweep bound quality across arm counts for synthetic marginals.

    For each family the per-arm Gaussians are specified directly; the
    uniform allocation bound, the tightened-allocation bound, and the
    Monte-Carlo VaR of the max are emitted per arm count.
    """
    rows: list[DiagnosticsRow] = []
    level = RiskLevel(1.0 - delta)
    for family in DIAGNOSTIC_FAMILIES:
        for k in k_grid:
            proj = _diagnostic_projection(family, k)
            uniform = action_set_bound(proj, delta, TailWeights.uniform(k))
            tight = solve_xi_tightening(proj, delta)
            tightened = action_set_bound(proj, delta, TailWeights(tight.argmin.xi / delta))
            rng = make_generator(seed, "diagnostics", family, k)
            draws = proj.means + proj.stds * rng.standard_normal((samples, k))
            maxima = draws.max(axis=1)
            mc = empirical_var(maxima, level)
            order = min(max(math.ceil((1.0 - delta) * samples - 1e-9), 1), samples)
            boot = np.empty(50)
            for b in range(50):
                idx = rng.integers(0, samples, samples)
                boot[b] = np.partition(maxima[idx], order - 1)[order - 1]
            rows.append(
                DiagnosticsRow(
                    family=family,
                    k=int(k),
                    uniform_bound=uniform,
                    tightened_bound=tightened,
                    mc_var=mc,
                    mc_std_error=float(np.std(boot, ddof=1)),
                )
            )
    return rows


def emit_diagnostics_csv(rows: Sequence[DiagnosticsRow], path: str | Path) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(
            ["family", "k", "uniform_bound", "tightened_bound", "mc_var", "mc_std_error"]
        )
        for row in rows:
            writer.writerow(
                [
                    row.family,
                    row.k,
                    repr(row.uniform_bound),
                    repr(row.tightened_bound),
                    repr(row.mc_var),
                    repr(row.mc_std_error),
                ]
            )
