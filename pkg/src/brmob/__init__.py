"""Bayesian regret minimization for offline linear bandits.

Infers a Gaussian posterior over the reward parameter from logged data,
minimizes analytical value-at-risk bounds on the Bayesian regret via
conic programs, runs LCB/greedy/scenario baselines, and verifies every
bound by Monte-Carlo evaluation.
"""

from .algorithms import (
    BrmobConfig,
    BrmobResult,
    FlatOpoConfig,
    brmob,
    chebyshev_projection_data,
    flatopo,
    greedy,
    hc_return_policy,
    scenario_cvar,
    scenario_var_deterministic,
    scenario_worst_case,
)
from .bounds import (
    BoundCoefficients,
    CredibleEllipsoid,
    Family,
    Policy,
    RegretProjection,
    TailWeights,
    action_set_bound,
    bound_for_policy,
    combined_nu,
    parameter_space_bound,
    regret_projection,
)
from .errors import (
    BrmobError,
    ConfigError,
    DimensionMismatch,
    EmptyDataset,
    EmptySample,
    InsufficientSamples,
    NotPositiveDefinite,
    OutOfRange,
    SpecInvalid,
)
from .evaluation import RegretEstimate, estimate_regret, flatopo_coverage_bound, brmob_coverage_bound
from .harness import (
    DiagnosticsRow,
    DomainKind,
    DomainSpec,
    ExperimentConfig,
    ResultRow,
    bound_diagnostics,
    build_domain,
    emit_csv,
    read_csv,
    run_experiment,
)
from .linalg import (
    SpdFactor,
    SpdMatrix,
    cholesky,
    inverse_weighted_norm,
    max_eigenvalue,
    spd_inverse,
    weighted_norm,
)
from .posterior import (
    BanditDomain,
    CoverageEstimate,
    GaussianPosterior,
    LoggedDataset,
    coverage_gamma,
    posterior_update,
    prior_posterior,
    sample_posterior,
    simulate_logged_data,
)
from .programs import (
    MinMaxNormProblem,
    SolveReport,
    SolveStatus,
    solve_cvar_lp,
    solve_hc_return,
    solve_min_max_norm,
    solve_worst_case,
    solve_xi_tightening,
)
from .risk import (
    GaussianScalar,
    RiskLevel,
    chi2_quantile,
    empirical_cvar,
    empirical_var,
    evar_gaussian,
    normal_quantile,
    subgaussian_evar_bound,
    var_gaussian,
)
from .svg import emit_figure

__version__ = "0.1.0"
