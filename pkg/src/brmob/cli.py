"""Command-line interface.

Subcommands: ``solve`` (domain + dataset to policy and bound), ``evaluate``
(policy regret estimate), ``experiment`` (config to CSV and optional SVG),
``diagnostics`` (bound-quality sweep), and ``figure`` (CSV to SVG).
Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .algorithms import BrmobConfig, brmob
from .bounds import Family, Policy
from .errors import BrmobError, ConfigError, SpecInvalid
from .evaluation import estimate_regret
from .harness import (
    bound_diagnostics,
    build_domain,
    domain_spec_from_dict,
    emit_csv,
    emit_diagnostics_csv,
    load_config,
    read_csv,
    run_experiment,
)
from .linalg import SpdMatrix
from .posterior import BanditDomain, LoggedDataset, posterior_update
from .svg import emit_figure

_EXPLICIT_DOMAIN_KEYS = {"features", "prior_mean", "prior_cov", "noise_std"}


def _load_json(path: str) -> object:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc


def load_domain(path: str) -> BanditDomain:
    """Domain from JSON: either a generator spec or explicit matrices."""
    payload = _load_json(path)
    if not isinstance(payload, dict):
        raise ConfigError("domain file must be a JSON object")
    if "kind" in payload:
        return build_domain(domain_spec_from_dict(payload))
    unknown = set(payload) - _EXPLICIT_DOMAIN_KEYS
    if unknown:
        raise ConfigError(f"unknown domain keys: {sorted(unknown)}")
    try:
        return BanditDomain(
            features=np.asarray(payload["features"], dtype=float),
            prior_mean=np.asarray(payload["prior_mean"], dtype=float),
            prior_cov=SpdMatrix(np.asarray(payload["prior_cov"], dtype=float)),
            noise_std=float(payload.get("noise_std", 1.0)),
        )
    except KeyError as exc:
        raise ConfigError(f"missing domain key: {exc}") from exc


def load_dataset(path: str, k: int) -> LoggedDataset:
    try:
        return LoggedDataset.from_csv(path, k)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc


def load_policy(path: str) -> Policy:
    payload = _load_json(path)
    if isinstance(payload, dict):
        payload = payload.get("weights")
    if not isinstance(payload, list):
        raise ConfigError("policy file must be a JSON list or {'weights': [...]}")
    return Policy(np.asarray(payload, dtype=float))


def _cmd_solve(args: argparse.Namespace) -> int:
    domain = load_domain(args.domain)
    data = load_dataset(args.data, domain.k)
    post = posterior_update(domain, data)
    cfg = BrmobConfig(
        delta=args.delta, tighten_iters=args.tighten_m, family=Family(args.family)
    )
    result = brmob(domain, post, cfg)
    json.dump(
        {
            "policy": [float(w) for w in result.policy.weights],
            "bound": result.bound,
            "delta": args.delta,
            "status": result.status.value,
            "trace": [
                {"iteration": it.index, "rho": it.rho} for it in result.trace
            ],
        },
        sys.stdout,
        indent=2,
    )
    sys.stdout.write("\n")
    return 0


def _cmd_evaluate(args: argparse.Namespace) -> int:
    domain = load_domain(args.domain)
    data = load_dataset(args.data, domain.k)
    post = posterior_update(domain, data)
    policy = load_policy(args.policy)
    estimate = estimate_regret(domain, post, policy, args.delta, args.samples, args.seed)
    json.dump(
        {
            "var_estimate": estimate.var_estimate,
            "mc_std_error": estimate.mc_std_error,
            "samples": estimate.samples,
            "delta": estimate.delta,
        },
        sys.stdout,
        indent=2,
    )
    sys.stdout.write("\n")
    return 0


def _cmd_experiment(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    if args.delta is not None:
        overrides["delta"] = args.delta
    if args.runs is not None:
        overrides["runs"] = args.runs
    if args.samples is not None:
        overrides["eval_samples"] = args.samples
    if args.tighten_m is not None:
        overrides["tighten_m"] = args.tighten_m
    if args.family is not None:
        overrides["family"] = Family(args.family)
    if overrides:
        from dataclasses import replace

        cfg = replace(cfg, **overrides)
    rows = run_experiment(cfg)
    emit_csv(rows, args.out)
    if args.svg:
        emit_figure(rows, args.svg)
    return 0


def _cmd_diagnostics(args: argparse.Namespace) -> int:
    rows = bound_diagnostics(delta=args.delta, samples=args.samples, seed=args.seed)
    emit_diagnostics_csv(rows, args.out)
    return 0


def _cmd_figure(args: argparse.Namespace) -> int:
    try:
        rows = read_csv(args.csv)
    except OSError as exc:
        raise ConfigError(f"cannot read {args.csv}: {exc}") from exc
    emit_figure(rows, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="brmob",
        description="Bayesian regret minimization for offline linear bandits",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="compute a policy and regret bound")
    solve.add_argument("--domain", required=True, help="domain JSON file")
    solve.add_argument("--data", required=True, help="logged dataset CSV")
    solve.add_argument("--delta", type=float, default=0.1)
    solve.add_argument("--tighten-m", type=int, default=0)
    solve.add_argument("--family", choices=["gaussian", "subgaussian"], default="gaussian")
    solve.set_defaults(func=_cmd_solve)

    evaluate = sub.add_parser("evaluate", help="estimate the regret of a policy")
    evaluate.add_argument("--domain", required=True)
    evaluate.add_argument("--data", required=True)
    evaluate.add_argument("--policy", required=True, help="policy JSON file")
    evaluate.add_argument("--delta", type=float, default=0.1)
    evaluate.add_argument("--samples", type=int, default=100000)
    evaluate.add_argument("--seed", type=int, default=0)
    evaluate.set_defaults(func=_cmd_evaluate)

    experiment = sub.add_parser("experiment", help="run a reproduction experiment")
    experiment.add_argument("--config", required=True, help="experiment config JSON")
    experiment.add_argument("--out", required=True, help="output CSV path")
    experiment.add_argument("--svg", help="optional output SVG path")
    experiment.add_argument("--seed", type=int)
    experiment.add_argument("--delta", type=float)
    experiment.add_argument("--runs", type=int)
    experiment.add_argument("--samples", type=int)
    experiment.add_argument("--tighten-m", type=int)
    experiment.add_argument("--family", choices=["gaussian", "subgaussian"])
    experiment.set_defaults(func=_cmd_experiment)

    diagnostics = sub.add_parser("diagnostics", help="bound-quality sweep")
    diagnostics.add_argument("--out", required=True)
    diagnostics.add_argument("--delta", type=float, default=0.1)
    diagnostics.add_argument("--samples", type=int, default=100000)
    diagnostics.add_argument("--seed", type=int, default=0)
    diagnostics.set_defaults(func=_cmd_diagnostics)

    figure = sub.add_parser("figure", help="render a result CSV to SVG")
    figure.add_argument("--csv", required=True)
    figure.add_argument("--out", required=True)
    figure.set_defaults(func=_cmd_figure)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, SpecInvalid) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BrmobError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
