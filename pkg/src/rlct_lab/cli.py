"""Command line front-end: λ values, enumeration tables, property suites and experiments."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Any, Sequence

from .algebra.rlct import (
    branch,
    expected_generalization,
    local_lambda,
    local_lambda_terms,
    regular_reference,
    rlct_closed_form,
    rlct_enumerate,
)
from .algebra.vandermonde import VandermondeInstance, h_function, sample_variety_point, variety_membership
from .config import ExperimentConfig, Settings
from .errors import BudgetExceededError, ConfigError, DomainError, InsufficientDataError, RlctLabError
from .inference.fitting import fit_lambda
from .inference.wbic import summarize_wbic
from .mixture.poisson import kl_mean_error, random_true_model, sq_surrogate
from .models import ModelSignature, PartitionSpec
from .pipeline import read_records, run_experiment
from .utils.artifacts import write_artifact
from .verification import SUITES, run_suite

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_BUDGET = 3
EXIT_PARTIAL = 4


def _emit(payload: dict[str, Any]) -> None:
    sys.stdout.write(json.dumps(payload, indent=2) + "\n")


def _signature(args: argparse.Namespace) -> ModelSignature:
    return ModelSignature(M=args.M, H=args.H, r=args.r)


def _sizes(raw: str) -> tuple[int, ...]:
    raw = raw.strip()
    if not raw:
        return ()
    try:
        return tuple(int(part) for part in raw.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got {raw!r}") from exc


def cmd_rlct(args: argparse.Namespace, settings: Settings) -> int:
    sig = _signature(args)
    value = rlct_closed_form(sig)
    _emit(
        {
            **value.to_dict(),
            "M": sig.M,
            "H": sig.H,
            "r": sig.r,
            "d_half": float(regular_reference(sig).value),
            "branch": branch(sig),
        }
    )
    return EXIT_OK


def cmd_enumerate(args: argparse.Namespace, settings: Settings) -> int:
    sig = _signature(args)
    result = rlct_enumerate(sig, budget=args.budget)
    rows = [
        {
            "partition": spec.label(),
            "r_prime": spec.r_prime,
            "lambda": str(value),
            "terms": [term.to_dict() for term in local_lambda_terms(spec, sig.M)],
            "is_min": value == result.value.value,
        }
        for spec, value in result.rows
    ]
    _emit(
        {
            "M": sig.M,
            "H": sig.H,
            "r": sig.r,
            "min": result.to_dict(),
            "closed_form": rlct_closed_form(sig).to_dict(),
            "rows": rows,
        }
    )
    return EXIT_OK


def cmd_verify(args: argparse.Namespace, settings: Settings) -> int:
    report = run_suite(args.suite, seed=args.seed)
    payload = report.to_dict()
    report_text = json.dumps(payload, indent=2)
    path = write_artifact(settings.output_dir, "verify", f"{args.suite}_seed{args.seed}", report_text, "json")
    payload["report_path"] = str(path)
    _emit(payload)
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


def cmd_variety(args: argparse.Namespace, settings: Settings) -> int:
    if len(args.true_sizes) != args.r:
        raise DomainError(f"expected {args.r} true group sizes, got {len(args.true_sizes)}")
    spec = PartitionSpec(args.r, args.true_sizes + args.ghost_sizes)
    truth = random_true_model(args.r, args.M, args.seed)
    w = sample_variety_point(spec, truth, args.seed)
    inst = VandermondeInstance(w, truth)
    tol = settings.truncation_tol
    _emit(
        {
            "partition": spec.label(),
            "truth": truth.params.to_dict(),
            "point": w.to_dict(),
            "membership": variety_membership(inst).to_dict(),
            "h": h_function(inst),
            "kl": kl_mean_error(w, truth, tol),
            "surrogate": sq_surrogate(w, truth, tol),
            "local_lambda": local_lambda(spec, args.M).to_dict(),
        }
    )
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace, settings: Settings) -> int:
    config = ExperimentConfig.from_json(args.config)
    if args.output is not None:
        config = replace(config, output_path=args.output)
    if args.seed is not None:
        config = replace(config, sampler=replace(config.sampler, seed=args.seed))

    run = run_experiment(config, settings)
    _emit(
        {
            "config_hash": config.config_hash,
            "output_path": str(config.output_path),
            "records": len(run.records),
            "computed": run.computed,
            "resumed": run.resumed,
            "failures": [{"n": f.n, "rep": f.rep, "error": f.error} for f in run.failures],
        }
    )
    return EXIT_OK if run.complete else EXIT_PARTIAL


def cmd_fit(args: argparse.Namespace, settings: Settings) -> int:
    if not args.csv.exists():
        raise ConfigError(f"results file not found: {args.csv}")
    records = read_records(args.csv)
    if not records:
        raise ConfigError(f"{args.csv} holds no records")
    first = records[0]
    sig = ModelSignature(M=first.M, H=first.H, r=first.r)
    theory = float(rlct_closed_form(sig).value)
    wbic = summarize_wbic(records)

    try:
        fit = fit_lambda(records, n_min=args.n_min)
    except InsufficientDataError as exc:
        if not wbic:
            raise
        logger.warning("no 1/n fit for %s: %s", args.csv, exc)
        _emit(
            {
                "lambda_hat": None,
                "lambda_theory": theory,
                "wbic": [summary.to_dict(lambda_theory=theory) for summary in wbic],
            }
        )
        return EXIT_OK

    payload = fit.to_dict(lambda_theory=theory)
    if wbic:
        payload["wbic"] = [summary.to_dict(lambda_theory=theory) for summary in wbic]
    plot = fit.plot_csv(theory=lambda n: expected_generalization(sig, n, first.l0) - first.l0)
    payload["plot_data"] = str(write_artifact(settings.output_dir, "fit", f"{args.csv.stem}_plot", plot, "csv"))
    _emit(payload)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rlct-lab",
        description="Learning coefficients of Poisson mixtures: exact values and simulation checks.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="Log at DEBUG level.")
    sub = parser.add_subparsers(dest="command", required=True)

    def signature_flags(target: argparse.ArgumentParser) -> None:
        target.add_argument("--M", type=int, required=True, help="Data dimension.")
        target.add_argument("--H", type=int, required=True, help="Number of model components.")
        target.add_argument("--r", type=int, required=True, help="Number of true components.")

    rlct = sub.add_parser("rlct", help="Closed-form learning coefficient.")
    signature_flags(rlct)
    rlct.set_defaults(handler=cmd_rlct)

    enumerate_cmd = sub.add_parser("enumerate", help="Local λ of every partition and their minimum.")
    signature_flags(enumerate_cmd)
    enumerate_cmd.add_argument("--budget", type=int, default=12, help="Largest H to enumerate.")
    enumerate_cmd.set_defaults(handler=cmd_enumerate)

    verify = sub.add_parser("verify", help="Run a property suite.")
    verify.add_argument("--suite", default="all", help=f"One of {sorted(SUITES) + ['all']}.")
    verify.add_argument("--seed", type=int, default=0)
    verify.set_defaults(handler=cmd_verify)

    variety = sub.add_parser("variety", help="Build a point of the variety for a partition.")
    variety.add_argument("--M", type=int, required=True)
    variety.add_argument("--r", type=int, required=True)
    variety.add_argument("--true-sizes", type=_sizes, required=True, help="e.g. 2,1")
    variety.add_argument("--ghost-sizes", type=_sizes, default=(), help="e.g. 1")
    variety.add_argument("--seed", type=int, default=0)
    variety.set_defaults(handler=cmd_variety)

    simulate = sub.add_parser("simulate", help="Run an experiment grid from a JSON config.")
    simulate.add_argument("--config", type=Path, required=True)
    simulate.add_argument("--output", type=Path, default=None, help="Override the CSV path.")
    simulate.add_argument("--seed", type=int, default=None, help="Override the sampler seed.")
    simulate.set_defaults(handler=cmd_simulate)

    fit = sub.add_parser("fit", help="Fit λ from an experiment CSV.")
    fit.add_argument("--csv", type=Path, required=True)
    fit.add_argument("--n-min", type=int, default=None, help="Ignore sample sizes below this.")
    fit.set_defaults(handler=cmd_fit)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        settings = Settings.from_env()
    except ConfigError as exc:
        sys.stderr.write(f"rlct-lab: {exc}\n")
        return EXIT_USAGE
    level = "DEBUG" if args.verbose else settings.log_level
    logging.basicConfig(
        level=getattr(logging, level, logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )

    try:
        return args.handler(args, settings)
    except BudgetExceededError as exc:
        logger.error("%s", exc)
        return EXIT_BUDGET
    except (ConfigError, DomainError) as exc:
        logger.error("%s", exc)
        return EXIT_USAGE
    except RlctLabError as exc:
        logger.error("%s", exc)
        return EXIT_CHECK_FAILED


if __name__ == "__main__":
    sys.exit(main())
