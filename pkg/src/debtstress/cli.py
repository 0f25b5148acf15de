"""Command-line entry point: ``debtstress <command> [options]``.

Exit codes: 0 success, 2 usage error, 3 invalid input data or configuration,
4 computation failure.
"""
from __future__ import annotations

import argparse
import logging
import sys
import warnings

import numpy as np
import yaml

from .core import DegenerateEconomyError, ProjectionError
from .econometrics import (DegenerateDesignError, InsufficientDataError, QRConvergenceError,
                           RankDeficientError)
from .ingest import DatasetManifest, DataError, default_manifest
from .stochastic import FactorizationError

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_COMPUTATION = 0, 2, 3, 4

COMPUTATION_ERRORS = (ProjectionError, DegenerateEconomyError, FactorizationError,
                      QRConvergenceError, RankDeficientError, DegenerateDesignError,
                      InsufficientDataError, np.linalg.LinAlgError, FloatingPointError)
VALIDATION_ERRORS = (DataError, ValueError, KeyError, FileNotFoundError, yaml.YAMLError)


class UsageError(Exception):
    pass


def _levels(text):
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad percentile list {text!r}") from None
    if not vals or not all(0 < v < 100 for v in vals):
        raise argparse.ArgumentTypeError("percentiles must lie in (0, 100)")
    return vals


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--manifest", help="dataset manifest (YAML); defaults to the shipped data")
    common.add_argument("--out", help="directory for structured output files")
    common.add_argument("--format", choices=("table", "json", "csv"), default="table",
                        help="standard output: text tables, the JSON report, or the main table as CSV")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="debtstress", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("baseline", parents=[common], help="baseline debt path and decomposition")
    b.add_argument("--config")
    b.add_argument("--end-year", type=int)

    s = sub.add_parser("scenario", parents=[common], help="disaster scenario against the baseline")
    s.add_argument("--config")
    s.add_argument("--mode", choices=("one_off", "per_period", "local_projection",
                                      "quantile_regression"))
    s.add_argument("--seed", type=int)
    s.add_argument("--appendix-four-channel", action="store_true",
                   help="also shock inflation and interest (econometric modes only)")

    f = sub.add_parser("fan", parents=[common], help="Monte Carlo fan chart")
    f.add_argument("--config")
    f.add_argument("--iterations", type=int)
    f.add_argument("--seed", type=int)
    f.add_argument("--percentiles", type=_levels)
    f.add_argument("--thresholds", type=_levels, default=None,
                   help="exceedance thresholds in percent of GDP (default 60)")
    f.add_argument("--workers", type=int, default=1)
    f.add_argument("--dump-paths", action="store_true", help="also write every simulated path")

    e = sub.add_parser("estimate", parents=[common], help="estimate LP or QR coefficients on a panel")
    e.add_argument("--config")
    e.add_argument("--model", choices=("LP", "QR", "lp", "qr"), default="LP")
    e.add_argument("--outcome", default="gdp_growth")
    e.add_argument("--horizons", default="0,1,2")
    e.add_argument("--tau", type=float, default=0.95)
    e.add_argument("--cluster", action="store_true", help="country-clustered standard errors")
    e.add_argument("--coefficients-out", help="coefficient file to write")

    c = sub.add_parser("counterfactual", parents=[common],
                       help="compare two econometric scenarios")
    c.add_argument("--config", action="append", default=[],
                   help="scenario config; give twice (A then B)")
    c.add_argument("--mode", choices=("local_projection", "quantile_regression"))
    c.add_argument("--appendix-four-channel", action="store_true")
    return p


def _manifest(args) -> DatasetManifest:
    if args.manifest is None:
        return default_manifest()
    try:
        return DatasetManifest.load(args.manifest)
    except DataError as exc:
        if "lists no files" in str(exc):
            raise UsageError(f"{args.manifest}: {exc}") from exc
        raise


def run(args) -> int:
    from . import report as R

    manifest = _manifest(args)
    if args.command == "baseline":
        rep = R.baseline_report(manifest, args.end_year, R.load_config(args.config))
    elif args.command == "scenario":
        rep = R.scenario_report(manifest, R.load_config(args.config), mode=args.mode, seed=args.seed,
                                four_channel=args.appendix_four_channel)
    elif args.command == "fan":
        thr = [t / 100.0 for t in args.thresholds] if args.thresholds else [R.MAASTRICHT]
        rep = R.fan_report(manifest, R.load_config(args.config), n=args.iterations, seed=args.seed,
                           levels=args.percentiles, thresholds=thr, workers=args.workers,
                           paths_dump=args.dump_paths)
    elif args.command == "estimate":
        cfg = R.load_config(args.config)
        horizons = [int(h) for h in str(cfg.get("horizons", args.horizons)).split(",")]
        rep = R.estimate_report(manifest, cfg.get("model", args.model), cfg.get("outcome", args.outcome),
                                horizons, float(cfg.get("tau", args.tau)), args.cluster)
        if args.coefficients_out:
            R.write_estimates(rep, args.coefficients_out)
    elif args.command == "counterfactual":
        if len(args.config) != 2:
            raise UsageError("counterfactual needs exactly two --config files (A then B)")
        rep = R.counterfactual_report(manifest, R.load_config(args.config[0]),
                                      R.load_config(args.config[1]), mode=args.mode,
                                      four_channel=args.appendix_four_channel)
    else:   # argparse guards this
        raise UsageError(args.command)
    if args.out:
        rep.write(args.out)
    if args.format == "json":
        sys.stdout.write(rep.to_json() + "\n")
    elif args.format == "csv":
        sys.stdout.write(rep.render_csv())
    else:
        sys.stdout.write(rep.render_text())
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    warnings.simplefilter("default")
    try:
        return run(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except COMPUTATION_ERRORS as exc:
        print(f"computation error: {exc}", file=sys.stderr)
        return EXIT_COMPUTATION
    except VALIDATION_ERRORS as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
