"""Command-line front end: ``roughbessel {simulate,estimate,experiment,fbm}``.

Exit codes: 0 success, 2 usage/input error, 3 I/O or runtime error.
"""

import argparse
import json
import logging
import math
import os
import sys
import time
from pathlib import Path

from ._validation import DomainError
from .bessel import DEFAULT_EPSILON, ModelParams, simulate_prelimit
from .estimation import (
    DEFAULT_FLOOR,
    DegeneratePathError,
    ObservedPath,
    estimate_drift,
    estimate_hurst,
    estimate_sigma,
    estimate_sigma_plugin,
)
from .experiment import run_experiment
from .fbm import FgnMethod, MethodError, sample_fbm
from .io import (
    ConfigError,
    CsvFormatError,
    bessel_csv_text,
    fbm_csv_text,
    load_config,
    read_path_csv,
    write_manifest,
    write_plot_data,
    write_table,
)

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 2, 3
WORKERS_ENV = "ROUGHBESSEL_WORKERS"
# Cells longer than this need --allow-large (the T = 1000 drift cell has 10^7 steps).
LARGE_N = 2_000_000

log = logging.getLogger("roughbessel")


class UsageError(Exception):
    pass


def _positive_float(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not math.isfinite(v) or v <= 0:
        raise argparse.ArgumentTypeError(f"must be a finite positive number, got {text}")
    return v


def _hurst(text):
    v = _positive_float(text)
    if v >= 1:
        raise argparse.ArgumentTypeError(f"Hurst index must lie in (0, 1), got {text}")
    return v


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {text}")
    return v


def _seed(text):
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _emit(text, output):
    if output is None or output == "-":
        sys.stdout.write(text)
    else:
        with open(output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def cmd_simulate(args):
    params = ModelParams(x0=args.x0, a=args.a, sigma=args.sigma, hurst=args.hurst, epsilon=args.epsilon)
    driver = sample_fbm(args.n, args.T, params.hurst, args.seed, args.method)
    path = simulate_prelimit(params, driver)
    _emit(bessel_csv_text(path), args.output)
    return EXIT_OK


def cmd_fbm(args):
    driver = sample_fbm(args.n, args.T, args.hurst, args.seed, args.method)
    _emit(fbm_csv_text(driver), args.output)
    return EXIT_OK


def cmd_estimate(args):
    try:
        times, values = read_path_csv(args.input, args.column)
    except CsvFormatError as exc:
        raise UsageError(f"{args.input}: {exc}") from None
    obs = ObservedPath(values, float(times[-1]))
    if args.estimator == "hurst":
        result = estimate_hurst(obs)
    elif args.estimator == "sigma":
        if args.hurst is None:
            raise UsageError("--hurst is required for the 'sigma' estimator")
        result = estimate_sigma(obs, args.hurst)
    elif args.estimator == "sigma-plugin":
        result = estimate_sigma_plugin(obs)
    else:
        result = estimate_drift(obs, args.floor)
    _emit(json.dumps(result.to_dict(), sort_keys=True) + "\n", args.output)
    return EXIT_OK


def _default_workers():
    raw = os.environ.get(WORKERS_ENV)
    if raw is None:
        return None
    try:
        return _positive_int(raw)
    except argparse.ArgumentTypeError as exc:
        raise UsageError(f"{WORKERS_ENV}: {exc}") from None


def cmd_experiment(args):
    try:
        config = load_config(args.config)
    except ConfigError as exc:
        raise UsageError(f"{args.config}: config error at {exc}") from None
    too_big = [config.cell_id(i) for i, c in enumerate(config.cells) if c.n > LARGE_N]
    if too_big and not args.allow_large:
        raise UsageError(f"cells {too_big} exceed n={LARGE_N}; pass --allow-large to run them")

    workers = args.workers or _default_workers() or config.workers

    def progress(cell_id, done, total):
        log.info("%s: %d/%d", cell_id, done, total)

    summary = run_experiment(config, workers=workers, progress=progress)

    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    stem = Path(args.config).stem
    outputs = [write_table(summary, config, outdir / f"{stem}.csv")]
    if args.emit_plot_data:
        outputs.append(write_plot_data(summary, outdir / f"{stem}_estimates.csv"))
    timings = None
    if args.timings:
        timings = {c.cell_id: c.wall_time for c in summary.cells if c is not None}
        timings["total"] = summary.wall_time
    write_manifest(config, outputs, outdir / f"{stem}_manifest.json", timings)
    log.info("wall time %.1fs", summary.wall_time)
    for cell_id, exc in summary.errors.items():
        print(f"error: {exc}", file=sys.stderr)
    return EXIT_OK if summary.ok else EXIT_RUNTIME


def build_parser():
    parser = argparse.ArgumentParser(prog="roughbessel", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="simulate one path and write t,x,l,b CSV")
    sim.add_argument("--hurst", type=_hurst, required=True)
    sim.add_argument("--sigma", type=_positive_float, default=1.0)
    sim.add_argument("--a", type=_positive_float, default=2.0)
    sim.add_argument("--x0", type=_positive_float, default=1.0)
    sim.add_argument("--epsilon", type=_positive_float, default=DEFAULT_EPSILON)
    sim.add_argument("--n", type=_positive_int, required=True)
    sim.add_argument("--T", type=_positive_float, default=1.0)
    sim.add_argument("--seed", type=_seed, default=0)
    sim.add_argument("--method", choices=[m.value for m in FgnMethod], default="circulant")
    sim.add_argument("-o", "--output", help="output CSV (default: stdout)")
    sim.set_defaults(func=cmd_simulate)

    fbm = sub.add_parser("fbm", help="dump one fBm path as t,value CSV")
    fbm.add_argument("--hurst", type=_hurst, required=True)
    fbm.add_argument("--n", type=_positive_int, required=True)
    fbm.add_argument("--T", type=_positive_float, default=1.0)
    fbm.add_argument("--seed", type=_seed, default=0)
    fbm.add_argument("--method", choices=[m.value for m in FgnMethod], default="circulant")
    fbm.add_argument("-o", "--output")
    fbm.set_defaults(func=cmd_fbm)

    est = sub.add_parser("estimate", help="estimate a parameter from a path CSV")
    est.add_argument("input")
    est.add_argument("--estimator", choices=["hurst", "sigma", "sigma-plugin", "drift"], required=True)
    est.add_argument("--hurst", type=_hurst, help="known Hurst index (sigma estimator)")
    est.add_argument("--floor", type=_positive_float, default=DEFAULT_FLOOR)
    est.add_argument("--column", help="value column (default: x, else value)")
    est.add_argument("-o", "--output", help="output JSON (default: stdout)")
    est.set_defaults(func=cmd_estimate)

    exp = sub.add_parser("experiment", help="run a Monte Carlo config and write summary tables")
    exp.add_argument("config", help="TOML or JSON config")
    exp.add_argument("--outdir", default=".")
    exp.add_argument("--workers", type=_positive_int, help=f"worker processes (env {WORKERS_ENV})")
    exp.add_argument("--emit-plot-data", action="store_true", help="also write raw per-replication estimates")
    exp.add_argument("--allow-large", action="store_true", help=f"allow cells with n > {LARGE_N}")
    exp.add_argument("--timings", action="store_true", help="record wall times in the manifest")
    exp.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (UsageError, DomainError, DegeneratePathError) as exc:
        print(f"roughbessel: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, MethodError) as exc:
        print(f"roughbessel: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
