"""Command-line interface: test, simulate, mc, contour.

Exit codes: 0 success (independent of the test decision), 2 input or
configuration error, 3 numerical failure inside the pipeline.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .dgp import DgpSpec, simulate
from .funcseries import read_series_csv, write_coefficient_csv
from .mcharness import (ExperimentSpec, PRESETS, contour_gamma, preset_spec,
                        run_experiment, write_contour)
from .teststat import PipelineError, TestConfig, run_test

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERICAL = 3


def _env_threads(value):
    if value is not None:
        return value
    return int(os.environ.get("ARTIFACT_THREADS", "1"))


def _env_out_dir(value):
    if value is not None:
        return value
    return os.environ.get("ARTIFACT_OUT_DIR", ".")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="artifact",
        description="Frequency-domain stationarity testing for functional "
                    "time series.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_test = sub.add_parser(
        "test", help="run the stationarity test on a CSV series")
    p_test.add_argument("input", help="curve CSV (tau_* header) or "
                                      "coefficient CSV (c* header)")
    p_test.add_argument("--variant", choices=("eigen", "fixed"),
                        default="eigen", help="statistic variant "
                        "(default: eigen)")
    p_test.add_argument("--M", type=int, default=1,
                        help="number of lags h_m = m (default: 1)")
    p_test.add_argument("--lags", type=int, nargs="+", default=None,
                        help="explicit lag list overriding h_m = m")
    p_test.add_argument("--bandwidth", type=float, default=None,
                        help="spectral bandwidth in radians "
                             "(default: 2*pi*T^(-1/5))")
    p_test.add_argument("--bandwidth4", type=float, default=None,
                        help="fourth-order bandwidth in radians "
                             "(default: T^(-1/6))")
    p_test.add_argument("--L", type=int, default=None,
                        help="override the selected projection dimension")
    p_test.add_argument("--alpha", type=float, default=0.05,
                        help="significance level (default: 0.05)")
    p_test.add_argument("--no-demean", action="store_true",
                        help="skip centering the series")
    p_test.add_argument("--no-fourth", action="store_true",
                        help="drop the fourth-order variance term")
    p_test.add_argument("--n-basis", type=int, default=15,
                        help="basis size for curve CSV input (default: 15)")
    p_test.add_argument("--output", default=None,
                        help="result JSON path (default: stdout)")

    p_sim = sub.add_parser("simulate", help="simulate a benchmark model")
    p_sim.add_argument("--model", required=True,
                       help="model id a..h")
    p_sim.add_argument("--T", type=int, required=True, help="sample size")
    p_sim.add_argument("--seed", type=int, default=0, help="RNG seed")
    p_sim.add_argument("--law", choices=("gaussian", "t", "beta66"),
                       default=None, help="innovation law (default: gaussian; "
                       "models g/h default to t(19)/t(10))")
    p_sim.add_argument("--df", type=float, default=None,
                       help="degrees of freedom for the t law")
    p_sim.add_argument("--output", required=True,
                       help="coefficient CSV output path")

    p_mc = sub.add_parser("mc", help="run a Monte Carlo experiment")
    p_mc.add_argument("--preset", choices=sorted(PRESETS), default=None,
                      help="named experiment preset")
    p_mc.add_argument("--models", nargs="+", default=None, help="model ids")
    p_mc.add_argument("--sizes", type=int, nargs="+", default=None,
                      help="sample sizes T")
    p_mc.add_argument("--variants", nargs="+", default=("eigen",),
                      choices=("eigen", "fixed"), help="statistic variants")
    p_mc.add_argument("--M", type=int, nargs="+", default=(1,),
                      help="lag counts (default: 1)")
    p_mc.add_argument("--reps", type=int, default=200,
                      help="replications per cell (default: 200)")
    p_mc.add_argument("--seed", type=int, default=0, help="master seed")
    p_mc.add_argument("--law", default=None,
                      choices=("gaussian", "t", "beta66"),
                      help="override the per-model innovation law")
    p_mc.add_argument("--df", type=float, default=19.0,
                      help="degrees of freedom for the t law (default: 19)")
    p_mc.add_argument("--out-dir", default=None,
                      help="output directory (default: $ARTIFACT_OUT_DIR or .)")
    p_mc.add_argument("--threads", type=int, default=None,
                      help="worker processes (default: $ARTIFACT_THREADS or 1)")
    p_mc.add_argument("--allow-large", action="store_true",
                      help="permit T beyond 512")

    p_ct = sub.add_parser(
        "contour", help="averaged |gamma_1|^2 surface for a model")
    p_ct.add_argument("--model", required=True, help="model id a..h")
    p_ct.add_argument("--T", type=int, required=True, help="sample size")
    p_ct.add_argument("--variant", choices=("eigen", "fixed"),
                      default="eigen", help="statistic variant")
    p_ct.add_argument("--reps", type=int, default=50,
                      help="replications to average (default: 50)")
    p_ct.add_argument("--seed", type=int, default=0, help="master seed")
    p_ct.add_argument("--grid", type=int, default=64,
                      help="grid resolution per axis (default: 64)")
    p_ct.add_argument("--threads", type=int, default=None,
                      help="worker processes (default: $ARTIFACT_THREADS or 1)")
    p_ct.add_argument("--output", required=True, help="contour CSV path")
    return parser


def cmd_test(args) -> int:
    try:
        series = read_series_csv(args.input, n_basis=args.n_basis,
                                 demean=not args.no_demean)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        config = TestConfig(
            variant=args.variant,
            M=args.M if args.lags is None else len(args.lags),
            lags=tuple(args.lags) if args.lags else None,
            bandwidth=args.bandwidth,
            bandwidth4=args.bandwidth4,
            L=args.L,
            alpha=args.alpha,
            demean=not args.no_demean,
            include_fourth=not args.no_fourth,
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        result = run_test(series, config)
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    payload = json.dumps(result.to_dict(), indent=2)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(payload + "\n")
    else:
        print(payload)
    return EXIT_OK


def cmd_simulate(args) -> int:
    from .mcharness import default_law
    law, df = default_law(args.model) if args.law is None else \
        (args.law, args.df if args.df is not None else 19.0)
    try:
        spec = DgpSpec(args.model, args.T, seed=args.seed, law=law, df=df)
        series = simulate(spec)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    write_coefficient_csv(args.output, series)
    return EXIT_OK


def cmd_mc(args) -> int:
    overrides = dict(
        replications=args.reps,
        seed=args.seed,
        law=args.law,
        df=args.df,
        out_dir=_env_out_dir(args.out_dir),
        threads=_env_threads(args.threads),
        allow_large=args.allow_large,
    )
    try:
        if args.preset:
            spec = preset_spec(args.preset, **overrides)
        else:
            if not args.models or not args.sizes:
                raise ValueError("--models and --sizes are required "
                                 "without --preset")
            spec = ExperimentSpec(
                models=tuple(args.models),
                sample_sizes=tuple(args.sizes),
                variants=tuple(args.variants),
                M_values=tuple(args.M),
                **overrides,
            )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        rows = run_experiment(spec)
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    for row in rows:
        print(f"{row['model']} T={row['T']} {row['variant']} M={row['M']}: "
              f"median_Q={row['median_Q']:.2f} rej05={row['rej05']:.1f}% "
              f"rej01={row['rej01']:.1f}% avg_L={row['avg_L']:.2f} "
              f"aTVE={row['aTVE']:.3f}")
    return EXIT_OK


def cmd_contour(args) -> int:
    try:
        grid = contour_gamma(args.model, args.T, variant=args.variant,
                             replications=args.reps, seed=args.seed,
                             G=args.grid, threads=_env_threads(args.threads))
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (RuntimeError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    write_contour(args.output, grid)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handler = {
        "test": cmd_test,
        "simulate": cmd_simulate,
        "mc": cmd_mc,
        "contour": cmd_contour,
    }[args.command]
    return handler(args)


if __name__ == "__main__":
    sys.exit(main())
