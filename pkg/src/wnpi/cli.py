"""Command-line front door.

Exit codes: 0 success, 1 verification failure, 2 input/parse error,
3 violated mathematical precondition.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .errors import PreconditionError, SpecFormatError
from .gausskernel import t_transform_gauss
from .pathint import ho_propagator
from .serialize import load_gauss_spec, load_phase_function
from .verify import SUITE_NAMES, run_suite

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INPUT_ERROR = 2
EXIT_PRECONDITION = 3


def _default_seed() -> int:
    return int(os.environ.get("WNPI_SEED", "0"))


def _parse_dims(text: str) -> tuple:
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            lo, hi = int(lo), int(hi)
        else:
            lo = hi = int(text)
    except ValueError:
        raise SpecFormatError(f"--dims expects N or LO..HI, got {text!r}")
    if not 1 <= lo <= hi:
        raise SpecFormatError(f"--dims range must satisfy 1 <= lo <= hi, got {text!r}")
    return lo, hi


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wnpi",
        description="White-noise engine for phase-space path integrals with quadratic action.",
    )
    parser.add_argument("--version", action="version", version=f"wnpi {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    tt = sub.add_parser("ttransform", help="evaluate a Gauss-kernel T-transform")
    tt.add_argument("--spec", required=True, help="kernel spec JSON file")
    tt.add_argument("--f", dest="probe", required=True, help="probe function JSON file")

    vf = sub.add_parser("verify", help="run a verification suite")
    vf.add_argument("--suite", required=True, choices=SUITE_NAMES + ("all",))
    vf.add_argument("--tol", type=float, default=1.0,
                    help="multiplier applied to every default tolerance")
    vf.add_argument("--seed", type=int, default=None,
                    help="RNG seed (default: WNPI_SEED or 0)")
    vf.add_argument("--samples", type=int, default=200_000,
                    help="Monte Carlo sample count for stochastic checks")
    vf.add_argument("--dims", default="1..3", help="grid-cell range for the oracle corpus")
    vf.add_argument("--json", action="store_true", help="emit the JSON report")
    vf.add_argument("--timings", action="store_true",
                    help="include wall-clock timings in the JSON report (non-deterministic)")

    pg = sub.add_parser("propagator", help="tabulate the oscillator propagator")
    pg.add_argument("--k", type=float, required=True)
    pg.add_argument("--t", type=float, required=True)
    pg.add_argument("--y-min", type=float, required=True)
    pg.add_argument("--y-max", type=float, required=True)
    pg.add_argument("--y-steps", type=int, required=True)
    pg.add_argument("--n", type=int, default=64, help="grid resolution")
    pg.add_argument("--format", choices=("csv", "json"), default="csv")
    pg.add_argument("--plot-data", action="store_true",
                    help="emit columnar JSON arrays ready for plotting")
    return parser


def _cmd_ttransform(args) -> int:
    spec = load_gauss_spec(args.spec)
    probe = load_phase_function(args.probe)
    value = t_transform_gauss(spec, probe)
    print(f"{value.real:.16e} {value.imag:.16e}")
    return EXIT_OK


def _cmd_verify(args) -> int:
    seed = _default_seed() if args.seed is None else args.seed
    report = run_suite(args.suite, seed=seed, tol_scale=args.tol,
                       samples=args.samples, dims=_parse_dims(args.dims))
    if args.json:
        sys.stdout.write(report.to_json(include_timings=args.timings))
    else:
        for c in report.checks:
            dev = "-" if c.deviation is None else f"{c.deviation:.3e}"
            tol = "-" if c.tolerance is None else f"{c.tolerance:.3e}"
            print(f"{c.status.upper():7s} {c.check_id:35s} deviation={dev} tol={tol} {c.note}")
        counts = report.counts
        print(f"suite={report.suite} seed={report.seed} "
              f"pass={counts['pass']} fail={counts['fail']} skipped={counts['skipped']}")
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


def _cmd_propagator(args) -> int:
    if args.y_steps < 1:
        raise SpecFormatError("--y-steps must be >= 1")
    ys = np.linspace(args.y_min, args.y_max, args.y_steps)
    rows = []
    for y in ys:
        r = ho_propagator(args.k, args.t, float(y), n=args.n)
        v = r.grid_value
        rows.append({
            "y": float(y),
            "re": v.real,
            "im": v.imag,
            "abs": abs(v),
            "arg": float(np.angle(v)),
            "deviation_vs_closed_form": r.deviation,
        })
    if args.format == "csv":
        print("y,re,im,abs,arg,deviation_vs_closed_form")
        for row in rows:
            print(",".join(repr(row[k]) for k in
                           ("y", "re", "im", "abs", "arg", "deviation_vs_closed_form")))
    else:
        payload = {"k": args.k, "t": args.t, "n": args.n}
        if args.plot_data:
            payload["columns"] = {key: [row[key] for row in rows] for key in rows[0]}
        else:
            payload["rows"] = rows
        print(json.dumps(payload, indent=2))
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "ttransform":
            return _cmd_ttransform(args)
        if args.command == "verify":
            return _cmd_verify(args)
        if args.command == "propagator":
            return _cmd_propagator(args)
        parser.error(f"unknown command {args.command!r}")
    except SpecFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except PreconditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
