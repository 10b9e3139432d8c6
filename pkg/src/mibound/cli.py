"""Command-line entry point.

Exit codes: 0 ok, 2 invalid input, 3 uncertified bound, 4 output not writable.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .ci import DEFAULT_DELTA, mi_confidence_floor, read_counts
from .dist import DistributionError, JointDist, mutual_information
from .solver import SolverConfig
from .sweep import DEFAULT_POINTS, REFINE_TOL_BITS, lower_bound, make_grid, summarize, sweep, write_curve_csv

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_UNCERTIFIED = 3
EXIT_IO = 4


class InputError(Exception):
    pass


def _read_text(source: str) -> str:
    if source == "-":
        return sys.stdin.read()
    try:
        return Path(source).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {source}: {exc.strerror}") from None


def _load_joint(source: str, policy: str) -> JointDist:
    text = source if source.lstrip().startswith("{") else _read_text(source)
    try:
        return JointDist.from_json(text, policy)
    except DistributionError as exc:
        raise InputError(f"{type(exc).__name__}: {exc}") from None


def _eps(text: str) -> float:
    val = float(text)
    if not 0 <= val <= 2:
        raise argparse.ArgumentTypeError("eps must lie in [0, 2]")
    return val


def _points(text: str) -> int:
    val = int(text)
    if val < 1:
        raise argparse.ArgumentTypeError("points must be at least 1")
    return val


def _solver_cfg(args) -> SolverConfig:
    try:
        return SolverConfig(gap_tol=args.gap_tol, max_iters=args.max_iters)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _fmt(value: float, decimals: int = 4) -> str:
    out = f"{value:.{decimals}f}"
    # avoid printing -0.0000 for tiny negative noise
    return out[1:] if out.startswith("-") and float(out) == 0 else out


def cmd_mi(args) -> int:
    p = _load_joint(args.input, args.policy)
    info = mutual_information(p)
    if args.json:
        print(json.dumps({"I_bits": info.bits, "I_nats": info.nats, "pxy": p.values.tolist()}))
    else:
        print(_fmt(info.in_unit(args.unit)))
    return EXIT_OK


def cmd_bound(args) -> int:
    p = _load_joint(args.input, args.policy)
    report = lower_bound(p, args.eps, args.points, _solver_cfg(args), refine=args.refine)
    if args.json:
        print(json.dumps(report.to_dict()))
    else:
        unit = args.unit
        print(f"I(p)       {_fmt(report.i_of_p.in_unit(unit))} {unit}")
        print(f"bound      {_fmt(report.bound.in_unit(unit))} {unit}")
        print(f"arg_gamma  {report.arg_gamma:.6f}")
        if report.refine_delta_bits is not None:
            print(f"refine     {report.refine_delta_bits:.3e} bits")
    if args.refine and not report.refined_ok:
        print(f"warning: doubling the grid moved the bound by more than {REFINE_TOL_BITS:g} bits",
              file=sys.stderr)
    for msg in report.warnings:
        print(f"warning: {msg}", file=sys.stderr)
    return EXIT_OK if report.certified else EXIT_UNCERTIFIED


def cmd_sweep(args) -> int:
    p = _load_joint(args.input, args.policy)
    curve = sweep(p, args.eps, make_grid(args.eps, args.points), _solver_cfg(args))
    report = summarize(p, args.eps, curve)
    if args.out == "-":
        write_curve_csv(curve, sys.stdout)
        summary_stream = sys.stderr
    else:
        try:
            with open(args.out, "w", newline="") as fh:
                write_curve_csv(curve, fh)
        except OSError as exc:
            print(f"error: cannot write {args.out}: {exc.strerror}", file=sys.stderr)
            return EXIT_IO
        summary_stream = sys.stdout
    unit = args.unit
    print(
        f"{len(curve)} points, min I = {_fmt(report.bound.in_unit(unit))} {unit} "
        f"at gamma = {report.arg_gamma:.6f}",
        file=summary_stream,
    )
    for msg in report.warnings:
        print(f"warning: {msg}", file=sys.stderr)
    return EXIT_OK if report.certified else EXIT_UNCERTIFIED


def cmd_ci(args) -> int:
    try:
        counts = read_counts(open(args.input) if args.input != "-" else sys.stdin)
    except OSError as exc:
        raise InputError(f"cannot read {args.input}: {exc.strerror}") from None
    except DistributionError as exc:
        raise InputError(f"{type(exc).__name__}: {exc}") from None
    if not 0 < args.delta < 1:
        raise InputError("delta must lie in (0, 1)")
    try:
        rep = mi_confidence_floor(counts, args.delta, args.points, _solver_cfg(args))
    except DistributionError as exc:
        raise InputError(f"{type(exc).__name__}: {exc}") from None
    if args.json:
        print(json.dumps(rep.to_dict()))
    else:
        unit = args.unit
        print(f"n          {rep.n}")
        print(f"I(p_hat)   {_fmt(rep.i_hat.in_unit(unit))} {unit}")
        print(f"eps        {rep.eps:.6f}")
        print(f"floor      {_fmt(rep.floor.in_unit(unit))} {unit}")
    for msg in rep.bound.warnings:
        print(f"warning: {msg}", file=sys.stderr)
    return EXIT_OK if rep.bound.certified else EXIT_UNCERTIFIED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mibound",
        description="Lower bounds on the mutual information of a binary and a finite "
        "random variable over an L1 ball of joint distributions.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--unit", choices=("bits", "nats"), default="bits")
    common.add_argument("--json", action="store_true", help="machine-readable output")

    joint = argparse.ArgumentParser(add_help=False)
    joint.add_argument("input", help='JSON file, "-" for stdin, or inline {"pxy": [[...], [...]]}')
    joint.add_argument("--policy", choices=("strict", "renormalize"), default="strict")

    solver = argparse.ArgumentParser(add_help=False)
    solver.add_argument("--points", type=_points, default=DEFAULT_POINTS, help="gamma grid size")
    solver.add_argument("--gap-tol", type=float, default=SolverConfig.gap_tol, help="nats")
    solver.add_argument("--max-iters", type=int, default=SolverConfig.max_iters)

    p_mi = sub.add_parser("mi", parents=[common, joint], help="mutual information of a joint")
    p_mi.set_defaults(func=cmd_mi)

    p_bound = sub.add_parser("bound", parents=[common, joint, solver], help="minimum MI over the L1 ball")
    p_bound.add_argument("--eps", type=_eps, required=True)
    p_bound.add_argument("--refine", action="store_true", help="also run with twice the points")
    p_bound.set_defaults(func=cmd_bound)

    p_sweep = sub.add_parser("sweep", parents=[common, joint, solver], help="write the gamma curve as CSV")
    p_sweep.add_argument("--eps", type=_eps, required=True)
    p_sweep.add_argument("--out", default="-", help='CSV path, "-" for stdout')
    p_sweep.set_defaults(func=cmd_sweep)

    p_ci = sub.add_parser("ci", parents=[common, solver], help="confidence floor from a counts file")
    p_ci.add_argument("input", help='counts file (two lines of integers) or "-"')
    p_ci.add_argument("--delta", type=float, default=DEFAULT_DELTA)
    p_ci.set_defaults(func=cmd_ci)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
