"""Command line front end: ``ncmax <subcommand> ...``.

Exit status is 0 on success, 1 when a check finds a violation (the report
is still written) and 2 on usage or input errors.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import weights as W
from .ingest import load_any
from .maximal import ma_operator, ma_point
from .quadrature import DivergenceError
from .rearrange import cesaro, dump_profile, mu_of_profile
from .spaces import (LogGrid, norm_l1_cap_linf, norm_l1_plus_linf, norm_lorentz, norm_lp,
                     norm_lpq, norm_marcinkiewicz)
from .suites import SUITES, emit_curve, run_example, run_suite


class UsageError(Exception):
    pass


def _read_profile(path: str):
    if path is None:
        raise UsageError("--in is required")
    text = sys.stdin.read() if path == "-" else Path(path).read_text()
    return load_any(text, name=path)


def _write(text: str, out: str | None) -> None:
    if out and out != "-":
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _parse_params(body: str) -> dict:
    params = {}
    for part in filter(None, body.split(",")):
        key, eq, val = part.partition("=")
        if not eq:
            raise UsageError(f"expected key=value, got {part!r}")
        params[key.strip()] = val.strip()
    return params


def _num(s: str) -> float:
    return math.inf if s.lower() in ("inf", "infinity") else float(s)


def parse_space(spec: str):
    """Map a space string such as ``lpq:p=2,q=1`` to a norm callable."""
    name, _, body = spec.partition(":")
    name = name.strip().lower()
    if name == "l1plusinf":
        return norm_l1_plus_linf
    if name == "l1capinf":
        return norm_l1_cap_linf
    if name == "weakl1":
        return lambda p: norm_lpq(p, 1.0, math.inf)
    if name == "lp":
        exponent = _num(_parse_params(body).get("p", "nan"))
        return lambda p: norm_lp(p, exponent)
    if name == "lpq":
        kv = _parse_params(body)
        pp, qq = _num(kv.get("p", "nan")), _num(kv.get("q", "nan"))
        return lambda p: norm_lpq(p, pp, qq)
    if name in ("lorentz", "marcinkiewicz"):
        # the weight itself may contain commas: logtype:2,0.5
        key, eq, weight = body.partition("=")
        if not eq or key.strip() not in ("phi", "psi"):
            raise UsageError(f"{name} needs phi=<weight> or psi=<weight>")
        w = W.parse_weight(weight)
        if name == "lorentz":
            return lambda p: norm_lorentz(p, w)
        return lambda p: norm_marcinkiewicz(p, w)
    raise UsageError(f"unknown space {spec!r}")


def _points(text: str | None) -> list[float]:
    if not text:
        raise UsageError("--points needs a comma-separated list of t values")
    return [float(x) for x in text.split(",") if x.strip()]


def cmd_mu(args) -> int:
    _write(mu_of_profile(_read_profile(args.inp)).to_csv(), args.out)
    return 0


def cmd_maximal(args) -> int:
    p = _read_profile(args.inp)
    if args.operator:
        _write(dump_profile(ma_operator(p)) + "\n", args.out)
    elif args.point is not None:
        _write(json.dumps(ma_point(p, args.point).to_dict()) + "\n", args.out)
    else:
        raise UsageError("maximal needs --point x or --operator")
    return 0


def cmd_cesaro(args) -> int:
    c = cesaro(mu_of_profile(_read_profile(args.inp)))
    ts = _points(args.points)
    if any(t <= 0 for t in ts):
        raise UsageError("Cesàro points must be positive")
    rows = "".join(f"{t:.17g},{float(c(t)):.17g}\n" for t in ts)
    _write("t,value\n" + rows, args.out)
    return 0


def cmd_norm(args) -> int:
    if not args.space:
        raise UsageError("norm needs --space")
    result = parse_space(args.space)(_read_profile(args.inp))
    _write(json.dumps(result.to_dict()) + "\n", args.out)
    return 0


def cmd_check(args) -> int:
    report = run_suite(args.suite, args.trials, args.seed, jobs=args.jobs)
    _write(report.to_json(), args.out)
    return 0 if report.passed else 1


def cmd_example(args) -> int:
    report = run_example(args.id, LogGrid(args.grid_min, args.grid_max, args.points or 241))
    _write(report.to_json(), args.out)
    return 0 if report.passed else 1


def cmd_emit(args) -> int:
    p = _read_profile(args.inp)
    obj = {"mu": lambda: mu_of_profile(p),
           "cesaro": lambda: cesaro(mu_of_profile(p)),
           "ma": lambda: mu_of_profile(ma_operator(p))}[args.kind]()
    _write(emit_curve(obj, args.points or 61, (args.grid_min, args.grid_max)), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ncmax", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def io_flags(p, need_in=True):
        if need_in:
            p.add_argument("--in", dest="inp", required=True,
                           help="profile JSON, matrix JSON/CSV or step-function CSV ('-' for stdin)")
        p.add_argument("--out", help="output path (default stdout)")

    p = sub.add_parser("mu", help="singular value function as step-function CSV")
    io_flags(p)
    p.set_defaults(func=cmd_mu)

    p = sub.add_parser("maximal", help="maximal function at a point or as an operator")
    io_flags(p)
    p.add_argument("--point", type=float)
    p.add_argument("--operator", action="store_true")
    p.set_defaults(func=cmd_maximal)

    p = sub.add_parser("cesaro", help="Cesàro transform of mu at given t")
    io_flags(p)
    p.add_argument("--points", help="comma-separated t values")
    p.set_defaults(func=cmd_cesaro)

    p = sub.add_parser("norm", help="symmetric norm of a profile")
    io_flags(p)
    p.add_argument("--space", help="e.g. lp:p=2, lpq:p=2,q=1, lorentz:phi=power:0.5, "
                                   "marcinkiewicz:psi=maxone, l1plusinf, l1capinf, weakl1")
    p.set_defaults(func=cmd_norm)

    p = sub.add_parser("check", help="run a randomised verification suite")
    p.add_argument("suite", choices=sorted(SUITES))
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--jobs", type=int, default=1)
    io_flags(p, need_in=False)
    p.set_defaults(func=cmd_check)

    def grid_flags(p, lo=1e-6, hi=1e6):
        p.add_argument("--grid-min", type=float, default=lo)
        p.add_argument("--grid-max", type=float, default=hi)
        p.add_argument("--points", type=int)

    p = sub.add_parser("example", help="worked range-space examples 1 and 2")
    p.add_argument("id", type=int, choices=(1, 2))
    grid_flags(p)
    io_flags(p, need_in=False)
    p.set_defaults(func=cmd_example)

    p = sub.add_parser("emit", help="sample a curve as CSV for plotting")
    p.add_argument("kind", choices=("mu", "cesaro", "ma"))
    io_flags(p)
    grid_flags(p, lo=1e-3, hi=1e3)
    p.set_defaults(func=cmd_emit)
    return ap


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ValueError, DivergenceError, OSError, KeyError, TypeError) as exc:
        print(f"ncmax: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
