"""Command-line interface.

Exit codes: 0 on success, 1 for usage or configuration errors, 2 when a
computation fails numerically (precision exhaustion, missing zeros, ...).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .asymptotics import (
    AsymptoticWindow,
    RegimeError,
    left_tail_estimate,
    oscillatory_estimate,
    right_tail_estimate,
)
from .numerics import DEFAULT_BITS, DEFAULT_TAIL_TOL, QContext, ScaledReal, make_context, parse_exact
from .partition import (
    METHODS,
    PartitionSpec,
    closed_form_limit,
    convergence_table,
    partition_exact,
    predicted_scaled,
    table_to_csv,
    table_to_dat,
)
from .qpoly import (
    build_family_poly,
    differentiate,
    eval_poly,
    get_family,
    q_hermite_eval,
    q_laguerre,
    stieltjes_wigert,
)
from .qseries import X_jm
from .zeros import (
    default_hint,
    find_positive_zeros,
    hermite_zeros,
    round_table_entry,
    rounded_product_line,
    zeros_to_csv,
)

PRECISION_ENV = "QASYM_PRECISION_BITS"
FORMATS = ("csv", "json", "paper-text")
FAMILIES = ("sw", "qlaguerre", "qhermite")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _common_options() -> argparse.ArgumentParser:
    # SUPPRESS lets the flags appear before or after the subcommand
    common = _Parser(add_help=False)
    common.add_argument("--q", default=argparse.SUPPRESS, help="base q as a decimal literal, 0 < q < 1")
    common.add_argument("--precision-bits", type=int, default=argparse.SUPPRESS)
    common.add_argument("--tail-tol", type=float, default=argparse.SUPPRESS)
    common.add_argument("--format", choices=FORMATS, default=argparse.SUPPRESS)
    common.add_argument("--output", default=argparse.SUPPRESS, help="write to this file instead of stdout")
    common.add_argument("--digits", type=int, default=argparse.SUPPRESS, help="significant digits shown")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    parser = _Parser(prog="qasym", parents=[common],
                     description="High-precision q-series, q-polynomials and partition functions.")
    parser.add_argument("--version", action="version", version=f"qasym {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    theta = sub.add_parser("theta", parents=[common], help="theta-type sum X_{j,m}(z)")
    theta.add_argument("--z", required=True)
    theta.add_argument("--j", type=int, default=0)
    theta.add_argument("--m", type=int, default=0)

    poly = sub.add_parser("poly", help="polynomial families").add_subparsers(
        dest="action", required=True, parser_class=_Parser)
    ev = poly.add_parser("eval", parents=[common], help="evaluate a polynomial")
    zs = poly.add_parser("zeros", parents=[common], help="positive zeros and their symmetry")
    for p in (ev, zs):
        p.add_argument("--family", choices=FAMILIES, required=True)
        p.add_argument("--n", type=int, required=True)
        p.add_argument("--alpha", default="0")
    ev.add_argument("--x", required=True)
    ev.add_argument("--j", type=int, default=0)
    ev.add_argument("--normalized", action="store_true",
                    help="evaluate the family form x**j P_n^(j)(x) instead of the classical polynomial")
    zs.add_argument("--paper-table", action="store_true",
                    help="rounded symmetry products k = 1..n/2, comma separated")

    part = sub.add_parser("partition", help="partition function").add_subparsers(
        dest="action", required=True, parser_class=_Parser)
    ex = part.add_parser("exact", parents=[common])
    ex.add_argument("--N", type=int, required=True)
    ex.add_argument("--L", type=int, required=True)
    ex.add_argument("--method", choices=METHODS, default="wronskian")
    pr = part.add_parser("predict", parents=[common])
    pr.add_argument("--N", type=int, required=True)
    pr.add_argument("--L", type=int, required=True)
    cv = part.add_parser("converge", parents=[common])
    cv.add_argument("--L", type=int, required=True)
    cv.add_argument("--N-from", type=int, required=True)
    cv.add_argument("--N-to", type=int, required=True)
    cv.add_argument("--step", type=int, default=1)
    cv.add_argument("--method", choices=METHODS, default="wronskian")
    cv.add_argument("--jobs", type=int, default=1)
    cv.add_argument("--dat", help="gnuplot data path (defaults to OUTPUT with a .dat suffix)")

    asym = sub.add_parser("asym", help="asymptotic estimates").add_subparsers(
        dest="action", required=True, parser_class=_Parser)
    ck = asym.add_parser("check", parents=[common], help="exact value vs estimate vs bound")
    ck.add_argument("--family", choices=FAMILIES, required=True)
    ck.add_argument("--alpha", default="0")
    ck.add_argument("--n", type=int, required=True)
    ck.add_argument("--j", type=int, default=0)
    ck.add_argument("--regime", choices=("osc", "right", "left"), required=True)
    ck.add_argument("--y", required=True)
    ck.add_argument("--t")
    ck.add_argument("--l")
    ck.add_argument("--delta")
    ck.add_argument("--M", type=float)

    st = sub.add_parser("selftest", parents=[common], help="run the invariant suite")
    st.add_argument("--instances", type=int, default=20)
    return parser


# -- configuration --------------------------------------------------------------


def _settings(args) -> dict:
    bits = getattr(args, "precision_bits", None)
    if bits is None:
        env = os.environ.get(PRECISION_ENV)
        try:
            bits = int(env) if env else DEFAULT_BITS
        except ValueError:
            raise UsageError(f"{PRECISION_ENV} must be an integer, got {env!r}") from None
    return {
        "q": getattr(args, "q", "0.5"),
        "precision_bits": bits,
        "tail_tol": getattr(args, "tail_tol", DEFAULT_TAIL_TOL),
        "format": getattr(args, "format", "csv"),
        "output": getattr(args, "output", None),
        "digits": getattr(args, "digits", 16),
    }


def _context(cfg: dict) -> QContext:
    try:
        return make_context(cfg["q"], cfg["precision_bits"], cfg["tail_tol"])
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from None


def _command_name(args) -> str:
    action = getattr(args, "action", None)
    return f"{args.command} {action}" if action else args.command


def _echo(cfg: dict, command: str) -> str:
    return (f"# qasym {__version__} subcommand={command} q={cfg['q']} "
            f"precision_bits={cfg['precision_bits']} tail_tol={cfg['tail_tol']!r}")


# -- subcommands ----------------------------------------------------------------
# Each returns (text for csv/paper-text, json-ready payload).


def _single(value: ScaledReal, digits: int, **fields) -> tuple:
    text = value.to_decimal(digits)
    return text + "\n", dict(fields, value=text)


def _cmd_theta(ctx: QContext, args, cfg: dict) -> tuple:
    value = X_jm(ctx, args.j, args.m, parse_exact(args.z))
    return _single(value, cfg["digits"], z=args.z, j=args.j, m=args.m)


def _classical(ctx: QContext, family: str, n: int, alpha: str):
    if family == "sw":
        return stieltjes_wigert(ctx, n)
    return q_laguerre(ctx, n, alpha)


def _cmd_poly_eval(ctx: QContext, args, cfg: dict) -> tuple:
    x = ctx.scalar(parse_exact(args.x))
    target = min(30, cfg["digits"] + 4)
    if args.normalized:
        fam = get_family(args.family, args.alpha)
        poly = differentiate(build_family_poly(ctx, fam, args.n), args.j)
        value = eval_poly(ctx, poly, x, target) * x ** args.j
    elif args.family == "qhermite":
        if args.j:
            raise UsageError("derivatives of h_n are only available with --normalized")
        # h_n(sinh xi) with xi = asinh(x)
        xi = (x + (x * x + 1).sqrt()).log()
        value = q_hermite_eval(ctx, args.n, xi)
    else:
        poly = differentiate(_classical(ctx, args.family, args.n, args.alpha), args.j)
        value = eval_poly(ctx, poly, x, target)
    return _single(value, cfg["digits"], family=args.family, n=args.n, x=args.x, j=args.j)


def _cmd_poly_zeros(ctx: QContext, args, cfg: dict) -> tuple:
    digits = max(cfg["digits"], 30)
    if args.family == "qhermite":
        xi = hermite_zeros(ctx, args.n)
        n = len(xi)
        rows = [{"k": k + 1, "xi_k": xi[k].to_decimal(digits), "xi_{n+1-k}": xi[n - 1 - k].to_decimal(digits),
                 "pair_sum": (xi[k] + xi[n - 1 - k]).to_decimal(16)} for k in range((n + 1) // 2)]
        if cfg["format"] == "paper-text" or args.paper_table:
            sums = [xi[k] + xi[n - 1 - k] for k in range(n // 2)]
            return ",".join(round_table_entry(s) for s in sums) + "\n", rows
        return _rows_csv(rows), rows
    if args.family == "sw":
        exponent = 2 * args.n + 1
        poly = stieltjes_wigert(ctx, args.n)
    else:
        exponent = 2 * args.n + 2 * parse_exact(args.alpha)
        poly = q_laguerre(ctx, args.n, args.alpha)
    zs = find_positive_zeros(ctx, poly, default_hint(args.family, args.n, args.alpha))
    if cfg["format"] == "paper-text" or args.paper_table:
        text = rounded_product_line(ctx, zs, exponent) + "\n"
    else:
        text = zeros_to_csv(ctx, zs, exponent, digits)
    return text, _csv_rows(zeros_to_csv(ctx, zs, exponent, digits))


def _rows_csv(rows: list) -> str:
    lines = [",".join(rows[0].keys())] if rows else []
    lines += [",".join(str(v) for v in row.values()) for row in rows]
    return "\n".join(lines) + "\n"


def _csv_rows(text: str) -> list:
    header, *lines = text.strip().splitlines()
    keys = header.split(",")
    return [dict(zip(keys, line.split(","))) for line in lines]


def _cmd_partition_exact(ctx: QContext, args, cfg: dict) -> tuple:
    result = partition_exact(ctx, PartitionSpec(args.N, args.L), args.method)
    digits = cfg["digits"]
    text = result.raw.to_decimal(digits) + "\n"
    payload = {"N": args.N, "L": args.L, "method": args.method, "value": result.raw.to_decimal(digits),
               "scaled": result.scaled.to_decimal(digits), "verified_digits": result.verified_digits}
    return text, payload


def _cmd_partition_predict(ctx: QContext, args, cfg: dict) -> tuple:
    spec = PartitionSpec(args.N, args.L)
    value = predicted_scaled(ctx, spec)
    payload = {"N": args.N, "L": args.L, "parity": spec.parity, "value": value.to_decimal(cfg["digits"])}
    if args.L in (1, 2):
        payload["closed_form"] = closed_form_limit(ctx, args.L, spec.parity).to_decimal(cfg["digits"])
    return value.to_decimal(cfg["digits"]) + "\n", payload


def _cmd_partition_converge(ctx: QContext, args, cfg: dict) -> tuple:
    if args.step < 1 or args.jobs < 1:
        raise UsageError("--step and --jobs must be positive")
    if args.N_to < args.N_from or args.N_from < 1:
        raise UsageError("need 1 <= N-from <= N-to")
    rows = convergence_table(ctx, args.L, range(args.N_from, args.N_to + 1, args.step),
                             args.method, args.jobs)
    # without --digits each row shows exactly its verified digits
    csv_text = table_to_csv(rows, getattr(args, "digits", None))
    dat_text = table_to_dat(rows)
    dat_path = args.dat
    if dat_path is None and cfg["output"]:
        dat_path = str(Path(cfg["output"]).with_suffix(".dat"))
    if dat_path:
        _write(dat_path, _echo(cfg, _command_name(args)) + "\n" + dat_text)
    text = dat_text if cfg["format"] == "paper-text" else csv_text
    return text, _csv_rows(csv_text)


def _cmd_asym_check(ctx: QContext, args, cfg: dict) -> tuple:
    fam = get_family(args.family, args.alpha)
    y = ctx.scalar(parse_exact(args.y))
    n, j = args.n, args.j
    delta = parse_exact(args.delta) if args.delta else None
    if args.regime == "osc":
        if args.l is None:
            raise UsageError("the oscillatory regime needs --l")
        window = AsymptoticWindow.build(n, parse_exact(args.l), delta, args.M, y)
        est = oscillatory_estimate(ctx, fam, n, j, window, y)
        x = ctx.power(-2 * window.m) * y
    else:
        if args.t is None:
            raise UsageError(f"the {args.regime} regime needs --t")
        t = parse_exact(args.t)
        estimate = right_tail_estimate if args.regime == "right" else left_tail_estimate
        est = estimate(ctx, fam, None, n, j, t, y, delta or Fraction(1, 2), args.M)
        x = ctx.power(n * t) * y
    poly = differentiate(build_family_poly(ctx, fam, n), j)
    exact = eval_poly(ctx, poly, x, target_digits=30) * x ** j
    diff = abs(exact - est.value)
    d = cfg["digits"]
    row = {"regime": est.regime, "n": n, "j": j, "exact": exact.to_decimal(d),
           "estimate": est.value.to_decimal(d), "error_bound": est.error_bound.to_decimal(6),
           "abs_diff": diff.to_decimal(6), "within_bound": diff <= est.error_bound}
    return _rows_csv([row]), row


def _cmd_selftest(ctx: QContext, args, cfg: dict) -> tuple:
    from .selftest import run_selftest

    results = run_selftest(cfg["precision_bits"], cfg["tail_tol"], args.instances)
    lines = [r.line() for r in results]
    passed = sum(r.passed for r in results)
    lines.append(f"selftest: {passed}/{len(results)} passed")
    payload = [{"name": r.name, "passed": r.passed, "detail": r.detail} for r in results]
    if passed != len(results):
        raise _SelftestFailed("\n".join(lines) + "\n")
    return "\n".join(lines) + "\n", payload


class _SelftestFailed(ArithmeticError):
    pass


_COMMANDS = {
    "theta": _cmd_theta,
    "poly eval": _cmd_poly_eval,
    "poly zeros": _cmd_poly_zeros,
    "partition exact": _cmd_partition_exact,
    "partition predict": _cmd_partition_predict,
    "partition converge": _cmd_partition_converge,
    "asym check": _cmd_asym_check,
    "selftest": _cmd_selftest,
}


def _write(path: str, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8")


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        cfg = _settings(args)
        ctx = _context(cfg)
        command = _command_name(args)
        text, payload = _COMMANDS[command](ctx, args, cfg)
    except UsageError as exc:
        print(f"qasym: error: {exc}", file=stderr)
        return 1
    except _SelftestFailed as exc:
        stdout.write(str(exc))
        return 2
    except RegimeError as exc:
        print(f"qasym: error: {exc}", file=stderr)
        return 1
    except ArithmeticError as exc:
        print(f"qasym: numerical failure: {exc}", file=stderr)
        return 2
    except ValueError as exc:
        print(f"qasym: error: {exc}", file=stderr)
        return 1

    if cfg["format"] == "json":
        out = json.dumps({"config": _config_dict(cfg, command), "result": payload}, indent=2) + "\n"
    else:
        out = text
    if cfg["output"]:
        if cfg["format"] != "json":
            out = _echo(cfg, command) + "\n" + out
        _write(cfg["output"], out)
    else:
        stdout.write(out)
    return 0


def _config_dict(cfg: dict, command: str) -> dict:
    return {"version": __version__, "subcommand": command, "q": cfg["q"],
            "precision_bits": cfg["precision_bits"], "tail_tol": cfg["tail_tol"]}


def main() -> None:
    sys.exit(run())
