"""
Command-line front end.

    murmur density --ell 3 --k 4 --window 1:2
    murmur density-curve --ell 3 --k 2 --T 1.05:4:200 --output k2.csv --emit-plot gnuplot
    murmur empirical --ell 3 --k 4 --exponents 5,7,9
    murmur compare --ell 3 --k 4 --exponents 5,7,9,11
    murmur check --suite trace
    murmur ap-stats --x 1e5 --m 3 --Q 16,64,256
    murmur build-table --limit 4300000 --output h.bin

Results go out as CSV with a block of ``#`` metadata lines in front.
Floats use repr (shortest round-trip), and nothing run-dependent (thread
count, timings) is written, so equal configs give equal bytes.

Exit codes: 0 ok, 2 usage, 3 capacity, 4 failed self-check.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .density import DensityOptions, Window, density_curve, limiting_density, t_range
from .empirical import (
    ap_error_stats,
    bv_average,
    bv_block,
    finite_density,
    required_capacity,
)
from .errors import CapacityError, DomainError, MurmurError
from .hurwitz import ClassNumbers, HurwitzTable, build_hurwitz_table
from .lfunc import T0_CONVENTIONS, T0_DIVIDES_ALL, TWO_ADIC_CONVENTIONS, TWO_ADIC_EXACT, build_euler_cache
from .trace import FamilyParams, newform_dimension_asymptotic

EXIT_OK, EXIT_USAGE, EXIT_CAPACITY, EXIT_CHECK = 0, 2, 3, 4
TABLE_ENV = "MURMUR_TABLE_PATH"
DEFAULT_MAX_BUILD = 5 * 10**7


class UsageError(MurmurError):
    pass


# -- argument parsing ---------------------------------------------------------


def _window(text):
    try:
        a, b = (float(x) for x in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"window must look like a:b, got {text!r}") from None
    try:
        return Window(a, b)
    except DomainError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _grid(text):
    try:
        start, stop, count = text.split(":")
        start, stop, count = float(start), float(stop), int(count)
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must look like start:stop:count, got {text!r}") from None
    if count < 1 or (count > 1 and stop <= start):
        raise argparse.ArgumentTypeError("grid needs count >= 1 and stop > start")
    return np.linspace(start, stop, count)


def _int_list(text):
    try:
        return [int(x) for x in text.split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text):
    try:
        return [float(x) for x in text.split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _norm(text):
    if text in ("asymptotic", "prime-sum"):
        return text
    if text.startswith("dim="):
        try:
            dim = float(text[4:])
        except ValueError:
            dim = -1
        if dim >= 0:
            return ("dim", dim)
    raise argparse.ArgumentTypeError("--norm is asymptotic, prime-sum or dim=N with N >= 0")


def _big_int(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if v != int(v):
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    return int(v)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="murmur", description="Murmuration densities in the depth aspect.")
    p.add_argument("--version", action="version", version=f"murmur {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def family(sp, with_exponents):
        sp.add_argument("--ell", type=int, required=True, help="odd prime l")
        sp.add_argument("--k", type=int, required=True, help="even weight k >= 2")
        if with_exponents:
            sp.add_argument("--exponents", type=_int_list, required=True,
                            help="odd level exponents >= 5, comma separated")

    def limiting(sp):
        sp.add_argument("--tol", type=float, default=1e-9, help="per-t quadrature tolerance")
        sp.add_argument("--euler-cutoff", type=_big_int, default=10**7, help="Euler product prime cutoff")
        sp.add_argument("--t0-convention", choices=T0_CONVENTIONS, default=T0_DIVIDES_ALL)
        sp.add_argument("--two-adic", choices=TWO_ADIC_CONVENTIONS, default=TWO_ADIC_EXACT)
        sp.add_argument("--threads", type=int, default=1)

    def finite(sp):
        sp.add_argument("--norm", type=_norm, default="asymptotic",
                        help="asymptotic (default), prime-sum, or dim=N")
        sp.add_argument("--l-method", choices=("class_number", "truncated_sum"), default="class_number")
        sp.add_argument("--table", help=f"Hurwitz table dump (default: ${TABLE_ENV}, else built in memory)")
        sp.add_argument("--max-build", type=_big_int, default=DEFAULT_MAX_BUILD,
                        help="largest table to build in memory when no dump is given")

    def out(sp):
        sp.add_argument("--output", "-o", help="CSV path (default stdout)")

    sp = sub.add_parser("density", help="limiting density on one window")
    family(sp, False)
    sp.add_argument("--window", type=_window, default=Window(1.0, 2.0))
    limiting(sp)
    out(sp)

    sp = sub.add_parser("density-curve", help="limiting density on E = [alpha, T] over a T grid")
    family(sp, False)
    sp.add_argument("--T", type=_grid, required=True, dest="T", help="start:stop:count")
    sp.add_argument("--alpha", type=float, default=1.0)
    sp.add_argument("--emit-plot", choices=("gnuplot",), help="also write a plot script next to the CSV")
    limiting(sp)
    out(sp)

    sp = sub.add_parser("empirical", help="finite density at each level exponent")
    family(sp, True)
    sp.add_argument("--window", type=_window, default=Window(1.0, 2.0))
    finite(sp)
    out(sp)

    sp = sub.add_parser("compare", help="finite against limiting density")
    family(sp, True)
    sp.add_argument("--window", type=_window, default=Window(1.0, 2.0))
    finite(sp)
    limiting(sp)
    out(sp)

    sp = sub.add_parser("check", help="run the oracle self-checks")
    sp.add_argument("--suite", action="append", choices=None, help="suite name; repeatable (default all)")
    sp.add_argument("--table", help="check this table dump instead of a fresh one")

    sp = sub.add_parser("ap-stats", help="primes in progressions to square moduli")
    sp.add_argument("--x", type=float, required=True)
    sp.add_argument("--m", type=_int_list, default=[3], help="modulus roots m (modulus m^2)")
    sp.add_argument("--Q", type=_float_list, default=[], help="dyadic block parameters")
    out(sp)

    sp = sub.add_parser("build-table", help="build and dump a Hurwitz table")
    sp.add_argument("--limit", type=_big_int, required=True)
    sp.add_argument("--output", "-o", required=True)
    return p


# -- output -------------------------------------------------------------------


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(meta, header, rows, path=None):
    buf = io.StringIO()
    buf.write(f"# murmur {__version__}\n")
    for key, val in meta:
        buf.write(f"# {key}={_fmt(val)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    text = buf.getvalue()
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)
    return text


def _limiting_meta(args):
    return [
        ("tol", args.tol),
        ("euler_cutoff", args.euler_cutoff),
        ("t0_convention", args.t0_convention),
        ("two_adic", args.two_adic),
    ]


def _opts(args):
    if args.tol <= 0:
        raise UsageError("--tol must be positive")
    if args.threads < 1:
        raise UsageError("--threads must be at least 1")
    return DensityOptions(args.tol, args.t0_convention, args.two_adic, args.threads)


def _family_check(ell, k):
    FamilyParams(ell, 5, k)


def _families(args):
    out = []
    for e in args.exponents:
        if e % 2 == 0 or e < 5:
            raise UsageError(f"level exponent must be odd and at least 5, got {e}")
        out.append(FamilyParams(args.ell, e, args.k))
    return out


def _class_numbers(args, required):
    path = args.table or os.environ.get(TABLE_ENV)
    if path:
        if not Path(path).exists():
            raise CapacityError(f"Hurwitz table {path} not found; need one covering {required}",
                                required=required, available=0)
        table = HurwitzTable.load(path)
        if table.limit < required:
            raise CapacityError(f"Hurwitz table {path} covers {table.limit}, need {required}",
                                required=required, available=table.limit)
        return ClassNumbers(table)
    if required > args.max_build:
        raise CapacityError(
            f"need a Hurwitz table to {required}, above --max-build {args.max_build}; "
            f"build one with `murmur build-table` and pass --table",
            required=required, available=0,
        )
    return ClassNumbers(build_hurwitz_table(max(required, 4)))


def _dim(args, params):
    if args.norm == "asymptotic":
        return None
    if args.norm == "prime-sum":
        return newform_dimension_asymptotic(params)
    return args.norm[1]


def _norm_label(norm):
    return norm if isinstance(norm, str) else f"dim={_fmt(norm[1])}"


# -- subcommands --------------------------------------------------------------


def cmd_density(args):
    _family_check(args.ell, args.k)
    opts = _opts(args)
    cache = build_euler_cache(args.euler_cutoff)
    w = args.window
    val = limiting_density(w, args.ell, args.k, cache, opts)
    meta = [("command", "density"), ("ell", args.ell), ("k", args.k)] + _limiting_meta(args)
    header = ["alpha", "beta", "density", "t_terms", "t0_convention", "two_adic", "quad_tol", "euler_tail"]
    row = [w.alpha, w.beta, val, len(t_range(w, args.ell)), args.t0_convention, args.two_adic,
           args.tol, cache.tail_bound]
    write_csv(meta, header, [row], args.output)
    return EXIT_OK


def gnuplot_script(csv_path, ell, k):
    return (
        "set datafile separator ','\n"
        "set key autotitle columnhead\n"
        "set xlabel 'T'\n"
        f"set ylabel 'density, l={ell}, k={k}, E=[1,T]'\n"
        f"plot '{csv_path}' using 1:2 with lines notitle\n"
    )


def cmd_density_curve(args):
    _family_check(args.ell, args.k)
    opts = _opts(args)
    if args.emit_plot and not args.output:
        raise UsageError("--emit-plot needs --output so the script can reference the CSV")
    cache = build_euler_cache(args.euler_cutoff)
    try:
        curve = density_curve(args.T, args.ell, args.k, cache, opts, alpha=args.alpha)
    except DomainError as exc:
        raise UsageError(str(exc)) from None
    meta = [("command", "density-curve"), ("ell", args.ell), ("k", args.k), ("alpha", args.alpha)]
    meta += _limiting_meta(args)
    header = ["T", "density", "t_terms", "t0_convention", "quad_tol", "euler_tail"]
    rows = [
        [float(T), float(v), int(c), args.t0_convention, args.tol, cache.tail_bound]
        for T, v, c in zip(curve.T, curve.values, curve.t_counts)
    ]
    write_csv(meta, header, rows, args.output)
    if args.emit_plot:
        script = Path(args.output).with_suffix(".gp")
        # gnuplot treats the '#' metadata as comments and the header as column names
        script.write_text(gnuplot_script(Path(args.output).name, args.ell, args.k))
    return EXIT_OK


def _empirical_rows(args, families, cns):
    rows = []
    for params in families:
        res = finite_density(params, args.window, cns, _dim(args, params), l_method=args.l_method)
        rows.append((params, res))
    return rows


def cmd_empirical(args):
    families = _families(args)
    cns = _class_numbers(args, max(required_capacity(p, args.window) for p in families))
    meta = [("command", "empirical"), ("ell", args.ell), ("k", args.k),
            ("window", f"{args.window.alpha!r}:{args.window.beta!r}"), ("norm", _norm_label(args.norm)),
            ("l_method", args.l_method)]
    header = ["exponent", "sigma", "normalization", "density", "n_count", "defined", "norm", "l_method"]
    rows = []
    for params, res in _empirical_rows(args, families, cns):
        rows.append([params.a, res.sigma, res.normalization, res.density, res.n_count,
                     int(res.defined), _norm_label(args.norm), args.l_method])
    write_csv(meta, header, rows, args.output)
    return EXIT_OK


def cmd_compare(args):
    families = _families(args)
    opts = _opts(args)
    cns = _class_numbers(args, max(required_capacity(p, args.window) for p in families))
    cache = build_euler_cache(args.euler_cutoff)
    lim = limiting_density(args.window, args.ell, args.k, cache, opts)
    meta = [("command", "compare"), ("ell", args.ell), ("k", args.k),
            ("window", f"{args.window.alpha!r}:{args.window.beta!r}"), ("norm", _norm_label(args.norm)),
            ("l_method", args.l_method)] + _limiting_meta(args)
    header = ["exponent", "empirical", "limiting", "abs_diff", "rel_diff", "n_count", "norm",
              "quad_tol", "euler_tail"]
    rows = []
    for params, res in _empirical_rows(args, families, cns):
        d = res.density
        ad = None if d is None else abs(d - lim)
        rd = None if ad is None or lim == 0 else ad / abs(lim)
        rows.append([params.a, d, lim, ad, rd, res.n_count, _norm_label(args.norm), args.tol, cache.tail_bound])
    write_csv(meta, header, rows, args.output)
    return EXIT_OK


def cmd_check(args):
    from .selfcheck import SUITES, run_checks

    suites = args.suite or list(SUITES)
    unknown = [s for s in suites if s not in SUITES]
    if unknown:
        raise UsageError(f"unknown suite {unknown[0]!r}; choose from {', '.join(SUITES)}")
    table = None
    if args.table:
        try:
            table = HurwitzTable.load(args.table)
        except (OSError, DomainError) as exc:
            print(f"FAIL lfunc load_table {exc}")
            return EXIT_CHECK
    results = run_checks(suites, table)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.suite} {r.name} {r.detail}")
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_CHECK


def cmd_ap_stats(args):
    if args.x < 2:
        raise UsageError("--x must be at least 2")
    meta = [("command", "ap-stats"), ("x", args.x)]
    header = ["kind", "x", "param", "count", "E_theta_max", "E_Lambda_max", "bv_sum"]
    rows = []
    for m in args.m:
        if m < 1:
            raise UsageError("--m values must be positive")
        s = ap_error_stats(args.x, m)
        rows.append(["ap", args.x, m * m, len(s.theta), s.E_theta_max, s.E_Lambda_max, None])
    for Q in args.Q:
        if Q < 1:
            raise UsageError("--Q values must be at least 1")
        rows.append(["bv", args.x, Q, len(bv_block(Q)), None, None, bv_average(Q, args.x)])
    write_csv(meta, header, rows, args.output)
    return EXIT_OK


def cmd_build_table(args):
    table = build_hurwitz_table(args.limit)
    table.dump(args.output)
    print(f"wrote 12H(n) for n <= {args.limit} to {args.output}")
    return EXIT_OK


COMMANDS = {
    "density": cmd_density,
    "density-curve": cmd_density_curve,
    "empirical": cmd_empirical,
    "compare": cmd_compare,
    "check": cmd_check,
    "ap-stats": cmd_ap_stats,
    "build-table": cmd_build_table,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except CapacityError as exc:
        print(f"murmur: capacity: {exc}", file=sys.stderr)
        if exc.required is not None:
            print(f"murmur: required={exc.required} available={exc.available}", file=sys.stderr)
        return EXIT_CAPACITY
    except (UsageError, DomainError) as exc:
        print(f"murmur: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
