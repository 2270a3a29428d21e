"""Quick oracle suites behind ``murmur check``."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List

import numpy as np

from . import arith, density, empirical, hurwitz, lfunc, trace


@dataclass(frozen=True)
class CheckResult:
    suite: str
    name: str
    passed: bool
    detail: str = ""


def _exp_sum(q, m):
    s = sum(cmath.exp(2j * math.pi * x * m / q) for x in range(1, q + 1) if math.gcd(x, q) == 1)
    return round(s.real)


def _arith(ctx) -> List[CheckResult]:
    out = []
    bad = [(q, m) for q in range(1, 31) for m in range(-30, 31) if arith.ramanujan_sum(q, m) != _exp_sum(q, m)]
    out.append(CheckResult("arith", "ramanujan_vs_exponential_sum", not bad, f"{len(bad)} mismatches"))
    bad = []
    for p in arith.sieve_primes(97).prime_list[1:]:
        for d in range(-50, 51):
            if d % p:
                euler = 1 if pow(d % p, (p - 1) // 2, p) == 1 else -1
                if arith.kronecker(d, p) != euler:
                    bad.append((d, p))
    out.append(CheckResult("arith", "kronecker_vs_euler_criterion", not bad, f"{len(bad)} mismatches"))
    th = np.linspace(0.05, math.pi - 0.05, 200)
    err = max(
        float(np.max(np.abs(arith.chebyshev_U(n, np.cos(th)) - np.sin((n + 1) * th) / np.sin(th))))
        for n in range(12)
    )
    out.append(CheckResult("arith", "chebyshev_vs_sine_quotient", err < 1e-12, f"max err {err:.1e}"))
    bad = [n for n in range(1, 3001) if math.prod(p**e for p, e in arith.factorize(n)) != n]
    out.append(CheckResult("arith", "factorize_round_trip", not bad, f"{len(bad)} failures"))
    return out


def table_integrity(table: hurwitz.HurwitzTable) -> List[str]:
    """Problems found in a table; empty when it is consistent."""
    probs = []
    h = table.h12
    if int(h[0]) != -1:
        probs.append(f"12H(0) = {int(h[0])}, expected -1")
    idx = np.arange(len(h))
    zero_cls = (idx % 4 == 1) | (idx % 4 == 2)
    nz = np.flatnonzero(zero_cls & (h != 0))
    if nz.size:
        probs.append(f"nonzero entries at n = 1, 2 mod 4, first n={int(nz[0])}")
    neg = np.flatnonzero(h[1:] < 0) + 1
    if neg.size:
        probs.append(f"negative entries, first n={int(neg[0])}")
    bad = hurwitz.class_number_relation_defects(table)
    if bad.size:
        probs.append(f"class number relation fails at {bad.size} n, first n={int(bad[0])}")
    # the relation reaches entries up to 4*(limit//4); check the rest directly
    for n in range(4 * (table.limit // 4) + 1, table.limit + 1):
        if int(h[n]) != hurwitz.hurwitz_direct(n):
            probs.append(f"entry {n} differs from a direct form count")
    return probs


def _lfunc(ctx) -> List[CheckResult]:
    out = []
    table = ctx["table"]
    probs = table_integrity(table)
    out.append(CheckResult("lfunc", "hurwitz_table_integrity", not probs, "; ".join(probs) or f"limit {table.limit}"))
    known = {0: Fraction(-1, 12), 3: Fraction(1, 3), 4: Fraction(1, 2), 12: Fraction(4, 3), 23: Fraction(3)}
    bad = [n for n, v in known.items() if n <= table.limit and table.H(n) != v]
    out.append(CheckResult("lfunc", "hurwitz_known_values", not bad, f"bad at {bad}"))
    rng = np.random.default_rng(0)
    top = min(table.limit, 10**4)
    sample = rng.integers(3, top + 1, size=50)
    bad = [int(n) for n in sample if table.twelve_h(int(n)) != hurwitz.hurwitz_direct(int(n))]
    out.append(CheckResult("lfunc", "hurwitz_vs_direct_count", not bad, f"bad at {bad}"))
    err = 0.0
    for D in (-3, -4, -7, -8, -15, -20, -23, -163, -427, -1003):
        chi = lfunc.decompose_discriminant(D)
        a = lfunc.L1_psi(chi, "class_number", table)
        b = lfunc.L1_psi(chi, "truncated_sum")
        err = max(err, abs(a - b))
    out.append(CheckResult("lfunc", "L1_methods_agree", err < 1e-6, f"max diff {err:.1e}"))
    cache = ctx["cache"]
    L1 = lfunc.L1_psi_tilde1(cache)
    err = max(
        abs(lfunc.L1_psi_tilde_ellt(t, 3, cache) / (L1 * lfunc.P_factor(1.0, 3 * t)) - 1) for t in (1, 2, 4, 5)
    )
    out.append(CheckResult("lfunc", "euler_product_identity_chain", err < 1e-6, f"max rel diff {err:.1e}"))
    return out


def _trace(ctx) -> List[CheckResult]:
    cn = hurwitz.ClassNumbers(ctx["table"], allow_direct=True)
    worst, worst_int = 0.0, 0.0
    for k in (2, 4, 6):
        p = trace.FamilyParams(3, 5, k)
        for n in (2, 5, 7, 11, 13, 29):
            d = trace.trace_direct(p, n, cn)
            c = trace.trace_closed(p, n, cn)
            worst = max(worst, abs(d.normalized - c.normalized) / max(1.0, abs(d.normalized)))
            worst_int = max(worst_int, abs(c.trace - round(c.trace)))
    return [
        CheckResult("trace", "direct_vs_closed", worst <= 1e-8, f"max rel diff {worst:.1e}"),
        CheckResult("trace", "integrality", worst_int <= 1e-6, f"max distance {worst_int:.1e}"),
    ]


def _density(ctx) -> List[CheckResult]:
    cache = ctx["cache"]
    w = density.Window(1.0, 2.0)
    out = []
    for k in (2, 4):
        fold = density.limiting_density(w, 3, k, cache)
        signed = density.limiting_density_signed(w, 3, k, cache, extra=2)
        out.append(CheckResult("density", f"parity_fold_k{k}", abs(fold - signed) <= 1e-12, f"diff {abs(fold - signed):.1e}"))
    opts = density.DensityOptions()
    C = density.t_weight(0, 3, cache, opts)
    exact = C * (2 / 3) * (2**1.5 - 1)
    got = density.per_t_integral(0, w, 3, 2, cache, opts)
    out.append(CheckResult("density", "t0_closed_form", abs(got - exact) <= opts.tol, f"diff {abs(got - exact):.1e}"))
    return out


def _empirical(ctx) -> List[CheckResult]:
    p = trace.FamilyParams(3, 5, 4)
    w = density.Window(1.0, 2.0)
    a = empirical.finite_sigma(p, w, ctx["table"]).sigma
    b = empirical.finite_sigma_n_outer(p, w, ctx["table"])
    return [CheckResult("empirical", "loop_order", abs(a - b) <= 1e-10 * abs(a), f"rel diff {abs(a - b) / abs(a):.1e}")]


def _ap(ctx) -> List[CheckResult]:
    s = empirical.ap_error_stats(20, 3)
    ok1 = s.theta[1] == math.log(19)
    st = empirical.ap_error_stats(1000, 3)
    primes = arith.primes_in_range(2, 1000)
    lhs = sum(st.theta.values())
    rhs = float(np.sum(np.log(primes[primes != 3].astype(float))))
    return [
        CheckResult("ap", "theta_20_9_1", ok1, f"{s.theta[1]!r}"),
        CheckResult("ap", "partition_identity", abs(lhs - rhs) <= 1e-9 * rhs, f"diff {abs(lhs - rhs):.1e}"),
    ]


SUITES: Dict[str, Callable] = {
    "arith": _arith,
    "lfunc": _lfunc,
    "trace": _trace,
    "density": _density,
    "empirical": _empirical,
    "ap": _ap,
}


def run_checks(suites=None, table: hurwitz.HurwitzTable | None = None, euler_cutoff: int = 10**6) -> List[CheckResult]:
    names = list(SUITES) if suites is None else list(suites)
    if table is None:
        table = hurwitz.build_hurwitz_table(10**5)
    ctx = {"table": table, "cache": lfunc.build_euler_cache(euler_cutoff)}
    out = []
    for name in names:
        try:
            out.extend(SUITES[name](ctx))
        except Exception as exc:  # a crashing suite is a failing suite
            out.append(CheckResult(name, "suite_error", False, f"{type(exc).__name__}: {exc}"))
    return out
