"""
The finite murmuration density at level l^a and the diagnostics around it.

Sigma = sum over primes n with n/l^a in E of sqrt(n) log(n) times the
root-number-weighted eigenvalue sum, which the closed trace formula turns
into a short sum over t in the Ramanujan support. ``finite_sigma`` runs
that sum t-outer, vectorised over primes; ``finite_sigma_n_outer`` runs it
one trace at a time as an independent check.

Also here: the class number average check, prime-in-progression errors
for square moduli, and the eigenvalue fixture reader.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Tuple

import numpy as np
from scipy import integrate

from .arith import PrimeSieve, euler_phi, primes_in_range, ramanujan_sum
from .density import DensityOptions, Window, limiting_density
from .errors import CapacityError, DomainError, FixtureParseError
from .hurwitz import HurwitzTable, as_class_numbers, hurwitz_direct
from .lfunc import (
    T0_DIVIDES_ALL,
    TWO_ADIC_EXACT,
    ZETA2,
    EulerProductCache,
    L1_psi,
    L1_psi_tilde1,
    L1_psi_tilde_ellt,
    P_factor,
    decompose_discriminant,
)
from .trace import FamilyParams, newform_dimension_asymptotic, trace_closed

EDGE_SLACK = 1e-12


@dataclass(frozen=True)
class EmpiricalResult:
    params: FamilyParams
    window: Window
    sigma: float
    n_count: int
    per_t: Tuple[Tuple[int, float], ...] = ()
    normalization: float | None = None

    @property
    def defined(self) -> bool:
        return self.n_count > 0 and bool(self.normalization)

    @property
    def density(self) -> float | None:
        """sigma / normalization, or None when no primes or a zero normalization."""
        if not self.defined:
            return None
        return self.sigma / self.normalization


def window_primes(params: FamilyParams, window: Window, sieve: PrimeSieve | None = None) -> np.ndarray:
    """Primes n != l with alpha <= n / l^a <= beta."""
    N = params.level
    # a few ulps of slack so a window edge like 487/243 keeps its endpoint
    lo = math.ceil(N * window.alpha * (1 - EDGE_SLACK))
    hi = math.floor(N * window.beta * (1 + EDGE_SLACK))
    if hi < 2 or hi < lo:
        return np.zeros(0, dtype=np.int64)
    if sieve is not None:
        if sieve.limit < hi:
            raise CapacityError(
                f"prime sieve covers {sieve.limit}, window needs {hi}", required=hi, available=sieve.limit
            )
        p = sieve.between(lo, hi)
    else:
        p = primes_in_range(lo, hi)
    return p[p != params.ell]


def required_capacity(params: FamilyParams, window: Window) -> int:
    """Largest |t^2 - 4 l n| the t-outer sum looks up."""
    return 4 * params.ell * math.floor(params.level * window.beta)


def _twelve_h_array(source, D: np.ndarray) -> np.ndarray:
    if isinstance(source, HurwitzTable):
        table, direct = source, False
    else:
        cn = as_class_numbers(source)
        table, direct = cn.table, cn.allow_direct
    limit = table.limit if table is not None else -1
    out = np.empty(D.shape, dtype=np.int64)
    inside = D <= limit
    if inside.any():
        out[inside] = table.h12[D[inside]]
    if (~inside).any():
        if not direct:
            need = int(D.max())
            raise CapacityError(
                f"Hurwitz table covers {limit}, Sigma needs {need}", required=need, available=limit
            )
        out[~inside] = [hurwitz_direct(int(x)) for x in D[~inside]]
    return out


def _L_values(hurwitz, D: np.ndarray, l_method: str) -> np.ndarray:
    """L(1, psi_{-D}) for positive D."""
    if l_method == "class_number":
        h12 = _twelve_h_array(hurwitz, D)
        return math.pi * (h12 / 12) / np.sqrt(D.astype(float))
    if l_method == "truncated_sum":
        return np.array([L1_psi(decompose_discriminant(-int(x)), "truncated_sum") for x in D])
    raise DomainError(f"unknown L-value method {l_method!r}")


def finite_sigma(params: FamilyParams, window: Window, hurwitz, sieve: PrimeSieve | None = None,
                 l_method: str = "class_number") -> EmpiricalResult:
    """Sigma in t-outer order over the Ramanujan support l^{(a-1)/2} | t."""
    primes = window_primes(params, window, sieve)
    if primes.size == 0:
        return EmpiricalResult(params, window, 0.0, 0)
    ell, k, a = params.ell, params.k, params.a
    q = ell ** ((a + 1) // 2)
    step = ell ** ((a - 1) // 2)
    nf = primes.astype(float)
    weight = np.sqrt(nf) * np.log(nf)
    m = ell * primes
    umax = math.isqrt((4 * int(m[-1]) - 1) // (step * step))
    per_t = []
    total = 0.0
    for u in range(-umax, umax + 1):
        t = u * step
        c = ramanujan_sum(q, t)
        live = 4 * m > t * t
        if c == 0 or not live.any():
            continue
        mm = m[live]
        Lval = _L_values(hurwitz, 4 * mm - t * t, l_method)
        phi = np.arcsin(t / (2 * np.sqrt(mm.astype(float))))
        inner = float(np.sum(np.cos((k - 1) * phi) * Lval * weight[live]))
        contrib = c * inner / (math.pi * math.sqrt(ell))
        per_t.append((t, contrib))
        total += contrib
    return EmpiricalResult(params, window, total, int(primes.size), tuple(per_t))


def finite_sigma_n_outer(params: FamilyParams, window: Window, hurwitz, sieve: PrimeSieve | None = None) -> float:
    """Sigma as sum_n sqrt(n) log(n) times the normalized trace, n ascending."""
    total = 0.0
    for n in window_primes(params, window, sieve).tolist():
        total += math.sqrt(n) * math.log(n) * trace_closed(params, n, hurwitz).normalized
    return total


def normalization(params: FamilyParams, window: Window, dim: float | None = None,
                  sieve: PrimeSieve | None = None) -> float:
    """The asymptotic count (k-1)/12 l^{2a} (1-1/l)^2 (1+1/l) |E|, or sum log n * dim."""
    if dim is None:
        return params.level * newform_dimension_asymptotic(params) * window.measure
    if dim < 0:
        raise DomainError("dimension must be nonnegative")
    primes = window_primes(params, window, sieve)
    return float(np.sum(np.log(primes.astype(float)))) * dim


def finite_density(params: FamilyParams, window: Window, hurwitz, dim: float | None = None,
                   sieve: PrimeSieve | None = None, l_method: str = "class_number") -> EmpiricalResult:
    res = finite_sigma(params, window, hurwitz, sieve, l_method)
    norm = normalization(params, window, dim, sieve)
    return EmpiricalResult(params, window, res.sigma, res.n_count, res.per_t, norm)


def main_term_sigma(ell: int, a: int, k: int, window: Window, cache: EulerProductCache,
                    t0_convention: str = T0_DIVIDES_ALL, two_adic: str = TWO_ADIC_EXACT) -> float:
    """Main term of Sigma after averaging over primes.

    l^{2a-1}/pi sum_t c_l(t) L(1, psi~_{l t}) (1 - l^-2)
        * int_{E, v > t^2/(4 l^2)} cos((k-1) phi_{t, l^2 v}) sqrt(v) dv,

    with the integral done by adaptive quad on the cosine form. Dividing by
    ``normalization`` gives the limiting density by a separate route.
    """
    tmax = math.ceil(2 * ell * math.sqrt(window.beta))
    total = 0.0
    for t in range(-tmax, tmax + 1):
        t0 = t * t / (4 * ell * ell)
        lo = max(window.alpha, t0)
        if lo >= window.beta:
            continue
        c = ramanujan_sum(ell, t)
        Lv = L1_psi_tilde_ellt(t, ell, cache, t0_convention, two_adic)

        def f(v):
            return math.cos((k - 1) * math.asin(min(1.0, t / (2 * ell * math.sqrt(v))))) * math.sqrt(v)

        val, _ = integrate.quad(f, lo, window.beta, epsabs=1e-14, epsrel=1e-13, limit=200)
        total += c * Lv * (1 - ell**-2) * val
    return ell ** (2 * a - 1) / math.pi * total


@dataclass(frozen=True)
class DensityReport:
    """A finite density next to the limiting one for the same (l, k, E)."""

    empirical: EmpiricalResult
    limiting: float

    @property
    def abs_diff(self) -> float | None:
        d = self.empirical.density
        return None if d is None else abs(d - self.limiting)

    @property
    def rel_diff(self) -> float | None:
        d = self.abs_diff
        return None if d is None or self.limiting == 0 else d / abs(self.limiting)


def compare(params: FamilyParams, window: Window, hurwitz, cache: EulerProductCache,
            opts: DensityOptions = DensityOptions(), dim: float | None = None,
            sieve: PrimeSieve | None = None, l_method: str = "class_number") -> DensityReport:
    emp = finite_density(params, window, hurwitz, dim, sieve, l_method)
    return DensityReport(emp, limiting_density(window, params.ell, params.k, cache, opts))


# ---------------------------------------------------------------------------
# averages of L(1, psi_{t^2 - 4 l n}) over primes


@dataclass(frozen=True)
class AverageCheck:
    lhs: float
    rhs: float

    @property
    def rel_err(self) -> float:
        return abs(self.lhs / self.rhs - 1)


def local_average_L1(t: int, ell: int, cache: EulerProductCache, t0_convention: str = T0_DIVIDES_ALL) -> float:
    """L(1, psi~_t^(l)) for l | t: L(1, psi~_1) P(1, t) (1 - l^-2)."""
    if t % ell:
        raise DomainError(f"the local average needs l | t, got t={t}, l={ell}")
    if t == 0:
        base = ZETA2 if t0_convention == T0_DIVIDES_ALL else cache.base_constant / cache.local_factor(ell)
        return base * (1 - ell**-2)
    return L1_psi_tilde1(cache) * P_factor(1.0, t) * (1 - ell**-2)


def prime_average_check(t: int, ell: int, A: float, B: float, hurwitz, cache: EulerProductCache,
                  k: int | None = None, sieve: PrimeSieve | None = None) -> AverageCheck:
    """Compare sum_{A < n <= B prime} Phi(n) L(1, psi_{t^2-4ln}) log n with L(1, psi~) int Phi.

    Phi is 1 when ``k`` is None, else cos((k-1) phi_{t, l u}) sqrt(u).
    """
    if t % ell:
        raise DomainError(f"needs l | t, got t={t}, l={ell}")
    if A <= t * t / (4 * ell) or B <= A:
        raise DomainError("needs t^2/(4l) < A < B")
    lo, hi = math.floor(A) + 1, math.floor(B)
    primes = sieve.between(lo, hi) if sieve is not None else primes_in_range(lo, hi)
    D = 4 * ell * primes - t * t
    h12 = _twelve_h_array(hurwitz, D)
    nf = primes.astype(float)
    Lval = math.pi * (h12 / 12) / np.sqrt(D.astype(float))
    if k is None:
        phi_vals = np.ones_like(nf)
        integral = B - A
    else:
        phi_vals = np.cos((k - 1) * np.arcsin(t / (2 * np.sqrt(ell * nf)))) * np.sqrt(nf)
        integral, _ = integrate.quad(
            lambda u: math.cos((k - 1) * math.asin(t / (2 * math.sqrt(ell * u)))) * math.sqrt(u),
            A, B, limit=500,
        )
    lhs = float(np.sum(phi_vals * Lval * np.log(nf)))
    rhs = local_average_L1(t, ell, cache) * integral
    return AverageCheck(lhs, rhs)


# ---------------------------------------------------------------------------
# primes in progressions to square moduli


@dataclass(frozen=True)
class APStats:
    x: float
    modulus: int
    theta: Dict[int, float]
    E_theta_max: float
    E_Lambda_max: float


def _prime_powers(x: int) -> Tuple[np.ndarray, np.ndarray]:
    """Prime powers p^j <= x and log p, sorted by value."""
    if x < 2:
        return np.zeros(0, dtype=np.int64), np.zeros(0)
    primes = primes_in_range(2, x)
    vals, logs = [primes], [np.log(primes.astype(float))]
    pw = primes.copy()
    base = primes
    while True:
        keep = pw <= x // base
        if not keep.any():
            break
        base, pw = base[keep], pw[keep] * base[keep]
        vals.append(pw)
        logs.append(np.log(base.astype(float)))
    v = np.concatenate(vals)
    lg = np.concatenate(logs)
    order = np.argsort(v, kind="stable")
    return v[order], lg[order]


def ap_error_stats(x: float, m: int) -> APStats:
    """theta(x; m^2, a) for reduced a, and the worst theta and Lambda errors at x."""
    if x < 2:
        raise DomainError("x must be at least 2")
    if m < 1:
        raise DomainError("modulus root must be positive")
    q = m * m
    X = math.floor(x)
    primes = primes_in_range(2, X)
    res = primes % q
    lp = np.log(primes.astype(float))
    theta_all = np.bincount(res, weights=lp, minlength=q)
    pp, lg = _prime_powers(X)
    lam_all = np.bincount(pp % q, weights=lg, minlength=q)
    reduced = [a for a in range(q) if math.gcd(a, q) == 1]
    main = x / euler_phi(q)
    theta = {a: float(theta_all[a]) for a in reduced}
    idx = np.array(reduced)
    e_theta = float(np.max(np.abs(theta_all[idx] - main)))
    e_lam = float(np.max(np.abs(lam_all[idx] - main)))
    return APStats(x, m, theta, e_theta, e_lam)


def max_E_up_to(x: float, q: int, _pp=None) -> float:
    """max_{u <= x} max_{(a, q) = 1} |psi(u; q, a) - u/phi(q)|.

    Each psi(u; q, a) is a step function, so the supremum of its distance to
    u/phi(q) sits at a jump (just before or at it) or at u = x.
    """
    X = math.floor(x)
    pp, lg = _pp if _pp is not None else _prime_powers(X)
    keep = pp <= X
    pp, lg = pp[keep], lg[keep]
    ph = euler_phi(q)
    r = pp % q
    best = 0.0
    for a in range(q):
        if math.gcd(a, q) != 1:
            continue
        sel = r == a
        jumps = pp[sel].astype(float)
        after = np.cumsum(lg[sel])
        before = after - lg[sel]
        cand = [abs(x / ph - (after[-1] if after.size else 0.0))]
        if jumps.size:
            cand.append(float(np.max(np.abs(after - jumps / ph))))
            cand.append(float(np.max(np.abs(before - jumps / ph))))
        best = max(best, *cand)
    return best


def bv_average(Q: float, x: float) -> float:
    """sum over Q < q^2 <= 2Q of max_{u <= x} E(u, q^2)."""
    if Q < 1 or x < 2:
        raise DomainError("needs Q >= 1 and x >= 2")
    pp = _prime_powers(math.floor(x))
    total = 0.0
    for q in bv_block(Q):
        total += max_E_up_to(x, q * q, pp)
    return total


def bv_block(Q: float) -> List[int]:
    """q >= 1 with Q < q^2 <= 2Q."""
    lo = math.isqrt(math.floor(Q)) + 1
    return [q for q in range(lo, math.isqrt(math.floor(2 * Q)) + 1) if Q < q * q <= 2 * Q]


# ---------------------------------------------------------------------------
# eigenvalue fixtures


@dataclass
class FixtureForm:
    label: str
    root_number: int
    eigenvalues: Dict[int, float] = field(default_factory=dict)


@dataclass
class EigenFixture:
    level: int
    weight: int
    forms: List[FixtureForm]

    def data_sum(self, n: int) -> float:
        total = 0.0
        for f in self.forms:
            if n not in f.eigenvalues:
                raise DomainError(f"form {f.label} has no eigenvalue at n={n}")
            total += f.root_number * f.eigenvalues[n]
        return total


def _meta(line: str, lineno: int) -> Dict[str, str]:
    out = {}
    for tok in line.split()[1:]:
        if "=" not in tok:
            raise FixtureParseError(f"bad section attribute {tok!r}", lineno)
        key, val = tok.split("=", 1)
        out[key] = val
    return out


def ingest_fixture(path) -> EigenFixture:
    """Read a fixture file.

    ::

        #FORMS level=243 weight=4
        label,root_number
        243.4.a.a,1
        #EIGEN
        label,n,lambda
        243.4.a.a,2,0.35355339059327373
    """
    text = Path(path).read_text(encoding="ascii")
    section = None
    level = weight = None
    forms: Dict[str, FixtureForm] = {}
    for lineno, raw in enumerate(text.split("\n"), 1):
        line = raw.rstrip("\r").strip()
        if not line:
            continue
        if line.startswith("#"):
            head = line.split()[0]
            if head == "#FORMS":
                meta = _meta(line, lineno)
                try:
                    level = int(meta["level"])
                    weight = int(meta["weight"])
                except (KeyError, ValueError):
                    raise FixtureParseError("#FORMS needs integer level= and weight=", lineno) from None
                section = "forms"
            elif head == "#EIGEN":
                if section != "forms":
                    raise FixtureParseError("#EIGEN before #FORMS", lineno)
                section = "eigen"
            else:
                raise FixtureParseError(f"unknown section {head!r}", lineno)
            continue
        row = next(csv.reader([line]))
        if section is None:
            raise FixtureParseError("data before any section", lineno)
        if section == "forms":
            if row == ["label", "root_number"]:
                continue
            if len(row) != 2:
                raise FixtureParseError(f"expected label,root_number, got {line!r}", lineno)
            try:
                eps = int(row[1])
            except ValueError:
                raise FixtureParseError(f"root number {row[1]!r} is not an integer", lineno) from None
            if eps not in (-1, 1):
                raise FixtureParseError(f"root number must be +1 or -1, got {eps}", lineno)
            if row[0] in forms:
                raise FixtureParseError(f"duplicate form {row[0]!r}", lineno)
            forms[row[0]] = FixtureForm(row[0], eps)
        else:
            if row == ["label", "n", "lambda"]:
                continue
            if len(row) != 3:
                raise FixtureParseError(f"expected label,n,lambda, got {line!r}", lineno)
            label = row[0]
            if label not in forms:
                raise FixtureParseError(f"eigenvalue for undeclared form {label!r}", lineno)
            try:
                n, lam = int(row[1]), float(row[2])
            except ValueError:
                raise FixtureParseError(f"bad n or lambda in {line!r}", lineno) from None
            if level % n and abs(lam) > 2 + 1e-9:
                raise FixtureParseError(f"|lambda({n})| = {abs(lam)} exceeds 2", lineno)
            forms[label].eigenvalues[n] = lam
    if level is None:
        raise FixtureParseError("no #FORMS section", 1)
    return EigenFixture(level, weight, list(forms.values()))


@dataclass(frozen=True)
class FixtureCheck:
    data_sum: float
    trace_value: float

    @property
    def abs_err(self) -> float:
        return abs(self.data_sum - self.trace_value)


def fixture_crosscheck(fixture: EigenFixture, params: FamilyParams, n: int, hurwitz) -> FixtureCheck:
    if fixture.level != params.level or fixture.weight != params.k:
        raise DomainError(
            f"fixture is level {fixture.level} weight {fixture.weight}, "
            f"family is level {params.level} weight {params.k}"
        )
    return FixtureCheck(fixture.data_sum(n), trace_closed(params, n, hurwitz).normalized)
