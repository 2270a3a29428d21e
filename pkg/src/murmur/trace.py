"""
Traces of T_n composed with the Atkin-Lehner involution on S_k^new(l^a).

Two independent routes:

* ``trace_direct`` assembles the Skoruppa-Zagier sums s_{k/2+1, M}(n, M)
  exactly in rational arithmetic (the weight polynomial is even, so
  p_k(t/sqrt(L), n) is rational) and convolves them with alpha over M | l^a.
* ``trace_closed`` evaluates the Ramanujan-sum closed form in floating point
  with L-values from the class number table.

The SZ assembly is written for general N, which is what lets the tests
check it against known level 1, 11 and 37 data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, NamedTuple, Tuple

from .arith import (
    divisors,
    factorize,
    is_prime,
    largest_square_divisor_root,
    ramanujan_sum,
    sigma,
)
from .errors import DomainError
from .hurwitz import as_class_numbers


@dataclass(frozen=True)
class FamilyParams:
    """One family: level ell^a, weight k. a must be odd and at least 5."""

    ell: int
    a: int
    k: int

    def __post_init__(self):
        if self.ell < 3 or not is_prime(self.ell):
            raise DomainError(f"ell must be an odd prime, got {self.ell}")
        if self.a < 5 or self.a % 2 == 0:
            raise DomainError(f"exponent a must be odd and >= 5, got {self.a}")
        if self.k < 2 or self.k % 2:
            raise DomainError(f"weight k must be even and >= 2, got {self.k}")

    @property
    def level(self) -> int:
        return self.ell**self.a


def newform_dimension_asymptotic(params: FamilyParams) -> float:
    """Main term (k-1)/12 * l^a (1 - 1/l)^2 (1 + 1/l) of dim S_k^new(l^a)."""
    ell = params.ell
    return (params.k - 1) / 12 * params.level * (1 - 1 / ell) ** 2 * (1 + 1 / ell)


class ClosedTerm(NamedTuple):
    t: int
    coefficient: float  # c_{l^{(a+1)/2}}(t) / sqrt(l)
    phase: float  # phi_{t, l n}
    discriminant: int
    L_value: float
    value: float


class DirectTerm(NamedTuple):
    M: int
    alpha: int
    s: Fraction


@dataclass(frozen=True)
class TraceValue:
    """(-1)^{k/2} n^{(1-k)/2} tr(T_n o W, S_k^new(l^a)) with its breakdown."""

    normalized: float
    n: int
    k: int
    components: Tuple = ()
    exact_trace: Fraction | None = None

    @property
    def trace(self) -> float:
        """Undo the normalization; an integer up to rounding."""
        if self.exact_trace is not None:
            return float(self.exact_trace)
        sign = -1 if (self.k // 2) % 2 else 1
        return sign * self.normalized * self.n ** ((self.k - 1) / 2)


def alpha(m: int) -> int:
    """Multiplicative: alpha(p^j) = 1, -1, -1, 1 for j = 0..3 and 0 beyond."""
    if m < 1:
        raise DomainError("alpha needs m >= 1")
    out = 1
    for _, e in factorize(m) if m > 1 else ():
        if e >= 4:
            return 0
        out *= 1 if e == 3 else -1
    return out


def phase_phi(t: int, m: float) -> float:
    """arcsin(t / (2 sqrt m)), defined for t^2 < 4m."""
    if t * t >= 4 * m:
        raise DomainError(f"phase needs t^2 < 4m, got t={t}, m={m}")
    return math.asin(t / (2 * math.sqrt(m)))


def p_weight(k: int, t: int, L: int, n: int) -> float:
    """p_k(t/sqrt(L), n) in the trigonometric form, or the degenerate value."""
    disc = t * t - 4 * L * n
    if disc > 0:
        raise DomainError("p_weight needs t^2 - 4Ln <= 0")
    if disc == 0:
        return (k - 1) * (t / (2 * math.sqrt(L))) ** (k - 2)
    sign = -1 if (k // 2 + 1) % 2 else 1
    phi = phase_phi(t, L * n)
    return (
        2 * sign * math.sqrt(L) * n ** ((k - 1) / 2) * math.cos((k - 1) * phi)
        / math.sqrt(-disc)
    )


def p_weight_exact(k: int, y: Fraction, n: int) -> Fraction:
    """p_k(x, n) for even k as a rational function of y = x^2.

    Runs u_{j+1} = x u_j - n u_{j-1} (u_0 = 0, u_1 = 1) with each u_j kept
    as A_j + x B_j; u_{k-1} has no odd part.
    """
    if k < 2 or k % 2:
        raise DomainError("p_weight_exact needs even k >= 2")
    y = Fraction(y)
    A_prev, B_prev = Fraction(0), Fraction(0)
    A, B = Fraction(1), Fraction(0)
    for _ in range(k - 2):
        A_prev, B_prev, A, B = A, B, y * B - n * A_prev, A - n * B_prev
    return A


def _squarefree(m: int) -> bool:
    return m == 1 or all(e == 1 for _, e in factorize(m))


def s_kM(kappa: int, M: int, n: int, hurwitz, include_weight2_term: bool = True) -> Fraction:
    """Skoruppa-Zagier s_{kappa, M}(n, M) for weight 2 kappa - 2, exactly."""
    if kappa < 2:
        raise DomainError("kappa must be at least 2")
    if math.gcd(n, M) != 1:
        raise DomainError(f"s_kM needs gcd(n, M) = 1, got n={n}, M={M}")
    cn = as_class_numbers(hurwitz)
    w = 2 * kappa - 2
    class_sum = Fraction(0)
    for L in divisors(M):
        ML = M // L
        umax = math.isqrt(4 * n // L)
        for u in range(-umax, umax + 1):
            t = L * u
            if t * t > 4 * L * n:
                continue
            if not _squarefree(math.gcd(u * u, ML)):
                continue
            y = Fraction(t * t, L)
            h12 = cn.twelve_h(4 * L * n - t * t)
            class_sum += p_weight_exact(w, y, n) * h12
    out = -class_sum / 24
    Q = largest_square_divisor_root(M)
    hyp = 0
    for d in divisors(n):
        hyp += min(d, n // d) ** (2 * kappa - 3) * math.gcd(Q, d + n // d)
    out -= Fraction(hyp, 2)
    if include_weight2_term and kappa == 2:
        out += sigma(0, M) * sigma(1, n)
    return out


def trace_general(N: int, k: int, n: int, hurwitz) -> Tuple[Fraction, List[DirectTerm]]:
    """tr(T_n o W_N, S_k^new(N)) = sum_{M | N} alpha(N/M) s_{k/2+1, M}(n, M)."""
    if k < 2 or k % 2:
        raise DomainError("weight must be even and >= 2")
    kappa = k // 2 + 1
    total = Fraction(0)
    terms = []
    for M in divisors(N):
        al = alpha(N // M)
        if al == 0:
            continue
        s = s_kM(kappa, M, n, hurwitz)
        terms.append(DirectTerm(M, al, s))
        total += al * s
    return total, terms


def _check_prime_n(params: FamilyParams, n: int):
    if n == params.ell or not is_prime(n):
        raise DomainError(f"n must be a prime different from ell={params.ell}, got {n}")


def _normalize(trace: float, k: int, n: int) -> float:
    sign = -1 if (k // 2) % 2 else 1
    return sign * trace * n ** ((1 - k) / 2)


def trace_direct(params: FamilyParams, n: int, hurwitz) -> TraceValue:
    """Four-term assembly s(l^a) - s(l^{a-1}) - s(l^{a-2}) + s(l^{a-3})."""
    _check_prime_n(params, n)
    total, terms = trace_general(params.level, params.k, n, hurwitz)
    return TraceValue(
        normalized=_normalize(float(total), params.k, n),
        n=n,
        k=params.k,
        components=tuple(terms),
        exact_trace=total,
    )


def closed_form_t_values(params: FamilyParams, n: int) -> range:
    """t with t^2 < 4 l n in the Ramanujan support l^{(a-1)/2} | t."""
    step = params.ell ** ((params.a - 1) // 2)
    bound = 4 * params.ell * n
    umax = math.isqrt((bound - 1) // (step * step)) if bound > step * step else 0
    return range(-umax * step, umax * step + 1, step)


def trace_closed(params: FamilyParams, n: int, hurwitz) -> TraceValue:
    """(1/pi) sum_t c_{l^{(a+1)/2}}(t)/sqrt(l) cos((k-1) phi_{t, l n}) L(1, psi_{t^2 - 4 l n})."""
    _check_prime_n(params, n)
    cn = as_class_numbers(hurwitz)
    ell, k = params.ell, params.k
    q = ell ** ((params.a + 1) // 2)
    m = ell * n
    sqrt_ell = math.sqrt(ell)
    terms = []
    total = 0.0
    for t in closed_form_t_values(params, n):
        c = ramanujan_sum(q, t)
        if c == 0:
            continue
        D = t * t - 4 * m
        phi = phase_phi(t, m)
        Lval = math.pi * (cn.twelve_h(-D) / 12) / math.sqrt(-D)
        coeff = c / sqrt_ell
        value = coeff * math.cos((k - 1) * phi) * Lval / math.pi
        terms.append(ClosedTerm(t, coeff, phi, D, Lval, value))
        total += value
    return TraceValue(normalized=total, n=n, k=k, components=tuple(terms))


def A_value(t: int, m: int, k: int, hurwitz) -> float:
    """cos((k-1) phi_{t,m}) L(1, psi_{t^2-4m}); zero on the boundary t^2 = 4m."""
    D = t * t - 4 * m
    if D > 0:
        raise DomainError("A(t, m) needs t^2 <= 4m")
    if D == 0:
        return 0.0
    cn = as_class_numbers(hurwitz)
    Lval = math.pi * (cn.twelve_h(-D) / 12) / math.sqrt(-D)
    return math.cos((k - 1) * phase_phi(t, m)) * Lval


def epsilon_lambda_sum(params: FamilyParams, n: int, hurwitz) -> float:
    """sum over newforms of eps_f lambda_f(n); equal to the normalized trace."""
    return trace_closed(params, n, hurwitz).normalized


def required_table_size(params: FamilyParams, nmax: int, route: str = "closed") -> int:
    """Largest |D| the chosen trace route will look up for primes n <= nmax."""
    if route == "direct":
        return 4 * params.level * nmax
    return 4 * params.ell * nmax
