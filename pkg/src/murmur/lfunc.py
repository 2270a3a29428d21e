"""
Discriminant characters psi_D and the L-values built from them.

psi_D(m) = (d / (m/(m, L))) for D = d L^2 with d fundamental, and
psi_0 = 1. L(1, psi_D) for D < 0 comes either from the exact Hurwitz
class number (pi H(|D|)/sqrt|D|) or from a block-summed character series.

The local averages psi~_t^(l)(m) over n mod m^2 are computed exactly as
Fractions; their Dirichlet series factor as Euler products, and the s = 1
values used by the limiting density are served by an EulerProductCache.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.special import digamma, zeta

from .arith import euler_phi, factorize, kronecker, kronecker_array, sieve_primes
from .errors import CapacityError, DomainError, StateError
from .hurwitz import as_class_numbers

ZETA2 = math.pi**2 / 6

# Conventions for t = 0 in prod_{p != 2, p does not divide l*t}: under
# "divides-all" every prime divides 0 and the product is empty; under
# "ell-only" t = 0 is treated as having no prime factors of its own.
T0_DIVIDES_ALL = "divides-all"
T0_ELL_ONLY = "ell-only"
T0_CONVENTIONS = (T0_DIVIDES_ALL, T0_ELL_ONLY)

# Conventions for the 2-adic factor of L(1, psi~_T). "exact" keeps the
# local factor 1/(1 + 2^-s) at s = 1 for odd T (so half the even-T value);
# "uniform" uses the zeta(2) 2-factor for every T.
TWO_ADIC_EXACT = "exact"
TWO_ADIC_UNIFORM = "uniform"
TWO_ADIC_CONVENTIONS = (TWO_ADIC_EXACT, TWO_ADIC_UNIFORM)


@dataclass(frozen=True)
class DiscriminantChar:
    """D = d L^2 with d fundamental. D = 0 is stored as d = 1, L = 0."""

    D: int
    d: int
    L: int

    @property
    def is_zero(self) -> bool:
        return self.D == 0

    def __call__(self, m: int) -> int:
        return psi_eval(self, m)


def is_fundamental(d: int) -> bool:
    if d == 1:
        return True
    if d % 4 == 1:
        return _squarefree(d)
    if d % 4 == 0:
        m = d // 4
        return m % 4 in (2, 3) and _squarefree(m)
    return False


def _squarefree(n: int) -> bool:
    return n != 0 and all(e == 1 for _, e in factorize(n))


def decompose_discriminant(D: int) -> DiscriminantChar:
    if D % 4 not in (0, 1):
        raise DomainError(f"{D} is not a discriminant (needs D = 0, 1 mod 4)")
    if D == 0:
        return DiscriminantChar(0, 1, 0)
    core, root = 1, 1
    for p, e in factorize(D):
        core *= p ** (e % 2)
        root *= p ** (e // 2)
    core = core if D > 0 else -core
    if core % 4 == 1:
        return DiscriminantChar(D, core, root)
    # core = 2, 3 mod 4 forces root even
    return DiscriminantChar(D, 4 * core, root // 2)


def psi_eval(chi: DiscriminantChar, m: int) -> int:
    if m < 1:
        raise DomainError("psi_D(m) needs m >= 1")
    if chi.is_zero:
        return 1
    return kronecker(chi.d, m // math.gcd(m, chi.L))


@lru_cache(maxsize=4)
def _square_root_part(limit: int) -> np.ndarray:
    # root[n] = largest f with f^2 | n
    root = np.ones(limit + 1, dtype=np.int64)
    for f in range(2, math.isqrt(limit) + 1):
        root[f * f :: f * f] = f
    return root


def _root_part_for(values: np.ndarray) -> np.ndarray:
    top = int(values.max()) if values.size else 1
    size = 1 << max(10, top.bit_length())
    return _square_root_part(size)[values]


def psi_array(D: np.ndarray, m: int) -> np.ndarray:
    """psi_D(m) for an array of discriminants D and one modulus m."""
    D = np.asarray(D, dtype=np.int64)
    out = np.ones(D.shape, dtype=np.int64)
    nz = D != 0
    if not nz.any():
        return out
    Dn = D[nz]
    A = np.abs(Dn)
    f = _root_part_for(A)
    core = np.sign(Dn) * (A // (f * f))
    one = core % 4 == 1
    d = np.where(one, core, 4 * core)
    L = np.where(one, f, f // 2)
    mm = m // np.gcd(m, L)
    out[nz] = kronecker_array(d, mm)
    return out


# ---------------------------------------------------------------------------
# L(1, psi_D)


def lemma_tail_estimate(chi: DiscriminantChar, x: float) -> float:
    """Heuristic |d|^{1/6} / x^{1/3} size of the error in truncating at x."""
    return abs(chi.d) ** (1 / 6) / x ** (1 / 3)


def truncation_point(D: int) -> int:
    return max(1000, math.ceil(abs(D) ** 0.6))


def L1_psi(chi: DiscriminantChar, method: str = "class_number", table=None) -> float:
    """L(1, psi_D) for D < 0.

    ``class_number`` evaluates pi H(|D|)/sqrt|D| from the exact table.
    ``truncated_sum`` sums psi_D(m)/m over whole periods m <= x and adds the
    remaining periods through their digamma closed form, which is exact
    because psi_D sums to zero over a period.
    """
    D = chi.D
    if D >= 0:
        raise DomainError("L1_psi is only implemented for D < 0")
    q = -D
    if method == "class_number":
        if table is None:
            raise StateError("class_number method needs a Hurwitz table")
        h12 = as_class_numbers(table).twelve_h(q)
        return math.pi * (h12 / 12) / math.sqrt(q)
    if method != "truncated_sum":
        raise DomainError(f"unknown L-value method {method!r}")
    x = truncation_point(D)
    blocks = -(-x // q)
    r = np.arange(1, q + 1, dtype=np.int64)
    vals = _psi_period(chi)
    head = 0.0
    for j in range(blocks):
        head += float(np.sum(vals / (r + j * q)))
    tail = -float(np.sum(vals * digamma(blocks + r / q))) / q
    return head + tail


def _psi_period(chi: DiscriminantChar) -> np.ndarray:
    q = abs(chi.D)
    m = np.arange(1, q + 1, dtype=np.int64)
    return kronecker_array(chi.d, m // np.gcd(m, chi.L)).astype(float)


# ---------------------------------------------------------------------------
# local averages psi~


def psi_tilde_local(t: int, ell: int, m: int) -> Fraction:
    """(1/phi(m^2)) sum over n mod m^2, (n, m) = 1, of psi_{t^2 - 4 ell n}(m).

    ``ell = 1`` gives psi~_t.
    """
    if m < 1:
        raise DomainError("psi~ needs m >= 1")
    if m == 1:
        return Fraction(1)
    n = np.arange(m * m, dtype=np.int64)
    n = n[np.gcd(n, m) == 1]
    total = int(psi_array(t * t - 4 * ell * n, m).sum())
    return Fraction(total, euler_phi(m * m))


def psi_tilde_dirichlet_sum(t: int, ell: int, s: float, mmax: int) -> float:
    """sum_{m <= mmax} psi~_t^(ell)(m) / m^s, from the definition."""
    return float(sum(psi_tilde_local(t, ell, m) / m**s for m in range(1, mmax + 1)))


def psi_tilde_local_factor(t: int, ell: int, p: int, s: float, jmax: int) -> float:
    """sum_{j <= jmax} psi~(p^j) p^{-js}: a truncated Euler factor at p."""
    return float(sum(psi_tilde_local(t, ell, p**j) / p ** (j * s) for j in range(jmax + 1)))


# ---------------------------------------------------------------------------
# Euler products


def _odd_factor_psi1(p, s):
    return 1 - (1 + 1 / p) * (1 + p ** (-s)) * p ** (-s - 1)


@dataclass(frozen=True)
class EulerProductCache:
    """zeta(2) prod_{2 < p <= cutoff} (p^2 - p - 1)/(p(p - 1)), plus primes reused.

    ``tail_bound`` bounds sum_{p > cutoff} 1/(p(p-1)), which in turn bounds
    the relative error of every product served from the cache.
    """

    cutoff: int
    base_constant: float
    tail_bound: float
    primes: np.ndarray = field(repr=False)

    @staticmethod
    def local_factor(p: int) -> float:
        return (p * p - p - 1) / (p * (p - 1))


def build_euler_cache(cutoff: int = 10**7, tolerance: float = 1e-6) -> EulerProductCache:
    if cutoff < 3:
        raise DomainError("Euler cutoff must be at least 3")
    primes = sieve_primes(cutoff).primes
    odd = primes[1:].astype(float)
    log_prod = float(np.sum(np.log1p(-1.0 / (odd * (odd - 1)))))
    tail = 1.0 / cutoff
    if tail > tolerance:
        raise CapacityError(
            f"Euler cutoff {cutoff} leaves tail {tail:.2e} above tolerance {tolerance:.2e}",
            required=math.ceil(1 / tolerance),
            available=cutoff,
        )
    return EulerProductCache(cutoff, ZETA2 * math.exp(log_prod), tail, primes)


def L_psi_tilde1(s: float, cache: EulerProductCache | None = None, cutoff: int = 10**6) -> float:
    """L(s, psi~_1) for s > 1 from its Euler product truncated at the cutoff."""
    if s <= 1:
        raise DomainError("L(s, psi~_1) Euler product is used only for s > 1")
    return _L_psi_tilde1(s, cache, cutoff)


def L1_psi_tilde1(cache: EulerProductCache) -> float:
    """L(1, psi~_1): the product converges absolutely at s = 1."""
    return _L_psi_tilde1(1.0, cache, cache.cutoff)


def _L_psi_tilde1(s, cache, cutoff):
    primes = cache.primes if cache is not None else sieve_primes(cutoff).primes
    odd = primes[1:].astype(float)
    log_prod = float(np.sum(np.log(_odd_factor_psi1(odd, s))))
    two = (1 - 2.0 ** (-s)) * (1 - 2.0 ** (-s - 2))
    return float(zeta(2 * s) * zeta(s + 2)) * two * math.exp(log_prod)


def P_factor(s: float, t: int) -> float:
    """prod over p | t of the correction factors relating psi~_t to psi~_1."""
    if t == 0:
        raise DomainError("P(s, t) is only defined for t != 0")
    out = 1.0
    for p, _ in factorize(t):
        if p != 2:
            out *= (1 - p ** (-s - 2)) / _odd_factor_psi1(p, s)
        elif t % 4 == 0:
            out *= (1 + 2 ** (-s - 1) - 2 ** (-2 * s)) / (1 - 2 ** (-s))
        else:
            num = 1 + 2 ** (-s - 2) - 7 * 2 ** (-2 * s - 3) - 2 ** (-3 * s - 2)
            out *= num / ((1 - 2 ** (-s)) * (1 - 2 ** (-s - 2)))
    return out


def L1_psi_tilde_ellt(
    t: int,
    ell: int,
    cache: EulerProductCache | None,
    t0_convention: str = T0_DIVIDES_ALL,
    two_adic: str = TWO_ADIC_EXACT,
) -> float:
    """L(1, psi~_{ell t}) = cached constant / prod_{p | ell t, p odd} factor(p)."""
    if cache is None:
        raise StateError("Euler product cache has not been built")
    if t0_convention not in T0_CONVENTIONS:
        raise DomainError(f"unknown t = 0 convention {t0_convention!r}")
    if two_adic not in TWO_ADIC_CONVENTIONS:
        raise DomainError(f"unknown 2-adic convention {two_adic!r}")
    if t == 0:
        if t0_convention == T0_DIVIDES_ALL:
            return ZETA2
        return cache.base_constant / cache.local_factor(ell)
    value = cache.base_constant
    for p, _ in factorize(ell * t):
        if p != 2 and p <= cache.cutoff:
            value /= cache.local_factor(p)
    if two_adic == TWO_ADIC_EXACT and t % 2:
        value /= 2
    return value


def odd_part_product(T: int, cache: EulerProductCache) -> float:
    """prod_{p != 2, p does not divide T} (p^2 - p - 1)/(p(p - 1)) over p <= cutoff."""
    if T == 0:
        raise DomainError("odd_part_product needs T != 0; t = 0 goes through L1_psi_tilde_ellt")
    value = cache.base_constant / ZETA2
    for p, _ in factorize(T):
        if p != 2 and p <= cache.cutoff:
            value /= cache.local_factor(p)
    return value
