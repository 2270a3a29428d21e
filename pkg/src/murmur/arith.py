"""
Integer arithmetic primitives.

Prime sieves (plain and segmented), factorization, the classical
multiplicative functions, Kronecker symbols (scalar and vectorised),
Ramanujan sums and Chebyshev polynomials of the second kind.

Everything here is pure; a PrimeSieve is immutable once built.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import List, Tuple

import numpy as np

from .errors import DomainError

SEGMENT_THRESHOLD = 10**8
_SEGMENT_SPAN = 1 << 24


def _simple_sieve(limit: int) -> np.ndarray:
    is_prime = np.ones(limit + 1, dtype=bool)
    is_prime[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if is_prime[p]:
            is_prime[p * p :: p] = False
    return is_prime


def primes_in_range(lo: int, hi: int, base: np.ndarray | None = None) -> np.ndarray:
    """All primes p with lo <= p <= hi, by a segmented sieve.

    ``base`` may supply the primes up to sqrt(hi); otherwise they are sieved.
    """
    lo = max(lo, 2)
    if hi < lo:
        return np.zeros(0, dtype=np.int64)
    if base is None:
        root = math.isqrt(hi)
        base = np.flatnonzero(_simple_sieve(max(root, 2))).astype(np.int64)
    out = []
    start = lo
    while start <= hi:
        stop = min(start + _SEGMENT_SPAN - 1, hi)
        mask = np.ones(stop - start + 1, dtype=bool)
        for p in base:
            p = int(p)
            if p * p > stop:
                break
            first = max(p * p, -(-start // p) * p)
            if first <= stop:
                mask[first - start :: p] = False
        out.append(np.flatnonzero(mask).astype(np.int64) + start)
        start = stop + 1
    return np.concatenate(out)


@dataclass(frozen=True)
class PrimeSieve:
    """Primes up to ``limit``.

    Below the segmentation threshold a boolean table backs ``is_prime``;
    above it only the sorted prime list is kept and membership is a binary
    search.
    """

    limit: int
    primes: np.ndarray = field(repr=False)
    _table: np.ndarray | None = field(default=None, repr=False, compare=False)

    def is_prime(self, n: int) -> bool:
        if n < 2 or n > self.limit:
            if n > self.limit:
                raise DomainError(f"{n} exceeds sieve limit {self.limit}")
            return False
        if self._table is not None:
            return bool(self._table[n])
        i = int(np.searchsorted(self.primes, n))
        return i < len(self.primes) and int(self.primes[i]) == n

    @property
    def prime_list(self) -> List[int]:
        return self.primes.tolist()

    def between(self, lo: float, hi: float) -> np.ndarray:
        """Primes p with lo <= p <= hi (closed interval, real bounds)."""
        i = np.searchsorted(self.primes, math.ceil(lo), side="left")
        j = np.searchsorted(self.primes, math.floor(hi), side="right")
        return self.primes[i:j]

    def __len__(self):
        return len(self.primes)


def sieve_primes(limit: int, segment_threshold: int = SEGMENT_THRESHOLD) -> PrimeSieve:
    if limit < 2:
        raise DomainError("sieve limit must be at least 2")
    if limit <= segment_threshold:
        table = _simple_sieve(limit)
        table.setflags(write=False)
        primes = np.flatnonzero(table).astype(np.int64)
        primes.setflags(write=False)
        return PrimeSieve(limit, primes, table)
    primes = primes_in_range(2, limit)
    primes.setflags(write=False)
    return PrimeSieve(limit, primes, None)


@lru_cache(maxsize=8)
def _small_primes(bound: int) -> Tuple[int, ...]:
    return tuple(np.flatnonzero(_simple_sieve(bound)).tolist())


def factorize(n: int) -> List[Tuple[int, int]]:
    """Prime factorization as [(p, e), ...] with increasing p."""
    if n == 0:
        raise DomainError("cannot factor 0")
    n = abs(n)
    out = []
    for p in _small_primes(1000):
        if p * p > n:
            break
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
    else:
        p = 1001
        while p * p <= n:
            if n % p == 0:
                e = 0
                while n % p == 0:
                    n //= p
                    e += 1
                out.append((p, e))
            p += 2
    if n > 1:
        out.append((n, 1))
    return out


def sigma(j: int, n: int) -> int:
    """Divisor count (j=0) or divisor sum (j=1)."""
    if n < 1:
        raise DomainError("sigma needs n >= 1")
    if j not in (0, 1):
        raise DomainError("only sigma_0 and sigma_1 are supported")
    out = 1
    for p, e in factorize(n):
        out *= (e + 1) if j == 0 else (p ** (e + 1) - 1) // (p - 1)
    return out


def euler_phi(n: int) -> int:
    if n < 1:
        raise DomainError("phi needs n >= 1")
    out = n
    for p, _ in factorize(n):
        out -= out // p
    return out


def mobius(n: int) -> int:
    if n < 1:
        raise DomainError("mobius needs n >= 1")
    f = factorize(n)
    if any(e > 1 for _, e in f):
        return 0
    return -1 if len(f) % 2 else 1


def divisors(n: int) -> List[int]:
    divs = [1]
    for p, e in factorize(n):
        divs = [d * p**i for d in divs for i in range(e + 1)]
    return sorted(divs)


def largest_square_divisor_root(n: int) -> int:
    """Q(n): the largest q with q^2 | n."""
    out = 1
    for p, e in factorize(n):
        out *= p ** (e // 2)
    return out


def ramanujan_sum(q: int, m: int) -> int:
    """c_q(m) = sum over d | gcd(q, m) of d * mu(q/d)."""
    if q < 1:
        raise DomainError("Ramanujan sum needs q >= 1")
    g = math.gcd(q, m)
    return sum(d * mobius(q // d) for d in divisors(g))


def _kronecker_two(d: int) -> int:
    if d % 2 == 0:
        return 0
    return 1 if d % 8 in (1, 7) else -1


def jacobi(a: int, n: int) -> int:
    """Jacobi symbol (a/n) for odd n > 0."""
    if n <= 0 or n % 2 == 0:
        raise DomainError("Jacobi symbol needs odd positive modulus")
    a %= n
    result = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def kronecker(d: int, m: int) -> int:
    """Kronecker symbol (d/m) for m >= 0.

    (d/0) is 1 when |d| = 1 and 0 otherwise.
    """
    if m < 0:
        raise DomainError("kronecker is only defined here for m >= 0")
    if m == 0:
        return 1 if abs(d) == 1 else 0
    v = (m & -m).bit_length() - 1
    odd = m >> v
    out = 1
    if v:
        k2 = _kronecker_two(d)
        if k2 == 0:
            return 0
        if v % 2:
            out = k2
    if odd == 1:
        return out
    return out * jacobi(d, odd)


def kronecker_array(d, m) -> np.ndarray:
    """Vectorised Kronecker symbol for integer arrays d and m >= 1."""
    d = np.asarray(d, dtype=np.int64)
    m = np.asarray(m, dtype=np.int64)
    d, m = np.broadcast_arrays(d, m)
    if np.any(m < 1):
        raise DomainError("kronecker_array needs m >= 1")
    d = d.copy()
    n = m.copy()
    res = np.ones(d.shape, dtype=np.int64)

    # two-part of m
    v = np.zeros(n.shape, dtype=np.int64)
    even = (n & 1) == 0
    while even.any():
        n[even] >>= 1
        v[even] += 1
        even = (n & 1) == 0
    d_even = (d & 1) == 0
    res[(v > 0) & d_even] = 0
    r8 = d % 8
    flip = (v % 2 == 1) & ~d_even & ((r8 == 3) | (r8 == 5))
    res[flip] *= -1

    # Jacobi (d / n) for the odd part
    a = d % n
    live = (res != 0) & (n > 1)
    while True:
        act = live & (a != 0)
        if not act.any():
            break
        ev = act & ((a & 1) == 0)
        while ev.any():
            a[ev] >>= 1
            n8 = n % 8
            res[ev & ((n8 == 3) | (n8 == 5))] *= -1
            ev = act & ((a & 1) == 0)
        sw = act
        a_sw, n_sw = a[sw], n[sw]
        q = (a_sw % 4 == 3) & (n_sw % 4 == 3)
        sub = res[sw]
        sub[q] *= -1
        res[sw] = sub
        a[sw] = n_sw % a_sw
        n[sw] = a_sw
    res[live & (n != 1)] = 0
    return res


def chebyshev_U(n: int, x, tol: float = 10 * np.finfo(float).eps):
    """U_n(x) by the three-term recurrence; accepts scalars or arrays.

    Inputs within ``tol`` of +-1 are clamped; anything further out raises.
    """
    if n < 0:
        raise DomainError("degree must be nonnegative")
    xa = np.asarray(x, dtype=float)
    if np.any(np.abs(xa) > 1 + tol):
        raise DomainError("chebyshev_U argument outside [-1, 1]")
    xa = np.clip(xa, -1.0, 1.0)
    prev = np.ones_like(xa)
    if n == 0:
        out = prev
    else:
        cur = 2 * xa
        for _ in range(n - 1):
            prev, cur = cur, 2 * xa * cur - prev
        out = cur
    return float(out) if out.ndim == 0 else out


_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, valid for n < 3.3e24."""
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True
