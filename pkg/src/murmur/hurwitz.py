"""
Hurwitz class numbers H(n), stored as the integers 12*H(n).

The table is filled by walking reduced forms (a, b, c), |b| <= a <= c,
and adding a weight at n = 4ac - b^2. For fixed a, every n >= 4a(a+1)
is hit by exactly those b with n = -b^2 (mod 4a), so that whole range is
one broadcast add of a length-4a pattern over rows of the table; only
the short stretch below 4a(a+1) is filled form by form. Work is
O(X^{3/2}) but runs over contiguous memory.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from pathlib import Path

import numpy as np

from .errors import CapacityError, DomainError

MAGIC = b"HURW1"


@dataclass(frozen=True)
class HurwitzTable:
    """12*H(n) for 0 <= n <= limit, as a read-only int32 array."""

    limit: int
    h12: np.ndarray = field(repr=False)

    def __contains__(self, n):
        return 0 <= n <= self.limit

    def twelve_h(self, n: int) -> int:
        if n < 0:
            raise DomainError("Hurwitz class numbers are indexed by n >= 0")
        if n > self.limit:
            raise CapacityError(
                f"H({n}) requested but table covers only n <= {self.limit}",
                required=n,
                available=self.limit,
            )
        return int(self.h12[n])

    def H(self, n: int) -> Fraction:
        return Fraction(self.twelve_h(n), 12)

    def dump(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(MAGIC)
            fh.write(struct.pack("<Q", self.limit))
            fh.write(self.h12.astype("<i4").tobytes())

    @classmethod
    def load(cls, path) -> "HurwitzTable":
        data = Path(path).read_bytes()
        if data[:5] != MAGIC:
            raise DomainError(f"{path}: not a Hurwitz table dump")
        (limit,) = struct.unpack("<Q", data[5:13])
        body = data[13:]
        if len(body) != 4 * (limit + 1):
            raise DomainError(f"{path}: truncated table body")
        h12 = np.frombuffer(body, dtype="<i4").astype(np.int32)
        h12.setflags(write=False)
        return cls(limit, h12)


def build_hurwitz_table(X: int) -> HurwitzTable:
    if X < 4:
        raise DomainError("Hurwitz table limit must be at least 4")
    h = np.zeros(X + 1, dtype=np.int32)
    amax = math.isqrt(X // 3)
    for a in range(1, amax + 1):
        step = 4 * a
        S = step * (a + 1)
        b = np.arange(0, a + 1, dtype=np.int64)
        # c > a: both signs of b unless b is 0 or a
        w = np.where((b == 0) | (b == a), 12, 24)
        # below S, the few c > a with 4ac - b^2 < S, one short slice per b
        top = min(S, X + 1)
        for bi, wi in zip(range(1, a + 1), w[1:].tolist()):
            lo = S - bi * bi
            if lo < top:
                h[lo:top:step] += wi
        # c == a: only b >= 0; (a,0,a) and (a,a,a) carry 1/2 and 1/3
        n = 4 * a * a - b * b
        keep = n <= X
        np.add.at(h, n[keep], np.where(b == 0, 6, np.where(b == a, 4, 12))[keep])
        if S > X:
            continue
        # from S on, n = 4ac - b^2 with c > a exactly when n = -b^2 mod 4a
        g = np.zeros(step, dtype=np.int32)
        np.add.at(g, (-b * b) % step, w)
        rows, rem = divmod(X + 1 - S, step)
        if rows:
            h[S : S + rows * step].reshape(rows, step)[:] += g
        if rem:
            h[S + rows * step :] += g[:rem]
    h[0] = -1
    h.setflags(write=False)
    return HurwitzTable(X, h)


@lru_cache(maxsize=4096)
def hurwitz_direct(n: int) -> int:
    """12*H(n) for a single n by enumerating reduced forms of discriminant -n."""
    if n < 0:
        raise DomainError("Hurwitz class numbers are indexed by n >= 0")
    if n == 0:
        return -1
    if n % 4 in (1, 2):
        return 0
    total = 0
    b = n % 2
    while 3 * b * b <= n:
        m = (b * b + n) // 4
        lo, hi = max(b, 1), math.isqrt(m)
        if lo <= hi:
            cand = np.arange(lo, hi + 1, dtype=np.int64)
            for a in cand[m % cand == 0].tolist():
                c = m // a
                if b == 0:
                    total += 6 if c == a else 12
                elif b == a:
                    total += 4 if c == a else 12
                else:
                    total += 12 if c == a else 24
        b += 2
    return total


class ClassNumbers:
    """12*H(n) lookups: from a table, with optional direct counting beyond it.

    With ``allow_direct=False`` a lookup past the table is a CapacityError.
    """

    def __init__(self, table: HurwitzTable | None, allow_direct: bool = False):
        self.table = table
        self.allow_direct = allow_direct

    @property
    def limit(self):
        return self.table.limit if self.table is not None else 0

    def twelve_h(self, n: int) -> int:
        if self.table is not None and n <= self.table.limit:
            return self.table.twelve_h(n)
        if not self.allow_direct:
            raise CapacityError(
                f"H({n}) requested but table covers only n <= {self.limit}",
                required=n,
                available=self.limit,
            )
        return hurwitz_direct(n)

    def H(self, n: int) -> Fraction:
        return Fraction(self.twelve_h(n), 12)


def as_class_numbers(source) -> ClassNumbers:
    if isinstance(source, ClassNumbers):
        return source
    if isinstance(source, HurwitzTable):
        return ClassNumbers(source)
    raise TypeError(f"expected HurwitzTable or ClassNumbers, got {type(source).__name__}")


def class_number_relation_defects(table: HurwitzTable, nmax: int | None = None) -> np.ndarray:
    """n <= nmax where sum_t 12H(4n - t^2) != 24 sigma_1(n) - 12 sum_{d|n} min(d, n/d).

    The Kronecker-Hurwitz relation touches every entry H(m), m = 0, 3 mod 4,
    up to 4*nmax, so it catches corruption anywhere in that range.
    """
    N = table.limit // 4 if nmax is None else min(nmax, table.limit // 4)
    if N < 1:
        return np.zeros(0, dtype=np.int64)
    h = table.h12.astype(np.int64)
    lhs = np.zeros(N + 1, dtype=np.int64)
    for t in range(0, math.isqrt(4 * N) + 1):
        n0 = -(-t * t // 4)
        n0 = max(n0, 1)
        if n0 > N:
            break
        vals = h[4 * n0 - t * t : 4 * N - t * t + 1 : 4]
        lhs[n0:] += vals if t == 0 else 2 * vals
    sig = np.zeros(N + 1, dtype=np.int64)
    lam = np.zeros(N + 1, dtype=np.int64)
    for d in range(1, math.isqrt(N) + 1):
        sig[d * d] += d
        lam[d * d] += d
        e_hi = N // d
        if e_hi > d:
            sig[d * (d + 1) :: d][: e_hi - d] += d + np.arange(d + 1, e_hi + 1)
            lam[d * (d + 1) :: d][: e_hi - d] += 2 * d
    rhs = 24 * sig - 12 * lam
    bad = np.flatnonzero(lhs[1:] != rhs[1:]) + 1
    return bad
