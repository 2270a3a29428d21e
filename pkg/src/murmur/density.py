"""
The limiting murmuration density as an integral over the window E.

For each t the integrand is supported on v > t^2/(4 l^2) and vanishes there
like a square root. Substituting v = t^2/(4 l^2) + w^2 turns every per-t
integral into a smooth one, which is integrated over a fixed mesh of
w-panels with adaptive Gauss-Legendre on each panel. Full panels depend
only on (t, l, k, tol) and are memoised, so a density curve over E = [1, T]
only pays for the last partial panel at each new T, and every value is a
pure function of its own window.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .arith import chebyshev_U
from .errors import DomainError
from .lfunc import (
    T0_DIVIDES_ALL,
    TWO_ADIC_EXACT,
    ZETA2,
    EulerProductCache,
    L1_psi_tilde_ellt,
)

PANEL_WIDTH = 0.25
GL_ORDER = 16
MAX_DEPTH = 40

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(GL_ORDER)


@dataclass(frozen=True)
class Window:
    alpha: float
    beta: float

    def __post_init__(self):
        if not (0 < self.alpha < self.beta) or not math.isfinite(self.beta):
            raise DomainError(f"window needs 0 < alpha < beta, got [{self.alpha}, {self.beta}]")

    @property
    def measure(self) -> float:
        return self.beta - self.alpha


@dataclass(frozen=True)
class DensityCurve:
    T: np.ndarray
    values: np.ndarray
    t_counts: np.ndarray


@dataclass(frozen=True)
class DensityOptions:
    """Quadrature tolerance and the two product conventions."""

    tol: float = 1e-9
    t0_convention: str = T0_DIVIDES_ALL
    two_adic: str = TWO_ADIC_EXACT
    threads: int = 1


def t_weight(t: int, ell: int, cache: EulerProductCache, opts: DensityOptions = DensityOptions()) -> float:
    """(1_{l | t} - 1/l) times the Euler product over odd p not dividing l t."""
    ind = 1.0 if t % ell == 0 else 0.0
    C = L1_psi_tilde_ellt(t, ell, cache, opts.t0_convention, opts.two_adic) / ZETA2
    return (ind - 1.0 / ell) * C


def integrand_term(t: int, v: float, ell: int, k: int, cache: EulerProductCache,
                   opts: DensityOptions = DensityOptions()) -> float:
    if v <= 0:
        raise DomainError("v must be positive")
    t0 = t * t / (4 * ell * ell)
    if t0 >= v:
        raise DomainError(f"integrand needs |t| < 2 l sqrt(v), got t={t}, v={v}")
    x = t / (2 * ell * math.sqrt(v))
    return t_weight(t, ell, cache, opts) * math.sqrt(v - t0) * chebyshev_U(k - 2, x)


def _w_integrand(w: np.ndarray, t: int, ell: int, k: int) -> np.ndarray:
    # 2 w^2 U_{k-2}(t / (2 l sqrt(t0 + w^2))), the integrand after v = t0 + w^2
    t0 = t * t / (4 * ell * ell)
    x = t / (2 * ell * np.sqrt(t0 + w * w)) if t else np.zeros_like(w)
    return 2 * w * w * chebyshev_U(k - 2, x)


def _gl(f, lo, hi):
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    return half * float(np.dot(_GL_WEIGHTS, f(mid + half * _GL_NODES)))


def _adaptive(f, lo, hi, tol, whole=None, depth=0):
    if whole is None:
        whole = _gl(f, lo, hi)
    mid = 0.5 * (lo + hi)
    left, right = _gl(f, lo, mid), _gl(f, mid, hi)
    if abs(left + right - whole) <= tol or depth >= MAX_DEPTH:
        return left + right
    return (_adaptive(f, lo, mid, tol / 2, left, depth + 1)
            + _adaptive(f, mid, hi, tol / 2, right, depth + 1))


@lru_cache(maxsize=1 << 16)
def _panel(t: int, ell: int, k: int, lo: float, hi: float, tol: float) -> float:
    return _adaptive(lambda w: _w_integrand(w, t, ell, k), lo, hi, tol)


def raw_t_integral(t: int, alpha: float, beta: float, ell: int, k: int, tol: float) -> float:
    """int over [alpha, beta] intersected with (t0, inf) of sqrt(v - t0) U_{k-2}(...) dv."""
    t = abs(t)
    t0 = t * t / (4 * ell * ell)
    if t0 >= beta:
        return 0.0
    w_lo = math.sqrt(max(alpha, t0) - t0)
    w_hi = math.sqrt(beta - t0)
    if w_hi <= w_lo:
        return 0.0
    # panel tolerance scales with width so the total stays below tol
    per_unit = tol / max(w_hi - w_lo, PANEL_WIDTH)
    j_lo = math.floor(w_lo / PANEL_WIDTH)
    j_hi = math.floor(w_hi / PANEL_WIDTH)
    total = 0.0
    for j in range(j_lo, j_hi + 1):
        a = max(j * PANEL_WIDTH, w_lo)
        b = min((j + 1) * PANEL_WIDTH, w_hi)
        if b <= a:
            continue
        full = a == j * PANEL_WIDTH and b == (j + 1) * PANEL_WIDTH
        ptol = per_unit * PANEL_WIDTH
        if full:
            total += _panel(t, ell, k, a, b, ptol)
        else:
            total += _adaptive(lambda w: _w_integrand(w, t, ell, k), a, b, per_unit * (b - a))
    return total


def per_t_integral(t: int, window: Window, ell: int, k: int, cache: EulerProductCache,
                   opts: DensityOptions = DensityOptions()) -> float:
    """int_E of integrand_term(t, v) dv; exactly 0 when the support misses E."""
    if opts.tol <= 0:
        raise DomainError("tolerance must be positive")
    raw = raw_t_integral(t, window.alpha, window.beta, ell, k, opts.tol)
    if raw == 0.0:
        return 0.0
    return t_weight(t, ell, cache, opts) * raw


def prefactor(ell: int, k: int) -> float:
    """(-1)^{k/2+1}/(k-1) * 2 pi/(1 - 1/l)."""
    sign = 1 if (k // 2 + 1) % 2 == 0 else -1
    return sign / (k - 1) * 2 * math.pi / (1 - 1 / ell)


def t_range(window: Window, ell: int) -> range:
    """t >= 0 with |t| < 2 l sqrt(beta)."""
    bound = 2 * ell * math.sqrt(window.beta)
    tmax = math.ceil(bound) - 1
    return range(0, tmax + 1)


def _map(fn, items, threads):
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


def per_t_terms(window: Window, ell: int, k: int, cache: EulerProductCache,
                opts: DensityOptions = DensityOptions()) -> list:
    """[(t, per_t_integral)] for t >= 0 in the finite range."""
    ts = list(t_range(window, ell))
    vals = _map(lambda t: per_t_integral(t, window, ell, k, cache, opts), ts, opts.threads)
    return list(zip(ts, vals))


def limiting_density(window: Window, ell: int, k: int, cache: EulerProductCache,
                     opts: DensityOptions = DensityOptions()) -> float:
    _check_family(ell, k)
    terms = per_t_terms(window, ell, k, cache, opts)
    s = 0.0
    for t, val in terms:
        s += val if t == 0 else 2 * val
    return prefactor(ell, k) * s / window.measure


def limiting_density_signed(window: Window, ell: int, k: int, cache: EulerProductCache,
                            opts: DensityOptions = DensityOptions(), extra: int = 0) -> float:
    """Same density summed over every signed t; ``extra`` widens the t-range."""
    _check_family(ell, k)
    tmax = t_range(window, ell).stop - 1 + extra
    s = 0.0
    for t in range(-tmax, tmax + 1):
        s += per_t_integral(t, window, ell, k, cache, opts)
    return prefactor(ell, k) * s / window.measure


def density_curve(T_grid: Sequence[float], ell: int, k: int, cache: EulerProductCache,
                  opts: DensityOptions = DensityOptions(), alpha: float = 1.0) -> DensityCurve:
    """Limiting density over E = [alpha, T] for each T in an increasing grid."""
    T = np.asarray(T_grid, dtype=float)
    if T.ndim != 1 or T.size == 0:
        raise DomainError("T grid must be a non-empty 1-d sequence")
    if np.any(np.diff(T) <= 0):
        raise DomainError("T grid must be strictly increasing")
    if np.any(T <= alpha):
        raise DomainError(f"T grid values must exceed {alpha}")

    def one(Tv):
        w = Window(alpha, float(Tv))
        return limiting_density(w, ell, k, cache, opts), len(t_range(w, ell))

    out = _map(one, T.tolist(), opts.threads)
    return DensityCurve(T, np.array([v for v, _ in out]), np.array([c for _, c in out]))


def _check_family(ell, k):
    if ell < 3 or ell % 2 == 0:
        raise DomainError("ell must be an odd prime")
    if k < 2 or k % 2:
        raise DomainError("k must be even and >= 2")
