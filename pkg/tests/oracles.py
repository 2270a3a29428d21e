"""Slow, independent reference implementations used only by the tests."""

import cmath
import math
from fractions import Fraction


def is_prime_trial(n):
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


def factor_trial(n):
    out, d = [], 2
    while d * d <= n:
        e = 0
        while n % d == 0:
            n //= d
            e += 1
        if e:
            out.append((d, e))
        d += 1
    if n > 1:
        out.append((n, 1))
    return out


def ramanujan_exp(q, m):
    s = sum(cmath.exp(2j * math.pi * x * m / q) for x in range(1, q + 1) if math.gcd(x, q) == 1)
    return round(s.real)


def legendre_euler(d, p):
    r = d % p
    if r == 0:
        return 0
    return 1 if pow(r, (p - 1) // 2, p) == 1 else -1


def twelve_h_triple_loop(n):
    """12 H(n) by looping over a, b, c with no sieving."""
    if n == 0:
        return -1
    total = 0
    a = 1
    while 3 * a * a <= n:
        for b in range(-a + 1, a + 1):
            for c in range(a, (n + b * b) // (4 * a) + 1):
                if 4 * a * c - b * b != n:
                    continue
                if a == c and b < 0:
                    continue
                if b == 0 and a == c:
                    total += 6
                elif b == a and a == c:
                    total += 4
                else:
                    total += 12
        a += 1
    return total


def u_sine(n, theta):
    return math.sin((n + 1) * theta) / math.sin(theta)


def p_roots(k, x, n):
    """(r1^{k-1} - r2^{k-1}) / (r1 - r2) for the roots of X^2 - x X + n."""
    disc = cmath.sqrt(x * x - 4 * n)
    r1, r2 = (x + disc) / 2, (x - disc) / 2
    return ((r1 ** (k - 1) - r2 ** (k - 1)) / (r1 - r2)).real


def kronecker_slow(d, m):
    """(d/m) from the Legendre symbols of m's prime factors."""
    if m == 1:
        return 1
    out = 1
    for p, e in factor_trial(m):
        if p == 2:
            v = 0 if d % 2 == 0 else (1 if d % 8 in (1, 7) else -1)
        else:
            v = legendre_euler(d, p)
        out *= v**e
    return out


def fundamental_part(D):
    """(d, L) with D = d L^2, d fundamental, by trial division."""
    core, root = 1, 1
    for p, e in factor_trial(abs(D)):
        core *= p ** (e % 2)
        root *= p ** (e // 2)
    core = core if D > 0 else -core
    if core % 4 == 1:
        return core, root
    return 4 * core, root // 2


def psi_slow(D, m):
    if D == 0:
        return 1
    d, L = fundamental_part(D)
    return kronecker_slow(d, m // math.gcd(m, L))


def psi_tilde_enum(t, ell, m):
    vals = [psi_slow(t * t - 4 * ell * n, m) for n in range(m * m) if math.gcd(n, m) == 1]
    return Fraction(sum(vals), len(vals))


def dim_cusp_gamma0_3power(k, a):
    """dim S_k(Gamma_0(3^a)) for even k >= 4."""
    if a == 0:
        mu, nu2, nu3, cusps = 1, 1, 1, 1
    else:
        mu = Fraction(4 * 3**a, 3)
        nu2 = 0
        nu3 = 1 if a == 1 else 0
        cusps = sum(_phi(3 ** min(j, a - j)) for j in range(a + 1))
    return (
        Fraction(k - 1, 12) * mu
        + (k // 4 - Fraction(k - 1, 4)) * nu2
        + (k // 3 - Fraction(k - 1, 3)) * nu3
        - Fraction(cusps, 2)
    )


def dim_new_3power(k, a):
    """dim S_k^new(3^a): the old space removed by inclusion-exclusion over 3^{a-1}, 3^{a-2}."""
    d = dim_cusp_gamma0_3power(k, a) - 2 * dim_cusp_gamma0_3power(k, a - 1)
    if a >= 2:
        d += dim_cusp_gamma0_3power(k, a - 2)
    return d


def _phi(n):
    return sum(1 for x in range(1, n + 1) if math.gcd(x, n) == 1)


def halving_integral(t, alpha, beta, ell, k, tol):
    """int sqrt(v - t0) U_{k-2}(t / (2 l sqrt v)) dv by uniform GL panels, doubled until stable."""
    import numpy as np

    t0 = t * t / (4 * ell * ell)
    if t0 >= beta:
        return 0.0
    lo, hi = math.sqrt(max(alpha, t0) - t0), math.sqrt(beta - t0)
    x, wts = np.polynomial.legendre.leggauss(8)

    def u(n, c):
        # U_n by the three-term recurrence
        a, b = np.zeros_like(c), np.ones_like(c)
        for _ in range(n):
            a, b = b, 2 * c * b - a
        return b

    def composite(panels):
        edges = np.linspace(lo, hi, panels + 1)
        total = 0.0
        for a, b in zip(edges[:-1], edges[1:]):
            w = 0.5 * (b - a) * x + 0.5 * (b + a)
            v = t0 + w * w
            f = 2 * w * w * u(k - 2, t / (2 * ell * np.sqrt(v)))
            total += 0.5 * (b - a) * float(np.dot(wts, f))
        return total

    panels, prev = 1, composite(1)
    while True:
        panels *= 2
        cur = composite(panels)
        if abs(cur - prev) < tol / 10:
            return cur
        prev = cur


def max_E_brute(x, q):
    """max over u <= x of the residue-class Lambda errors, scanning integers and left limits."""
    X = math.floor(x)
    lam = [0.0] * (X + 1)
    for n in range(2, X + 1):
        f = factor_trial(n)
        if len(f) == 1:
            lam[n] = math.log(f[0][0])
    ph = sum(1 for a in range(1, q + 1) if math.gcd(a, q) == 1)
    best = 0.0
    for a in range(q):
        if math.gcd(a, q) != 1:
            continue
        acc = 0.0
        for u in range(1, X + 1):
            before = acc
            if u % q == a:
                acc += lam[u]
            best = max(best, abs(before - u / ph), abs(acc - u / ph))
        best = max(best, abs(acc - x / ph))
    return best
