"""Independent reference computations for the tests.

Everything here is deliberately naive pure Python and shares no code with the
package beyond plain tuples and ints.
"""

from __future__ import annotations

import cmath
from collections import defaultdict
from fractions import Fraction
from itertools import product
from math import isqrt


# --- Gaussian integers as (a, b) tuples ------------------------------------

def gmul(x, y):
    return (x[0] * y[0] - x[1] * y[1], x[0] * y[1] + x[1] * y[0])


def gnorm(x):
    return x[0] * x[0] + x[1] * x[1]


def gdivides(d, z):
    n = gnorm(d)
    a = z[0] * d[0] + z[1] * d[1]
    b = z[1] * d[0] - z[0] * d[1]
    return a % n == 0 and b % n == 0


def associates(z):
    a, b = z
    return [(a, b), (-b, a), (-a, -b), (b, -a)]


def primary_by_search(z):
    """The associate congruent to 1 mod 2+2i, by checking all four."""
    hits = [w for w in associates(z) if gdivides((2, 2), (w[0] - 1, w[1]))]
    assert len(hits) <= 1
    return hits[0] if hits else None


def units_mod_by_enumeration(f):
    """|(Z[i]/f)^x|: n = N(f) lies in f, so the n x n box covers every class of Z[i]/f exactly n times."""
    n = gnorm(f)
    hits = sum(1 for a in range(n) for b in range(n) if _gcd_is_unit(f, (a, b)))
    assert hits % n == 0
    return hits // n


def _gcd_is_unit(f, z):
    a, b = f, z
    while gnorm(b):
        n = gnorm(b)
        qa = a[0] * b[0] + a[1] * b[1]
        qb = a[1] * b[0] - a[0] * b[1]
        q = (_round(qa, n), _round(qb, n))
        r = (a[0] - gmul(q, b)[0], a[1] - gmul(q, b)[1])
        a, b = b, r
    return gnorm(a) == 1


def _round(x, n):
    return (2 * x + n) // (2 * n)


# --- finite fields and counts ------------------------------------------------

class SmallField:
    """F_p or F_{p^2} = F_p[t]/(t^2 - r) with r a non-residue; elements are (c0, c1)."""

    def __init__(self, p, m):
        assert m in (1, 2)
        self.p, self.m = p, m
        self.r = next(r for r in range(2, p) if pow(r, (p - 1) // 2, p) == p - 1) if m == 2 else 0
        self.elements = [(a, b) for a in range(p) for b in (range(p) if m == 2 else (0,))]

    def add(self, x, y):
        return ((x[0] + y[0]) % self.p, (x[1] + y[1]) % self.p)

    def mul(self, x, y):
        p = self.p
        return ((x[0] * y[0] + self.r * x[1] * y[1]) % p, (x[0] * y[1] + x[1] * y[0]) % p)

    def scal(self, a, x):
        return ((a * x[0]) % self.p, (a * x[1]) % self.p)

    def pow4(self, x):
        y = self.mul(x, x)
        return self.mul(y, y)


def projective_count_naive(coeffs, p, m=1):
    """#{a0 x0^4 + ... + a3 x3^4 = 0} in P^3(F_q) by looping over normalized points."""
    F = SmallField(p, m)
    zero, one = (0, 0), (1, 0)
    fourth = {x: F.pow4(x) for x in F.elements}
    total = 0
    # first nonzero coordinate equal to 1
    for lead in range(4):
        free = 3 - lead
        for tail in product(F.elements, repeat=free):
            pt = [zero] * lead + [one] + list(tail)
            s = zero
            for a, x in zip(coeffs, pt):
                s = F.add(s, F.scal(a % p, fourth[x]))
            total += s == zero
    return total


def elliptic_count_naive(n, p):
    """#E(F_p) for y^2 = x^3 - n x, by looping over (x, y)."""
    return 1 + sum(1 for x in range(p) for y in range(p) if (y * y - x**3 + n * x) % p == 0)


def jacobi_sum_numeric(p, e1, e2):
    """J(chi^e1, chi^e2) on F_p, chi(g) = i for the smallest primitive root g, as a complex number."""
    g = next(g for g in range(2, p) if all(pow(g, (p - 1) // q, p) != 1 for q in _prime_factors(p - 1)))
    dlog = {}
    x = 1
    for k in range(p - 1):
        dlog[x] = k
        x = x * g % p
    total = 0
    for t in range(2, p):
        total += 1j ** ((e1 * dlog[t] + e2 * dlog[(1 - t) % p]) % 4)
    return complex(round(total.real), round(total.imag))


def _prime_factors(n):
    out, d = [], 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def gauss_sum_numeric(p, e):
    """sum_x chi^e(x) exp(2 pi i x / p) in double precision."""
    g = next(g for g in range(2, p) if all(pow(g, (p - 1) // q, p) != 1 for q in _prime_factors(p - 1)))
    total, x = 0, 1
    for k in range(p - 1):
        total += 1j ** ((e * k) % 4) * cmath.exp(2j * cmath.pi * x / p)
        x = x * g % p
    return total


# --- Hecke L-series by ideal enumeration --------------------------------------

def ideals_up_to(n_max):
    """One generator per nonzero ideal of Z[i] of norm <= n_max: a > 0, b >= 0."""
    out = []
    for a in range(1, isqrt(n_max) + 1):
        for b in range(0, isqrt(n_max - a * a) + 1):
            out.append((a, b))
    return out


def dirichlet_by_ideals(value, n_max, exclude=lambda z: False):
    """Coefficients of L(s, chi) L(s, conj chi) from sum over ideals, chi given by ``value``.

    ``value(z)`` returns chi((z)) as a pair of Fractions, or None where chi vanishes.
    """
    a = defaultdict(lambda: [Fraction(0), Fraction(0)])
    for z in ideals_up_to(n_max):
        if exclude(z):
            continue
        v = value(z)
        if v is None:
            continue
        n = gnorm(z)
        a[n][0] += v[0]
        a[n][1] += v[1]
    c = [Fraction(0)] * (n_max + 1)
    for d1, (x1, y1) in a.items():
        for d2, (x2, y2) in a.items():
            if d1 * d2 <= n_max:
                # chi(I) * conj chi(J): (x1 + i y1)(x2 - i y2), real part (imaginary parts cancel in the sum)
                c[d1 * d2] += x1 * x2 + y1 * y2
    return c


def units_mod_by_formula(f):
    """phi(f) = N(f) prod (1 - 1/N(P)), with prime ideals found by trial division."""
    n = gnorm(f)
    num, den = n, 1
    for p in _prime_factors(n):
        if p == 2:
            num, den = num * 1, den * 2
        elif p % 4 == 3:
            num, den = num * (p * p - 1), den * p * p
        else:
            a = next(a for a in range(1, p) if isqrt(p - a * a) ** 2 == p - a * a)
            b = isqrt(p - a * a)
            for pi in ((a, b), (a, -b)):
                if gdivides(pi, f):
                    num, den = num * (p - 1), den * p
    assert num % den == 0
    return num // den
