"""Exact arithmetic in Z[i]: elements, primary normalization, ideals, residue unit groups.

All values are immutable; Python ints give arbitrary precision for free.
"""

from __future__ import annotations

import re as _re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import gcd, isqrt, prod

import numpy as np

from .errors import DivisibleByRamified, ModulusTooLarge, NotPrime

ENUMERATION_BOUND = 10**6


# ---------------------------------------------------------------------------
# rational integer helpers


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    # deterministic Miller-Rabin for n < 3.3e24
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41):
        if a % n == 0:
            continue
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def primes_up_to(n: int) -> list[int]:
    if n < 2:
        return []
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, isqrt(n) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    return [int(p) for p in np.flatnonzero(sieve)]


def factor_int(n: int) -> dict[int, int]:
    """Trial-division factorization; fine for the norms that occur here."""
    n = abs(n)
    out: dict[int, int] = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def sqrt_minus_one(p: int) -> int:
    """x with x^2 = -1 mod p, for p = 1 mod 4."""
    for c in range(2, p):
        x = pow(c, (p - 1) // 4, p)
        if x * x % p == p - 1:
            return x
    raise ValueError(f"-1 is not a square mod {p}")


# ---------------------------------------------------------------------------
# elements


_TEXT = _re.compile(r"^\s*([+-]?\d+)\s*([+-])\s*(\d+)\s*i\s*$")


@dataclass(frozen=True, slots=True)
class GaussianInt:
    re: int
    im: int = 0

    @classmethod
    def parse(cls, text: str) -> GaussianInt:
        """Inverse of ``str``: accepts ``a+bi`` / ``a-bi``."""
        m = _TEXT.match(text)
        if not m:
            raise ValueError(f"not a Gaussian integer: {text!r}")
        im = int(m.group(3))
        return cls(int(m.group(1)), -im if m.group(2) == "-" else im)

    @staticmethod
    def coerce(x) -> GaussianInt:
        if isinstance(x, GaussianInt):
            return x
        if isinstance(x, int):
            return GaussianInt(x, 0)
        if isinstance(x, complex) and x.real.is_integer() and x.imag.is_integer():
            return GaussianInt(int(x.real), int(x.imag))
        raise TypeError(f"cannot coerce {x!r} to GaussianInt")

    def __str__(self) -> str:
        sign = "-" if self.im < 0 else "+"
        return f"{self.re}{sign}{abs(self.im)}i"

    def __add__(self, other):
        o = GaussianInt.coerce(other)
        return GaussianInt(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = GaussianInt.coerce(other)
        return GaussianInt(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        return GaussianInt.coerce(other) - self

    def __neg__(self):
        return GaussianInt(-self.re, -self.im)

    def __mul__(self, other):
        o = GaussianInt.coerce(other)
        return GaussianInt(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power of a Gaussian integer")
        out, base = ONE, self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __bool__(self):
        return bool(self.re or self.im)

    def conj(self) -> GaussianInt:
        return GaussianInt(self.re, -self.im)

    def norm(self) -> int:
        return self.re * self.re + self.im * self.im

    def trace(self) -> int:
        return 2 * self.re

    def is_unit(self) -> bool:
        return self.norm() == 1

    def __floordiv__(self, other):
        """Nearest-integer quotient (Euclidean division in Z[i])."""
        o = GaussianInt.coerce(other)
        n = o.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero in Z[i]")
        num = self * o.conj()
        return GaussianInt(_round_div(num.re, n), _round_div(num.im, n))

    def __mod__(self, other):
        o = GaussianInt.coerce(other)
        return self - (self // o) * o

    def divides(self, other) -> bool:
        o = GaussianInt.coerce(other)
        if not self:
            return not o
        num = o * self.conj()
        n = self.norm()
        return num.re % n == 0 and num.im % n == 0

    def exact_div(self, other) -> GaussianInt:
        o = GaussianInt.coerce(other)
        if not o.divides(self):
            raise ArithmeticError(f"{o} does not divide {self}")
        num = self * o.conj()
        n = o.norm()
        return GaussianInt(num.re // n, num.im // n)

    def __complex__(self):
        return complex(self.re, self.im)


def _round_div(a: int, n: int) -> int:
    return (2 * a + n) // (2 * n)


ZERO = GaussianInt(0, 0)
ONE = GaussianInt(1, 0)
I = GaussianInt(0, 1)
ONE_PLUS_I = GaussianInt(1, 1)
UNITS = (ONE, I, GaussianInt(-1, 0), GaussianInt(0, -1))
PRIMARY_MODULUS = ONE_PLUS_I**3  # 2+2i


def ggcd(a: GaussianInt, b: GaussianInt) -> GaussianInt:
    while b:
        a, b = b, a % b
    return a


def gxgcd(a: GaussianInt, b: GaussianInt) -> tuple[GaussianInt, GaussianInt, GaussianInt]:
    """(g, x, y) with a*x + b*y = g, g a gcd of a and b."""
    x0, x1, y0, y1 = ONE, ZERO, ZERO, ONE
    while b:
        q = a // b
        a, b = b, a - q * b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


# ---------------------------------------------------------------------------
# exact Q(i)


@dataclass(frozen=True, slots=True)
class GaussianRational:
    """An element of Q(i) with Fraction coordinates."""

    re: Fraction
    im: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "re", Fraction(self.re))
        object.__setattr__(self, "im", Fraction(self.im))

    @classmethod
    def of(cls, num, den: int = 1) -> GaussianRational:
        z = GaussianInt.coerce(num)
        return cls(Fraction(z.re, den), Fraction(z.im, den))

    def __mul__(self, other):
        o = other if isinstance(other, GaussianRational) else GaussianRational.of(other)
        return GaussianRational(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __add__(self, other):
        o = other if isinstance(other, GaussianRational) else GaussianRational.of(other)
        return GaussianRational(self.re + o.re, self.im + o.im)

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __sub__(self, other):
        return self + (-(other if isinstance(other, GaussianRational) else GaussianRational.of(other)))

    def __eq__(self, other):
        if isinstance(other, (int, GaussianInt)):
            other = GaussianRational.of(other)
        if not isinstance(other, GaussianRational):
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def conj(self) -> GaussianRational:
        return GaussianRational(self.re, -self.im)

    def norm(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def trace(self) -> Fraction:
        return 2 * self.re

    def inverse(self) -> GaussianRational:
        n = self.norm()
        return GaussianRational(self.re / n, -self.im / n)

    def __truediv__(self, other):
        o = other if isinstance(other, GaussianRational) else GaussianRational.of(other)
        return self * o.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = GaussianRational(Fraction(1))
        for _ in range(k):
            out = out * self
        return out

    def sort_key(self):
        return (self.re, self.im)

    def __str__(self) -> str:
        den = self.re.denominator * self.im.denominator // gcd(self.re.denominator, self.im.denominator)
        num = GaussianInt(int(self.re * den), int(self.im * den))
        return str(num) if den == 1 else f"({num})/{den}"


# ---------------------------------------------------------------------------
# normalization


def divisible_by_one_plus_i(z: GaussianInt) -> bool:
    return (z.re - z.im) % 2 == 0


def is_primary(z: GaussianInt) -> bool:
    """z = 1 mod (1+i)^3, i.e. re odd, im even, re + im = 1 mod 4."""
    return z.re % 2 == 1 and z.im % 2 == 0 and (z.re + z.im) % 4 == 1


def normalize_primary(z: GaussianInt) -> GaussianInt:
    if not z or divisible_by_one_plus_i(z):
        raise DivisibleByRamified(f"{z} is divisible by 1+i; no primary associate")
    for u in UNITS:
        w = u * z
        if is_primary(w):
            return w
    raise AssertionError("unreachable: every odd Gaussian integer has a primary associate")


def canonical_associate(z: GaussianInt) -> GaussianInt:
    """Primary associate when coprime to 1+i, else the associate with re > 0, im >= 0."""
    if not z:
        raise ValueError("zero has no canonical associate")
    if not divisible_by_one_plus_i(z):
        return normalize_primary(z)
    for u in UNITS:
        w = u * z
        if w.re > 0 and w.im >= 0:
            return w
    raise AssertionError("unreachable")


# ---------------------------------------------------------------------------
# rational primes in Z[i]


@dataclass(frozen=True)
class SplitType:
    """Decomposition of a rational prime in Z[i].

    ``primes`` holds the canonical generators: (pi, conj(pi)) with im(pi) < 0 when
    split, (-p,) when inert, (1+i,) when ramified.
    """

    p: int
    kind: str  # "split" | "inert" | "ramified"
    primes: tuple[GaussianInt, ...]

    @property
    def residue_degree(self) -> int:
        return 2 if self.kind == "inert" else 1


@lru_cache(maxsize=None)
def factor_rational_prime(p: int) -> SplitType:
    if not is_prime(p):
        raise NotPrime(f"{p} is not prime")
    if p == 2:
        return SplitType(2, "ramified", (ONE_PLUS_I,))
    if p % 4 == 3:
        return SplitType(p, "inert", (GaussianInt(-p, 0),))
    x = sqrt_minus_one(p)
    pi = normalize_primary(ggcd(GaussianInt(p), GaussianInt(x, 1)))
    if pi.im > 0:
        pi = pi.conj()
    assert pi.norm() == p
    return SplitType(p, "split", (pi, pi.conj()))


def factor_gaussian(z: GaussianInt) -> tuple[GaussianInt, list[tuple[GaussianInt, int]]]:
    """(unit, [(canonical prime, exponent), ...]) with z = unit * prod(prime^e)."""
    if not z:
        raise ValueError("cannot factor zero")
    rest = z
    factors: list[tuple[GaussianInt, int]] = []
    for p in sorted(factor_int(z.norm())):
        for q in factor_rational_prime(p).primes:
            e = 0
            while q.divides(rest):
                rest = rest.exact_div(q)
                e += 1
            if e:
                factors.append((q, e))
    assert rest.is_unit(), rest
    return rest, factors


# ---------------------------------------------------------------------------
# ideals


@dataclass(frozen=True, slots=True)
class GaussianIdeal:
    """A nonzero ideal of Z[i], stored by its canonical generator."""

    generator: GaussianInt

    def __post_init__(self):
        if not self.generator:
            raise ValueError("the zero ideal is not supported")
        object.__setattr__(self, "generator", canonical_associate(self.generator))

    @classmethod
    def of(cls, z) -> GaussianIdeal:
        return cls(GaussianInt.coerce(z))

    def __str__(self) -> str:
        return f"({self.generator})"

    def norm(self) -> int:
        return self.generator.norm()

    def __mul__(self, other: GaussianIdeal) -> GaussianIdeal:
        return GaussianIdeal(self.generator * other.generator)

    def contains(self, z) -> bool:
        return self.generator.divides(GaussianInt.coerce(z))

    def divides(self, other: GaussianIdeal) -> bool:
        return self.generator.divides(other.generator)

    def coprime_to(self, other: GaussianIdeal) -> bool:
        return ggcd(self.generator, other.generator).is_unit()

    def factor(self) -> list[tuple[GaussianIdeal, int]]:
        return [(GaussianIdeal(q), e) for q, e in factor_gaussian(self.generator)[1]]

    def sort_key(self):
        g = self.generator
        return (self.norm(), g.re, g.im)

    # residue ring Z[i]/I -------------------------------------------------
    @property
    def _hnf(self) -> tuple[int, int, int]:
        """(d, c, g): the lattice I is spanned by (d, 0) and (c, g), 0 <= c < d."""
        a, b = self.generator.re, self.generator.im
        g, s, t = _xgcd_int(b, a)
        # s*(a+bi) + t*i*(a+bi) = (s*a - t*b) + (s*b + t*a) i = c + g i
        c = s * a - t * b
        d = self.norm() // g
        return d, c % d, g

    def reduce(self, z) -> GaussianInt:
        """Canonical residue: re in [0, d), im in [0, g)."""
        z = GaussianInt.coerce(z)
        d, c, g = self._hnf
        k = z.im // g
        return GaussianInt((z.re - k * c) % d, z.im - k * g)

    def residues(self):
        d, _, g = self._hnf
        for y in range(g):
            for x in range(d):
                yield GaussianInt(x, y)


def _xgcd_int(a: int, b: int) -> tuple[int, int, int]:
    """(g, s, t) with s*a + t*b = g = gcd(a, b) >= 0."""
    s0, s1, t0, t1 = 1, 0, 0, 1
    while b:
        q = a // b
        a, b = b, a - q * b
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    if a < 0:
        a, s0, t0 = -a, -s0, -t0
    return a, s0, t0


def ideal_norm(ideal: GaussianIdeal) -> int:
    return ideal.norm()


# ---------------------------------------------------------------------------
# residue unit groups


@dataclass(frozen=True, eq=False)
class _Component:
    """(Z[i]/q)^x for a prime power q; residues are coded as y*d + x via the HNF (d, c, g)."""

    modulus: GaussianIdeal
    generators: tuple[GaussianInt, ...]
    orders: tuple[int, ...]
    unit: np.ndarray = field(repr=False)  # unit[code] is True for units
    table: np.ndarray = field(repr=False)  # table[code] = exponent vector

    def code(self, z: GaussianInt) -> int:
        r = self.modulus.reduce(z)
        return r.im * self.modulus._hnf[0] + r.re


@dataclass(frozen=True)
class ResidueUnitGroup:
    """(Z[i]/f)^x as a direct product of cyclic groups.

    ``generators`` is a tuple of (canonical residue, order) sorted by
    (norm, re, im) of the residue; ``dlog`` maps any unit to its exponent vector.
    """

    modulus: GaussianIdeal
    generators: tuple[tuple[GaussianInt, int], ...]
    order: int
    _components: tuple[_Component, ...] = field(repr=False, compare=False)
    _perm: tuple[int, ...] = field(repr=False, compare=False)  # sorted position -> raw position

    def is_unit(self, z) -> bool:
        z = GaussianInt.coerce(z)
        if self.modulus.norm() == 1:
            return True
        return bool(z) and self.modulus.coprime_to(GaussianIdeal.of(z))

    def dlog(self, z) -> tuple[int, ...]:
        z = GaussianInt.coerce(z)
        raw: list[int] = []
        for comp in self._components:
            k = comp.code(z)
            if not comp.unit[k]:
                raise ValueError(f"{z} is not a unit modulo {self.modulus}")
            raw.extend(int(e) for e in comp.table[k])
        return tuple(raw[j] for j in self._perm)

    def element(self, exponents) -> GaussianInt:
        z = ONE
        for (g, n), e in zip(self.generators, exponents):
            z = z * pow_mod(g, e % n, self.modulus)
        return self.modulus.reduce(z)


def pow_mod(z: GaussianInt, k: int, ideal: GaussianIdeal) -> GaussianInt:
    out, base = ONE, ideal.reduce(z)
    while k:
        if k & 1:
            out = ideal.reduce(out * base)
        base = ideal.reduce(base * base)
        k >>= 1
    return ideal.reduce(out)


def count_units_enumerate(f: GaussianIdeal) -> int:
    """|(Z[i]/f)^x| by scanning every residue (independent of the CRT route)."""
    if f.norm() > ENUMERATION_BOUND:
        raise ModulusTooLarge(f"N({f}) = {f.norm()} exceeds the enumeration bound")
    gen = f.generator
    return sum(1 for r in f.residues() if ggcd(r, gen).is_unit())


class _Codes:
    """Vectorized arithmetic on residue codes modulo one ideal."""

    def __init__(self, q: GaussianIdeal):
        self.d, self.c, self.g = q._hnf
        self.n = self.d * self.g

    def split(self, k):
        return k % self.d, k // self.d

    def join(self, re, im):
        t = im // self.g
        return (im - t * self.g) * self.d + (re - t * self.c) % self.d

    def mul(self, a, b):
        ar, ai = self.split(a)
        br, bi = self.split(b)
        return self.join(ar * br - ai * bi, ar * bi + ai * br)

    def pow(self, a, k: int):
        out = np.full_like(a, self.join(np.int64(1), np.int64(0)))
        while k:
            if k & 1:
                out = self.mul(out, a)
            a = self.mul(a, a)
            k >>= 1
        return out


@lru_cache(maxsize=4096)
def _prime_power_component(q: GaussianIdeal, bound: int) -> _Component:
    """Basis of (Z[i]/q)^x: per Sylow subgroup, repeatedly adjoin an element of
    maximal order over the subgroup built so far (smallest residue on ties)."""
    if q.norm() > bound:
        raise ModulusTooLarge(f"N({q}) = {q.norm()} exceeds enumeration bound {bound}")
    (prime, _), = q.factor()
    pg = prime.generator
    C = _Codes(q)
    codes = np.arange(C.n, dtype=np.int64)
    re, im = C.split(codes)
    pn = pg.norm()
    divisible = ((re * pg.re + im * pg.im) % pn == 0) & ((im * pg.re - re * pg.im) % pn == 0)
    units = codes[~divisible]
    n = len(units)
    one = int(C.join(np.int64(1), np.int64(0)))

    gens: list[GaussianInt] = []
    orders: list[int] = []
    t_codes = np.array([one], dtype=np.int64)
    t_vecs = np.zeros((1, 0), dtype=np.int64)
    for ell, k in sorted(factor_int(n).items()):
        sylow = np.unique(C.pow(units, n // ell**k))
        sr, si = C.split(sylow)
        sylow = sylow[np.lexsort((si, sr, sr * sr + si * si))]
        member = np.zeros(C.n, dtype=bool)
        member[one] = True
        h_codes = np.array([one], dtype=np.int64)
        h_vecs = np.zeros((1, 0), dtype=np.int64)
        while len(h_codes) < len(sylow):
            # e(x): least e with x^(ell^e) in the current subgroup
            y = sylow.copy()
            e = np.zeros(len(y), dtype=np.int64)
            todo = ~member[y]
            while todo.any():
                e[todo] += 1
                y[todo] = C.pow(y[todo], ell)
                todo = ~member[y]
            j = int(np.argmax(e))
            best, best_ord = sylow[j:j + 1], ell ** int(e[j])
            target = C.pow(best, best_ord)[0]
            root_idx = int(np.flatnonzero(C.pow(h_codes, best_ord) == target)[0])
            root = h_codes[root_idx:root_idx + 1]
            g = C.mul(best, C.pow(root, ell**k - 1))  # best / root has order exactly best_ord
            new_codes, new_vecs, acc = [], [], np.array([one], dtype=np.int64)
            for step in range(best_ord):
                new_codes.append(C.mul(h_codes, acc))
                new_vecs.append(np.hstack([h_vecs, np.full((len(h_codes), 1), step, dtype=np.int64)]))
                acc = C.mul(acc, g)
            h_codes, h_vecs = np.concatenate(new_codes), np.vstack(new_vecs)
            member[h_codes] = True
            gr, gi = C.split(g)
            gens.append(GaussianInt(int(gr[0]), int(gi[0])))
            orders.append(best_ord)
        # merge this Sylow part into the component table
        t_codes = C.mul(t_codes[:, None], h_codes[None, :]).ravel()
        t_vecs = np.hstack([np.repeat(t_vecs, len(h_codes), axis=0), np.tile(h_vecs, (len(t_vecs), 1))])
    if len(t_codes) != n or len(np.unique(t_codes)) != n:
        raise AssertionError(f"unit group decomposition of {q} is inconsistent")
    unit = np.zeros(C.n, dtype=bool)
    unit[t_codes] = True
    table = np.zeros((C.n, len(orders)), dtype=np.int64)
    table[t_codes] = t_vecs
    return _Component(q, tuple(gens), tuple(orders), unit, table)


@lru_cache(maxsize=256)
def residue_unit_group(f: GaussianIdeal, bound: int = ENUMERATION_BOUND) -> ResidueUnitGroup:
    """Structure of (Z[i]/f)^x via prime-power components glued by CRT."""
    comps: list[_Component] = []
    for prime, e in f.factor():
        comps.append(_prime_power_component(GaussianIdeal(prime.generator**e), bound))

    lifted: list[tuple[GaussianInt, int]] = []
    for idx, comp in enumerate(comps):
        others = prod((c.modulus.generator for j, c in enumerate(comps) if j != idx), start=ONE)
        # idempotent e: e = 1 mod comp, e = 0 mod others
        g, x, y = gxgcd(comp.modulus.generator, others)
        assert g.is_unit()
        e_idem = others * y * _unit_inverse(g)
        for gen, order in zip(comp.generators, comp.orders):
            z = f.reduce(gen * e_idem + (ONE - e_idem))
            lifted.append((z, order))
    keyed = sorted(range(len(lifted)), key=lambda j: (lifted[j][0].norm(), lifted[j][0].re, lifted[j][0].im))
    gens = tuple(lifted[j] for j in keyed)
    total = prod((o for _, o in gens), start=1)
    return ResidueUnitGroup(f, gens, total, tuple(comps), tuple(keyed))


def _unit_inverse(u: GaussianInt) -> GaussianInt:
    return u.conj()
