"""Finite fields F_{p^m} (m <= 3) with discrete-log tables, characters of order
dividing 4, and exact Jacobi sums in Z[i].

Elements are encoded as integers ``c0 + c1*p + c2*p^2`` for the polynomial
``c0 + c1*x + c2*x^2`` reduced modulo the field's defining polynomial.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from math import isqrt

import mpmath
import numpy as np

from .errors import (
    EvenCharacteristic,
    FieldMismatch,
    NoQuarticCharacter,
    TableTooLarge,
    TrivialCharacter,
)
from .gaussian import GaussianInt, factor_int, is_prime

TABLE_BOUND = 10**7

_I_POWERS = (GaussianInt(1, 0), GaussianInt(0, 1), GaussianInt(-1, 0), GaussianInt(0, -1))


@dataclass(frozen=True, eq=False)
class FieldTable:
    p: int
    m: int
    modulus: tuple[int, ...]  # monic, low -> high, length m + 1; (0, 1) for m = 1
    generator: int
    exp: np.ndarray = field(repr=False)  # exp[k] = g^k
    dlog: np.ndarray = field(repr=False)  # dlog[x] = k, dlog[0] = -1

    @property
    def q(self) -> int:
        return self.p**self.m

    def same_as(self, other: FieldTable) -> bool:
        return self.p == other.p and self.m == other.m and self.modulus == other.modulus

    # vectorized arithmetic on encoded elements --------------------------
    def digits(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.int64)
        out = np.empty((self.m,) + x.shape, dtype=np.int64)
        for j in range(self.m):
            out[j] = x % self.p
            x = x // self.p
        return out

    def encode(self, digits: np.ndarray) -> np.ndarray:
        out = np.zeros(digits.shape[1:], dtype=np.int64)
        for j in reversed(range(self.m)):
            out = out * self.p + digits[j]
        return out

    def add(self, a, b) -> np.ndarray:
        return self.encode((self.digits(a) + self.digits(b)) % self.p)

    def neg(self, a) -> np.ndarray:
        return self.encode((-self.digits(a)) % self.p)

    def sub(self, a, b) -> np.ndarray:
        return self.encode((self.digits(a) - self.digits(b)) % self.p)

    def mul(self, a, b) -> np.ndarray:
        return _poly_mul(self.p, self.m, self.modulus, self.digits(a), self.digits(b), self.encode)

    def power(self, a, k: int) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        out = np.ones_like(a)
        while k:
            if k & 1:
                out = self.mul(out, a)
            a = self.mul(a, a)
            k >>= 1
        return out

    def from_int(self, n: int) -> int:
        """Image of a rational integer in the prime field."""
        return n % self.p

    def trace_to_prime_field(self, x) -> np.ndarray:
        sums = _power_sums(self.p, self.modulus)
        d = self.digits(x)
        return sum(d[j] * sums[j] for j in range(self.m)) % self.p


def _poly_mul(p, m, modulus, da, db, encode):
    prod = np.zeros((2 * m - 1,) + da.shape[1:], dtype=np.int64)
    for i in range(m):
        for j in range(m):
            prod[i + j] += da[i] * db[j]
    prod %= p
    # reduce x^k, k >= m, using x^m = -(f_0 + ... + f_{m-1} x^{m-1})
    for k in range(2 * m - 2, m - 1, -1):
        c = prod[k]
        for j in range(m):
            prod[k - m + j] -= c * modulus[j]
        prod[k] = 0
    return encode(prod[:m] % p)


def _power_sums(p: int, modulus: tuple[int, ...]) -> list[int]:
    """Newton power sums of the roots of the defining polynomial, mod p."""
    m = len(modulus) - 1
    f = modulus
    s = [m % p]
    for k in range(1, m):
        acc = sum(f[m - j] * s[k - j] for j in range(1, k)) + k * f[m - k]
        s.append(-acc % p)
    return s


def _irreducible(p: int, m: int) -> tuple[int, ...]:
    # degree <= 3: irreducible iff no root in F_p
    xs = np.arange(p, dtype=np.int64)
    for high in itertools.product(range(p), repeat=m):
        coeffs = tuple(reversed(high)) + (1,)  # high = (c_{m-1}, ..., c_0)
        vals = np.zeros(p, dtype=np.int64)
        for c in reversed(coeffs):
            vals = (vals * xs + c) % p
        if not np.any(vals == 0):
            return coeffs
    raise AssertionError(f"no irreducible polynomial of degree {m} over F_{p}")


def build_field(p: int, m: int = 1, table_bound: int = TABLE_BOUND) -> FieldTable:
    if p == 2:
        raise EvenCharacteristic("characteristic 2 is not supported")
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    if m not in (1, 2, 3):
        raise ValueError("extension degree must be 1, 2 or 3")
    if p**m > table_bound:
        raise TableTooLarge(f"q = {p}^{m} exceeds the table bound {table_bound}")
    return _build_field(p, m)


@lru_cache(maxsize=8)
def _build_field(p: int, m: int) -> FieldTable:
    q = p**m
    modulus = (0, 1) if m == 1 else _irreducible(p, m)
    shell = FieldTable(p, m, modulus, 0, np.empty(0), np.empty(0))
    n = q - 1
    cofactors = [n // ell for ell in factor_int(n)]
    g = next(
        c for c in range(2 if q > 2 else 1, q)
        if all(int(shell.power(np.array([c]), e)[0]) != 1 for e in cofactors)
    )
    # g^0 .. g^(B-1) directly, then whole blocks by one vectorized multiply each
    block = isqrt(n) + 1
    head = np.empty(block, dtype=np.int64)
    head[0] = 1
    gg = np.array([g], dtype=np.int64)
    for k in range(1, block):
        head[k] = shell.mul(head[k - 1 : k], gg)[0]
    step = shell.mul(head[-1:], gg)
    exp = np.empty(n + block, dtype=np.int64)
    cur = head
    for start in range(0, n, block):
        exp[start : start + block] = cur
        cur = shell.mul(cur, np.broadcast_to(step, cur.shape))
    exp = exp[:n]
    dlog = np.full(q, -1, dtype=np.int64)
    dlog[exp] = np.arange(n, dtype=np.int64)
    if np.any(dlog[1:] < 0):
        raise AssertionError("generator does not have full order")
    exp.setflags(write=False)
    dlog.setflags(write=False)
    return FieldTable(p, m, modulus, g, exp, dlog)


# ---------------------------------------------------------------------------
# characters


@dataclass(frozen=True, eq=False)
class MultCharacter:
    """chi(g^k) = i^(e*k) on the field's canonical generator g."""

    field: FieldTable
    e: int

    def __post_init__(self):
        object.__setattr__(self, "e", self.e % 4)
        if (self.e * (self.field.q - 1)) % 4:
            raise ValueError(f"i^{self.e} is not a value of a character of F_{self.field.q}^x")

    @property
    def order(self) -> int:
        return {0: 1, 1: 4, 2: 2, 3: 4}[self.e]

    def is_trivial(self) -> bool:
        return self.e == 0

    def __eq__(self, other):
        return isinstance(other, MultCharacter) and self.field.same_as(other.field) and self.e == other.e

    def __hash__(self):
        return hash((self.field.p, self.field.m, self.e))

    def __mul__(self, other: MultCharacter) -> MultCharacter:
        _check_same(self, other)
        return MultCharacter(self.field, self.e + other.e)

    def __pow__(self, k: int) -> MultCharacter:
        return MultCharacter(self.field, self.e * k)

    def conj(self) -> MultCharacter:
        return MultCharacter(self.field, -self.e)

    def exponent(self, x) -> np.ndarray:
        """log_i chi(x) mod 4 for nonzero encoded x."""
        return (self.e * self.field.dlog[np.asarray(x)]) % 4

    def __call__(self, x: int) -> GaussianInt:
        x = int(x) % self.field.q if self.field.m == 1 else int(x)
        if x == 0:
            return GaussianInt(1 if self.is_trivial() else 0, 0)
        return _I_POWERS[int(self.exponent(x))]

    def at_minus_one(self) -> GaussianInt:
        return self(int(self.field.neg(np.array([1]))[0]))


def _check_same(a: MultCharacter, b: MultCharacter) -> None:
    if not a.field.same_as(b.field):
        raise FieldMismatch("characters live on different fields")


def trivial_character(field: FieldTable) -> MultCharacter:
    return MultCharacter(field, 0)


def quadratic_character(field: FieldTable) -> MultCharacter:
    return MultCharacter(field, 2)


def quartic_character(field: FieldTable) -> MultCharacter:
    if field.q % 4 != 1:
        raise NoQuarticCharacter(f"q = {field.q} is not 1 mod 4")
    return MultCharacter(field, 1)


def _sum_of_i_powers(exponents: np.ndarray) -> GaussianInt:
    c = np.bincount(np.asarray(exponents, dtype=np.int64) % 4, minlength=4)
    return GaussianInt(int(c[0] - c[2]), int(c[1] - c[3]))


def jacobi_sum(chi1: MultCharacter, chi2: MultCharacter) -> GaussianInt:
    """Sum over t != 0, 1 of chi1(t) chi2(1 - t), exactly."""
    _check_same(chi1, chi2)
    return _jacobi_cached(chi1.field, chi1.e, chi2.e)


@lru_cache(maxsize=64)
def _jacobi_cached(fld: FieldTable, e1: int, e2: int) -> GaussianInt:
    t = np.arange(2, fld.q, dtype=np.int64)
    one_minus_t = fld.sub(np.ones_like(t), t)
    return _sum_of_i_powers(e1 * fld.dlog[t] + e2 * fld.dlog[one_minus_t])


@dataclass(frozen=True)
class GaussSumCheck:
    """Numerical Gauss sum with residuals of the identities it must satisfy."""

    value: mpmath.mpc
    abs_square_residual: mpmath.mpf  # | |g|^2 - q |
    conjugate_residual: mpmath.mpf  # | g(chi) g(conj chi) - chi(-1) q |
    jacobi_residual: mpmath.mpf | None  # | g(chi)^2 - J(chi, chi) g(chi^2) |, chi^2 nontrivial


def _gauss_value(chi: MultCharacter) -> mpmath.mpc:
    fld = chi.field
    x = np.arange(1, fld.q, dtype=np.int64)
    tr = fld.trace_to_prime_field(x)
    ex = chi.exponent(x)
    counts = np.zeros((fld.p, 4), dtype=np.int64)
    np.add.at(counts, (tr, ex), 1)
    total = mpmath.mpc(0)
    for k in range(fld.p):
        c = counts[k]
        coef = mpmath.mpc(int(c[0] - c[2]), int(c[1] - c[3]))
        if coef != 0:
            total += coef * mpmath.expjpi(mpmath.mpf(2 * k) / fld.p)
    return total


def gauss_sum(chi: MultCharacter, dps: int = 50) -> GaussSumCheck:
    """g(chi) = sum chi(x) exp(2 pi i Tr(x)/p), checked against its classical identities."""
    if chi.is_trivial():
        raise TrivialCharacter("Gauss sum of the trivial character is not used")
    with mpmath.workdps(dps):
        q = chi.field.q
        g = _gauss_value(chi)
        gbar = _gauss_value(chi.conj())
        chim1 = chi.at_minus_one()
        abs_res = abs(abs(g) ** 2 - q)
        conj_res = abs(g * gbar - mpmath.mpc(chim1.re, chim1.im) * q)
        jac_res = None
        sq = chi * chi
        if not sq.is_trivial():
            j = jacobi_sum(chi, chi)
            jac_res = abs(g**2 - mpmath.mpc(j.re, j.im) * _gauss_value(sq))
        return GaussSumCheck(+g, +abs_res, +conj_res, None if jac_res is None else +jac_res)
