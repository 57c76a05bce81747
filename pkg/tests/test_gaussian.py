from fractions import Fraction

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from k3hecke.errors import DivisibleByRamified, ModulusTooLarge, NotPrime
from k3hecke.gaussian import (
    ONE_PLUS_I,
    GaussianIdeal,
    GaussianInt,
    GaussianRational,
    canonical_associate,
    factor_gaussian,
    factor_rational_prime,
    ideal_norm,
    is_prime,
    normalize_primary,
    pow_mod,
    primes_up_to,
    residue_unit_group,
)

from oracles import gmul, primary_by_search, units_mod_by_enumeration, units_mod_by_formula

ints = st.integers(-10**6, 10**6)
gauss = st.builds(GaussianInt, ints, ints)
nonzero = gauss.filter(bool)
odd = nonzero.filter(lambda z: (z.re - z.im) % 2)


@given(gauss, gauss, gauss)
def test_ring_axioms(a, b, c):
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a * b == b * a


@given(gauss, gauss)
def test_norm_and_conjugation_are_multiplicative(a, b):
    assert (a * b).norm() == a.norm() * b.norm()
    assert a.conj().conj() == a
    assert (a * b).conj() == a.conj() * b.conj()
    assert ((a * b).re, (a * b).im) == gmul((a.re, a.im), (b.re, b.im))


@given(gauss, nonzero)
def test_division_with_remainder(a, b):
    q, r = a // b, a % b
    assert q * b + r == a
    assert 2 * r.norm() <= b.norm()


@given(gauss)
def test_text_round_trip(z):
    assert GaussianInt.parse(str(z)) == z


def test_text_form():
    assert str(GaussianInt(3, -4)) == "3-4i"
    assert str(GaussianInt(-1, 2)) == "-1+2i"
    assert GaussianInt.parse(" -3 - 4 i") == GaussianInt(-3, -4)


@pytest.mark.parametrize("z, expected", [((1, 2), (-1, -2)), ((3, 0), (-3, 0)), ((-1, -2), (-1, -2))])
def test_normalize_primary_examples(z, expected):
    assert normalize_primary(GaussianInt(*z)) == GaussianInt(*expected)


def test_normalize_primary_rejects_ramified():
    with pytest.raises(DivisibleByRamified):
        normalize_primary(ONE_PLUS_I)
    with pytest.raises(DivisibleByRamified):
        normalize_primary(GaussianInt(2, 0))


@given(odd)
def test_primary_matches_search(z):
    w = normalize_primary(z)
    assert (w.re, w.im) == primary_by_search((z.re, z.im))
    assert normalize_primary(w) == w


def test_exactly_one_primary_associate_per_odd_residue():
    # residues mod (1+i)^3 = 2+2i are determined by (re mod 4, im mod 2) up to the lattice
    for a in range(-4, 5):
        for b in range(-4, 5):
            z = GaussianInt(a, b)
            if z and (a - b) % 2:
                hits = [u for u in ((a, b), (-b, a), (-a, -b), (b, -a)) if primary_by_search(u) == u]
                assert len(hits) == 1


@given(odd, odd)
def test_primary_multiplicative(z, w):
    assert normalize_primary(z * w) == normalize_primary(normalize_primary(z) * normalize_primary(w))


@given(nonzero)
def test_canonical_associate_divisible_case(z):
    w = canonical_associate(z * ONE_PLUS_I)
    assert w.re > 0 and w.im >= 0
    assert w.norm() == 2 * z.norm()


def test_factor_rational_prime_examples():
    five = factor_rational_prime(5)
    assert five.kind == "split"
    assert five.primes[0] == GaussianInt(-1, -2)
    assert factor_rational_prime(7).kind == "inert"
    assert factor_rational_prime(7).primes == (GaussianInt(-7),)
    assert factor_rational_prime(2).kind == "ramified"
    with pytest.raises(NotPrime):
        factor_rational_prime(15)


def test_factor_rational_prime_reassembles_up_to_1e4():
    for p in primes_up_to(10**4):
        sp = factor_rational_prime(p)
        assert sp.kind == {1: "split", 3: "inert"}.get(p % 4, "ramified")
        prod_ = GaussianInt(1)
        for q in sp.primes:
            prod_ = prod_ * q
        if sp.kind == "ramified":
            prod_ = prod_ * ONE_PLUS_I  # 2 = -i (1+i)^2
        assert prod_.norm() == p * p
        assert GaussianIdeal(prod_) == GaussianIdeal(GaussianInt(p))


def test_is_prime_against_sieve():
    sieve = set(primes_up_to(20000))
    assert all(is_prime(n) == (n in sieve) for n in range(20000))


@given(nonzero.filter(lambda z: z.norm() < 10**8))
def test_factor_gaussian_reassembles(z):
    unit, factors = factor_gaussian(z)
    prod_ = unit
    for q, e in factors:
        prod_ = prod_ * q**e
    assert prod_ == z
    assert unit.is_unit()


def test_ideal_norm_examples():
    assert ideal_norm(GaussianIdeal(GaussianInt(-1, -2))) == 5
    assert ideal_norm(GaussianIdeal(GaussianInt(3))) == 9
    assert ideal_norm(GaussianIdeal(ONE_PLUS_I)) == 2


def test_ideal_generators_are_canonical():
    assert GaussianIdeal(GaussianInt(1, 2)).generator == GaussianInt(-1, -2)
    assert GaussianIdeal(GaussianInt(0, -2)).generator == GaussianInt(2, 0)
    assert GaussianIdeal(GaussianInt(3)) == GaussianIdeal(GaussianInt(0, 3))


@pytest.mark.parametrize("gen, order", [((2, 2), 4), ((3, 0), 8), ((1, 0), 1)])
def test_unit_group_examples(gen, order):
    g = residue_unit_group(GaussianIdeal(GaussianInt(*gen)))
    assert g.order == order
    if gen == (3, 0):
        assert [n for _, n in g.generators] == [8]


def _moduli(norm_bound):
    seen = set()
    for a in range(0, 40):
        for b in range(0, 40):
            z = GaussianInt(a, b)
            if z and z.norm() <= norm_bound:
                seen.add(GaussianIdeal(z))
    return sorted(seen, key=GaussianIdeal.sort_key)


def test_unit_group_order_matches_enumeration():
    for f in _moduli(120):
        g = f.generator
        n = units_mod_by_enumeration((g.re, g.im))
        assert residue_unit_group(f).order == n, f
        assert units_mod_by_formula((g.re, g.im)) == n, f


def test_unit_group_order_matches_totient_up_to_1e4():
    ideals = {GaussianIdeal(GaussianInt(a, b)) for a in range(1, 101) for b in range(0, 101) if a * a + b * b <= 10**4}
    assert len(ideals) > 7800
    for f in ideals:
        g = f.generator
        assert residue_unit_group(f).order == units_mod_by_formula((g.re, g.im)), f


def test_unit_group_generators_have_stated_orders():
    for f in _moduli(400):
        G = residue_unit_group(f)
        for gen, n in G.generators:
            assert pow_mod(gen, n, f) == f.reduce(GaussianInt(1))
            for d in range(1, n):
                if n % d == 0:
                    assert pow_mod(gen, d, f) != f.reduce(GaussianInt(1))


def test_dlog_round_trips():
    for f in _moduli(200) + [GaussianIdeal(GaussianInt(30, 30))]:
        G = residue_unit_group(f)
        for r in f.residues():
            if G.modulus.norm() > 1 and not G.is_unit(r):
                continue
            assert G.element(G.dlog(r)) == f.reduce(r)


def test_unit_group_bound():
    with pytest.raises(ModulusTooLarge):
        residue_unit_group(GaussianIdeal(GaussianInt(3)), bound=5)


@given(gauss.filter(bool), st.integers(1, 50))
def test_rational_arithmetic(z, d):
    u = GaussianRational.of(z, d)
    assert u * u.inverse() == 1
    assert u.norm() == Fraction(z.norm(), d * d)
    assert (u ** -2) * (u ** 2) == 1
    assume(z.im)
    assert u.conj() != u
