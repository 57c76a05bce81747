import json
from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from k3hecke.errors import ConflictingObservations, InsufficientData, NotCoprime
from k3hecke.frobenius import eigen_pair
from k3hecke.gaussian import (
    ONE_PLUS_I,
    GaussianIdeal,
    GaussianInt,
    GaussianRational,
    factor_rational_prime,
    primes_up_to,
    residue_unit_group,
)
from k3hecke.hecke import (
    FitResult,
    HeckeCharacter,
    Observation,
    check_well_defined,
    dirichlet_coefficients,
    euler_factor,
    evaluate,
    fit,
    pair_factor,
    rational_euler_factor,
    series_inverse,
)

from oracles import dirichlet_by_ideals

F = Fraction
ONE = GaussianIdeal.of(1)
TWO = GaussianIdeal(GaussianInt(2))
CUBE = GaussianIdeal(GaussianInt(2, 2))  # (1+i)^3


def char(gen, w, eps):
    return HeckeCharacter(GaussianIdeal(GaussianInt(*gen)) if gen != 1 else ONE, w, tuple(eps))


def split_prime(p):
    return GaussianIdeal(factor_rational_prime(p).primes[0])


def observations(chi, primes, corrupt=None):
    out = []
    for p in primes:
        for g in factor_rational_prime(p).primes:
            P = GaussianIdeal(g)
            v = evaluate(chi, P)
            if p == corrupt:
                v = v * GaussianRational.of(GaussianInt(0, 1))
            out.append(Observation(P, p, 1, (eigen_pair(v),)))
    return out


SPLIT = [p for p in primes_up_to(400) if p % 4 == 1]


def test_evaluate_examples():
    triv = char(1, 0, ())
    assert evaluate(triv, split_prime(13)) == 1
    chi = char(1, 1, ())
    assert evaluate(chi, GaussianIdeal(GaussianInt(-1, -2))) == GaussianRational.of(GaussianInt(-3, -4), 5)
    with pytest.raises(NotCoprime):
        evaluate(HeckeCharacter(CUBE, 1, (2,)), GaussianIdeal(ONE_PLUS_I))


def test_well_definedness_examples():
    assert check_well_defined(HeckeCharacter(CUBE, 1, (2,))).ok
    assert check_well_defined(char(1, 0, ())).ok
    bad = check_well_defined(HeckeCharacter(CUBE, 1, (0,)))
    assert not bad.ok and bad.failing_unit == GaussianInt(0, 1)


def _well_defined_characters(gen):
    f = GaussianIdeal(GaussianInt(*gen))
    for eps in product(range(4), repeat=len(residue_unit_group(f).generators)):
        try:
            chi = HeckeCharacter(f, 1, eps)
        except ValueError:
            continue
        if check_well_defined(chi).ok:
            yield chi


@pytest.mark.parametrize("gen", [(2, 0), (2, 2), (4, 0), (3, 0), (8, 0)])
def test_value_independent_of_generator(gen):
    # oracle: evaluate eps(alpha) (conj alpha / alpha) on every associate alpha
    for chi in _well_defined_characters(gen):
        f = chi.modulus
        for p in primes_up_to(60)[1:]:
            for g in factor_rational_prime(p).primes:
                if not GaussianIdeal(g).coprime_to(f):
                    continue
                vals = set()
                for a in (g, g * GaussianInt(0, 1), -g, g * GaussianInt(0, -1)):
                    r = GaussianRational.of(a.conj()) / GaussianRational.of(a)
                    vals.add(GaussianRational.of(chi.eps_value(a)) * r)
                assert vals == {evaluate(chi, GaussianIdeal(g))}


ideal_gens = st.builds(GaussianInt, st.integers(-60, 60), st.integers(-60, 60)).filter(
    lambda z: (z.re - z.im) % 2 and z.norm() > 0)


@settings(max_examples=1000)
@given(ideal_gens, ideal_gens)
def test_multiplicative_on_ideals(a, b):
    chi = HeckeCharacter(GaussianIdeal(GaussianInt(4)), 1, (2, 2))
    I, J = GaussianIdeal(a), GaussianIdeal(b)
    assert evaluate(chi, I * J) == evaluate(chi, I) * evaluate(chi, J)
    assert evaluate(chi, I).norm() == 1
    # the other embedding is the exact conjugate
    assert evaluate(chi, GaussianIdeal(a.conj())) == evaluate(chi, I).conj()


def test_unramified_predicate_matches_modulus():
    chi = HeckeCharacter(GaussianIdeal(GaussianInt(8)), 1, (2, 1, 0))
    assert not chi.is_unramified_at(GaussianIdeal(ONE_PLUS_I))
    for p in primes_up_to(100)[1:]:
        for g in factor_rational_prime(p).primes:
            assert chi.is_unramified_at(GaussianIdeal(g))


def test_euler_factor_examples():
    u5 = GaussianRational.of(GaussianInt(-3, 4), 5)
    assert pair_factor(u5) == (1, F(6, 5), 1)
    assert pair_factor(GaussianRational.of(GaussianInt(-1))) == (1, 2, 1)
    chi = HeckeCharacter(TWO, 1, (2,))
    assert euler_factor(chi, GaussianIdeal(ONE_PLUS_I)) == (1,)
    assert rational_euler_factor(chi, 2) == (1,)
    # inert p: one prime of degree 2, value 1 at the Fermat-type character
    assert rational_euler_factor(chi, 3) == (1, 0, -2, 0, 1)


def test_series_inverse_and_c25():
    inv = series_inverse((F(1), F(6, 5), F(1)), 4)
    assert inv[:3] == [1, F(-6, 5), F(11, 25)]
    # oracle: multiply back
    prod_ = [sum(inv[i] * c for i, c in zip(range(k, -1, -1), (F(1), F(6, 5), F(1)))) for k in range(4)]
    assert prod_ == [1, 0, 0, 0]


def _oracle_value(chi):
    def value(z):
        I = GaussianIdeal(GaussianInt(*z))
        if not I.coprime_to(chi.modulus):
            return None
        v = evaluate(chi, I)
        return (v.re, v.im)
    return value


@pytest.mark.parametrize("eps_gen, eps", [((2, 0), (2,)), ((4, 0), (2, 2)), ((8, 0), (2, 1, 0)), ((1, 0), ())])
def test_dirichlet_coefficients_match_ideal_sum(eps_gen, eps):
    w = 1 if eps else 0
    chi = HeckeCharacter(GaussianIdeal(GaussianInt(*eps_gen)) if eps_gen != (1, 0) else ONE, w, eps)
    n = 400
    c = dirichlet_coefficients(chi, n)
    assert c[1] == 1
    assert c[1:] == dirichlet_by_ideals(_oracle_value(chi), n)[1:]
    for p in primes_up_to(n):
        factor = rational_euler_factor(chi, p) + (F(0),)
        assert c[p] == -factor[1]


def test_fit_recovers_synthetic_cube_character_at_its_true_level():
    given_chi = HeckeCharacter(CUBE, 1, (2,))
    r = fit(observations(given_chi, SPLIT[:20]))
    assert r.minimal and r.unique
    # eps(i) = -1 means eps(-1) = 1, so the character already lives at level (2)
    assert r.character.modulus == TWO
    for p in SPLIT:
        P = split_prime(p)
        assert evaluate(r.character, P) == evaluate(given_chi, P)


@pytest.mark.parametrize("gen, eps", [((4, 0), (2, 2)), ((8, 0), (2, 1, 0)), ((8, 0), (2, 3, 2)), ((4, 4), (2, 0, 2))])
def test_fit_recovers_higher_level_characters(gen, eps):
    chi = HeckeCharacter(GaussianIdeal(GaussianInt(*gen)), 1, eps)
    r = fit(observations(chi, SPLIT))
    assert r.character == chi
    assert r.minimal and r.unique
    assert r.fragile_primes == []


def test_fit_with_odd_bad_prime_in_the_modulus():
    chis = list(_well_defined_characters((3, 0)))
    target = next(c for c in chis if fit(observations(c, SPLIT), bad_primes=(2, 3)).character.modulus.norm() == 9)
    r = fit(observations(target, SPLIT), bad_primes=(2, 3))
    assert r.character == target


def test_fit_needs_enough_primes():
    chi = HeckeCharacter(TWO, 1, (2,))
    with pytest.raises(InsufficientData):
        fit(observations(chi, SPLIT[:7]))


def test_fit_names_a_corrupted_prime():
    chi = HeckeCharacter(GaussianIdeal(GaussianInt(4)), 1, (2, 2))
    with pytest.raises(ConflictingObservations) as err:
        fit(observations(chi, SPLIT, corrupt=97))
    assert 97 in err.value.primes


def test_character_json_round_trip():
    chi = HeckeCharacter(GaussianIdeal(GaussianInt(8)), 1, (2, 1, 0))
    d = json.loads(chi.dumps())
    assert d == {"modulus": "8+0i", "w": 1, "eps": [
        {"gen": "0+1i", "value": "-1+0i"}, {"gen": "1+2i", "value": "0+1i"}, {"gen": "1+4i", "value": "1+0i"}]}
    assert HeckeCharacter.from_json(d) == chi
    d["eps"][0]["gen"] = "3"
    with pytest.raises(ValueError):
        HeckeCharacter.from_json(d)


def test_fit_result_json_round_trip():
    chi = HeckeCharacter(GaussianIdeal(GaussianInt(4)), 1, (2, 2))
    r = fit(observations(chi, SPLIT[:12]))
    back = FitResult.from_json(json.loads(json.dumps(r.to_json())))
    assert back.character == r.character
    assert back.training_primes == r.training_primes
    assert back.minimal == r.minimal and back.unique == r.unique
