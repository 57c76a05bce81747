import json

import pytest

from k3hecke.counts import (
    CountCache,
    CountRecord,
    SurfaceSpec,
    count_bruteforce,
    count_charsum,
    count_elliptic,
    count_kummer_record,
)
from k3hecke.errors import BadPrime, BoundExceeded, CacheConflict
from k3hecke.gaussian import primes_up_to

from oracles import elliptic_count_naive, projective_count_naive

FERMAT = SurfaceSpec.fermat()
SPECS = [
    FERMAT,
    SurfaceSpec.diagonal((1, 1, 1, 2)),
    SurfaceSpec.diagonal((1, -1, 2, 3)),
    SurfaceSpec.diagonal((2, 3, 5, -7)),
]
PRIME_POWERS_49 = [(p, m) for p in primes_up_to(49)[1:] for m in (1, 2, 3) if p**m <= 49]


def test_fermat_examples():
    assert count_bruteforce(FERMAT, 5).count == 0
    assert count_bruteforce(FERMAT, 3).count == 16
    assert count_bruteforce(FERMAT, 3, 2).count == 280
    assert count_charsum(FERMAT, 5).count == 0
    assert count_charsum(FERMAT, 3, 2).count == 280
    assert count_charsum(FERMAT, 13).count == count_bruteforce(FERMAT, 13).count


def good_cases(prime_powers):
    return [pytest.param(s, p, m, id=f"{s.label}-{p}^{m}") for s in SPECS for p, m in prime_powers if s.is_good(p)]


@pytest.mark.parametrize("spec, p, m", good_cases(PRIME_POWERS_49))
def test_charsum_equals_bruteforce(spec, p, m):
    n = count_charsum(spec, p, m).count
    assert n == count_bruteforce(spec, p, m).count
    q = p**m
    t2 = n - 1 - q * q
    assert abs(t2) <= 22 * q


@pytest.mark.parametrize("spec, p, m", good_cases([(3, 1), (5, 1), (7, 1), (11, 1), (13, 1), (3, 2), (5, 2)]))
def test_bruteforce_matches_naive_oracle(spec, p, m):
    assert count_bruteforce(spec, p, m).count == projective_count_naive(spec.coeffs, p, m)


@pytest.mark.parametrize("p", [p for p in primes_up_to(1000) if p > 2])
def test_fermat_charsum_weil_bound(p):
    for m in (1, 2) if p < 100 else (1,):
        q = p**m
        t2 = count_charsum(FERMAT, p, m).count - 1 - q * q
        assert isinstance(t2, int)
        assert abs(t2) <= 22 * q


def test_elliptic_examples():
    assert count_elliptic(1, 5) == (8, -2)
    assert count_elliptic(1, 7)[1] == 0
    assert count_elliptic(1, 13)[0] == elliptic_count_naive(1, 13)
    with pytest.raises(BadPrime):
        count_elliptic(3, 3)


@pytest.mark.parametrize("n", [1, -1, 2, 5])
def test_elliptic_matches_naive(n):
    for p in primes_up_to(200)[1:]:
        if n % p:
            points, ap = count_elliptic(n, p)
            assert points == elliptic_count_naive(n, p)
            assert ap * ap <= 4 * p


def test_supersingular_pattern():
    for p in primes_up_to(1000):
        if p % 4 == 3:
            assert count_elliptic(1, p)[1] == 0


def test_bad_primes_and_bounds():
    spec = SurfaceSpec.diagonal((1, 1, 1, 3))
    assert spec.bad_primes() == {2, 3}
    with pytest.raises(BadPrime):
        count_charsum(spec, 3)
    with pytest.raises(BadPrime):
        count_bruteforce(FERMAT, 2)
    with pytest.raises(BoundExceeded):
        count_bruteforce(FERMAT, 53, 2)
    with pytest.raises(BadPrime):
        count_kummer_record(SurfaceSpec.kummer(5), 5)
    with pytest.raises(ValueError):
        SurfaceSpec.diagonal((1, 0, 1, 1))


def test_cache_round_trip_and_schema(tmp_path):
    path = tmp_path / "counts.jsonl"
    cache = CountCache(path)
    rec = CountRecord("fermat", (1, 1, 1, 1), 5, 1, 0, "bruteforce")
    assert cache.put(rec) is True
    assert cache.get(FERMAT, 5, 1, "bruteforce") == rec
    line = json.loads(path.read_text().strip())
    assert set(line) == {"spec", "coeffs", "p", "m", "count", "method", "version"}
    assert line["count"] == "0" and line["coeffs"] == [1, 1, 1, 1]
    reloaded = CountCache(path)
    assert list(reloaded) == [rec]


def test_cache_put_is_idempotent(tmp_path):
    path = tmp_path / "counts.jsonl"
    cache = CountCache(path)
    rec = CountRecord("fermat", (1, 1, 1, 1), 5, 1, 0, "bruteforce")
    cache.put(rec)
    assert cache.put(rec) is False
    assert len(cache) == 1
    assert len(path.read_text().splitlines()) == 1


def test_cache_conflict(tmp_path):
    cache = CountCache(tmp_path / "counts.jsonl")
    cache.put(CountRecord("fermat", (1, 1, 1, 1), 5, 1, 0, "bruteforce"))
    with pytest.raises(CacheConflict):
        cache.put(CountRecord("fermat", (1, 1, 1, 1), 5, 1, 1, "bruteforce"))


def test_conflicting_lines_on_disk_are_rejected(tmp_path):
    path = tmp_path / "counts.jsonl"
    a = CountRecord("fermat", (1, 1, 1, 1), 5, 1, 0, "charsum")
    b = CountRecord("fermat", (1, 1, 1, 1), 5, 1, 4, "charsum")
    path.write_text(a.to_json() + "\n" + b.to_json() + "\n")
    with pytest.raises(CacheConflict):
        CountCache(path)


def test_large_counts_survive_serialization():
    rec = CountRecord("fermat", (1, 1, 1, 1), 9973, 3, 10**30 + 7, "charsum")
    assert CountRecord.from_json(rec.to_json()) == rec
