"""Finite-level algebraic Hecke characters of Q(i).

A character is a triple (modulus f, exponent w, finite part eps) and takes the
value ``eps(alpha) * (conj(alpha)/alpha)^w`` on an ideal (alpha) coprime to f,
alpha its canonical (primary) generator. ``eps`` is stored as exponents of i on
the generators of (Z[i]/f)^x.
"""

from __future__ import annotations

import itertools
import json
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import ConflictingObservations, InsufficientData, NoCharacterWithinBound, NotCoprime
from .gaussian import (
    UNITS,
    GaussianIdeal,
    GaussianInt,
    GaussianRational,
    factor_rational_prime,
    primes_up_to,
    residue_unit_group,
)

I_POWERS = UNITS  # i^0, i^1, i^2, i^3
DEFAULT_BOUND = 2**10
MIN_TRAINING_PRIMES = 8


def unit_exponent(z) -> int | None:
    """k with z = i^k, or None if z is not a unit of Z[i]."""
    if isinstance(z, GaussianRational):
        if z.re.denominator != 1 or z.im.denominator != 1:
            return None
        z = GaussianInt(int(z.re), int(z.im))
    try:
        return I_POWERS.index(z)
    except ValueError:
        return None


@dataclass(frozen=True)
class HeckeCharacter:
    modulus: GaussianIdeal
    w: int
    eps: tuple[int, ...]  # eps(g_j) = i^eps[j]

    def __post_init__(self):
        gens = self.group.generators
        if len(gens) != len(self.eps):
            raise ValueError(f"expected {len(gens)} eps values for modulus {self.modulus}")
        eps = tuple(k % 4 for k in self.eps)
        for (g, n), k in zip(gens, eps):
            if (k * n) % 4:
                raise ValueError(f"eps({g}) = i^{k} has order not dividing {n}")
        object.__setattr__(self, "eps", eps)

    @property
    def group(self):
        return residue_unit_group(self.modulus)

    def eps_exponent(self, z) -> int:
        vec = self.group.dlog(GaussianInt.coerce(z))
        return sum(e * k for e, k in zip(vec, self.eps)) % 4

    def eps_value(self, z) -> GaussianInt:
        return I_POWERS[self.eps_exponent(z)]

    def is_unramified_at(self, prime: GaussianIdeal) -> bool:
        return not prime.divides(self.modulus)

    def value(self, ideal: GaussianIdeal) -> GaussianRational:
        return evaluate(self, ideal)

    def to_json(self) -> dict:
        return {
            "modulus": str(self.modulus.generator),
            "w": self.w,
            "eps": [{"gen": str(g), "value": str(I_POWERS[k])} for (g, _), k in zip(self.group.generators, self.eps)],
        }

    @classmethod
    def from_json(cls, d: dict) -> HeckeCharacter:
        modulus = GaussianIdeal(GaussianInt.parse(d["modulus"]))
        gens = residue_unit_group(modulus).generators
        listed = [GaussianInt.parse(e["gen"]) for e in d["eps"]]
        if listed != [g for g, _ in gens]:
            raise ValueError("eps generators do not match the canonical generators of the modulus")
        exps = []
        for e in d["eps"]:
            k = unit_exponent(GaussianInt.parse(e["value"]))
            if k is None:
                raise ValueError(f"eps value {e['value']} is not a root of unity in Z[i]")
            exps.append(k)
        return cls(modulus, int(d["w"]), tuple(exps))

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=False)


def evaluate(chi: HeckeCharacter, ideal: GaussianIdeal) -> GaussianRational:
    """chi(I) under the embedding with tau(i) = +i; conjugate it for the other."""
    if not ideal.coprime_to(chi.modulus):
        raise NotCoprime(f"{ideal} is not coprime to the modulus {chi.modulus}")
    alpha = ideal.generator
    ratio = GaussianRational.of(alpha.conj()) / GaussianRational.of(alpha)
    return GaussianRational.of(chi.eps_value(alpha)) * ratio**chi.w


@dataclass(frozen=True)
class WellDefinedness:
    ok: bool
    failing_unit: GaussianInt | None = None


def check_well_defined(chi: HeckeCharacter) -> WellDefinedness:
    """eps(mu) * (conj(mu)/mu)^w = 1 for every unit mu, so chi((alpha)) ignores the generator."""
    for mu in UNITS:
        if chi.modulus.norm() > 1 and not chi.group.is_unit(mu):
            continue
        ratio = GaussianRational.of(mu.conj()) / GaussianRational.of(mu)
        if GaussianRational.of(chi.eps_value(mu)) * ratio**chi.w != 1:
            return WellDefinedness(False, mu)
    return WellDefinedness(True)


# ---------------------------------------------------------------------------
# Euler factors and Dirichlet series

Poly = tuple[Fraction, ...]


def pair_factor(v: GaussianRational) -> Poly:
    """(1 - vT)(1 - conj(v)T)."""
    return (Fraction(1), -v.trace(), v.norm())


def euler_factor(chi: HeckeCharacter, prime: GaussianIdeal) -> Poly:
    """Local factor at a prime ideal in T = N(P)^-s, over both embeddings; 1 if P | f."""
    if not chi.is_unramified_at(prime):
        return (Fraction(1),)
    return pair_factor(evaluate(chi, prime))


def poly_mul(a: Poly, b: Poly) -> Poly:
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return tuple(out)


def poly_inflate(a: Poly, f: int) -> Poly:
    """a(T^f)."""
    out = [Fraction(0)] * ((len(a) - 1) * f + 1)
    for i, x in enumerate(a):
        out[i * f] = x
    return tuple(out)


def rational_euler_factor(chi: HeckeCharacter, p: int) -> Poly:
    """Product over P | p of the local factors, as a polynomial in T = p^-s."""
    st = factor_rational_prime(p)
    out: Poly = (Fraction(1),)
    for g in st.primes:
        out = poly_mul(out, poly_inflate(euler_factor(chi, GaussianIdeal(g)), st.residue_degree))
    return out


def series_inverse(poly: Poly, k: int) -> list[Fraction]:
    """Coefficients of 1/poly(T) up to T^k (poly[0] must be 1)."""
    if poly[0] != 1:
        raise ValueError("constant term must be 1")
    out = [Fraction(1)] + [Fraction(0)] * k
    for n in range(1, k + 1):
        out[n] = -sum(poly[j] * out[n - j] for j in range(1, min(n, len(poly) - 1) + 1))
    return out


def dirichlet_from_factors(factor_at, n_max: int) -> list[Fraction]:
    """c_0..c_N (c_0 unused) of prod_p 1/factor_at(p)(p^-s)."""
    c = [Fraction(0)] * (n_max + 1)
    if n_max < 1:
        return c
    c[1] = Fraction(1)
    spf = list(range(n_max + 1))
    for p in primes_up_to(n_max):
        for m in range(p * p, n_max + 1, p):
            if spf[m] == m:
                spf[m] = p
    local: dict[int, list[Fraction]] = {}
    for p in primes_up_to(n_max):
        k, pk = 0, 1
        while pk * p <= n_max:
            pk *= p
            k += 1
        local[p] = series_inverse(factor_at(p), k)
    for n in range(2, n_max + 1):
        p = spf[n]
        m, k = n, 0
        while m % p == 0:
            m //= p
            k += 1
        c[n] = local[p][k] * c[m]
    return c


def dirichlet_coefficients(chi: HeckeCharacter, n_max: int) -> list[Fraction]:
    """Coefficients of L(s, chi) L(s, conj chi) over Q(i), as a Dirichlet series in n."""
    return dirichlet_from_factors(lambda p: rational_euler_factor(chi, p), n_max)


# ---------------------------------------------------------------------------
# fitting


@dataclass(frozen=True)
class Observation:
    """Frobenius data at one prime ideal: candidate pairs {v, conj v} for Frob_P."""

    prime: GaussianIdeal
    p: int
    degree: int
    pairs: tuple[tuple[GaussianRational, GaussianRational], ...]

    @property
    def unambiguous(self) -> bool:
        return len(self.pairs) == 1


@dataclass
class FitResult:
    character: HeckeCharacter
    minimal: bool
    unique: bool
    solutions: int
    training_primes: list[int]
    rejected: list[tuple[str, str]] = field(default_factory=list)  # (modulus, reason)
    fragile_primes: list[int] = field(default_factory=list)
    held_out: list[dict] = field(default_factory=list)
    ambiguity_resolutions: list[dict] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "character": self.character.to_json(),
            "minimal": self.minimal,
            "unique": self.unique,
            "solutions": self.solutions,
            "training_primes": self.training_primes,
            "rejected": [{"modulus": m, "reason": r} for m, r in self.rejected],
            "fragile_primes": self.fragile_primes,
            "held_out": self.held_out,
            "ambiguity_resolutions": self.ambiguity_resolutions,
        }

    @classmethod
    def from_json(cls, d: dict) -> FitResult:
        return cls(
            HeckeCharacter.from_json(d["character"]),
            bool(d["minimal"]),
            bool(d["unique"]),
            int(d["solutions"]),
            [int(p) for p in d["training_primes"]],
            [(r["modulus"], r["reason"]) for r in d.get("rejected", [])],
            [int(p) for p in d.get("fragile_primes", [])],
            list(d.get("held_out", [])),
            list(d.get("ambiguity_resolutions", [])),
        )


def support_ideals(bad_primes) -> list[GaussianIdeal]:
    """Prime ideals allowed in the modulus: (1+i) and the primes over bad rational primes."""
    out: list[GaussianIdeal] = []
    for p in sorted(set(bad_primes) | {2}):
        for g in factor_rational_prime(p).primes:
            out.append(GaussianIdeal(g))
    return out


def candidate_moduli(support: list[GaussianIdeal], bound: int) -> list[GaussianIdeal]:
    """Every ideal supported on ``support`` with norm <= bound, ascending by (norm, re, im)."""
    found = {GaussianIdeal.of(1)}
    frontier = [GaussianIdeal.of(1)]
    while frontier:
        nxt = []
        for f in frontier:
            for q in support:
                g = f * q
                if g.norm() <= bound and g not in found:
                    found.add(g)
                    nxt.append(g)
        frontier = nxt
    return sorted(found, key=GaussianIdeal.sort_key)


def _allowed_deltas(obs: Observation, w: int) -> set[int]:
    """log_i of eps(pi) compatible with the observed pair, pi the canonical generator."""
    pi = obs.prime.generator
    shape = (GaussianRational.of(pi) / GaussianRational.of(pi.conj())) ** w
    allowed = set()
    for v in obs.pairs[0]:
        k = unit_exponent(v * shape)
        if k is not None:
            allowed.add(k)
    return allowed


def _try_modulus(f: GaussianIdeal, w: int, constraints):
    """(solutions, reason) for eps on (Z[i]/f)^x meeting every constraint."""
    group = residue_unit_group(f)
    by_class: dict[tuple, dict[int, list[int]]] = defaultdict(lambda: defaultdict(list))
    for obs, allowed in constraints:
        vec = group.dlog(obs.prime.generator)
        (k,) = allowed  # one admissible delta per observation at weight w
        by_class[vec][k].append(obs.p)
    conflicts = [(vec, ks) for vec, ks in by_class.items() if len(ks) > 1]
    if conflicts:
        vec, ks = conflicts[0]
        return [], ("conflict", group.element(vec), ks)
    fixed = [(vec, next(iter(ks))) for vec, ks in by_class.items()]
    fixed.append((group.dlog(GaussianInt(0, 1)), (2 * w) % 4))
    choices = [[k for k in range(4) if (k * n) % 4 == 0] for _, n in group.generators]
    sols = []
    for y in itertools.product(*choices):
        if all(sum(e * k for e, k in zip(vec, y)) % 4 == target for vec, target in fixed):
            sols.append(y)
    if not sols:
        return [], ("nohom", None, None)
    return sols, None


def fit(observations, bound: int = DEFAULT_BOUND, bad_primes=(2,), w: int = 1,
        stability: bool = True) -> FitResult:
    """Smallest-norm modulus and finite part reproducing every unambiguous split observation."""
    train = [o for o in observations if o.degree == 1 and o.unambiguous]
    primes = sorted({o.p for o in train})
    if len(primes) < MIN_TRAINING_PRIMES:
        raise InsufficientData(f"need >= {MIN_TRAINING_PRIMES} unambiguous split primes, got {len(primes)}")
    constraints = []
    for o in train:
        allowed = _allowed_deltas(o, w)
        if not allowed:
            raise ConflictingObservations(
                f"p = {o.p}: observed pair is not eps * (conj/pi)^{w} for any root of unity eps",
                residue_class=str(o.prime.generator), primes=[o.p])
        constraints.append((o, allowed))

    try:
        result = _scan(constraints, bound, bad_primes, w)
    except (NoCharacterWithinBound, ConflictingObservations) as err:
        suspects = _leave_one_out_suspects(constraints, primes, bound, bad_primes, w)
        if not suspects:
            raise
        raise ConflictingObservations(
            f"{err}; the remaining observations fit once p = {suspects} is dropped",
            residue_class=getattr(err, "residue_class", None), primes=suspects) from err
    result.training_primes = primes
    if stability:
        norm = result.character.modulus.norm()
        for p in primes:
            rest = [c for c in constraints if c[0].p != p]
            try:
                other = _scan(rest, bound, bad_primes, w)
            except (NoCharacterWithinBound, ConflictingObservations):
                continue
            if other.character.modulus.norm() < norm:
                result.fragile_primes.append(p)
    return result


def _leave_one_out_suspects(constraints, primes, bound, bad_primes, w) -> list[int]:
    """Training primes whose removal alone lets some character fit."""
    out = []
    for p in primes:
        rest = [c for c in constraints if c[0].p != p]
        try:
            _scan(rest, bound, bad_primes, w)
        except (NoCharacterWithinBound, ConflictingObservations):
            continue
        out.append(p)
    return out


def _scan(constraints, bound, bad_primes, w) -> FitResult:
    rejected: list[tuple[str, str]] = []
    last_conflict = None
    for f in candidate_moduli(support_ideals(bad_primes), bound):
        sols, reason = _try_modulus(f, w, constraints)
        if sols:
            chi = HeckeCharacter(f, w, sols[0])
            return FitResult(chi, True, len(sols) == 1, len(sols), [], rejected)
        kind, cls, ks = reason
        if kind == "conflict":
            desc = "; ".join(f"i^{k}: {sorted(set(ps))}" for k, ps in sorted(ks.items()))
            rejected.append((str(f.generator), f"class {cls} has conflicting eps values ({desc})"))
            last_conflict = (f, cls, ks)
        else:
            rejected.append((str(f.generator), "no homomorphism extends the forced values"))
            last_conflict = None
    if last_conflict is not None:
        f, cls, ks = last_conflict
        minority = set(min(ks.values(), key=len))
        raise ConflictingObservations(
            f"residue class {cls} mod {f} receives conflicting values; suspect primes {sorted(minority)}",
            residue_class=str(cls), primes=sorted(minority))
    raise NoCharacterWithinBound(f"no character with modulus norm <= {bound} fits the observations")


def observations_from_frobenius(frobs) -> list[Observation]:
    """One observation per prime of Q(i) above each good p with surviving candidates."""
    out = []
    for fd in frobs:
        if fd.status == "bad" or not fd.survivors:
            continue
        pairs = tuple(fd.prime_frobenius_pairs())
        for g in fd.splitting.primes:
            out.append(Observation(GaussianIdeal(g), fd.p, fd.splitting.residue_degree, pairs))
    return out
