"""Frobenius eigenvalues on the transcendental lattice from exact point counts.

For a K3 surface of geometric Picard rank 20 at a good odd prime p,

    #X(F_{p^m}) - 1 - p^(2m) = p^m * t_NS(m) + alpha^m + conj(alpha)^m,

where alpha in Z[i] has norm p^2 and t_NS(m) is the trace of Frobenius^m on
NS(1). The finitely many alpha are tried one by one; t_NS is solved for.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InconsistentCounts, NoGaussianSolution, RamifiedPrime
from .gaussian import UNITS, GaussianInt, GaussianRational, SplitType, factor_rational_prime

NS_RANK = 20
WEIL_SLACK = 22


@dataclass(frozen=True)
class Candidate:
    alpha: GaussianInt  # class representative with im >= 0
    t_ns: int | None  # trace on NS(1) over F_p; None when not solved for

    def u(self, p: int) -> GaussianRational:
        return GaussianRational.of(self.alpha, p)


@dataclass(frozen=True)
class FrobeniusData:
    label: str
    p: int
    splitting: SplitType
    status: str  # unique | ambiguous | bad
    survivors: tuple[Candidate, ...]
    m_max: int
    ns_period: int | None = None
    note: str = ""

    def pairs(self) -> list[tuple[GaussianRational, GaussianRational]]:
        """Eigenvalue pairs {u, conj u} of Frob_p on T(1), one per survivor."""
        return [eigen_pair(c.u(self.p)) for c in self.survivors]

    def prime_frobenius_pairs(self) -> list[tuple[GaussianRational, GaussianRational]]:
        """Distinct pairs for Frob_P, P | p a prime of Q(i): Frob_p to the residue degree."""
        f = self.splitting.residue_degree
        out = []
        for c in self.survivors:
            pair = eigen_pair(c.u(self.p) ** f)
            if pair not in out:
                out.append(pair)
        return out

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "status": self.status,
            "survivors": [{"alpha": str(c.alpha), "t_ns": c.t_ns} for c in self.survivors],
            "m_max": self.m_max,
            "spec": self.label,
            "splitting": self.splitting.kind,
            "ns_period": self.ns_period,
            "note": self.note,
        }

    @classmethod
    def from_json(cls, d: dict) -> FrobeniusData:
        p = int(d["p"])
        return cls(
            d.get("spec", ""),
            p,
            factor_rational_prime(p),
            d["status"],
            tuple(Candidate(GaussianInt.parse(s["alpha"]), s["t_ns"]) for s in d["survivors"]),
            int(d["m_max"]),
            d.get("ns_period"),
            d.get("note", ""),
        )


def eigen_pair(u: GaussianRational) -> tuple[GaussianRational, GaussianRational]:
    return tuple(sorted((u, u.conj()), key=GaussianRational.sort_key))


def class_rep(alpha: GaussianInt) -> GaussianInt:
    return alpha if alpha.im >= 0 else alpha.conj()


def transcendental_candidates(p: int) -> list[GaussianInt]:
    """All alpha in Z[i] of norm p^2 (i^a pi^2, i^a conj(pi)^2, i^a p)."""
    st = factor_rational_prime(p)
    if st.kind == "ramified":
        raise RamifiedPrime("p = 2 is ramified in Q(i)")
    bases = [GaussianInt(p)]
    if st.kind == "split":
        pi, pibar = st.primes
        bases = [pi * pi, pibar * pibar, GaussianInt(p)]
    out: list[GaussianInt] = []
    for b in bases:
        for u in UNITS:
            a = u * b
            if a not in out:
                out.append(a)
    return out


def _trace_power(alpha: GaussianInt, m: int) -> int:
    return (alpha**m).trace()


def _solve(alpha: GaussianInt, p: int, t2: dict[int, int], period: int) -> int | None:
    """t_NS(1) making alpha consistent with every T2(m), or None."""
    t1 = None
    t2_free = None
    for m in sorted(t2):
        pm = p**m
        rest = t2[m] - _trace_power(alpha, m)
        if rest % pm:
            return None
        t = rest // pm
        if abs(t) > NS_RANK or (t - NS_RANK) % 2:
            return None
        if m % period == 0:
            if t != NS_RANK:
                return None
        elif m % 2 == 1:
            if t1 is None:
                t1 = t
            elif t != t1:
                return None
        else:
            # period 4, m = 2 mod 4: eigenvalues +-1, +-i give t = 20 - 4k
            if (NS_RANK - t) % 4:
                return None
            t2_free = t
    if t1 is not None and t2_free is not None and abs(t1) > (NS_RANK + t2_free) // 2:
        return None
    return t1


def extract(spec, p: int, counts: dict[int, int], strict: bool = True) -> FrobeniusData:
    """Surviving (alpha, t_NS) classes for the counts over F_{p^m}, m in ``counts``.

    With ``strict`` an empty survivor set raises InconsistentCounts; otherwise it is
    reported with status ``bad``.
    """
    if p == 2:
        raise RamifiedPrime("p = 2 is ramified in Q(i)")
    if not spec.is_good(p):
        raise InconsistentCounts(f"{p} is a bad prime for {spec.label}", p=p)
    if 1 not in counts:
        raise InconsistentCounts(f"no count over F_{p} for {spec.label}", p=p)
    t2 = {m: c - 1 - p ** (2 * m) for m, c in counts.items()}
    classes: list[GaussianInt] = []
    for a in transcendental_candidates(p):
        r = class_rep(a)
        if r not in classes:
            classes.append(r)

    survivors: list[Candidate] = []
    period = None
    for M in spec.ns_periods:
        survivors = [Candidate(a, t) for a in classes if (t := _solve(a, p, t2, M)) is not None]
        if survivors:
            period = M
            break
    m_max = max(counts)
    st = factor_rational_prime(p)
    if not survivors:
        weil = [m for m, t in t2.items() if abs(t) > WEIL_SLACK * p**m]
        msg = f"no Frobenius candidate fits the counts of {spec.label} at p = {p}"
        if weil:
            msg += f" (Weil bound violated for m = {weil})"
        if strict:
            raise InconsistentCounts(msg, p=p)
        return FrobeniusData(spec.label, p, st, "bad", (), m_max, None, msg)
    status = "unique" if len(survivors) == 1 else "ambiguous"
    return FrobeniusData(spec.label, p, st, status, tuple(survivors), m_max, period)


def kummer_eigenvalues(n: int, p: int, a_p: int) -> FrobeniusData:
    """Transcendental pair of the Kummer surface of E x E, E: y^2 = x^3 - n x.

    Split p: Frob_p on H^1(E) is pi with pi + conj(pi) = a_p and N(pi) = p; the
    transcendental eigenvalues on H^2 are pi^2 and conj(pi)^2. Inert p: a_p = 0,
    pi = i sqrt(p) up to sign, so alpha = -p.
    """
    if p == 2 or n % p == 0:
        raise InconsistentCounts(f"{p} is a bad prime for the Kummer family n = {n}", p=p)
    st = factor_rational_prime(p)
    label = f"kummer_{n}"
    if st.kind == "inert":
        if a_p != 0:
            raise NoGaussianSolution(f"a_{p} = {a_p} but p = 3 mod 4 forces a_p = 0")
        return FrobeniusData(label, p, st, "unique", (Candidate(GaussianInt(-p), None),), 1)
    if a_p % 2:
        raise NoGaussianSolution(f"a_{p} = {a_p} is odd; no pi in Z[i] has that trace")
    a = a_p // 2
    b2 = p - a * a
    b = _isqrt_exact(b2) if b2 > 0 else None
    if b is None:
        raise NoGaussianSolution(f"no Gaussian integer of norm {p} has trace {a_p}")
    pi = GaussianInt(a, -b)
    alpha = class_rep(pi * pi)
    return FrobeniusData(label, p, st, "unique", (Candidate(alpha, None),), 1)


def _isqrt_exact(n: int) -> int | None:
    from math import isqrt

    r = isqrt(n)
    return r if r * r == n else None
