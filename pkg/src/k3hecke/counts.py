"""Exact point counts for the two implemented CM K3 families, plus a JSON-lines cache.

Diagonal quartics ``a0 x0^4 + a1 x1^4 + a2 x2^4 + a3 x3^4 = 0`` are counted two
ways: by enumeration and by the Weil character-sum formula. The Kummer family
of ``y^2 = x^3 - n x`` enters only through the elliptic curve's point counts.
"""

from __future__ import annotations

import json
import threading
from dataclasses import asdict, dataclass
from itertools import product
from math import gcd
from pathlib import Path

import numpy as np

from . import __version__
from .errors import BadPrime, BoundExceeded, CacheConflict, InternalInconsistency
from .finite_field import build_field, jacobi_sum, MultCharacter
from .gaussian import GaussianInt, factor_int

BRUTEFORCE_BOUND = 2500

DIAGONAL = "diagonal_quartic"
KUMMER = "kummer_cm"


@dataclass(frozen=True)
class SurfaceSpec:
    family: str
    coeffs: tuple[int, ...]
    label: str

    def __post_init__(self):
        if self.family == DIAGONAL:
            if len(self.coeffs) != 4 or 0 in self.coeffs:
                raise ValueError("a diagonal quartic needs four nonzero coefficients")
        elif self.family == KUMMER:
            if len(self.coeffs) != 1 or self.coeffs[0] == 0:
                raise ValueError("the Kummer family needs one nonzero parameter n")
        else:
            raise ValueError(f"unknown family {self.family!r}")

    @classmethod
    def fermat(cls) -> SurfaceSpec:
        return cls(DIAGONAL, (1, 1, 1, 1), "fermat")

    @classmethod
    def diagonal(cls, coeffs, label: str | None = None) -> SurfaceSpec:
        coeffs = tuple(int(c) for c in coeffs)
        return cls(DIAGONAL, coeffs, label or "diagonal_" + "_".join(map(str, coeffs)))

    @classmethod
    def kummer(cls, n: int = 1, label: str | None = None) -> SurfaceSpec:
        return cls(KUMMER, (int(n),), label or f"kummer_{n}")

    def bad_primes(self) -> set[int]:
        out = {2}
        for c in self.coeffs:
            out.update(factor_int(c))
        return out

    def is_good(self, p: int) -> bool:
        return p not in self.bad_primes()

    @property
    def ns_periods(self) -> tuple[int, ...]:
        """Candidate orders M of Frobenius on NS, tried in order during extraction."""
        if self.family == DIAGONAL and len(set(self.coeffs)) == 1:
            return (2,)
        return (2, 4)


@dataclass(frozen=True)
class CountRecord:
    spec: str
    coeffs: tuple[int, ...]
    p: int
    m: int
    count: int
    method: str  # bruteforce | charsum | elliptic
    version: str = __version__

    @property
    def key(self) -> tuple:
        return (self.spec, self.coeffs, self.p, self.m, self.method)

    def to_json(self) -> str:
        d = asdict(self)
        d["coeffs"] = list(self.coeffs)
        d["count"] = str(self.count)
        return json.dumps(
            {k: d[k] for k in ("spec", "coeffs", "p", "m", "count", "method", "version")},
            separators=(",", ":"),
        )

    @classmethod
    def from_json(cls, line: str) -> CountRecord:
        d = json.loads(line)
        if set(d) != {"spec", "coeffs", "p", "m", "count", "method", "version"}:
            raise ValueError(f"malformed cache record: {line.strip()}")
        return cls(d["spec"], tuple(int(c) for c in d["coeffs"]), int(d["p"]), int(d["m"]),
                   int(d["count"]), d["method"], d["version"])


def _check_good(spec: SurfaceSpec, p: int) -> None:
    if not spec.is_good(p):
        raise BadPrime(f"{p} is a bad prime for {spec.label}")


# ---------------------------------------------------------------------------
# diagonal quartics


def count_bruteforce(spec: SurfaceSpec, p: int, m: int = 1, bound: int = BRUTEFORCE_BOUND) -> CountRecord:
    """Projective point count by scanning the affine cone.

    The q^4 cone points are enumerated as pairs of pairs: every (x0, x1) and
    every (x2, x3) is evaluated, and the two value histograms are matched.
    """
    if spec.family != DIAGONAL:
        raise ValueError("only diagonal quartics are counted on the surface itself")
    _check_good(spec, p)
    q = p**m
    if q > bound:
        raise BoundExceeded(f"q = {q} exceeds the brute-force bound {bound}")
    fld = build_field(p, m)
    x = np.arange(q, dtype=np.int64)
    x4 = fld.power(x, 4)
    terms = [fld.mul(x4, np.full(q, fld.from_int(a), dtype=np.int64)) for a in spec.coeffs]

    def pair_hist(u, v):
        s = fld.add(u[:, None], v[None, :])
        return np.bincount(s.ravel(), minlength=q)

    h01 = pair_hist(terms[0], terms[1])
    h23 = pair_hist(terms[2], terms[3])
    affine = int(np.dot(h01, h23[fld.neg(x)]))
    if (affine - 1) % (q - 1):
        raise InternalInconsistency("affine cone count is not 1 mod q-1")
    return CountRecord(spec.label, spec.coeffs, p, m, (affine - 1) // (q - 1), "bruteforce")


def count_charsum(spec: SurfaceSpec, p: int, m: int = 1) -> CountRecord:
    """Projective point count from Jacobi sums of characters of order gcd(4, q-1)."""
    if spec.family != DIAGONAL:
        raise ValueError("character sums apply to diagonal quartics only")
    _check_good(spec, p)
    fld = build_field(p, m)
    q = fld.q
    d = gcd(4, q - 1)
    chi = MultCharacter(fld, 4 // d)
    minus_one = int(fld.neg(np.array([1]))[0])
    coeff_elts = [fld.from_int(a) for a in spec.coeffs]

    total = GaussianInt(q * q + q + 1)
    for w in product(range(1, d), repeat=4):
        if sum(w) % d:
            continue
        c0, c1, c2, c3 = (chi**wi for wi in w)
        weight = GaussianInt(1)
        for ci, a in zip((c0, c1, c2, c3), coeff_elts):
            weight = weight * ci.conj()(a)
        weight = weight * c3(minus_one)
        # three-variable Jacobi sum via two-variable ones
        psi = c0 * c1
        j3 = jacobi_sum(c0, c1) * jacobi_sum(psi, c2)
        if psi.is_trivial():
            j3 = j3 + c1(minus_one) * (q - 1)
        total = total + weight * j3
    if total.im != 0:
        raise InternalInconsistency(f"character-sum count for q = {q} is not rational: {total}")
    return CountRecord(spec.label, spec.coeffs, p, m, total.re, "charsum")


# ---------------------------------------------------------------------------
# elliptic curves y^2 = x^3 - n x


def count_elliptic(n: int, p: int) -> tuple[int, int]:
    """(#E(F_p), a_p) for y^2 = x^3 - n x, by enumerating x."""
    if p == 2 or n % p == 0:
        raise BadPrime(f"{p} is a bad prime for y^2 = x^3 - {n}x")
    xs = np.arange(p, dtype=np.int64)
    rhs = (xs * xs % p * xs - (n % p) * xs) % p
    is_sq = np.zeros(p, dtype=bool)
    is_sq[xs * xs % p] = True
    points = 1 + int(np.sum(rhs == 0)) + 2 * int(np.sum(is_sq[rhs] & (rhs != 0)))
    return points, p + 1 - points


def count_kummer_record(spec: SurfaceSpec, p: int) -> CountRecord:
    _check_good(spec, p)
    points, _ = count_elliptic(spec.coeffs[0], p)
    return CountRecord(spec.label, spec.coeffs, p, 1, points, "elliptic")


def compute_count(spec: SurfaceSpec, p: int, m: int, method: str) -> CountRecord:
    if method == "charsum":
        return count_charsum(spec, p, m)
    if method == "bruteforce":
        return count_bruteforce(spec, p, m)
    if method == "elliptic":
        if m != 1:
            raise ValueError("elliptic counts are over the prime field only")
        return count_kummer_record(spec, p)
    raise ValueError(f"unknown counting method {method!r}")


# ---------------------------------------------------------------------------
# cache


class CountCache:
    """Point counts keyed by (spec, coeffs, p, m, method), persisted as JSON lines.

    With ``path=None`` the cache lives in memory only.
    """

    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path is not None else None
        self._records: dict[tuple, CountRecord] = {}
        self._lock = threading.Lock()
        if self.path is not None and self.path.exists():
            with open(self.path) as fh:
                for lineno, line in enumerate(fh, 1):
                    if line.strip():
                        self._insert(CountRecord.from_json(line), where=f"line {lineno}")

    def __len__(self):
        return len(self._records)

    def __iter__(self):
        return iter(sorted(self._records.values(), key=lambda r: (r.spec, r.p, r.m, r.method)))

    def _insert(self, record: CountRecord, where: str = "") -> bool:
        old = self._records.get(record.key)
        if old is not None:
            if old.count != record.count:
                raise CacheConflict(
                    f"conflicting counts for {record.spec} p={record.p} m={record.m} "
                    f"{record.method}: {old.count} vs {record.count} {where}".rstrip()
                )
            return False
        self._records[record.key] = record
        return True

    def put(self, record: CountRecord) -> bool:
        """Store a record; returns False if an identical one was already present."""
        with self._lock:
            added = self._insert(record)
            if added and self.path is not None:
                self.path.parent.mkdir(parents=True, exist_ok=True)
                with open(self.path, "a") as fh:
                    fh.write(record.to_json() + "\n")
            return added

    def get(self, spec: SurfaceSpec, p: int, m: int, method: str) -> CountRecord | None:
        return self._records.get((spec.label, spec.coeffs, p, m, method))

    def records_for(self, spec: SurfaceSpec, p: int, m: int) -> list[CountRecord]:
        return [r for meth in ("charsum", "bruteforce", "elliptic")
                if (r := self.get(spec, p, m, meth)) is not None]
