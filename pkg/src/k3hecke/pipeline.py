"""End-to-end orchestration: counts -> Frobenius data -> fit -> verification.

Counts come from a CountCache and are computed only when missing. Every
diagonal-quartic count with q <= BRUTEFORCE_BOUND is cross-checked against
the brute-force count before it is used.
"""

from __future__ import annotations

import json
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

from .counts import BRUTEFORCE_BOUND, DIAGONAL, KUMMER, CountCache, CountRecord, SurfaceSpec, compute_count
from .errors import (
    ConfigError,
    ConflictingObservations,
    CountMismatch,
    InsufficientData,
    MissingData,
    NoCharacterWithinBound,
    NoGaussianSolution,
)
from .finite_field import TABLE_BOUND
from .frobenius import FrobeniusData, extract, kummer_eigenvalues
from .gaussian import factor_rational_prime, primes_up_to
from .hecke import DEFAULT_BOUND, FitResult, fit, observations_from_frobenius
from .verify import VerificationReport, verify_all

FAMILIES = ("fermat", "diagonal", "kummer")


@dataclass(frozen=True)
class RunConfig:
    family: str = "fermat"
    coeffs: tuple[int, ...] = (1, 1, 1, 1)
    p_fit: int = 200
    p_max: int = 400
    m_max: int = 2
    conductor_bound: int = DEFAULT_BOUND
    cache: str | None = None
    output: str = "json"
    workers: int = 1
    seed: int = 0
    artifacts: str = "artifacts"
    n_max: int = 1000
    crosscheck_bound: int = BRUTEFORCE_BOUND

    def spec(self) -> SurfaceSpec:
        if self.family == "fermat":
            return SurfaceSpec.fermat()
        if self.family == "diagonal":
            return SurfaceSpec.diagonal(self.coeffs)
        return SurfaceSpec.kummer(self.coeffs[0])

    def validate(self, need_fit: bool = False) -> RunConfig:
        if self.family not in FAMILIES:
            raise ConfigError(f"unknown family {self.family!r}; expected one of {', '.join(FAMILIES)}")
        if self.family == "fermat" and tuple(self.coeffs) != (1, 1, 1, 1):
            raise ConfigError("the Fermat quartic has coefficients 1,1,1,1")
        if self.family == "diagonal" and (len(self.coeffs) != 4 or 0 in self.coeffs):
            raise ConfigError("--coeffs needs four nonzero integers for a diagonal quartic")
        if self.family == "kummer" and (len(self.coeffs) != 1 or self.coeffs[0] == 0):
            raise ConfigError("--coeffs needs one nonzero integer n for the Kummer family")
        if self.p_max < 3:
            raise ConfigError(f"prime range up to {self.p_max} contains no odd prime")
        if need_fit and not 3 <= self.p_fit < self.p_max:
            raise ConfigError(f"need 3 <= pfit < pmax, got pfit = {self.p_fit}, pmax = {self.p_max}")
        if self.m_max not in (2, 3):
            raise ConfigError("--powers must be 2 or 3")
        b = self.conductor_bound
        if b < 1 or b > 2**16 or b & (b - 1):
            raise ConfigError("--conductor-bound must be a power of 2 up to 65536")
        if self.output not in ("json", "md", "csv"):
            raise ConfigError("--output must be json, md or csv")
        if self.workers < 1:
            raise ConfigError("--workers must be positive")
        if self.n_max < 1:
            raise ConfigError("--nmax must be positive")
        return self

    @property
    def cache_path(self) -> Path:
        return Path(self.cache) if self.cache else Path(self.artifacts) / "counts.jsonl"

    def to_json(self) -> dict:
        return {
            "family": self.family, "coeffs": list(self.coeffs), "pfit": self.p_fit, "pmax": self.p_max,
            "powers": self.m_max, "conductor_bound": self.conductor_bound, "nmax": self.n_max,
        }


# ---------------------------------------------------------------------------
# counts


def needed_primes(spec: SurfaceSpec, p_max: int, n_max: int = 0) -> list[int]:
    """Good primes whose data enter a run: all p <= p_max, plus primes that matter up to n_max."""
    out = []
    for p in primes_up_to(max(p_max, n_max)):
        if not spec.is_good(p):
            continue
        if p <= p_max or factor_rational_prime(p).kind == "split" or p * p <= n_max:
            out.append(p)
    return out


def count_plan(spec: SurfaceSpec, primes, crosscheck_bound: int = BRUTEFORCE_BOUND) -> list[tuple[int, int, str]]:
    """(p, m, method) triples known up front: m = 1 everywhere, m = 2 at inert primes."""
    tasks = []
    for p in primes:
        if spec.family == KUMMER:
            tasks.append((p, 1, "elliptic"))
            continue
        ms = [1]
        if factor_rational_prime(p).kind == "inert" and p * p <= TABLE_BOUND:
            ms.append(2)
        for m in ms:
            tasks.append((p, m, "charsum"))
            if p**m <= crosscheck_bound:
                tasks.append((p, m, "bruteforce"))
    return tasks


def _compute_task(args) -> CountRecord:
    spec, p, m, method = args
    return compute_count(spec, p, m, method)


def ensure_counts(spec: SurfaceSpec, cache: CountCache, tasks, workers: int = 1) -> int:
    """Compute every missing task and store it; returns the number of new records."""
    missing = [(spec, p, m, meth) for p, m, meth in tasks if cache.get(spec, p, m, meth) is None]
    if not missing:
        return 0
    if workers > 1 and len(missing) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_compute_task, missing, chunksize=4))
    else:
        records = [_compute_task(t) for t in missing]
    added = 0
    for rec in records:  # in task order, so the cache file is deterministic
        added += cache.put(rec)
    return added


def cached_count(spec: SurfaceSpec, p: int, m: int, cache: CountCache, compute: bool = True,
                 crosscheck_bound: int = BRUTEFORCE_BOUND) -> int:
    """Count over F_{p^m}, cross-checked against brute force when q is small enough."""
    method = "elliptic" if spec.family == KUMMER else "charsum"
    methods = [method]
    if spec.family == DIAGONAL and p**m <= crosscheck_bound:
        methods.append("bruteforce")
    values = {}
    for meth in methods:
        rec = cache.get(spec, p, m, meth)
        if rec is None:
            if not compute:
                raise MissingData(f"no cached {meth} count for {spec.label} at p = {p}, m = {m}")
            rec = compute_count(spec, p, m, meth)
            cache.put(rec)
        values[meth] = rec.count
    if len(set(values.values())) > 1:
        raise CountMismatch(
            f"p = {p}, m = {m}: " + ", ".join(f"{k} gives {v}" for k, v in values.items()), p=p, m=m)
    return values[method]


# ---------------------------------------------------------------------------
# extraction


def _bad(spec, p, note) -> FrobeniusData:
    return FrobeniusData(spec.label, p, factor_rational_prime(p), "bad", (), 1, None, note)


def _separable_at_cube(fd: FrobeniusData) -> bool:
    """Whether the survivors predict different counts over F_{p^3}."""
    p = fd.p
    if any(c.t_ns is None for c in fd.survivors):
        return True
    return len({p**3 * c.t_ns + (c.alpha**3).trace() for c in fd.survivors}) > 1


def frobenius_for(spec: SurfaceSpec, p: int, cache: CountCache, m_max: int = 2, compute: bool = True,
                  crosscheck_bound: int = BRUTEFORCE_BOUND) -> FrobeniusData:
    """Extraction at p, raising the power while the survivors stay ambiguous.

    m = 2 is always tried when m = 1 is ambiguous. m = 3 is tried when m_max = 3,
    or when the m <= 2 survivors would give different counts over F_{p^3}.
    """
    try:
        if spec.family == KUMMER:
            count = cached_count(spec, p, 1, cache, compute, crosscheck_bound)
            return kummer_eigenvalues(spec.coeffs[0], p, p + 1 - count)
        counts: dict[int, int] = {}
        m = 1
        while True:
            counts[m] = cached_count(spec, p, m, cache, compute, crosscheck_bound)
            fd = extract(spec, p, counts, strict=False)
            nxt = m + 1
            if fd.status != "ambiguous" or nxt > 3 or p**nxt > TABLE_BOUND:
                return fd
            if nxt == 3 and m_max < 3 and not _separable_at_cube(fd):
                return fd
            m = nxt
    except CountMismatch as e:
        return _bad(spec, p, f"counting methods disagree ({e})")
    except NoGaussianSolution as e:
        return _bad(spec, p, str(e))


def collect_frobenius(spec: SurfaceSpec, cache: CountCache, primes, m_max: int = 2, compute: bool = True,
                      crosscheck_bound: int = BRUTEFORCE_BOUND) -> dict[int, FrobeniusData]:
    return {p: frobenius_for(spec, p, cache, m_max, compute, crosscheck_bound) for p in primes}


def frobenius_to_json(spec: SurfaceSpec, frobs: dict[int, FrobeniusData]) -> dict:
    return {"spec": spec.label, "coeffs": list(spec.coeffs),
            "primes": [frobs[p].to_json() for p in sorted(frobs)]}


def frobenius_from_json(d: dict) -> dict[int, FrobeniusData]:
    return {int(e["p"]): FrobeniusData.from_json(e) for e in d["primes"]}


# ---------------------------------------------------------------------------
# fit and verify


def fit_character(spec: SurfaceSpec, frobs: dict[int, FrobeniusData], p_fit: int,
                  bound: int = DEFAULT_BOUND) -> FitResult:
    train = [frobs[p] for p in sorted(frobs) if p <= p_fit]
    return fit(observations_from_frobenius(train), bound=bound, bad_primes=spec.bad_primes())


def fragility_failures(fit_result: FitResult) -> list[str]:
    return [f"p = {p}: dropping this training prime lowers the fitted conductor"
            for p in fit_result.fragile_primes]


def verify_fit(spec: SurfaceSpec, fit_result: FitResult, frobs: dict[int, FrobeniusData],
               p_max: int, p_fit: int, n_max: int) -> VerificationReport:
    report = verify_all(spec, fit_result.character, frobs, p_max, p_fit, n_max,
                        extra_failures=fragility_failures(fit_result))
    fit_result.held_out = [{"p": r.p, "match": r.match} for r in report.rows if r.role == "held-out"]
    fit_result.ambiguity_resolutions = report.resolutions
    return report


@dataclass
class PipelineResult:
    exit_code: int
    message: str
    frobs: dict[int, FrobeniusData] = field(default_factory=dict)
    fit: FitResult | None = None
    report: VerificationReport | None = None
    failing_primes: list[int] = field(default_factory=list)


def run_pipeline(cfg: RunConfig, cache: CountCache, compute: bool = True) -> PipelineResult:
    cfg.validate(need_fit=True)
    spec = cfg.spec()
    primes = needed_primes(spec, cfg.p_max, cfg.n_max)
    if compute:
        ensure_counts(spec, cache, count_plan(spec, primes, cfg.crosscheck_bound), cfg.workers)
    frobs = collect_frobenius(spec, cache, primes, cfg.m_max, compute, cfg.crosscheck_bound)
    return fit_and_verify(cfg, frobs)


def fit_and_verify(cfg: RunConfig, frobs: dict[int, FrobeniusData]) -> PipelineResult:
    spec = cfg.spec()
    try:
        fr = fit_character(spec, frobs, cfg.p_fit, cfg.conductor_bound)
    except InsufficientData as e:
        return PipelineResult(2, str(e), frobs)
    except ConflictingObservations as e:
        bad = sorted(p for p, fd in frobs.items() if fd.status == "bad")
        return PipelineResult(1, f"fit failed: {e}", frobs, failing_primes=sorted(set(e.primes) | set(bad)))
    except NoCharacterWithinBound as e:
        bad = sorted(p for p, fd in frobs.items() if fd.status == "bad")
        return PipelineResult(1, f"fit failed: {e}", frobs, failing_primes=bad)
    report = verify_fit(spec, fr, frobs, cfg.p_max, cfg.p_fit, cfg.n_max)
    msg = "all checks pass" if report.passed else "; ".join(report.failures[:5])
    return PipelineResult(report.exit_status, msg, frobs, fr, report, report.failing_primes())


# ---------------------------------------------------------------------------
# fault injection


def corrupt_cache(cache: CountCache, rng: random.Random, max_shift: int = 1000,
                  eligible=None) -> tuple[CountCache, CountRecord]:
    """Copy of ``cache`` with one record's count shifted by d, d not divisible by p^m.

    Shifts by multiples of p^m only move the NS trace and are invisible to any
    transcendental check, so they are excluded. ``eligible`` filters the records
    that may be hit.
    """
    records = list(cache)
    target = rng.choice([r for r in records if eligible is None or eligible(r)])
    q = target.p**target.m
    while True:
        d = rng.choice((-1, 1)) * rng.randint(1, max_shift)
        if d % q:
            break
    out = CountCache(None)
    for rec in records:
        out.put(replace(rec, count=rec.count + d) if rec is target else rec)
    return out, replace(target, count=target.count + d)


def dump_json(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
