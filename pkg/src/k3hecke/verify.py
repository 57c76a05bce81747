"""Checks comparing count-derived Frobenius data with a fitted Hecke character.

Comparison happens at the primes P of Q(i): Frob_P = Frob_p^f with f the
residue degree, whose eigenvalue pair on T(1) must equal {chi(P), conj chi(P)}.
Family bad primes get local factor 1 on both sides.
"""

from __future__ import annotations

import csv
import io
import json
import re
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from math import isqrt

from .errors import MissingData
from .frobenius import NS_RANK, FrobeniusData, eigen_pair
from .gaussian import GaussianIdeal, GaussianRational, factor_rational_prime, is_prime, primes_up_to
from .hecke import (
    HeckeCharacter,
    Poly,
    dirichlet_from_factors,
    evaluate,
    pair_factor,
    poly_inflate,
    poly_mul,
)

CSV_COLUMNS = ("p", "splitting", "status", "eigenvalue_pair", "char_pair", "match", "notes")
PROXY_NOTE = (
    "unramifiedness of the Galois representation is not computed; it is replaced by a proxy "
    "(smooth reduction of the family at p plus a consistent extraction)"
)


def fmt_pair(pair) -> str:
    return "{" + ", ".join(str(v) for v in pair) + "}"


def fmt_poly(poly: Poly) -> str:
    terms = []
    for k, c in enumerate(poly):
        if c == 0:
            continue
        mono = "" if k == 0 else ("T" if k == 1 else f"T^{k}")
        coef = str(c)
        if mono and c == 1:
            coef = ""
        elif mono and c == -1:
            coef = "-"
        elif mono and c.denominator != 1:
            coef = f"({c})"
        terms.append(coef + mono)
    return " + ".join(terms).replace("+ -", "- ") or "0"


def trim(poly: Poly) -> Poly:
    poly = list(poly)
    while len(poly) > 1 and poly[-1] == 0:
        poly.pop()
    return tuple(Fraction(c) for c in poly)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    failures: tuple[str, ...] = ()
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"passed": self.passed, "failures": list(self.failures), "details": self.details}


@dataclass(frozen=True)
class Row:
    p: int
    splitting: str
    role: str  # train | held-out
    status: str  # unique | ambiguous | bad | bad-reduction | missing
    eigenvalue_pair: str
    char_pair: str
    match: str  # true | false | resolved-by-prediction | n/a
    euler_count: str = ""
    euler_char: str = ""
    notes: str = ""

    @property
    def failed(self) -> bool:
        return self.match == "false"


# ---------------------------------------------------------------------------
# count-side local data


def prime_ideals(p: int) -> list[GaussianIdeal]:
    return [GaussianIdeal(g) for g in factor_rational_prime(p).primes]


def count_local_factor(fd: FrobeniusData) -> Poly | None:
    """(1 - uT)(1 - conj(u)T) for Frob_P, T = N(P)^-s; None if the counts leave it open."""
    if fd.status == "bad":
        return None
    pairs = fd.prime_frobenius_pairs()
    if len(pairs) != 1:
        return None
    return pair_factor(pairs[0][0])


def count_rational_factor(fd: FrobeniusData) -> Poly | None:
    local = count_local_factor(fd)
    if local is None:
        return None
    st = fd.splitting
    out: Poly = (Fraction(1),)
    for _ in st.primes:
        out = poly_mul(out, poly_inflate(local, st.residue_degree))
    return out


def char_local_factor(chi: HeckeCharacter, prime: GaussianIdeal) -> Poly:
    if not chi.is_unramified_at(prime):
        return (Fraction(1),)
    return pair_factor(evaluate(chi, prime))


def char_rational_factor(chi: HeckeCharacter, p: int, bad_primes) -> Poly:
    if p in bad_primes:
        return (Fraction(1),)
    st = factor_rational_prime(p)
    out: Poly = (Fraction(1),)
    for g in st.primes:
        out = poly_mul(out, poly_inflate(char_local_factor(chi, GaussianIdeal(g)), st.residue_degree))
    return out


# ---------------------------------------------------------------------------
# the four checks


def _compare_prime(chi: HeckeCharacter, fd: FrobeniusData) -> tuple[str, str, str, list]:
    """(match verdict, character pair text, note, consistent survivors) for one good prime."""
    observed = fd.prime_frobenius_pairs()
    predicted = []
    for P in prime_ideals(fd.p):
        if not chi.is_unramified_at(P):
            return "false", "ramified", f"good prime {fd.p} divides the conductor {chi.modulus}", []
        pr = eigen_pair(evaluate(chi, P))
        if pr not in predicted:
            predicted.append(pr)
    char_text = " ; ".join(fmt_pair(pr) for pr in predicted)
    if any(pr not in observed for pr in predicted):
        return "false", char_text, "character pair not among the count-derived pairs", []
    if fd.status == "unique":
        return "true", char_text, "", list(fd.survivors)
    f = fd.splitting.residue_degree
    consistent = [c for c in fd.survivors if eigen_pair(c.u(fd.p) ** f) in predicted]
    alphas = ", ".join(str(c.alpha) for c in consistent)
    note = f"prediction consistent with survivor alpha in {{{alphas}}}"
    if len(consistent) > 1:
        note += " (indistinguishable at Frob_P)"
    return "resolved-by-prediction", char_text, note, consistent


def verify_diagonalization(spec, chi: HeckeCharacter, frobs: dict[int, FrobeniusData],
                           primes, p_fit: int) -> tuple[list[Row], list[dict]]:
    """One row per prime; returns (rows, ambiguity resolutions)."""
    bad = spec.bad_primes()
    rows: list[Row] = []
    resolutions: list[dict] = []
    for p in primes:
        st = factor_rational_prime(p)
        role = "train" if p <= p_fit else "held-out"
        if p in bad:
            rows.append(Row(p, st.kind, role, "bad-reduction", "", "", "n/a",
                            notes="bad prime of the family; excluded on both sides"))
            continue
        fd = frobs.get(p)
        if fd is None:
            raise MissingData(f"no extraction data for p = {p}")
        obs_text = " | ".join(fmt_pair(pr) for pr in fd.prime_frobenius_pairs())
        if fd.status == "bad":
            rows.append(Row(p, st.kind, role, "bad", "", "", "false", notes=fd.note))
            continue
        match, char_text, note, consistent = _compare_prime(chi, fd)
        cf = count_local_factor(fd)
        P = prime_ideals(p)[0]
        ef = char_local_factor(chi, P)
        if match == "resolved-by-prediction":
            resolutions.append({"p": p, "consistent": [str(c.alpha) for c in consistent]})
        rows.append(Row(p, st.kind, role, fd.status, obs_text, char_text, match,
                        "" if cf is None else fmt_poly(cf), fmt_poly(ef), note))
    return rows, resolutions


def verify_euler_product(spec, chi: HeckeCharacter, frobs: dict[int, FrobeniusData],
                         primes, n_max: int) -> CheckResult:
    """Per-prime factor equality plus Dirichlet coefficients up to n_max."""
    bad = spec.bad_primes()
    failures = []
    compared = 0
    for p in primes:
        if p in bad:
            continue
        fd = frobs.get(p)
        cf = None if fd is None else count_rational_factor(fd)
        if cf is None:
            failures.append(f"p = {p}: count-side Euler factor unavailable")
            continue
        compared += 1
        xf = char_rational_factor(chi, p, bad)
        if trim(cf) != trim(xf):
            failures.append(f"p = {p}: count factor {fmt_poly(cf)} != character factor {fmt_poly(xf)}")

    missing: list[int] = []
    count_factor_at = _count_factor_fn(spec, frobs, n_max, missing)
    lhs = dirichlet_from_factors(count_factor_at, n_max)
    rhs = dirichlet_from_factors(lambda q: char_rational_factor(chi, q, bad), n_max)
    diff = [n for n in range(1, n_max + 1) if lhs[n] != rhs[n]]
    for q in missing:
        failures.append(f"p = {q}: no count data for the Dirichlet series")
    if diff:
        failures.append(f"Dirichlet coefficients differ at n = {diff[:10]}"
                        + (f" (first prime: p = {min(diff)})" if _is_prime_index(min(diff)) else ""))
    details = {"primes_compared": compared, "n_max": n_max, "dirichlet_mismatches": len(diff)}
    return CheckResult("euler_product", not failures, tuple(failures), details)


def _is_prime_index(n: int) -> bool:
    return n > 1 and all(n % d for d in range(2, int(n**0.5) + 1))


def _count_factor_fn(spec, frobs: dict[int, FrobeniusData], n_max: int, missing: list[int] | None):
    """Count-side rational factor by prime; records (or raises on) primes lacking usable data."""
    bad = spec.bad_primes()

    def at(q: int) -> Poly:
        if q in bad:
            return (Fraction(1),)
        fd = frobs.get(q)
        cf = None if fd is None else count_rational_factor(fd)
        if cf is not None:
            return cf
        if factor_rational_prime(q).kind == "inert" and q * q > n_max:
            return (Fraction(1),)  # first contribution is at q^2 > n_max
        if missing is None:
            raise MissingData(f"no usable count data at p = {q}")
        missing.append(q)
        return (Fraction(1),)

    return at


def dirichlet_tables(spec, chi: HeckeCharacter, frobs: dict[int, FrobeniusData], n_max: int):
    """(count-side, character-side) coefficient lists, index n = 0..n_max."""
    bad = spec.bad_primes()
    return (dirichlet_from_factors(_count_factor_fn(spec, frobs, n_max, None), n_max),
            dirichlet_from_factors(lambda q: char_rational_factor(chi, q, bad), n_max))


def verify_unramified_equivalence(spec, chi: HeckeCharacter, frobs: dict[int, FrobeniusData],
                                  primes) -> CheckResult:
    """Good primes with consistent extraction never divide the conductor; bad primes are accounted for."""
    bad = spec.bad_primes()
    conductor_primes = sorted({_rational_prime_under(P) for P, _ in chi.modulus.factor()})
    allowed = bad
    failures = []
    for q in conductor_primes:
        if q not in allowed:
            failures.append(f"p = {q}: conductor supported outside the family's bad primes")
    proxy_good = [p for p in primes if p not in bad and p in frobs and frobs[p].status != "bad"]
    for p in proxy_good:
        if p in conductor_primes:
            failures.append(f"p = {p}: good prime divides the conductor")
    unverifiable = sorted(q for q in bad if q not in conductor_primes)
    details = {
        "method": "proxy",
        "proxy_note": PROXY_NOTE,
        "conductor_primes": conductor_primes,
        "bad_primes": sorted(bad),
        "bad_primes_in_conductor": sorted(q for q in bad if q in conductor_primes),
        "unverifiable_bad_primes": unverifiable,
    }
    return CheckResult("unramified_equivalence", not failures, tuple(failures), details)


def _rational_prime_under(P: GaussianIdeal) -> int:
    n = P.norm()
    return n if is_prime(n) else isqrt(n)


def verify_invariants(frobs: dict[int, FrobeniusData], chi: HeckeCharacter | None = None) -> CheckResult:
    """Norm one, rationality of p^2 times the characteristic polynomial, conjugation closure, Weil bound."""
    failures = []
    checked = 0
    for p in sorted(frobs):
        fd = frobs[p]
        for c in fd.survivors:
            checked += 1
            u = c.u(p)
            failures += _value_failures(p, u, p * p, "u")
            if c.t_ns is not None and abs(c.t_ns) > NS_RANK:
                failures.append(f"p = {p}: NS trace {c.t_ns} exceeds the rank")
            if abs(c.alpha.trace()) > 2 * p * p:
                failures.append(f"p = {p}: Weil bound violated by alpha = {c.alpha}")
        if chi is None or fd.status == "bad":
            continue
        for P in prime_ideals(p):
            if chi.is_unramified_at(P):
                checked += 1
                failures += _value_failures(p, evaluate(chi, P), P.norm(), "predicted value")
    return CheckResult("invariants", not failures, tuple(failures), {"values_checked": checked})


def _value_failures(p: int, u: GaussianRational, scale: int, what: str) -> list[str]:
    out = []
    if u * u.conj() != 1:
        out.append(f"p = {p}: {what} {u} does not have norm one")
    if any((scale * x).denominator != 1 for x in pair_factor(u)):
        out.append(f"p = {p}: {scale} * charpoly of {what} {u} is not integral")
    pair = eigen_pair(u)
    if eigen_pair(pair[0].conj()) != pair:
        out.append(f"p = {p}: pair of {what} {u} is not closed under conjugation")
    return out


# ---------------------------------------------------------------------------
# report


@dataclass
class VerificationReport:
    spec: str
    prime_range: tuple[int, int]
    p_fit: int
    conductor: str
    character: dict
    rows: list[Row]
    checks: dict[str, CheckResult]
    resolutions: list[dict] = field(default_factory=list)
    extra_failures: list[str] = field(default_factory=list)

    @property
    def summary(self) -> dict:
        out = {"rows": len(self.rows), "match": 0, "resolved-by-prediction": 0, "mismatch": 0,
               "bad": 0, "bad-reduction": 0}
        held = {"match": 0, "resolved-by-prediction": 0, "mismatch": 0, "bad": 0}
        for r in self.rows:
            key = {"true": "match", "false": "mismatch"}.get(r.match, r.match)
            if r.status == "bad":
                key = "bad"
            elif r.status == "bad-reduction":
                key = "bad-reduction"
            out[key] += 1
            if r.role == "held-out" and key in held:
                held[key] += 1
        out["held_out"] = held
        return out

    @property
    def failures(self) -> list[str]:
        out = []
        for r in self.rows:
            if r.failed:
                out.append(f"p = {r.p}: " + (r.notes or "eigenvalue pair mismatch"))
        for name in sorted(self.checks):
            out.extend(f"{name}: {f}" for f in self.checks[name].failures)
        out.extend(self.extra_failures)
        return out

    @property
    def passed(self) -> bool:
        return not self.failures

    @property
    def exit_status(self) -> int:
        return 0 if self.passed else 1

    def failing_primes(self) -> list[int]:
        found = set()
        for f in self.failures:
            found.update(int(x) for x in re.findall(r"p = (\d+)", f))
        return sorted(found)

    def to_json(self) -> dict:
        return {
            "spec": self.spec,
            "prime_range": list(self.prime_range),
            "p_fit": self.p_fit,
            "conductor": self.conductor,
            "character": self.character,
            "rows": [asdict(r) for r in self.rows],
            "summary": self.summary,
            "checks": {k: self.checks[k].to_json() for k in sorted(self.checks)},
            "ambiguity_resolutions": self.resolutions,
            "failures": self.failures,
            "failing_primes": self.failing_primes(),
            "passed": self.passed,
            "exit_status": self.exit_status,
        }

    @classmethod
    def from_json(cls, d: dict) -> VerificationReport:
        rows = [Row(**r) for r in d["rows"]]
        checks = {k: CheckResult(k, v["passed"], tuple(v["failures"]), v.get("details", {}))
                  for k, v in d["checks"].items()}
        known = {f"p = {r.p}: " + (r.notes or "eigenvalue pair mismatch") for r in rows if r.failed}
        known.update(f"{k}: {f}" for k, c in checks.items() for f in c.failures)
        extra = [f for f in d.get("failures", []) if f not in known]
        return cls(d["spec"], tuple(d["prime_range"]), d["p_fit"], d["conductor"], d["character"],
                   rows, checks, list(d.get("ambiguity_resolutions", [])), extra)

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.rows:
            w.writerow([r.p, r.splitting, r.status, r.eigenvalue_pair, r.char_pair, r.match, r.notes])
        return buf.getvalue()

    def to_markdown(self) -> str:
        s = self.summary
        lines = [
            f"# Verification report: {self.spec}",
            "",
            f"- primes: {self.prime_range[0]}..{self.prime_range[1]} (fit on p <= {self.p_fit})",
            f"- conductor: ({self.conductor})",
            f"- verdict: {'PASS' if self.passed else 'FAIL'} (exit {self.exit_status})",
            f"- rows: {s['rows']}; match {s['match']}, resolved-by-prediction {s['resolved-by-prediction']}, "
            f"mismatch {s['mismatch']}, bad {s['bad']}, bad reduction {s['bad-reduction']}",
            "",
            "## Checks",
            "",
        ]
        for name in sorted(self.checks):
            c = self.checks[name]
            lines.append(f"- {name}: {'pass' if c.passed else 'FAIL'}")
        unram = self.checks.get("unramified_equivalence")
        if unram is not None:
            lines += ["", f"Inertia proxy: {unram.details.get('proxy_note', PROXY_NOTE)}."]
        if self.failures:
            lines += ["", "## Failures", ""] + [f"- {f}" for f in self.failures]
        lines += ["", "## Primes", "", "| " + " | ".join(CSV_COLUMNS) + " |",
                  "|" + "---|" * len(CSV_COLUMNS)]
        for r in self.rows:
            cells = [str(r.p), r.splitting, r.status, r.eigenvalue_pair, r.char_pair, r.match, r.notes]
            lines.append("| " + " | ".join(c.replace("|", "\\|") for c in cells) + " |")
        return "\n".join(lines) + "\n"

    def render(self, fmt: str) -> str:
        if fmt == "json":
            return self.dumps()
        if fmt == "md":
            return self.to_markdown()
        if fmt == "csv":
            return self.to_csv()
        raise ValueError(f"unknown format {fmt!r}")


def verify_all(spec, chi: HeckeCharacter, frobs: dict[int, FrobeniusData], p_max: int,
               p_fit: int, n_max: int, extra_failures=()) -> VerificationReport:
    primes = primes_up_to(p_max)
    rows, resolutions = verify_diagonalization(spec, chi, frobs, primes, p_fit)
    checks = {
        "diagonalization": CheckResult(
            "diagonalization", not any(r.failed for r in rows), (),
            {"held_out_primes": sum(1 for r in rows if r.role == "held-out" and r.match != "n/a")}),
        "euler_product": verify_euler_product(spec, chi, frobs, primes, n_max),
        "unramified_equivalence": verify_unramified_equivalence(spec, chi, frobs, primes),
        "invariants": verify_invariants({p: fd for p, fd in frobs.items() if p <= max(p_max, n_max)}, chi),
    }
    return VerificationReport(spec.label, (2, p_max), p_fit, str(chi.modulus.generator), chi.to_json(),
                              rows, checks, resolutions, list(extra_failures))
