"""Command-line interface: ``k3hecke {count,extract,fit,verify,lseries,report,run}``.

Exit codes: 0 all checks pass, 1 verification failure, 2 unresolved ambiguity
(too few unambiguous primes to fit), 3 input error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

from .counts import CountCache
from .errors import (
    CacheConflict,
    ConfigError,
    ConflictingObservations,
    CountMismatch,
    InsufficientData,
    MissingData,
    NoCharacterWithinBound,
)
from .frobenius import FrobeniusData
from .hecke import FitResult
from .pipeline import (
    RunConfig,
    cached_count,
    collect_frobenius,
    count_plan,
    dump_json,
    ensure_counts,
    fit_character,
    fragility_failures,
    frobenius_from_json,
    frobenius_to_json,
    needed_primes,
    verify_fit,
)
from .verify import VerificationReport, dirichlet_tables

log = logging.getLogger("k3hecke")

EXIT_OK, EXIT_FAIL, EXIT_AMBIGUOUS, EXIT_INPUT = 0, 1, 2, 3

# config-file key -> RunConfig field
CONFIG_KEYS = {
    "family": "family", "coeffs": "coeffs", "pmax": "p_max", "pfit": "p_fit", "powers": "m_max",
    "conductor-bound": "conductor_bound", "conductor_bound": "conductor_bound", "cache": "cache",
    "output": "output", "workers": "workers", "seed": "seed", "artifacts": "artifacts", "nmax": "n_max",
}
INT_FIELDS = {"p_max", "p_fit", "m_max", "conductor_bound", "workers", "seed", "n_max"}


class InputError(Exception):
    pass


def parse_coeffs(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(c) for c in text.replace(" ", "").split(",") if c)
    except ValueError:
        raise ConfigError(f"cannot parse coefficients {text!r}") from None


def read_config_file(path: str) -> dict:
    """key=value lines; '#' starts a comment."""
    out = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as e:
        raise ConfigError(f"cannot read config file: {e}") from None
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected key=value")
        key, value = (x.strip() for x in line.split("=", 1))
        if key not in CONFIG_KEYS:
            raise ConfigError(f"{path}:{n}: unknown key {key!r}")
        out[CONFIG_KEYS[key]] = value
    return out


def _coerce(name: str, value):
    if value is None:
        return None
    if name == "coeffs":
        return parse_coeffs(value) if isinstance(value, str) else tuple(value)
    if name in INT_FIELDS:
        try:
            return int(value)
        except ValueError:
            raise ConfigError(f"{name} must be an integer, got {value!r}") from None
    return value


def build_config(args) -> RunConfig:
    """Defaults, then the config file, then flags."""
    values = {}
    if args.config:
        values.update({k: _coerce(k, v) for k, v in read_config_file(args.config).items()})
    for key in CONFIG_KEYS.values():
        v = getattr(args, key, None)
        if v is not None:
            values[key] = _coerce(key, v)
    family = values.get("family", "fermat")
    if "coeffs" not in values:
        values["coeffs"] = {"fermat": (1, 1, 1, 1), "kummer": (1,)}.get(family, ())
    return RunConfig(**values)


# ---------------------------------------------------------------------------
# shared helpers


def _artifacts(cfg: RunConfig) -> Path:
    return Path(cfg.artifacts)


def _open_cache(cfg: RunConfig) -> CountCache:
    return CountCache(cfg.cache_path)


def _load_json(path: Path, what: str) -> dict:
    if not path.exists():
        raise InputError(f"{what} not found at {path}; run the upstream command first")
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise InputError(f"cannot parse {what} at {path}: {e}") from None


def _frobenius(cfg: RunConfig, cache: CountCache | None = None) -> dict[int, FrobeniusData]:
    """Extraction artifact if it covers the run, else recomputed from the count cache."""
    spec = cfg.spec()
    primes = needed_primes(spec, cfg.p_max, cfg.n_max)
    path = _artifacts(cfg) / "frobenius.json"
    if path.exists():
        d = _load_json(path, "extraction artifact")
        if d.get("spec") == spec.label and list(d.get("coeffs", [])) == list(spec.coeffs):
            try:
                frobs = frobenius_from_json(d)
            except (KeyError, ValueError, TypeError) as e:
                raise InputError(f"malformed extraction artifact {path}: {e}") from None
            if all(p in frobs for p in primes):
                return {p: frobs[p] for p in primes}
    cache = cache or _open_cache(cfg)
    return collect_frobenius(spec, cache, primes, cfg.m_max, True, cfg.crosscheck_bound)


def _load_fit(cfg: RunConfig) -> FitResult:
    d = _load_json(_artifacts(cfg) / "fit.json", "fit artifact")
    if d.get("spec") not in (None, cfg.spec().label):
        raise InputError(f"fit artifact belongs to {d.get('spec')}, not {cfg.spec().label}")
    try:
        return FitResult.from_json(d)
    except (KeyError, ValueError, TypeError) as e:
        raise InputError(f"malformed fit artifact: {e}") from None


def _table(rows, header, fmt: str) -> str:
    if fmt == "json":
        return json.dumps([dict(zip(header, r)) for r in rows], indent=2) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
        return buf.getvalue()
    lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
    lines += ["| " + " | ".join(str(c) for c in r) + " |" for r in rows]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# commands


def cmd_count(cfg: RunConfig) -> int:
    cfg.validate()
    spec = cfg.spec()
    cache = _open_cache(cfg)
    primes = needed_primes(spec, cfg.p_max)
    added = ensure_counts(spec, cache, count_plan(spec, primes, cfg.crosscheck_bound), cfg.workers)
    log.info("%d new count records in %s", added, cfg.cache_path)
    rows, status = [], EXIT_OK
    for rec in cache:
        if rec.spec != spec.label or rec.coeffs != spec.coeffs or rec.p > cfg.p_max:
            continue
        if rec.method == "bruteforce":
            continue
        try:
            cached_count(spec, rec.p, rec.m, cache, False, cfg.crosscheck_bound)
        except CountMismatch as e:
            print(f"error: {e}", file=sys.stderr)
            status = EXIT_FAIL
        rows.append((rec.p, rec.m, rec.count, rec.method))
    rows.sort()
    sys.stdout.write(_table(rows, ("p", "m", "count", "method"), cfg.output))
    return status


def cmd_extract(cfg: RunConfig) -> int:
    cfg.validate()
    spec = cfg.spec()
    cache = _open_cache(cfg)
    primes = needed_primes(spec, cfg.p_max, cfg.n_max)
    frobs = collect_frobenius(spec, cache, primes, cfg.m_max, True, cfg.crosscheck_bound)
    dump_json(_artifacts(cfg) / "frobenius.json", frobenius_to_json(spec, frobs))
    rows = [(p, fd.splitting.kind, fd.status, " | ".join("{%s, %s}" % tuple(map(str, pr)) for pr in fd.pairs()),
             fd.m_max, fd.note) for p, fd in sorted(frobs.items()) if p <= cfg.p_max]
    sys.stdout.write(_table(rows, ("p", "splitting", "status", "eigenvalue_pair", "m_max", "notes"), cfg.output))
    bad = [p for p, fd in frobs.items() if fd.status == "bad"]
    if bad:
        print(f"error: extraction failed at p = {bad}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_fit(cfg: RunConfig, quiet: bool = False) -> int:
    cfg.validate(need_fit=True)
    spec = cfg.spec()
    frobs = _frobenius(cfg)
    path = _artifacts(cfg) / "fit.json"
    try:
        fr = fit_character(spec, frobs, cfg.p_fit, cfg.conductor_bound)
    except InsufficientData as e:
        path.unlink(missing_ok=True)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_AMBIGUOUS
    except (ConflictingObservations, NoCharacterWithinBound) as e:
        path.unlink(missing_ok=True)
        primes = getattr(e, "primes", ())
        print(f"error: fit failed: {e}" + (f" (primes {list(primes)})" if primes else ""), file=sys.stderr)
        return EXIT_FAIL
    d = fr.to_json()
    d["spec"] = spec.label
    dump_json(path, d)
    if not quiet:
        print(json.dumps(d, indent=2, sort_keys=True))
    fragile = fragility_failures(fr)
    for f in fragile:
        print(f"error: {f}", file=sys.stderr)
    return EXIT_FAIL if fragile else EXIT_OK


def _write_report(cfg: RunConfig, report: VerificationReport) -> None:
    base = _artifacts(cfg)
    (base / "report.json").parent.mkdir(parents=True, exist_ok=True)
    (base / "report.json").write_text(report.dumps())
    if cfg.output != "json":
        (base / f"report.{cfg.output}").write_text(report.render(cfg.output))


def cmd_verify(cfg: RunConfig) -> int:
    cfg.validate(need_fit=True)
    spec = cfg.spec()
    fr = _load_fit(cfg)
    frobs = _frobenius(cfg)
    report = verify_fit(spec, fr, frobs, cfg.p_max, cfg.p_fit, cfg.n_max)
    d = fr.to_json()  # now carrying held-out records and ambiguity resolutions
    d["spec"] = spec.label
    dump_json(_artifacts(cfg) / "fit.json", d)
    _write_report(cfg, report)
    sys.stdout.write(report.render(cfg.output))
    for f in report.failures:
        print(f"error: {f}", file=sys.stderr)
    return report.exit_status


def cmd_lseries(cfg: RunConfig) -> int:
    cfg.validate()
    spec = cfg.spec()
    fr = _load_fit(cfg)
    frobs = _frobenius(cfg)
    lhs, rhs = dirichlet_tables(spec, fr.character, frobs, cfg.n_max)
    rows = [(n, str(lhs[n]), str(rhs[n]), str(lhs[n] - rhs[n])) for n in range(1, cfg.n_max + 1)]
    sys.stdout.write(_table(rows, ("n", "c_counts", "c_character", "diff"), cfg.output))
    nonzero = [n for n, _, _, d in rows if d != "0"]
    if nonzero:
        print(f"error: coefficients differ at n = {nonzero[:10]}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_report(cfg: RunConfig) -> int:
    d = _load_json(_artifacts(cfg) / "report.json", "verification report")
    try:
        report = VerificationReport.from_json(d)
    except (KeyError, TypeError, ValueError) as e:
        raise InputError(f"malformed report: {e}") from None
    sys.stdout.write(report.render(cfg.output))
    return report.exit_status


def cmd_run(cfg: RunConfig) -> int:
    cfg.validate(need_fit=True)
    spec = cfg.spec()
    cache = _open_cache(cfg)
    primes = needed_primes(spec, cfg.p_max, cfg.n_max)
    ensure_counts(spec, cache, count_plan(spec, primes, cfg.crosscheck_bound), cfg.workers)
    frobs = collect_frobenius(spec, cache, primes, cfg.m_max, True, cfg.crosscheck_bound)
    dump_json(_artifacts(cfg) / "frobenius.json", frobenius_to_json(spec, frobs))
    status = cmd_fit(cfg, quiet=True)
    if not (_artifacts(cfg) / "fit.json").exists():
        return status
    return max(status, cmd_verify(cfg))


COMMANDS = {
    "count": (cmd_count, "fill the count cache and print counts"),
    "extract": (cmd_extract, "extract Frobenius eigenvalue pairs from cached counts"),
    "fit": (cmd_fit, "fit a minimal-conductor Hecke character on p <= pfit"),
    "verify": (cmd_verify, "compare the fitted character with the extracted data"),
    "lseries": (cmd_lseries, "Dirichlet coefficients from counts and from the character"),
    "report": (cmd_report, "re-render the last verification report"),
    "run": (cmd_run, "count, extract, fit and verify in one go"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value file; flags override it")
    common.add_argument("--family", choices=("fermat", "diagonal", "kummer"))
    common.add_argument("--coeffs", help="comma-separated: four for diagonal, n for kummer")
    common.add_argument("--pmax", dest="p_max", help="largest prime (default 400)")
    common.add_argument("--pfit", dest="p_fit", help="largest training prime (default 200)")
    common.add_argument("--powers", dest="m_max", help="power bound m_max, 2 or 3 (default 2)")
    common.add_argument("--conductor-bound", dest="conductor_bound", help="norm bound B (default 1024)")
    common.add_argument("--nmax", dest="n_max", help="Dirichlet coefficients up to this n (default 1000)")
    common.add_argument("--cache", help="count cache (default ARTIFACTS/counts.jsonl)")
    common.add_argument("--artifacts", help="artifact directory (default ./artifacts)")
    common.add_argument("--output", choices=("json", "md", "csv"))
    common.add_argument("--workers", help="processes for counting (default 1)")
    common.add_argument("--seed", help="seed for randomized checks (default 0)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="k3hecke", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=help_text)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_INPUT if e.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = build_config(args)
        return COMMANDS[args.command][0](cfg)
    except (ConfigError, InputError, CacheConflict) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except MissingData as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
