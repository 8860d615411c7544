"""Command line interface: each pipeline stage plus the full run.

Exit codes: 0 success, 1 usage error, 2 undecided candidates, 3 data error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path

from singmod import bounds, casegen, catalog, eliminate, kernels
from singmod.classpoly import hilbert_class_polynomial
from singmod.quadforms import InvalidDiscriminant, class_number, fundamental_decomposition, reduced_forms

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_UNDECIDED = 2
EXIT_DATA = 3

log = logging.getLogger("singmod")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    cache_dir: str | None = None
    data_dir: str | None = None
    schedule: tuple[int, ...] = eliminate.SCHEDULE
    jobs: int = 1
    max_h3: int | None = None
    output_format: str = "json"
    subfield_filter: bool = False

    def __post_init__(self):
        self.schedule = eliminate.check_schedule(self.schedule)
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")
        if self.max_h3 is not None and self.max_h3 < 2:
            raise ValueError("max_h3 must be >= 2")
        if self.output_format not in ("json", "tsv"):
            raise ValueError("output format must be json or tsv")


@dataclass
class ProofReport:
    content: dict
    telemetry: dict = field(default_factory=dict)

    @property
    def success(self) -> bool:
        return bool(self.content["success"])

    def to_json(self) -> str:
        return json.dumps({"schema_version": SCHEMA_VERSION, "content": self.content,
                           "telemetry": self.telemetry}, indent=2, sort_keys=True) + "\n"


def _thresholds_rows() -> list[dict]:
    return [{"case": s.label, "m": list(s.m), "k": s.k, "h_range": list(s.h_range),
             "cutoff": c, "published": s.published_cutoff}
            for s, c in bounds.thresholds()]


def _candidate_summary(cands, cfg: RunConfig) -> dict:
    counts = casegen.case_counts(cands)
    return {
        "total": len(cands),
        "published_total": casegen.PUBLISHED_TOTAL if cfg.max_h3 is None else None,
        "difference_from_published": (len(cands) - casegen.PUBLISHED_TOTAL
                                      if cfg.max_h3 is None else None),
        "per_case": {lab: {"count": n, "overapproximated": lab in casegen.OVERAPPROXIMATED}
                     for lab, n in counts.items()},
        "max_h3": cfg.max_h3,
        "subfield_filter": cfg.subfield_filter,
    }


def _apply_env(cfg: RunConfig) -> None:
    # workers inherit the environment, which is how the class polynomial cache is shared
    if cfg.cache_dir:
        os.environ["MODULI_CACHE_DIR"] = str(cfg.cache_dir)
    if cfg.data_dir:
        os.environ["MODULI_DATA_DIR"] = str(cfg.data_dir)


def run_full_proof(config: RunConfig, progress=None) -> ProofReport:
    """thresholds, candidates, elimination and catalog in sequence."""
    _apply_env(config)
    t0 = time.perf_counter()
    tables = casegen.load_tables(config.data_dir)  # fails fast on corrupt data
    thresholds = _thresholds_rows()
    t1 = time.perf_counter()
    cands = casegen.generate_candidates(
        casegen.CaseGenConfig(data_dir=config.data_dir, max_h3=config.max_h3,
                              subfield_filter=config.subfield_filter), tables)
    t2 = time.perf_counter()
    case_time: dict[str, float] = defaultdict(float)
    verdicts = []
    for label in casegen.CASE_LABELS:
        batch = [c for c in cands if c.case_label == label]
        if not batch:
            continue
        s = time.perf_counter()
        verdicts.extend(eliminate.eliminate_all(batch, config.schedule, config.jobs,
                                                progress=progress))
        case_time[label] = round(time.perf_counter() - s, 3)
    t3 = time.perf_counter()
    cat = catalog.product_catalog()
    stats = catalog.catalog_statistics(cat)
    t4 = time.perf_counter()

    status = Counter(v.status for v in verdicts)
    per_case = {lab: dict(Counter(v.status for v in verdicts if v.candidate.case_label == lab))
                for lab in casegen.CASE_LABELS}
    bad = [v.to_dict() for v in verdicts if v.status != eliminate.ELIMINATED]
    content = {
        "success": not bad,
        "thresholds": thresholds,
        "case_2biiC_empty": casegen.verify_case_emptiness_2biiC(),
        "tables": {"table-2.1": tables.two_elementary.checksum,
                   "table-4.1": tables.equal_fields.checksum},
        "candidates": _candidate_summary(cands, config),
        "verdicts": {"by_status": dict(sorted(status.items())), "by_case": per_case,
                     "exact_checks": sum(v.exact_checks for v in verdicts),
                     "max_precision_bits": max((v.max_precision_bits for v in verdicts), default=0),
                     "not_eliminated": bad},
        "catalog": {"sha256": catalog.catalog_digest(cat), **stats},
    }
    telemetry = {
        "backend": kernels.BACKEND,
        "jobs": config.jobs,
        "seconds": {"total": round(t4 - t0, 3), "thresholds": round(t1 - t0, 3),
                    "casegen": round(t2 - t1, 3), "eliminate": round(t3 - t2, 3),
                    "catalog": round(t4 - t3, 3)},
        "eliminate_seconds_by_case": dict(case_time),
    }
    return ProofReport(content, telemetry)


# -- subcommand handlers ---------------------------------------------------------

def _write(path: str | None, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def cmd_forms(args) -> int:
    for f in reduced_forms(args.d):
        print(f"{f.a}\t{f.b}\t{f.c}")
    return EXIT_OK


def cmd_classnum(args) -> int:
    D, f = fundamental_decomposition(args.d)
    if args.format == "json":
        print(json.dumps({"schema_version": SCHEMA_VERSION, "delta": args.d,
                          "class_number": class_number(args.d), "fundamental": D, "conductor": f}))
    else:
        print(f"{args.d}\t{class_number(args.d)}\t{D}\t{f}")
    return EXIT_OK


def cmd_hcp(args) -> int:
    H = hilbert_class_polynomial(args.d)
    if args.format == "json":
        print(json.dumps({"schema_version": SCHEMA_VERSION, "delta": args.d,
                          "coefficients_descending": [str(c) for c in H.descending]}))
    elif args.pretty:
        print(H)
    else:
        for c in H.descending:
            print(c)
    return EXIT_OK


def cmd_thresholds(args) -> int:
    rows = _thresholds_rows()
    if args.format == "json":
        _write(None, _dump({"schema_version": SCHEMA_VERSION, "thresholds": rows}))
        return EXIT_OK
    print("case\tm1,m2,m3\tk\tcutoff\tpublished")
    for r in rows:
        print(f"{r['case']}\t{','.join(map(str, r['m']))}\t{r['k']}\t{r['cutoff']}\t{r['published']}")
    return EXIT_OK


def cmd_casegen(args) -> int:
    cfg = _config(args)
    cands = casegen.generate_candidates(casegen.CaseGenConfig(
        data_dir=cfg.data_dir, max_h3=cfg.max_h3, subfield_filter=cfg.subfield_filter))
    doc = {"schema_version": SCHEMA_VERSION, "kind": "candidates",
           "summary": _candidate_summary(cands, cfg),
           "candidates": [c.to_dict() for c in cands]}
    _write(args.out, _dump(doc))
    return EXIT_OK


def _load_candidates(path: str) -> list[casegen.CandidateTriple]:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        if doc.get("schema_version") != SCHEMA_VERSION:
            raise casegen.TableError(f"{path}: unsupported schema_version")
        return [casegen.CandidateTriple.from_dict(d) for d in doc["candidates"]]
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise casegen.TableError(f"cannot read candidates from {path}: {exc}") from exc


def cmd_eliminate(args) -> int:
    cfg = _config(args)
    cands = _load_candidates(args.candidates)
    if cfg.max_h3 is not None:
        cands = [c for c in cands if c.h3 <= cfg.max_h3]
    t = time.perf_counter()
    verdicts = eliminate.eliminate_all(cands, cfg.schedule, cfg.jobs)
    status = Counter(v.status for v in verdicts)
    doc = {"schema_version": SCHEMA_VERSION, "kind": "verdicts",
           "summary": {"total": len(verdicts), "by_status": dict(sorted(status.items())),
                       "exact_checks": sum(v.exact_checks for v in verdicts)},
           "verdicts": [v.to_dict() for v in verdicts],
           "telemetry": {"seconds": round(time.perf_counter() - t, 3), "jobs": cfg.jobs}}
    _write(args.out, _dump(doc))
    return EXIT_OK if status.get(eliminate.ELIMINATED, 0) == len(verdicts) else EXIT_UNDECIDED


def cmd_catalog(args) -> int:
    cat = catalog.product_catalog()
    if args.format == "json":
        doc = {"schema_version": SCHEMA_VERSION, "kind": "catalog",
               "statistics": catalog.catalog_statistics(cat),
               "sha256": catalog.catalog_digest(cat),
               "products": [{"product": str(n), "producers": [p.describe() for p in ps],
                             "families": [p.family_index for p in ps]} for n, ps in cat]}
        _write(args.out, _dump(doc))
    else:
        _write(args.out, catalog.catalog_tsv(cat))
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = _config(args)
    done = [0]

    def progress(v):
        done[0] += 1
        if done[0] % 500 == 0:
            log.info("%d candidates processed", done[0])

    report = run_full_proof(cfg, progress=progress)
    _write(args.out, report.to_json())
    if not report.success:
        for bad in report.content["verdicts"]["not_eliminated"]:
            print(f"not eliminated: {bad}", file=sys.stderr)
        return EXIT_UNDECIDED
    return EXIT_OK


def _config(args) -> RunConfig:
    try:
        return RunConfig(cache_dir=getattr(args, "cache_dir", None),
                         data_dir=getattr(args, "data_dir", None),
                         schedule=tuple(getattr(args, "schedule", None) or eliminate.SCHEDULE),
                         jobs=1 if getattr(args, "jobs", None) is None else args.jobs,
                         max_h3=getattr(args, "max_h3", None),
                         output_format=getattr(args, "format", "json") or "json",
                         subfield_filter=getattr(args, "subfield_filter", False))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="singmod", description="Triples of singular moduli with rational product.")
    p.add_argument("-v", "--verbose", action="store_true")
    p.add_argument("--cache-dir", default=os.environ.get("MODULI_CACHE_DIR"))
    p.add_argument("--data-dir", default=os.environ.get("MODULI_DATA_DIR"))
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def disc_cmd(name, func, help_):
        s = sub.add_parser(name, help=help_)
        s.add_argument("-d", "--disc", dest="d", type=int, required=True)
        s.add_argument("--format", choices=("json", "tsv"), default="tsv")
        s.set_defaults(func=func)
        return s

    disc_cmd("forms", cmd_forms, "reduced forms of a discriminant")
    disc_cmd("classnum", cmd_classnum, "class number and fundamental decomposition")
    hcp = disc_cmd("hcp", cmd_hcp, "Hilbert class polynomial, coefficients by descending degree")
    hcp.add_argument("--pretty", action="store_true")

    s = sub.add_parser("thresholds", help="discriminant cutoffs for every case row")
    s.add_argument("--format", choices=("json", "tsv"), default="tsv")
    s.set_defaults(func=cmd_thresholds)

    def h3_flags(s):
        s.add_argument("--max-h3", type=int, default=None)

    s = sub.add_parser("casegen", help="write the candidate discriminant triples")
    s.add_argument("--out", default="-")
    s.add_argument("--subfield-filter", action="store_true",
                   help="drop 2b candidates whose d3 field provably is not inside the d1 ring class field")
    h3_flags(s)
    s.set_defaults(func=cmd_casegen)

    def elim_flags(s):
        s.add_argument("--jobs", type=int, default=1)
        s.add_argument("--schedule", type=int, nargs="+", default=None)
        h3_flags(s)

    s = sub.add_parser("eliminate", help="eliminate candidates from a casegen file")
    s.add_argument("--candidates", required=True)
    s.add_argument("--out", default="-")
    elim_flags(s)
    s.set_defaults(func=cmd_eliminate)

    s = sub.add_parser("catalog", help="products of trivial triples")
    s.add_argument("--out", default="-")
    s.add_argument("--format", choices=("json", "tsv"), default="tsv")
    s.set_defaults(func=cmd_catalog)

    s = sub.add_parser("run", help="full pipeline with a JSON report")
    s.add_argument("--out", default="-")
    s.add_argument("--subfield-filter", action="store_true")
    elim_flags(s)
    s.set_defaults(func=cmd_run)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    if args.cache_dir:
        os.environ["MODULI_CACHE_DIR"] = args.cache_dir
    if args.data_dir:
        os.environ["MODULI_DATA_DIR"] = args.data_dir
    try:
        return args.func(args)
    except (UsageError, InvalidDiscriminant) as exc:
        print(f"singmod: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except casegen.TableError as exc:
        print(f"singmod: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
