"""Candidate discriminant triples for the non-trivial cases.

Every triple of singular moduli with rational product that is not one of the
trivial families has discriminants ``(d1, d2, d3)`` falling in one of the
leaf cases below.  This module lists all such triples explicitly.

Case labels:

``1a``      h1 = h2 = h3, all discriminants equal, h >= 4
``1bi``     equal class numbers, equal fields, distinct imaginary quadratic fields
``1biiA``   (4d, d, d) with d = 1 mod 8
``1biiB``   (4d, 4d, d) with d = 1 mod 8
``2bi-*``   d1 = d2 = lam * d3 with lam in {9/4, 4, 9, 16}, h1 = 2 h3
``2bii-A``  d1 = d2 two-elementary, h1 = 2 h3, different fundamental parts
``2bii-B``  d3 two-elementary, h1 = 2 h3, different fundamental parts
``2bii-C``  h1 >= 128 with |d1|, |d3| <= 488; shown empty by a scan

Cases 1bi, 2bii-A and 2bii-B depend on field-theoretic conditions that are
only approximated from above here, which keeps the list a superset.
"""

from __future__ import annotations

import hashlib
import itertools
import logging
import os
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from pathlib import Path

from singmod import bounds
from singmod.classpoly import hilbert_class_polynomial
from singmod.fields import fields_differ, not_in_ring_class_field, small_primes
from singmod.quadforms import (
    class_number,
    form_table,
    fundamental_decomposition,
    is_two_elementary,
)

log = logging.getLogger(__name__)

CASE_LABELS = (
    "1a", "1bi", "1biiA", "1biiB",
    "2bi-9/4", "2bi-4", "2bi-9", "2bi-16",
    "2bii-A", "2bii-B", "2bii-C",
)
OVERAPPROXIMATED = frozenset({"1bi", "2bii-A", "2bii-B"})
PUBLISHED_TOTAL = 2888

SCAN_CAP = 200_000
MAXIMA_SCAN_CAP = 1_000_000
MAXIMA_MAX_H = 40
FIELD_PRIMES_LIMIT = 2000

LAMBDAS = {"2bi-9/4": Fraction(9, 4), "2bi-4": Fraction(4), "2bi-9": Fraction(9), "2bi-16": Fraction(16)}

TABLE_FILES = {
    "table-2.1": "table-2_1.tsv",
    "table-4.1": "table-4_1.tsv",
    "h-maxima": "h-maxima.tsv",
}
EXPECTED_SHA256 = {
    "table-2.1": "37967e358020e5ae50998d64e5011f0dff6adecff57c3b4d89269c417415f31e",
    "table-4.1": "72cf5586ab6484794c826a897aeb854b4712d30193709b1bb0be1bb50b54f837",
    "h-maxima": "acfd32883ed9aa7f6b70b275662395dc93a7e166fd6aac0b9c8760d5746ba517",
}


class TableError(RuntimeError):
    """A bundled data file is missing, corrupt or inconsistent."""


@dataclass(frozen=True)
class CandidateTriple:
    d1: int
    d2: int
    d3: int
    case_label: str
    h1: int
    h2: int
    h3: int

    @property
    def discs(self) -> tuple[int, int, int]:
        return (self.d1, self.d2, self.d3)

    def sort_key(self):
        return (CASE_LABELS.index(self.case_label), -self.d1, -self.d2, -self.d3)

    def to_dict(self) -> dict:
        return {"d1": self.d1, "d2": self.d2, "d3": self.d3, "case": self.case_label,
                "h1": self.h1, "h2": self.h2, "h3": self.h3}

    @classmethod
    def from_dict(cls, d: dict) -> "CandidateTriple":
        return cls(int(d["d1"]), int(d["d2"]), int(d["d3"]), d["case"],
                   int(d["h1"]), int(d["h2"]), int(d["h3"]))


@dataclass(frozen=True)
class TableRow:
    discriminants: tuple[int, ...]
    class_number: int
    label: str


@dataclass(frozen=True)
class ExternalTable:
    source_id: str
    rows: tuple[TableRow, ...]
    checksum: str

    def discriminants(self) -> list[int]:
        return [d for r in self.rows for d in r.discriminants]


# -- data files ---------------------------------------------------------------

def default_data_dir() -> Path:
    env = os.environ.get("MODULI_DATA_DIR")
    return Path(env) if env else Path(__file__).resolve().parent / "data"


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _read_verified(source_id: str, data_dir: Path) -> tuple[str, str]:
    path = Path(data_dir) / TABLE_FILES[source_id]
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise TableError(f"{source_id}: cannot read {path}: {exc}") from exc
    digest = _sha256(raw)
    expected = EXPECTED_SHA256[source_id]
    if digest != expected:
        raise TableError(f"{source_id}: checksum mismatch for {path} "
                         f"(expected {expected}, found {digest})")
    return raw.decode("utf-8"), digest


def _data_lines(text: str):
    for line in text.splitlines():
        if line and not line.startswith("#"):
            yield line.split("\t")


def load_table(source_id: str, data_dir: str | os.PathLike | None = None) -> ExternalTable:
    """Load and checksum-verify table-2.1 or table-4.1."""
    if source_id not in ("table-2.1", "table-4.1"):
        raise ValueError(f"unknown table {source_id!r}")
    text, digest = _read_verified(source_id, Path(data_dir or default_data_dir()))
    rows = []
    lines = _data_lines(text)
    header = next(lines, None)
    if header != ["discriminants", "class_number", "notes"]:
        raise TableError(f"{source_id}: unexpected header {header}")
    for cols in lines:
        if len(cols) != 3:
            raise TableError(f"{source_id}: malformed row {cols}")
        try:
            discs = tuple(int(x) for x in cols[0].split(","))
            rows.append(TableRow(discs, int(cols[1]), cols[2]))
        except ValueError as exc:
            raise TableError(f"{source_id}: malformed row {cols}") from exc
    return ExternalTable(source_id, tuple(rows), digest)


def load_h_maxima(data_dir: str | os.PathLike | None = None) -> dict[int, int]:
    text, _ = _read_verified("h-maxima", Path(data_dir or default_data_dir()))
    lines = _data_lines(text)
    if next(lines, None) != ["h", "max_abs_disc", "count"]:
        raise TableError("h-maxima: unexpected header")
    return {int(c[0]): int(c[1]) for c in lines}


def validate_table(table: ExternalTable) -> None:
    """Re-check class numbers and two-elementarity of every listed discriminant."""
    for row in table.rows:
        for d in row.discriminants:
            if class_number(d) != row.class_number:
                raise TableError(f"{table.source_id}: h({d}) != {row.class_number}")
            if not is_two_elementary(d):
                raise TableError(f"{table.source_id}: {d} is not two-elementary")
        if table.source_id == "table-4.1":
            funds = {fundamental_decomposition(d)[0] for d in row.discriminants}
            if len(funds) < 2:
                raise TableError(f"table-4.1: row {row.label} has one fundamental part")


@dataclass(frozen=True)
class Tables:
    two_elementary: ExternalTable
    equal_fields: ExternalTable
    h_maxima: dict

    def __hash__(self):
        return hash((self.two_elementary.checksum, self.equal_fields.checksum))


def load_tables(data_dir=None, validate: bool = True) -> Tables:
    t21 = load_table("table-2.1", data_dir)
    t41 = load_table("table-4.1", data_dir)
    maxima = load_h_maxima(data_dir)
    if validate:
        validate_table(t21)
        validate_table(t41)
        listed = set(t21.discriminants())
        for d in t41.discriminants():
            if d not in listed:
                raise TableError(f"table-4.1 discriminant {d} missing from table-2.1")
    return Tables(t21, t41, maxima)


# -- regeneration of the data files -----------------------------------------

def _two_elementary_list(cap: int = SCAN_CAP) -> list[int]:
    return sorted(form_table(cap).two_elementary(), reverse=True)


def render_table_2_1() -> str:
    lines = ["# discriminants whose class group is 2-elementary (all reduced forms ambiguous)",
             f"# complete below |delta| = {SCAN_CAP}",
             "discriminants\tclass_number\tnotes"]
    for d in _two_elementary_list():
        D, f = fundamental_decomposition(d)
        lines.append(f"{d}\t{class_number(d)}\tD={D} f={f}")
    return "\n".join(lines) + "\n"


def equal_field_groups(discs: list[int], limit: int = FIELD_PRIMES_LIMIT) -> list[list[int]]:
    """Partition two-elementary discriminants by the field Q(x).

    Two discriminants share a group unless a prime certifies their fields
    differ, so a group may merge distinct fields but never splits one.
    """
    primes = small_primes(limit)
    polys = {d: hilbert_class_polynomial(d).coeffs for d in discs}
    groups: list[list[int]] = []
    for d in discs:
        for g in groups:
            if class_number(g[0]) == class_number(d) and not any(
                    fields_differ(polys[d], polys[e], primes) for e in g):
                g.append(d)
                break
        else:
            groups.append([d])
    return groups


def render_table_4_1() -> str:
    discs = [d for d in sorted(_two_elementary_list(), key=lambda d: -d) if class_number(d) >= 2]
    groups = equal_field_groups(discs)
    lines = ["# two-elementary discriminants grouped by the field of their singular moduli,",
             "# keeping groups that involve at least two imaginary quadratic fields",
             "discriminants\tclass_number\tnotes"]
    k = 0
    for g in groups:
        if len({fundamental_decomposition(d)[0] for d in g}) < 2:
            continue
        k += 1
        g = sorted(g, reverse=True)
        lines.append(f"{','.join(map(str, g))}\t{class_number(g[0])}\tL{k}")
    return "\n".join(lines) + "\n"


def render_h_maxima(cap: int = MAXIMA_SCAN_CAP, max_h: int = MAXIMA_MAX_H) -> str:
    table = form_table(cap)
    maxima = table.maxima()
    lines = [f"# largest |delta| of each class number, by scan of |delta| <= {cap}",
             "h\tmax_abs_disc\tcount"]
    for h in range(1, max_h + 1):
        lines.append(f"{h}\t{maxima[h]}\t{len(table.with_class_number(h))}")
    return "\n".join(lines) + "\n"


def write_data_files(data_dir: str | os.PathLike) -> dict[str, str]:
    """Regenerate all bundled data files; returns their SHA-256 digests."""
    data_dir = Path(data_dir)
    data_dir.mkdir(parents=True, exist_ok=True)
    out = {}
    for source_id, text in (("table-2.1", render_table_2_1()),
                            ("table-4.1", render_table_4_1()),
                            ("h-maxima", render_h_maxima())):
        raw = text.encode("utf-8")
        (data_dir / TABLE_FILES[source_id]).write_bytes(raw)
        out[source_id] = _sha256(raw)
    return out


# -- enumeration --------------------------------------------------------------

@dataclass
class CaseGenConfig:
    data_dir: str | os.PathLike | None = None
    max_h3: int | None = None
    subfield_filter: bool = False
    scan_cap: int = SCAN_CAP
    cases: tuple[str, ...] = field(default=CASE_LABELS)


def _fund(d: int) -> int:
    return fundamental_decomposition(d)[0]


def discs_with_class_number(h: int, cap: int = SCAN_CAP, maxima: dict | None = None) -> list[int]:
    """All discriminants of class number h, ordered by |delta|.

    ``cap`` must reach the recorded maximum for h, otherwise the list could
    be incomplete and the call is rejected.
    """
    if h < 1:
        raise ValueError("class number must be positive")
    if maxima is None:
        maxima = load_h_maxima()
    if h not in maxima:
        raise ValueError(f"no recorded maximum for class number {h}")
    if cap < maxima[h]:
        raise ValueError(f"cap {cap} below the largest |delta| = {maxima[h]} with h = {h}")
    return [d for d in form_table(max(cap, SCAN_CAP)).with_class_number(h) if -d <= cap]


def _discs_up_to(bound: int) -> dict[int, list[int]]:
    table = form_table(SCAN_CAP)
    out: dict[int, list[int]] = {}
    for n in table.discriminants():
        if n > bound:
            break
        out.setdefault(int(table.h[n]), []).append(-int(n))
    return out


def _admissible(label: str, h_min: int, h_free: int, maxima: dict) -> list[int]:
    """Discriminants for a case: every h in [h_min, h_free], then the cutoff rows."""
    out = []
    for h in range(h_min, h_free + 1):
        out.extend(discs_with_class_number(h, SCAN_CAP, maxima))
    for row in bounds.rows_for(label):
        lo, hi = row.h_range
        cut = bounds.cutoff_for(label, lo)
        for h, ds in _discs_up_to(cut).items():
            if h >= lo and (hi is None or h <= hi):
                out.extend(ds)
    return sorted(set(out), reverse=True)


def _first_row_h(label: str) -> int:
    return min(r.h_range[0] for r in bounds.rows_for(label))


@lru_cache(maxsize=None)
def _hcp_coeffs(d: int) -> tuple[int, ...]:
    return hilbert_class_polynomial(d).coeffs


def _subfield_refuted(d1: int, d3: int) -> bool:
    return not_in_ring_class_field(d1, _hcp_coeffs(d3))


def _gen_1a(tables: Tables, cfg: CaseGenConfig):
    for d in _admissible("1a", 4, _first_row_h("1a") - 1, tables.h_maxima):
        yield (d, d, d)


def _gen_1bi(tables: Tables, cfg: CaseGenConfig):
    for row in tables.equal_fields.rows:
        group = sorted(row.discriminants, reverse=True)
        for tri in itertools.combinations_with_replacement(group, 3):
            if len(set(tri)) == 1 or len({_fund(d) for d in tri}) == 1:
                continue
            yield tuple(sorted(tri))


def _gen_1bii(label: str):
    def gen(tables: Tables, cfg: CaseGenConfig):
        for d in _admissible(label, 2, _first_row_h(label) - 1, tables.h_maxima):
            if d % 8 != 1 or class_number(4 * d) != class_number(d):
                continue
            yield (4 * d, d, d) if label == "1biiA" else (4 * d, 4 * d, d)
    return gen


def _gen_2bi(label: str):
    lam = LAMBDAS[label]

    def gen(tables: Tables, cfg: CaseGenConfig):
        for d3 in _admissible(label, 2, _first_row_h(label) - 1, tables.h_maxima):
            d1 = lam * d3
            if d1.denominator != 1 or int(d1) % 4 not in (0, 1):
                continue
            d1 = int(d1)
            if class_number(d1) != 2 * class_number(d3):
                continue
            if cfg.subfield_filter and _subfield_refuted(d1, d3):
                continue
            yield (d1, d1, d3)
    return gen


def _gen_2bii_a(tables: Tables, cfg: CaseGenConfig):
    for d1 in sorted(tables.two_elementary.discriminants(), reverse=True):
        h1 = class_number(d1)
        if h1 < 4 or h1 % 2:
            continue
        if cfg.max_h3 is not None and h1 // 2 > cfg.max_h3:
            continue
        for d3 in discs_with_class_number(h1 // 2, SCAN_CAP, tables.h_maxima):
            if _fund(d1) == _fund(d3):
                continue
            if cfg.subfield_filter and _subfield_refuted(d1, d3):
                continue
            yield (d1, d1, d3)


def _gen_2bii_b(tables: Tables, cfg: CaseGenConfig):
    for d3 in sorted(tables.two_elementary.discriminants(), reverse=True):
        h3 = class_number(d3)
        if h3 < 2 or (cfg.max_h3 is not None and h3 > cfg.max_h3):
            continue
        for d1 in discs_with_class_number(2 * h3, SCAN_CAP, tables.h_maxima):
            if _fund(d1) == _fund(d3):
                continue
            if cfg.subfield_filter and _subfield_refuted(d1, d3):
                continue
            yield (d1, d1, d3)


def _gen_2bii_c(tables: Tables, cfg: CaseGenConfig):
    if not verify_case_emptiness_2biiC():
        raise RuntimeError("case 2bii-C is not empty")
    return iter(())


_GENERATORS = {
    "1a": _gen_1a,
    "1bi": _gen_1bi,
    "1biiA": _gen_1bii("1biiA"),
    "1biiB": _gen_1bii("1biiB"),
    **{lab: _gen_2bi(lab) for lab in LAMBDAS},
    "2bii-A": _gen_2bii_a,
    "2bii-B": _gen_2bii_b,
    "2bii-C": _gen_2bii_c,
}


def verify_case_emptiness_2biiC(bound: int | None = None) -> bool:
    """True iff no discriminant with |delta| <= bound has class number >= 128."""
    if bound is None:
        bound = bounds.case_cutoff(bounds.rows_for("2biiC")[0])
    table = form_table(max(bound, 4))
    n = table.discriminants()
    n = n[n <= bound]
    return bool(len(n) == 0 or int(table.h[n].max()) < 128)


def generate_candidates(config: CaseGenConfig | None = None,
                        tables: Tables | None = None) -> list[CandidateTriple]:
    """All candidate triples, deduplicated and in canonical order."""
    cfg = config or CaseGenConfig()
    if tables is None:
        tables = load_tables(cfg.data_dir)
    seen: set[tuple[int, int, int]] = set()
    out: list[CandidateTriple] = []
    for label in CASE_LABELS:
        if label not in cfg.cases:
            continue
        for tri in _GENERATORS[label](tables, cfg):
            d1, d2, d3 = tri
            h1, h2, h3 = class_number(d1), class_number(d2), class_number(d3)
            if cfg.max_h3 is not None and h3 > cfg.max_h3:
                continue
            if tri in seen:
                continue
            seen.add(tri)
            out.append(CandidateTriple(d1, d2, d3, label, h1, h2, h3))
    out.sort(key=CandidateTriple.sort_key)
    return out


def case_counts(candidates: list[CandidateTriple]) -> dict[str, int]:
    counts = {label: 0 for label in CASE_LABELS}
    for c in candidates:
        counts[c.case_label] += 1
    return counts


def satisfies_case(c: CandidateTriple, tables: Tables | None = None) -> bool:
    """Independent re-check of a candidate against its case constraints."""
    d1, d2, d3 = c.discs
    h1, h2, h3 = (class_number(d) for d in c.discs)
    if (h1, h2, h3) != (c.h1, c.h2, c.h3) or not h1 >= h2 >= h3 >= 2:
        return False
    lab = c.case_label
    f1, f2, f3 = (_fund(d) for d in c.discs)
    if lab.startswith("1"):
        if not h1 == h2 == h3:
            return False
        if not -d1 >= -d2 >= -d3:
            return False
        if lab == "1a":
            cut = bounds.cutoff_for("1a", h1)
            return d1 == d2 == d3 and h1 >= 4 and (cut is None or -d1 <= cut)
        if lab == "1bi":
            tables = tables or load_tables(validate=False)
            in_row = any(set(c.discs) <= set(r.discriminants) for r in tables.equal_fields.rows)
            return in_row and len({d1, d2, d3}) > 1 and len({f1, f2, f3}) > 1
        if d3 % 8 != 1 or d1 != 4 * d3:
            return False
        if (lab == "1biiA" and d2 != d3) or (lab == "1biiB" and d2 != d1):
            return False
        cut = bounds.cutoff_for(lab, h1)
        return cut is None or -d3 <= cut
    if not (h1 == h2 == 2 * h3 and d1 == d2):
        return False
    if lab in LAMBDAS:
        if Fraction(d1) != LAMBDAS[lab] * d3:
            return False
        cut = bounds.cutoff_for(lab, h3)
        return cut is None or -d3 <= cut
    if f1 == f3:
        return False
    tables = tables or load_tables(validate=False)
    listed = set(tables.two_elementary.discriminants())
    if lab == "2bii-A":
        return d1 in listed
    if lab == "2bii-B":
        return d3 in listed
    return False
