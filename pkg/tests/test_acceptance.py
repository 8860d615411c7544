"""Acceptance criteria, one test each.

Every test records a single PASS/FAIL line, printed in the "acceptance
criteria" section at the end of the pytest run.  Criterion 10 (the full
proof run) takes about 20 minutes on one core; it runs live when
``SINGMOD_FULL_RUN=1`` and otherwise audits the report written by
``singmod run --out reports/full-run.json`` if one exists.
"""

import json
import os
import random
import time
from fractions import Fraction
from math import gcd
from pathlib import Path

import pytest

from oracles import j_mpmath, load_hcp_oracle
from singmod import bounds, casegen, catalog, cli, eliminate
from singmod.casegen import CandidateTriple
from singmod.classpoly import eval_j, hilbert_class_polynomial
from singmod.quadforms import class_number, form_table, reduced_forms

ROOT = Path(__file__).resolve().parents[1]
FULL_REPORT = ROOT / "reports" / "full-run.json"


def _frac(x) -> Fraction:
    sign, man, exp, _ = x._mpf_
    return (-1) ** sign * Fraction(int(man)) * Fraction(2) ** int(exp)


def _discs(limit):
    return [-n for n in range(3, limit + 1) if n % 4 in (0, 3)]


def test_01_class_number_counts(criterion):
    kernel = [len(form_table(10_000).with_class_number(h)) for h in (1, 2, 3)]
    direct = [0, 0, 0]
    for d in _discs(10_000):
        h = class_number(d)
        if h <= 3:
            direct[h - 1] += 1
    ok = kernel == direct == [13, 29, 25]
    assert criterion(1, ok, f"h=1,2,3 counts {direct} (kernel {kernel}), expected [13, 29, 25]")


def test_02_class_number_13_bound(criterion):
    t = form_table(100_000)
    n = t.discriminants()
    worst = int(n[t.h[n] <= 13].max())
    assert criterion(2, worst == 20563, f"max |delta| with h <= 13 over |delta| <= 1e5 is {worst}")


def test_03_thresholds(criterion):
    rows = bounds.thresholds()
    off = [(s.label, s.k, c, s.published_cutoff) for s, c in rows if abs(c - s.published_cutoff) > 1]
    exact = sum(c == s.published_cutoff for s, c in rows)
    ok = len(rows) == 25 and not off
    assert criterion(3, ok, f"{len(rows) - len(off)}/25 cutoffs within +-1 ({exact} exact); off: {off}")


def test_04_class_polynomial_oracle(criterion):
    oracle = load_hcp_oracle()
    small = [d for d in _discs(10_000) if class_number(d) <= 3]
    missing = [d for d in small if d not in oracle]
    wrong = [d for d in small if d in oracle and list(hilbert_class_polynomial(d).coeffs) != oracle[d]]
    ok = len(small) == 67 and not missing and not wrong
    assert criterion(4, ok, f"{len(small) - len(wrong) - len(missing)}/67 class polynomials equal the "
                            f"frozen external oracle; mismatches {wrong}, missing {missing}")


def test_05_catalog(criterion):
    cat = catalog.product_catalog()
    s = catalog.catalog_statistics(cat)
    nonzero = all(isinstance(n, int) and n != 0 for n, _ in cat)
    ok = (s["family_counts"] == [364, 348, 25] and s["distinct_products"] == 708
          and s["within_family_1"] == 13 and s["between_families_1_2"] == 16 and nonzero)
    assert criterion(5, ok, f"families {s['family_counts']}, {s['distinct_products']} products, "
                            f"overlaps {s['within_family_1']}/{s['between_families_1_2']}, "
                            f"all nonzero integers: {nonzero}")


def _leading_counts(delta):
    counts = [0] * 6
    for a in range(1, 6):
        for b in range(-a + 1, a + 1):
            num = b * b - delta
            if num % (4 * a):
                continue
            c = num // (4 * a)
            if c < a or (c == a and b < 0) or gcd(gcd(a, b), c) != 1:
                continue
            counts[a] += 1
    return counts


def test_06_leading_coefficient_counts(criterion):
    t = form_table(100_000)
    failures = []
    for d in _discs(100_000):
        counts = _leading_counts(d)
        kernel = [int(x) for x in t.leading[-d]]
        if counts[1:] != kernel[1:]:
            failures.append((d, "kernel disagrees"))
        if counts[1] != 1 or max(counts[2:]) > 2 or (d % 16 == 4 and counts[2] != 0):
            failures.append((d, counts))
    assert criterion(6, not failures, f"{len(_discs(100_000))} discriminants checked for a = 1..5; "
                                      f"violations {failures[:5]}")


def test_07_positive_controls(criterion):
    oracle = load_hcp_oracle()
    lines, ok = [], True
    for d in (-23, -31, -59):
        c = CandidateTriple(d, d, d, "1a", 3, 3, 3)
        v = eliminate.eliminate_triple(c)
        alphas = {w.alpha for w in v.witnesses}
        good = v.status == eliminate.FOUND and alphas == {-oracle[d][0]} and v.exact_checks > 0
        ok &= good
        lines.append(f"{d}: {v.status} alpha={sorted(alphas)}")
    assert criterion(7, ok, "; ".join(lines))


def test_08_case_2biiC_empty(criterion):
    bound = bounds.case_cutoff(bounds.rows_for("2biiC")[0])
    t = form_table(bound)
    n = t.discriminants()
    hmax = int(t.h[n[n <= bound]].max())
    ok = bound == 488 and casegen.verify_case_emptiness_2biiC() and hmax < 128
    assert criterion(8, ok, f"max h over |delta| <= {bound} is {hmax} (< 128)")


def _partial_jobs():
    return max(1, min(4, os.cpu_count() or 1))


def test_09_partial_run(criterion):
    jobs = _partial_jobs()
    t0 = time.perf_counter()
    report = cli.run_full_proof(cli.RunConfig(max_h3=4, jobs=jobs))
    secs = time.perf_counter() - t0
    v = report.content["verdicts"]
    total = report.content["candidates"]["total"]
    ok = (report.success and v["by_status"] == {"Eliminated": total}
          and v["exact_checks"] == 0 and total > 0)
    assert criterion(9, ok, f"{total} candidates with h3 <= 4: {v['by_status']}, "
                            f"exact-tier triggers {v['exact_checks']}, {secs:.0f} s at jobs={jobs}")


def _full_run_line(content, source):
    cand = content["candidates"]
    v = content["verdicts"]
    per_case = ", ".join(f"{k} {x['count']}{'*' if x['overapproximated'] else ''}"
                         for k, x in cand["per_case"].items() if x["count"])
    ok = content["success"] and v["by_status"] == {"Eliminated": cand["total"]}
    return ok, (f"{source}: {cand['total']} candidates vs published {cand['published_total']} "
                f"(surplus {cand['difference_from_published']}; per case {per_case}; "
                f"* = over-approximated), {v['by_status']}, exact-tier triggers {v['exact_checks']}")


@pytest.mark.slow
def test_10_full_run(criterion):
    if os.environ.get("SINGMOD_FULL_RUN") == "1":
        report = cli.run_full_proof(cli.RunConfig(jobs=os.cpu_count() or 1))
        ok, line = _full_run_line(report.content, "live run")
        assert criterion(10, ok, line + f", {report.telemetry['seconds']['total']:.0f} s")
        return
    if not FULL_REPORT.exists():
        criterion(10, False, "not run: set SINGMOD_FULL_RUN=1 or produce reports/full-run.json")
        pytest.skip("full proof run is a scheduled job")
    doc = json.loads(FULL_REPORT.read_text())
    content = doc["content"]
    # the recorded report must describe the current candidate set and tables
    tables = casegen.load_tables()
    cands = casegen.generate_candidates(casegen.CaseGenConfig(), tables)
    current = casegen.case_counts(cands)
    recorded = {k: x["count"] for k, x in content["candidates"]["per_case"].items()}
    same = (recorded == current and content["candidates"]["max_h3"] is None
            and content["tables"] == {"table-2.1": tables.two_elementary.checksum,
                                      "table-4.1": tables.equal_fields.checksum})
    ok, line = _full_run_line(content, "recorded report")
    secs = doc["telemetry"]["seconds"]["total"]
    assert criterion(10, ok and same, line + f", {secs:.0f} s at jobs={doc['telemetry']['jobs']}"
                                             f"; matches current candidates: {same}")


def test_11_ball_soundness(criterion):
    rng = random.Random(20241016)
    discs = _discs(5000)
    bad = []
    for _ in range(200):
        d = rng.choice(discs)
        f = rng.choice(reduced_forms(d))
        lo = eval_j(f, d, 128)
        hi = eval_j(f, d, 256)
        inflated = type(lo)(lo.re, lo.im, 2 * lo.rad + 1, lo.prec)
        contained = lo.overlaps(hi) and inflated.contains_ball(hi)
        truth = hi.contains(j_mpmath(tuple(f), d, dps=130))
        wlo, whi = bounds.fourier_window(d, f.a)
        window = hi.abs_lower() <= _frac(whi) and hi.abs_upper() >= _frac(wlo)
        nonzero = d == -3 or hi.abs_upper() >= _frac(bounds.min_abs_lower(d))
        if not (contained and truth and window and nonzero):
            bad.append((d, tuple(f), contained, truth, window, nonzero))
    assert criterion(11, not bad, f"200 sampled (delta, form) pairs with |delta| <= 5000; failures {bad[:3]}")


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-v"]))
