import json
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from oracles import brute_force_forms
from singmod import bounds, casegen
from singmod.casegen import (
    CASE_LABELS,
    EXPECTED_SHA256,
    CandidateTriple,
    CaseGenConfig,
    TableError,
    case_counts,
    discs_with_class_number,
    generate_candidates,
    load_tables,
    satisfies_case,
    verify_case_emptiness_2biiC,
)
from singmod.fields import (
    fields_differ,
    is_prime,
    principal_primes,
    small_primes,
    splits_completely_mod,
    squarefree_mod,
)
from singmod.classpoly import hilbert_class_polynomial
from singmod.quadforms import class_number, fundamental_decomposition, is_two_elementary

# frozen from the first full enumeration; every entry re-checked by satisfies_case
DEFAULT_COUNTS = {
    "1a": 1231, "1bi": 217, "1biiA": 14, "1biiB": 24,
    "2bi-9/4": 52, "2bi-4": 269, "2bi-9": 50, "2bi-16": 21,
    "2bii-A": 3557, "2bii-B": 23725, "2bii-C": 0,
}
H3_LE_4_TOTAL = 10897


@pytest.fixture(scope="module")
def tables():
    return load_tables()


@pytest.fixture(scope="module")
def candidates(tables):
    return generate_candidates(CaseGenConfig(), tables)


def test_discs_with_class_number_small_h():
    assert [len(discs_with_class_number(h)) for h in (1, 2, 3)] == [13, 29, 25]
    ones = discs_with_class_number(1)
    assert ones == [-3, -4, -7, -8, -11, -12, -16, -19, -27, -28, -43, -67, -163]
    for d in discs_with_class_number(2):
        assert len(brute_force_forms(d)) == 2


def test_discs_with_class_number_rejects_short_cap():
    with pytest.raises(ValueError):
        discs_with_class_number(1, cap=100)
    with pytest.raises(ValueError):
        discs_with_class_number(0)
    with pytest.raises(ValueError):
        discs_with_class_number(999)


def test_h_maxima_table(tables):
    m = tables.h_maxima
    assert (m[1], m[2], m[3]) == (163, 427, 907)
    assert max(v for h, v in m.items() if h <= 13) == 20563


def test_case_2biiC_empty():
    assert verify_case_emptiness_2biiC()
    assert verify_case_emptiness_2biiC(23)
    spec = bounds.rows_for("2biiC")[0]
    assert spec.m == (4, 4, 5) and bounds.case_cutoff(spec) == 488


def test_tables_consistent(tables):
    for row in tables.two_elementary.rows:
        for d in row.discriminants:
            assert is_two_elementary(d) and class_number(d) == row.class_number
    assert len(tables.two_elementary.discriminants()) == 101
    assert max(-d for d in tables.two_elementary.discriminants()) == 7392
    for row in tables.equal_fields.rows:
        assert len({fundamental_decomposition(d)[0] for d in row.discriminants}) >= 2


def test_corrupted_table_rejected(data_copy):
    path = data_copy / "table-2_1.tsv"
    path.write_text(path.read_text().replace("-15\t", "-16\t", 1))
    with pytest.raises(TableError, match="checksum mismatch"):
        load_tables(data_copy)


def test_missing_table_rejected(data_copy):
    (data_copy / "table-4_1.tsv").unlink()
    with pytest.raises(TableError):
        load_tables(data_copy)


def test_regenerated_data_matches_bundle(tmp_path):
    assert casegen.write_data_files(tmp_path) == EXPECTED_SHA256


def test_default_counts(candidates):
    assert case_counts(candidates) == DEFAULT_COUNTS
    assert len(candidates) == sum(DEFAULT_COUNTS.values())


def test_every_candidate_satisfies_its_case(candidates, tables):
    bad = [c for c in candidates if not satisfies_case(c, tables)]
    assert bad == []


def test_no_trivial_family(candidates):
    for c in candidates:
        assert min(c.h1, c.h2, c.h3) >= 2
        assert c.h1 >= c.h2 >= c.h3
        if c.d1 == c.d2 == c.d3:
            assert c.h1 >= 4


def test_canonical_order_and_dedup(candidates):
    assert candidates == sorted(candidates, key=CandidateTriple.sort_key)
    assert len({c.discs for c in candidates}) == len(candidates)
    for c in candidates:
        if c.h1 == c.h2 == c.h3:
            assert -c.d1 >= -c.d2 >= -c.d3


def test_case_specific_constraints(candidates):
    for c in candidates:
        if c.case_label == "1biiA":
            assert c.d2 == c.d3 and c.d3 % 8 == 1 and c.d1 == 4 * c.d2
        if c.case_label == "1biiB":
            assert c.d1 == c.d2 == 4 * c.d3 and c.d3 % 8 == 1
        if c.case_label in casegen.LAMBDAS:
            assert c.d1 == c.d2 and Fraction(c.d1) == casegen.LAMBDAS[c.case_label] * c.d3
        if c.case_label.startswith("2"):
            assert c.h1 == c.h2 == 2 * c.h3


def test_overapproximated_cases_flagged():
    assert casegen.OVERAPPROXIMATED == {"1bi", "2bii-A", "2bii-B"}


def test_partial_run_subset(candidates, tables):
    part = generate_candidates(CaseGenConfig(max_h3=4), tables)
    assert len(part) == H3_LE_4_TOTAL
    assert set(part) == {c for c in candidates if c.h3 <= 4}


def test_deterministic(tables):
    cfg = CaseGenConfig(max_h3=3)
    a = [c.to_dict() for c in generate_candidates(cfg, tables)]
    b = [c.to_dict() for c in generate_candidates(cfg, tables)]
    assert json.dumps(a) == json.dumps(b)


def test_round_trip_dict(candidates):
    for c in candidates[:50]:
        assert CandidateTriple.from_dict(c.to_dict()) == c


def test_subfield_filter_is_a_subset(tables):
    cfg = dict(max_h3=2, cases=("2bi-9/4", "2bi-4", "2bii-A", "2bii-B"))
    full = set(generate_candidates(CaseGenConfig(**cfg), tables))
    filt = set(generate_candidates(CaseGenConfig(subfield_filter=True, **cfg), tables))
    assert filt <= full and len(filt) < len(full)


def test_satisfies_case_rejects_broken_triples(tables):
    c = CandidateTriple(-23, -23, -23, "1a", 3, 3, 3)
    assert not satisfies_case(c, tables)
    c = CandidateTriple(-60, -15, -15, "1biiA", 2, 2, 2)
    assert satisfies_case(c, tables)
    assert not satisfies_case(CandidateTriple(-60, -15, -15, "1biiB", 2, 2, 2), tables)
    assert not satisfies_case(CandidateTriple(-60, -60, -15, "2bi-4", 2, 2, 2), tables)


# -- prime-splitting helpers -------------------------------------------------

def _roots_mod(coeffs, p):
    return [x for x in range(p) if sum(c * pow(x, i, p) for i, c in enumerate(coeffs)) % p == 0]


@given(st.integers(2, 10_000))
def test_is_prime(n):
    assert is_prime(n) == all(n % k for k in range(2, int(n ** 0.5) + 1))


@settings(max_examples=40)
@given(st.sampled_from([-15, -20, -23, -31, -39, -47, -56, -59, -71, -84, -87]),
       st.sampled_from([p for p in small_primes(200) if p > 3]))
def test_splitting_matches_root_count(delta, p):
    H = hilbert_class_polynomial(delta).coeffs
    if H[-1] % p == 0 or not squarefree_mod(H, p):
        return
    assert splits_completely_mod(H, p) == (len(_roots_mod(H, p)) == len(H) - 1)


def test_principal_primes_are_represented():
    for delta in (-23, -84, -7392):
        for p in principal_primes(delta, 8):
            assert is_prime(p) and delta % p
            forms = [f for f in brute_force_forms(delta) if f[0] == 1]
            a, b, c = forms[0]
            assert any(a * x * x + b * x * y + c * y * y == p
                       for x in range(-200, 201) for y in range(0, 60))


def test_fields_differ():
    primes = small_primes(500)
    h15 = hilbert_class_polynomial(-15).coeffs
    h20 = hilbert_class_polynomial(-20).coeffs
    h23 = hilbert_class_polynomial(-23).coeffs
    assert not fields_differ(h15, h15, primes)
    assert fields_differ(h15, h23, primes)
    # -15 and -20 give the same real quadratic field Q(sqrt 5)
    assert not fields_differ(h15, h20, primes)
