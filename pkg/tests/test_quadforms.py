import pytest
from hypothesis import given, strategies as st

from oracles import brute_force_forms, factor_fundamental, is_ambiguous
from singmod.kernels import BACKEND, form_stats
from singmod.quadforms import (
    Discriminant,
    InvalidDiscriminant,
    ReducedForm,
    class_number,
    dominant_form,
    form_table,
    forms_with_leading,
    fundamental_decomposition,
    is_fundamental,
    is_two_elementary,
    reduced_forms,
)

discriminants = st.integers(3, 100_000).map(lambda n: -n).filter(lambda d: d % 4 in (0, 1))


@pytest.mark.parametrize("delta, expected", [
    (-3, [(1, 1, 1)]),
    (-15, [(1, 1, 4), (2, 1, 2)]),
    (-23, [(1, 1, 6), (2, -1, 3), (2, 1, 3)]),
])
def test_reduced_forms_examples(delta, expected):
    assert [tuple(f) for f in reduced_forms(delta)] == expected
    assert brute_force_forms(delta) == expected


@pytest.mark.parametrize("delta", [1, 0, -1, -2, -5, -6, 12])
def test_invalid_discriminants_rejected(delta):
    with pytest.raises(InvalidDiscriminant):
        reduced_forms(delta)
    with pytest.raises(InvalidDiscriminant):
        class_number(delta)


def test_class_number_examples():
    assert class_number(-4) == 1
    assert class_number(-23) == 3


@pytest.mark.parametrize("delta, expected", [(-12, (-3, 2)), (-7, (-7, 1)), (-60, (-15, 2))])
def test_fundamental_decomposition_examples(delta, expected):
    assert fundamental_decomposition(delta) == expected


def test_forms_with_leading_examples():
    assert forms_with_leading(-23, 2) == [ReducedForm(2, -1, 3), ReducedForm(2, 1, 3)]
    assert forms_with_leading(-20, 2) == [ReducedForm(2, 2, 3)]
    assert forms_with_leading(-4, 1) == [ReducedForm(1, 0, 1)]
    with pytest.raises(ValueError):
        forms_with_leading(-23, 0)


def test_two_elementary_examples():
    assert is_two_elementary(-15)
    assert not is_two_elementary(-23)
    assert is_two_elementary(-3)


def test_discriminant_type():
    d = Discriminant(-60)
    assert (d.fundamental, d.conductor, d.class_number) == (-15, 2, 2)
    assert reduced_forms(d) == reduced_forms(-60)
    with pytest.raises(InvalidDiscriminant):
        Discriminant(-5)


def test_dominant_form_is_principal():
    for d in (-3, -4, -15, -163, -20563):
        f = dominant_form(d)
        assert f.a == 1 and f.disc == d


@given(discriminants)
def test_forms_match_brute_force(delta):
    forms = reduced_forms(delta)
    assert [tuple(f) for f in forms] == brute_force_forms(delta)
    assert class_number(delta) == len(forms)


@given(discriminants)
def test_form_invariants(delta):
    from math import gcd

    for f in reduced_forms(delta):
        a, b, c = f
        assert gcd(gcd(a, b), c) == 1
        assert b * b - 4 * a * c == delta
        assert (-a < b <= a < c) or (0 <= b <= a == c)


@given(discriminants)
def test_fundamental_decomposition_round_trip(delta):
    D, f = fundamental_decomposition(delta)
    assert f * f * D == delta
    assert is_fundamental(D)
    assert (D, f) == factor_fundamental(delta)


@given(discriminants)
def test_two_elementary_matches_ambiguity_count(delta):
    forms = brute_force_forms(delta)
    assert is_two_elementary(delta) == (sum(map(is_ambiguous, forms)) == len(forms))


def test_form_table_agrees_with_direct_enumeration():
    cap = 6000
    t = form_table(cap)
    for n in t.discriminants():
        d = -int(n)
        forms = reduced_forms(d)
        assert t.class_number(d) == len(forms)
        assert int(t.ambiguous[n]) == sum(f.is_ambiguous for f in forms)
        for a in range(1, 6):
            assert int(t.leading[n, a]) == len(forms_with_leading(d, a))
    with pytest.raises(ValueError):
        t.class_number(-(cap + 1))


def test_fallback_kernel_matches_backend():
    from singmod import _kernels_py

    h, amb, lead = form_stats(20_000)
    h2, amb2, lead2 = _kernels_py.form_stats(20_000)
    assert (h == h2).all() and (amb == amb2).all() and (lead == lead2).all()
    assert BACKEND in ("cython", "python")


def test_class_number_counts_small_h():
    t = form_table(10_000)
    assert [len(t.with_class_number(h)) for h in (1, 2, 3)] == [13, 29, 25]
    assert max(-d for d in t.with_class_number(1)) == 163


def test_fallback_selected_by_environment():
    import os
    import subprocess
    import sys

    env = dict(os.environ, SINGMOD_PURE_PYTHON="1")
    r = subprocess.run([sys.executable, "-c", "from singmod import kernels; print(kernels.BACKEND)"],
                       capture_output=True, text=True, env=env)
    assert r.stdout.strip() == "python"
