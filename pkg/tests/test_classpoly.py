import math
import random
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from oracles import j_mpmath, load_hcp_oracle
from singmod.ball import ComplexBall
from singmod.bounds import fourier_window, min_abs_lower
from singmod.classpoly import (
    JSeries,
    PrecisionError,
    certified_class_polynomial,
    dominant_value,
    eval_j,
    hilbert_class_polynomial,
    initial_precision,
    singular_moduli,
)
from singmod.quadforms import ReducedForm, class_number, form_table, reduced_forms

ORACLE = load_hcp_oracle()


def _frac(x) -> Fraction:
    sign, man, exp, _ = x._mpf_  # exact, without re-rounding
    return (-1) ** sign * Fraction(int(man)) * Fraction(2) ** int(exp)


def _inflate(b: ComplexBall, factor: int = 2) -> ComplexBall:
    return ComplexBall(b.re, b.im, b.rad * factor + 1, b.prec)


def test_eval_j_at_rho_contains_zero():
    ball = eval_j(ReducedForm(1, 1, 1), -3, 128)
    assert ball.contains(0)
    assert ball.radius < 2.0 ** -120


def test_eval_j_at_i_contains_1728():
    ball = eval_j(ReducedForm(1, 0, 1), -4, 200)
    assert ball.contains(1728)
    assert ball.contains(j_mpmath((1, 0, 1), -4))


def test_eval_j_window_for_23():
    x = eval_j(ReducedForm(1, 1, 6), -23, 128)
    lo, hi = fourier_window(-23, 1)
    assert x.abs_lower() >= _frac(lo) - 1 and x.abs_upper() <= _frac(hi) + 1


def test_eval_j_rejects_bad_input():
    with pytest.raises(ValueError):
        eval_j(ReducedForm(1, 1, 6), -15, 128)
    with pytest.raises(ValueError):
        eval_j(ReducedForm(1, 1, 6), -23, 32)
    with pytest.raises(PrecisionError):
        eval_j(ReducedForm(1, 1, 6), -23, (1 << 20) + 1)


def test_eval_j_radius_is_relative():
    for d in (-23, -163, -4027, -20563):
        x = eval_j(reduced_forms(d)[0], d, 256)
        assert Fraction(x.rad, 1 << x.prec) <= Fraction(1, 1 << 256) * max(1, x.abs_upper())


def test_singular_moduli_minus_15():
    vals = singular_moduli(-15, 128)
    assert len(vals) == 2
    prod = vals[0].value * vals[1].value
    assert prod.contains(ORACLE[-15][0])


def test_singular_moduli_minus_3_and_23():
    assert [m.value.contains(0) for m in singular_moduli(-3)] == [True]
    vals = singular_moduli(-23, 128)
    assert len(vals) == 3
    for i in range(3):
        for j in range(i + 1, 3):
            assert not vals[i].value.overlaps(vals[j].value)
    assert [m.is_dominant for m in vals] == [True, False, False]
    assert [m.form for m in vals] == reduced_forms(-23)


def test_hilbert_class_polynomial_examples():
    assert hilbert_class_polynomial(-3).coeffs == (0, 1)
    assert hilbert_class_polynomial(-4).coeffs == (-1728, 1)
    assert hilbert_class_polynomial(-15).coeffs == (-121287375, 191025, 1)
    assert str(hilbert_class_polynomial(-15)) == "x^2 + 191025x - 121287375"


def test_class_polynomials_match_external_oracle():
    for d, coeffs in ORACLE.items():
        H = hilbert_class_polynomial(d)
        assert list(H.coeffs) == coeffs, d
        assert H.degree == class_number(d)
        assert H.rounding_certificate < 0.5


def test_dominant_value_examples():
    x = dominant_value(-23, 128)
    assert x.form == ReducedForm(1, 1, 6)
    with mpmath.workprec(200):
        bound = 0.9994 * mpmath.exp(mpmath.pi * mpmath.sqrt(23))
    assert x.value.abs_lower() >= _frac(bound)
    assert dominant_value(-4).value.contains(1728)
    assert dominant_value(-3).value.contains(0)


def test_class_polynomial_cache(tmp_path):
    from singmod.classpoly import _hcp

    H = hilbert_class_polynomial(-47, cache_dir=tmp_path)
    path = tmp_path / "hcp" / "47.txt"
    lines = path.read_text().split()
    assert lines[0] == "1" and [int(x) for x in lines] == H.descending
    # a malformed file is ignored and rewritten
    path.write_text("1\n2\n")
    _hcp.cache_clear()
    assert hilbert_class_polynomial(-47, cache_dir=tmp_path).coeffs == H.coeffs
    assert [int(x) for x in path.read_text().split()] == H.descending


def test_conjugate_product_integrality_h3():
    for d in form_table(1000).with_class_number(3):
        vals = singular_moduli(d, 192)
        prod = vals[0].value * vals[1].value * vals[2].value
        assert prod.contains(-hilbert_class_polynomial(d).coeffs[0])


@pytest.mark.slow
def test_doubled_precision_reproduces_coefficients():
    t = form_table(2000)
    for n in t.discriminants():
        d = -int(n)
        H = hilbert_class_polynomial(d)
        assert certified_class_polynomial(d, 2 * initial_precision(d)).coeffs == H.coeffs


def test_doubled_precision_reproduces_coefficients_sample():
    rng = random.Random(7)
    discs = [-int(n) for n in form_table(2000).discriminants()]
    for d in rng.sample(discs, 40):
        H = hilbert_class_polynomial(d)
        assert certified_class_polynomial(d, 2 * initial_precision(d)).coeffs == H.coeffs


def test_jseries_coefficients():
    s = JSeries(12)
    assert (s[-1], s[0], s[1], s[2], s[3]) == (1, 744, 196884, 21493760, 864299970)
    assert all(c > 0 for c in s.coefficients)
    with mpmath.workdps(40):
        tau = mpmath.mpc(0.1, 1.3)
        q = complex(mpmath.exp(2j * mpmath.pi * tau))
        ref = complex(1728 * mpmath.kleinj(tau))
    err = abs(s.partial_sum(q) - ref)
    assert err <= s.tail_bound(abs(q)) + 1e-9 * abs(ref)


_pairs = st.integers(3, 5000).map(lambda n: -n).filter(lambda d: d % 4 in (0, 1)).flatmap(
    lambda d: st.tuples(st.just(d), st.sampled_from(reduced_forms(d))))


@settings(max_examples=60)
@given(_pairs)
def test_ball_precision_doubling(pair):
    d, f = pair
    lo = eval_j(f, d, 128)
    hi = eval_j(f, d, 256)
    assert lo.overlaps(hi)
    assert _inflate(lo).contains_ball(hi)
    assert hi.contains(j_mpmath(tuple(f), d, dps=130))


@settings(max_examples=60)
@given(_pairs)
def test_ball_fourier_window_and_lower_bound(pair):
    d, f = pair
    x = eval_j(f, d, 128)
    lo, hi = fourier_window(d, f.a)
    assert x.abs_lower() <= _frac(hi) + 1
    assert x.abs_upper() >= _frac(lo) - 1
    if d != -3 or f.a != 1:
        assert x.abs_upper() >= _frac(min_abs_lower(d))
