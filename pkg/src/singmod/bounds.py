"""Magnitude bounds for singular moduli and the |delta| cutoffs they imply.

Every cutoff compares a lower bound for the modulus of a rational product,
built from the dominant singular modulus and two nonzero lower bounds, with
an upper bound built from Fourier windows at larger leading coefficients.
Evaluation uses mpmath at 128 bits; the results only size enumeration
ranges, so floating evaluation is adequate.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from fractions import Fraction

import mpmath

PREC = 128

NONZERO_FLOOR = mpmath.mpf("4.4e-5")
NONZERO_SCALE = 3500
WINDOW_SLACK = 2079
DOMINANT_FACTOR = mpmath.mpf("0.9994")


def _abs(delta) -> int:
    return abs(int(delta))


def _mpf(x):
    x = Fraction(x)
    return mpmath.mpf(x.numerator) / x.denominator


def min_abs_lower(delta):
    """Lower bound for |x| over nonzero singular moduli of discriminant delta."""
    with mpmath.workprec(PREC):
        return min(NONZERO_FLOOR, mpmath.mpf(NONZERO_SCALE) / mpmath.mpf(_abs(delta)) ** 3)


def fourier_window(delta, a: int) -> tuple[mpmath.mpf, mpmath.mpf]:
    """Interval containing |x| for the singular modulus of a form with leading coefficient a."""
    if a < 1:
        raise ValueError("leading coefficient must be positive")
    n = _abs(delta)
    # enough bits that the +-2079 slack is resolved at any magnitude
    with mpmath.workprec(PREC + int(4.54 * n ** 0.5 / a) + 8):
        e = mpmath.exp(mpmath.pi * mpmath.sqrt(n) / a)
        return e - WINDOW_SLACK, e + WINDOW_SLACK


def dominant_lower(delta):
    n = _abs(delta)
    if n < 23:
        raise ValueError("dominant lower bound requires |delta| >= 23")
    with mpmath.workprec(PREC):
        return DOMINANT_FACTOR * mpmath.exp(mpmath.pi * mpmath.sqrt(n))


class Unbounded(Exception):
    """The upper bound never drops below the lower bound."""


@dataclass(frozen=True)
class BoundCaseSpec:
    """One row of a case table.

    With |delta| = d the lower bound is
    ``0.9994 e^{r pi sqrt d} * min(4.4e-5, 3500 (s2 d)^-3) * min(4.4e-5, 3500 (s3 d)^-3)``
    and the upper bound is ``prod_i (e^{r_i pi sqrt d / m_i} + 2079)``.
    """

    label: str
    r: Fraction
    s2: Fraction
    s3: Fraction
    upper: tuple[Fraction, Fraction, Fraction]
    m: tuple[int, int, int]
    k: int
    h_range: tuple[int, int | None]
    published_cutoff: int

    def __post_init__(self):
        if min(self.r, self.s2, self.s3, *self.upper) <= 0:
            raise ValueError("scales must be positive")
        if min(self.m) < 2:
            raise ValueError("leading divisors must be at least 2")

    def log_lower(self, d):
        d = mpmath.mpf(d)
        lo2 = min(NONZERO_FLOOR, NONZERO_SCALE / (_mpf(self.s2) * d) ** 3)
        lo3 = min(NONZERO_FLOOR, NONZERO_SCALE / (_mpf(self.s3) * d) ** 3)
        return (mpmath.log(DOMINANT_FACTOR) + _mpf(self.r) * mpmath.pi * mpmath.sqrt(d)
                + mpmath.log(lo2) + mpmath.log(lo3))

    def log_upper(self, d):
        d = mpmath.mpf(d)
        return mpmath.fsum(
            mpmath.log(mpmath.exp(_mpf(ri) * mpmath.pi * mpmath.sqrt(d) / mi) + WINDOW_SLACK)
            for ri, mi in zip(self.upper, self.m)
        )

    def compatible(self, d) -> bool:
        return self.log_upper(d) >= self.log_lower(d)


@lru_cache(maxsize=None)
def case_cutoff(spec: BoundCaseSpec, prec: int = PREC) -> int:
    """Largest integer d with upper bound >= lower bound.

    Doubling brackets the final crossing, bisection narrows it, and a short
    integer scan settles it.  Raises :class:`Unbounded` when the dominant
    exponent never wins.
    """
    with mpmath.workprec(prec):
        growth = sum(ri / mi for ri, mi in zip(spec.upper, spec.m))
        if spec.r <= growth:
            raise Unbounded(spec.label)
        hi = 4
        while spec.compatible(hi) or not _increasing_beyond(spec, hi):
            hi *= 2
            if hi > 1 << 48:
                raise Unbounded(spec.label)
        lo = hi // 2
        if not spec.compatible(lo):
            # crossing lies below hi/2; walk down until compatible
            while lo > 1 and not spec.compatible(lo):
                hi, lo = lo, lo // 2
        while hi - lo > 16:
            mid = (lo + hi) // 2
            if spec.compatible(mid):
                lo = mid
            else:
                hi = mid
        best = lo
        for d in range(lo, hi + 17):
            if spec.compatible(d):
                best = d
        return best


def log_ratio_increasing(spec: BoundCaseSpec, start: int, stop: int, samples: int = 64) -> bool:
    """Sampled check that log(lower/upper) increases on [start, stop]."""
    pts = [start + (stop - start) * i // samples for i in range(samples + 1)]
    vals = [spec.log_lower(x) - spec.log_upper(x) for x in pts]
    return all(b >= a for a, b in zip(vals, vals[1:]))


def _increasing_beyond(spec: BoundCaseSpec, d: int) -> bool:
    # past the 3500/|delta|^3 crossover the log-ratio is concave-free in
    # sqrt(d) with positive slope once r exceeds the summed upper exponents
    return log_ratio_increasing(spec, d, 4 * d, 16)


F = Fraction


def _rows(label, r, s2, s3, upper, table, h_ranges, cutoffs):
    return [
        BoundCaseSpec(label, F(r), F(s2), F(s3), tuple(F(u) for u in upper), m, k, hr, c)
        for (m, k), hr, c in zip(table, h_ranges, cutoffs)
    ]


CASE_TABLES: list[BoundCaseSpec] = [
    *_rows("1a", 1, 1, 1, (1, 1, 1),
           [((3, 3, 4), 12), ((3, 4, 4), 14), ((4, 4, 4), 16), ((4, 4, 5), 18), ((4, 5, 5), 20)],
           [(12, 13), (14, 15), (16, 17), (18, 19), (20, None)],
           [30339, 4124, 1045, 488, 334]),
    *_rows("1biiA", 2, 1, 1, (2, 1, 1),
           [((3, 2, 2), 4), ((3, 3, 2), 6), ((3, 3, 3), 8)],
           [(4, 5), (6, 7), (8, None)],
           [367, 163, 93]),
    *_rows("1biiB", 2, 1, 4, (2, 1, 2),
           [((3, 2, 3), 4), ((3, 3, 3), 6), ((4, 3, 3), 8), ((4, 3, 4), 10)],
           [(4, 5), (6, 7), (8, 9), (10, None)],
           [5781, 650, 192, 92]),
    *_rows("2bi-9/4", F(3, 2), F(9, 4), 1, (F(3, 2), F(3, 2), 1),
           [((3, 3, 3), 10), ((4, 4, 2), 12), ((4, 4, 3), 14), ((4, 4, 4), 16)],
           [(10, 11), (12, 13), (14, 15), (16, None)],
           [5076, 1430, 255, 164]),
    *_rows("2bi-4", 2, 4, 1, (2, 2, 1),
           [((3, 3, 3), 10), ((3, 3, 4), 12), ((3, 3, 5), 14), ((3, 4, 4), 16)],
           [(10, 11), (12, 13), (14, 15), (16, None)],
           [650, 317, 236, 129]),
    *_rows("2bi-9", 3, 9, 1, (3, 3, 1),
           [((3, 3, 2), 8), ((3, 4, 2), 10)],
           [(8, 9), (10, None)],
           [255, 85]),
    *_rows("2bi-16", 4, 16, 1, (4, 4, 1),
           [((3, 3, 2), 8), ((3, 3, 3), 10)],
           [(8, 9), (10, None)],
           [79, 52]),
    *_rows("2biiC", 1, 1, 1, (1, 1, 1),
           [((4, 4, 5), 128)],
           [(128, None)],
           [488]),
]
"""The 25 table rows; ``h_range`` applies to h (case 1) or h3 (case 2)."""

CLASS_NUMBER_13_BOUND = 20563


def thresholds() -> list[tuple[BoundCaseSpec, int]]:
    return [(spec, case_cutoff(spec)) for spec in CASE_TABLES]


def cutoff_for(label: str, h: int) -> int | None:
    """|delta| cutoff for class number h in case ``label``, or None below the first row.

    ``None`` means every discriminant of class number h is admissible.  For
    case 1a with h <= 13 the scan bound 20563 replaces the analytic cutoff.
    """
    for s in CASE_TABLES:
        if s.label != label:
            continue
        lo, hi = s.h_range
        if h >= lo and (hi is None or h <= hi):
            cut = case_cutoff(s)
            if label == "1a" and h <= 13:
                cut = min(cut, CLASS_NUMBER_13_BOUND)
            return cut
    return None


def rows_for(label: str) -> list[BoundCaseSpec]:
    return [s for s in CASE_TABLES if s.label == label]
