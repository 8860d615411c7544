"""Elimination of candidate discriminant triples.

Fix ``x1`` as the dominant singular modulus of ``d1``.  If any triple of
pairwise distinct singular moduli with discriminants ``(d1, d2, d3)`` had
rational product ``alpha``, applying a Galois automorphism that sends its
first coordinate to ``x1`` gives a triple ``(x1, x2, x3)`` with the same
product, so it is enough to examine every admissible pair ``(x2, x3)``.
Such an ``alpha`` is an algebraic integer, hence a rational integer, and
``|alpha|`` is bounded by :func:`range_bound`.

Screening: the product ball of each pair is tested for containing an
integer.  Pairs that still enclose an integer at the top of the precision
schedule go to the exact tier, which decides whether that integer is a root
of the polynomial whose roots are all products of roots of the three class
polynomials.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

from singmod.ball import ComplexBall, exp_real, pi_ball, sqrt_int
from singmod.casegen import CandidateTriple
from singmod.classpoly import hilbert_class_polynomial, magnitude_bits, singular_moduli
from singmod.quadforms import ReducedForm, class_number

log = logging.getLogger(__name__)

SCHEDULE = (192, 384, 768, 1536, 3072)
GUARD_BITS = 16
PRECISION_QUANTUM = 256

ELIMINATED = "Eliminated"
FOUND = "RationalProductFound"
UNDECIDED = "Undecided"


@dataclass(frozen=True)
class Witness:
    forms: tuple[ReducedForm, ReducedForm, ReducedForm]
    alpha: int

    def to_dict(self) -> dict:
        return {"forms": [list(f) for f in self.forms], "alpha": str(self.alpha)}


@dataclass
class Verdict:
    candidate: CandidateTriple
    status: str
    pairs_checked: int = 0
    max_precision_bits: int = 0
    min_int_distance: float = 1.0
    exact_checks: int = 0
    witnesses: list[Witness] = field(default_factory=list)

    def to_dict(self) -> dict:
        c = self.candidate
        out = {"d1": c.d1, "d2": c.d2, "d3": c.d3, "case": c.case_label,
               "status": self.status, "pairs_checked": self.pairs_checked,
               "max_precision_bits": self.max_precision_bits,
               "min_int_distance": self.min_int_distance,
               "exact_checks": self.exact_checks}
        if self.witnesses:
            out["witnesses"] = [w.to_dict() for w in self.witnesses]
        return out


@dataclass(frozen=True)
class ProductPolynomial:
    coeffs: tuple[int, ...]  # ascending, monic

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, t: int) -> int:
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * t + c
        return acc


def check_schedule(schedule: Sequence[int]) -> tuple[int, ...]:
    s = tuple(int(x) for x in schedule)
    if not s or any(b <= a for a, b in zip(s, s[1:])) or s[0] < 64:
        raise ValueError("precision schedule must be strictly increasing and start at >= 64 bits")
    return s


# -- bounds -------------------------------------------------------------------

@lru_cache(maxsize=None)
def _window_upper(n: int) -> int:
    prec = magnitude_bits(-n) + 64
    e = exp_real(pi_ball(prec) * sqrt_int(n, prec))
    return math.ceil(e.abs_upper()) + 2079


def range_bound(c: CandidateTriple) -> int:
    """Integer B with |x1 x2 x3| <= B for all singular moduli of the three discriminants."""
    return _window_upper(-c.d1) * _window_upper(-c.d2) * _window_upper(-c.d3)


# -- exact tier ---------------------------------------------------------------

def _bareiss_det(rows: list[list[int]]) -> int:
    m = [r[:] for r in rows]
    n = len(m)
    sign, prev = 1, 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k]:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        pivot = m[k][k]
        for i in range(k + 1, n):
            mi, mik = m[i], m[i][k]
            mk = m[k]
            for j in range(k + 1, n):
                mi[j] = (mi[j] * pivot - mik * mk[j]) // prev
        prev = pivot
    return sign * m[n - 1][n - 1]


def _sylvester(p_desc: list[int], r_desc: list[int]) -> list[list[int]]:
    n, m = len(p_desc) - 1, len(r_desc) - 1
    size = n + m
    rows = []
    for i in range(m):
        rows.append([0] * i + p_desc + [0] * (size - n - 1 - i))
    for i in range(n):
        rows.append([0] * i + r_desc + [0] * (size - m - 1 - i))
    return rows


def _interpolate(values: list[int]) -> list[int]:
    """Integer polynomial through (t, values[t]) for t = 0..N, ascending coefficients."""
    diffs = list(values)
    newton = []
    for k in range(len(values)):
        newton.append(diffs[0])
        diffs = [b - a for a, b in zip(diffs, diffs[1:])]
    # sum_k newton[k] * C(t, k)
    poly = [Fraction(0)] * len(values)
    falling = [1]  # t (t-1) ... (t-k+1)
    fact = 1
    for k, ck in enumerate(newton):
        if k:
            fact *= k
            falling = [0] + falling
            for i in range(len(falling) - 1):
                falling[i] -= (k - 1) * falling[i + 1]
        if ck:
            for i, a in enumerate(falling):
                poly[i] += Fraction(ck * a, fact)
    if any(x.denominator != 1 for x in poly):
        raise ArithmeticError("interpolated resultant is not integral")
    return [int(x) for x in poly]


def product_polynomial(P: Sequence[int], Q: Sequence[int]) -> ProductPolynomial:
    """Monic polynomial whose roots are all products of a root of P and a root of Q.

    ``P`` and ``Q`` are ascending coefficient lists of monic integer
    polynomials.  The result is ``Res_x(P(x), x^m Q(t/x))``, computed by
    evaluating the Sylvester determinant at ``nm + 1`` integer points and
    interpolating.
    """
    P, Q = [int(c) for c in P], [int(c) for c in Q]
    n, m = len(P) - 1, len(Q) - 1
    if n < 1 or m < 1 or P[-1] != 1 or Q[-1] != 1:
        raise ValueError("inputs must be monic of degree >= 1")
    p_desc = P[::-1]
    values = []
    for t in range(n * m + 1):
        # x^m Q(t/x) = sum_k q_k t^k x^(m-k); descending in x the coefficient list is q_0, q_1 t, ...
        r_desc = [Q[k] * t ** k for k in range(m + 1)]
        values.append(_bareiss_det(_sylvester(p_desc, r_desc)))
    coeffs = _interpolate(values)
    if coeffs[-1] != 1:
        raise ArithmeticError("resultant is not monic")
    return ProductPolynomial(tuple(coeffs))


@lru_cache(maxsize=16)
def triple_product_polynomial(d1: int, d2: int, d3: int) -> ProductPolynomial:
    h1 = hilbert_class_polynomial(d1).coeffs
    h2 = hilbert_class_polynomial(d2).coeffs
    h3 = hilbert_class_polynomial(d3).coeffs
    return product_polynomial(product_polynomial(h1, h2).coeffs, h3)


def exact_rational_root_check(c: CandidateTriple, n: int) -> bool:
    """Whether some triple of roots of the three class polynomials multiplies to n exactly."""
    if abs(n) > range_bound(c):
        raise ValueError(f"|{n}| exceeds the range bound")
    return triple_product_polynomial(c.d1, c.d2, c.d3)(n) == 0


# -- screening ------------------------------------------------------------------

def admissible_pairs(c: CandidateTriple) -> list[tuple[int, int]]:
    """Index pairs (i2, i3) into the reduced forms of d2, d3 giving pairwise distinct triples."""
    h2, h3 = class_number(c.d2), class_number(c.d3)
    out = []
    for i in range(h2):
        if c.d2 == c.d1 and i == 0:
            continue
        for k in range(h3):
            if c.d3 == c.d1 and k == 0:
                continue
            if c.d3 == c.d2 and k == i:
                continue
            out.append((i, k))
    return out


def working_precision(c: CandidateTriple, rung: int) -> int:
    bits = rung + sum(magnitude_bits(d) for d in c.discs) + GUARD_BITS
    return -(-bits // PRECISION_QUANTUM) * PRECISION_QUANTUM


def _distance(ball: ComplexBall) -> tuple[bool, int, Fraction]:
    """(excludes all integers, nearest integer, centre distance capped at 1)."""
    n = ball.nearest_integer()
    d2 = ball.integer_distance2(n)
    scale = 1 << ball.prec
    dist = Fraction(math.isqrt(d2), scale) if d2 < scale * scale else Fraction(1)
    return d2 > ball.rad * ball.rad, n, dist


def eliminate_triple(c: CandidateTriple, schedule: Sequence[int] = SCHEDULE,
                     exact_tier: bool = True) -> Verdict:
    """Decide whether any pairwise distinct triple for ``c`` has rational product."""
    schedule = check_schedule(schedule)
    pairs = admissible_pairs(c)
    verdict = Verdict(c, ELIMINATED, pairs_checked=len(pairs))
    bound = range_bound(c)
    pending = pairs
    min_dist = Fraction(1)
    near: dict[tuple[int, int], tuple[ComplexBall, int]] = {}
    for rung in schedule:
        p = working_precision(c, rung)
        verdict.max_precision_bits = p
        x1 = singular_moduli(c.d1, p)[0].value
        m2 = singular_moduli(c.d2, p)
        m3 = singular_moduli(c.d3, p)
        still = []
        near.clear()
        for i, k in pending:
            prod = x1 * m2[i].value * m3[k].value
            excluded, n, dist = _distance(prod)
            if not excluded and prod.abs_lower() > bound:
                excluded = True  # every integer in the ball is out of range
            if excluded:
                min_dist = min(min_dist, dist)
                continue
            still.append((i, k))
            near[(i, k)] = (prod, n)
        pending = still
        if not pending:
            break
    verdict.min_int_distance = float(f"{float(min_dist):.6g}")
    if not pending:
        return verdict
    if not exact_tier:
        verdict.status = UNDECIDED
        return verdict
    forms2 = [m.form for m in singular_moduli(c.d2, verdict.max_precision_bits)]
    forms3 = [m.form for m in singular_moduli(c.d3, verdict.max_precision_bits)]
    f1 = singular_moduli(c.d1, verdict.max_precision_bits)[0].form
    undecided = False
    for (i, k) in pending:
        prod, n = near[(i, k)]
        try:
            inside = prod.contains_integer()
        except ValueError:
            undecided = True
            continue
        if inside is None:
            continue
        verdict.exact_checks += 1
        if abs(inside) <= bound and exact_rational_root_check(c, inside):
            verdict.witnesses.append(Witness((f1, forms2[i], forms3[k]), inside))
    if undecided:
        verdict.status = UNDECIDED
    elif verdict.witnesses:
        verdict.status = FOUND
    return verdict


def _run_one(args) -> Verdict:
    cand, schedule, exact_tier = args
    return eliminate_triple(cand, schedule, exact_tier)


def eliminate_all(candidates: Iterable[CandidateTriple], schedule: Sequence[int] = SCHEDULE,
                  jobs: int = 1, exact_tier: bool = True, chunksize: int = 16,
                  progress=None) -> list[Verdict]:
    """Eliminate candidates, in parallel when ``jobs > 1``; results keep input order."""
    schedule = check_schedule(schedule)
    if jobs < 1:
        raise ValueError("jobs must be >= 1")
    cands = list(candidates)
    args = [(c, schedule, exact_tier) for c in cands]
    out: list[Verdict] = []
    if jobs == 1:
        results = map(_run_one, args)
        for v in results:
            out.append(v)
            if progress:
                progress(v)
        return out
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        for v in pool.map(_run_one, args, chunksize=chunksize):
            out.append(v)
            if progress:
                progress(v)
    return out
