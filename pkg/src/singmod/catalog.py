"""Trivial triples of singular moduli and the integers their products take.

Three families have rational product:

1. three rational singular moduli (repetition allowed);
2. a rational singular modulus together with both roots of a degree-2
   class polynomial, product ``r * H(0)``;
3. the three roots of a degree-3 class polynomial, product ``-H(0)``.

A zero factor gives product zero, so only the twelve nonzero rational
values enter.
"""

from __future__ import annotations

import csv
import hashlib
import io
import itertools
from dataclasses import dataclass
from functools import lru_cache
from math import prod

from singmod.classpoly import hilbert_class_polynomial
from singmod.quadforms import form_table

FAMILIES = ("all-rational", "rational-plus-conjugate-pair", "conjugate-degree-3-triple")
_SCAN = 10_000  # every discriminant with h <= 3 has |delta| <= 907


@lru_cache(maxsize=None)
def _discs(h: int) -> tuple[int, ...]:
    return tuple(form_table(_SCAN).with_class_number(h))


@lru_cache(maxsize=None)
def _rational_pairs() -> tuple[tuple[int, int], ...]:
    return tuple((-hilbert_class_polynomial(d).coeffs[0], d) for d in _discs(1))


def rational_singular_moduli() -> list[int]:
    """The 13 rational singular moduli, in order of |delta|."""
    return [v for v, _ in _rational_pairs()]


@dataclass(frozen=True)
class TrivialTriple:
    family: str
    discs: tuple[int, int, int]
    values: tuple[int, ...]  # the rational members, descending
    product: int

    @property
    def family_index(self) -> int:
        return FAMILIES.index(self.family) + 1

    def describe(self) -> str:
        if self.family_index == 1:
            return "{" + ",".join(map(str, self.values)) + "}"
        if self.family_index == 2:
            return f"{self.values[0]}*H[{self.discs[1]}](0)"
        return f"-H[{self.discs[0]}](0)"


def trivial_triples() -> list[TrivialTriple]:
    nonzero = [(v, d) for v, d in _rational_pairs() if v != 0]
    out = []
    for combo in itertools.combinations_with_replacement(nonzero, 3):
        combo = sorted(combo, key=lambda vd: vd[0], reverse=True)
        vals = tuple(v for v, _ in combo)
        out.append(TrivialTriple(FAMILIES[0], tuple(d for _, d in combo), vals, prod(vals)))
    for (v, dv), d in itertools.product(nonzero, _discs(2)):
        c0 = hilbert_class_polynomial(d).coeffs[0]
        out.append(TrivialTriple(FAMILIES[1], (dv, d, d), (v,), v * c0))
    for d in _discs(3):
        c0 = hilbert_class_polynomial(d).coeffs[0]
        out.append(TrivialTriple(FAMILIES[2], (d, d, d), (), -c0))
    return out


def product_catalog() -> list[tuple[int, list[TrivialTriple]]]:
    """Distinct products, ascending, each with its producing triples."""
    by: dict[int, list[TrivialTriple]] = {}
    for t in trivial_triples():
        if t.product == 0:
            raise ArithmeticError(f"zero product from {t}")
        by.setdefault(t.product, []).append(t)
    return sorted(by.items())


def catalog_statistics(catalog=None) -> dict:
    """Family sizes and overlap counts.

    ``within_family_1`` counts integers with at least two family-1
    producers, ``between_families_1_2`` integers produced in both families
    1 and 2; ``other_overlaps`` counts any remaining kind of coincidence.
    """
    catalog = product_catalog() if catalog is None else catalog
    fam_counts = [0, 0, 0]
    within1 = between12 = other = 0
    for _, producers in catalog:
        idx = [p.family_index for p in producers]
        for i in idx:
            fam_counts[i - 1] += 1
        n1, n2, n3 = idx.count(1), idx.count(2), idx.count(3)
        within1 += n1 >= 2
        between12 += n1 >= 1 and n2 >= 1
        other += len(idx) > 1 and (n3 > 0 or n2 > 1 or n1 > 2)
    return {
        "family_counts": fam_counts,
        "distinct_products": len(catalog),
        "within_family_1": within1,
        "between_families_1_2": between12,
        "other_overlaps": other,
        "repeated_producers": sum(len(p) - 1 for _, p in catalog),
    }


def catalog_tsv(catalog=None) -> str:
    catalog = product_catalog() if catalog is None else catalog
    buf = io.StringIO()
    w = csv.writer(buf, delimiter="\t", lineterminator="\n")
    w.writerow(["product", "n_producers", "family_list", "producer_descriptions"])
    for n, producers in catalog:
        w.writerow([n, len(producers),
                    ",".join(str(p.family_index) for p in producers),
                    ";".join(p.describe() for p in producers)])
    return buf.getvalue()


def catalog_digest(catalog=None) -> str:
    return hashlib.sha256(catalog_tsv(catalog).encode()).hexdigest()
