"""Reduced binary quadratic forms of negative discriminant.

The reduced forms of discriminant ``delta`` are the integer triples
``(a, b, c)`` with ``gcd(a, b, c) = 1``, ``b*b - 4*a*c = delta`` and either
``-a < b <= a < c`` or ``0 <= b <= a = c``.  They index the singular moduli of
``delta``; their number is the class number ``h(delta)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import gcd
from typing import NamedTuple

import numpy as np

from singmod.kernels import form_stats


class InvalidDiscriminant(ValueError):
    pass


class ReducedForm(NamedTuple):
    a: int
    b: int
    c: int

    @property
    def disc(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    @property
    def is_ambiguous(self) -> bool:
        return self.b == 0 or self.b == self.a or self.a == self.c

    def __str__(self) -> str:
        return f"({self.a},{self.b},{self.c})"


def check_discriminant(delta: int) -> int:
    delta = int(delta)
    if delta >= 0 or delta % 4 not in (0, 1):
        raise InvalidDiscriminant(f"{delta} is not a negative discriminant")
    return delta


def _squarefree(n: int) -> bool:
    n = abs(n)
    d = 2
    while d * d <= n:
        if n % (d * d) == 0:
            return False
        if n % d == 0:
            n //= d
        d += 1
    return True


def is_fundamental(d: int) -> bool:
    """True for fundamental discriminants (the field discriminants)."""
    if d % 4 == 1:
        return _squarefree(d)
    if d % 4 == 0:
        m = d // 4
        return m % 4 in (2, 3) and _squarefree(m)
    return False


@lru_cache(maxsize=None)
def fundamental_decomposition(delta: int) -> tuple[int, int]:
    """Return ``(D, f)`` with ``delta == f*f*D`` and ``D`` fundamental."""
    delta = check_discriminant(delta)
    f = 1
    d = delta
    p = 2
    while p * p <= abs(d):
        while d % (p * p) == 0 and (d // (p * p)) % 4 in (0, 1):
            d //= p * p
            f *= p
        p += 1
    return d, f


@dataclass(frozen=True)
class Discriminant:
    """A negative discriminant with its fundamental part and conductor."""

    delta: int
    fundamental: int = field(init=False)
    conductor: int = field(init=False)

    def __post_init__(self):
        check_discriminant(self.delta)
        D, f = fundamental_decomposition(self.delta)
        object.__setattr__(self, "fundamental", D)
        object.__setattr__(self, "conductor", f)

    @property
    def class_number(self) -> int:
        return class_number(self.delta)

    def __int__(self) -> int:
        return self.delta


def _as_int(delta) -> int:
    return check_discriminant(delta.delta if isinstance(delta, Discriminant) else delta)


@lru_cache(maxsize=4096)
def _reduced_forms(delta: int) -> tuple[ReducedForm, ...]:
    n = -delta
    forms = []
    a = 1
    while 3 * a * a <= n:
        b = -a + 1
        if (b - delta) % 2:
            b += 1
        while b <= a:
            num = b * b - delta
            if num % (4 * a) == 0:
                c = num // (4 * a)
                if c >= a and not (c == a and b < 0) and gcd(gcd(a, b), c) == 1:
                    forms.append(ReducedForm(a, b, c))
            b += 2
        a += 1
    return tuple(forms)


def reduced_forms(delta) -> list[ReducedForm]:
    """All reduced forms of ``delta``, sorted by ``(a, b)``."""
    return list(_reduced_forms(_as_int(delta)))


def class_number(delta) -> int:
    return len(_reduced_forms(_as_int(delta)))


def forms_with_leading(delta, a: int) -> list[ReducedForm]:
    if a < 1:
        raise ValueError("leading coefficient must be positive")
    return [f for f in _reduced_forms(_as_int(delta)) if f.a == a]


def is_two_elementary(delta) -> bool:
    """Whether every class is its own inverse, i.e. all reduced forms are ambiguous."""
    return all(f.is_ambiguous for f in _reduced_forms(_as_int(delta)))


def dominant_form(delta) -> ReducedForm:
    return _reduced_forms(_as_int(delta))[0]


# -- bulk tables ------------------------------------------------------

class FormTable:
    """Class numbers and form statistics for every discriminant down to ``-cap``.

    Backed by the compiled scan when available.
    """

    def __init__(self, cap: int):
        self.cap = int(cap)
        self.h, self.ambiguous, self.leading = form_stats(self.cap)

    def class_number(self, delta: int) -> int:
        n = -_as_int(delta)
        if n > self.cap:
            raise ValueError(f"|{delta}| exceeds scan cap {self.cap}")
        return int(self.h[n])

    def discriminants(self) -> np.ndarray:
        """Valid |delta| values in the table, ascending."""
        n = np.arange(self.cap + 1)
        return n[(n > 0) & ((n % 4 == 0) | (n % 4 == 3))]

    def with_class_number(self, h: int) -> list[int]:
        n = self.discriminants()
        return [-int(x) for x in n[self.h[n] == h]]

    def two_elementary(self) -> list[int]:
        n = self.discriminants()
        return [-int(x) for x in n[self.ambiguous[n] == self.h[n]]]

    def maxima(self) -> dict[int, int]:
        """Largest scanned |delta| for each class number."""
        n = self.discriminants()
        out: dict[int, int] = {}
        for k, v in zip(self.h[n].tolist(), n.tolist()):
            out[k] = v
        return out


@lru_cache(maxsize=4)
def form_table(cap: int) -> FormTable:
    return FormTable(cap)
