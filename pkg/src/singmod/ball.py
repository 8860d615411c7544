"""Fixed-point complex ball arithmetic over Python integers.

A :class:`ComplexBall` at precision ``prec`` is the closed disc with centre
``(re + i*im) / 2**prec`` and radius ``rad / 2**prec``.  All integers are
exact; every operation rounds the centre and inflates the radius so that the
result disc contains every possible exact result.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import isqrt

import mpmath


def _cdiv(a: int, b: int) -> int:
    return -((-a) // b)


def _abs_hi(re: int, im: int) -> int:
    """Upper bound for ``|re + i*im|``."""
    if im == 0:
        return abs(re)
    if re == 0:
        return abs(im)
    return isqrt(re * re + im * im) + 1


def _abs_lo(re: int, im: int) -> int:
    if im == 0:
        return abs(re)
    if re == 0:
        return abs(im)
    return isqrt(re * re + im * im)


@dataclass(frozen=True, slots=True)
class ComplexBall:
    re: int
    im: int
    rad: int
    prec: int

    # -- construction -------------------------------------------------
    @classmethod
    def from_int(cls, n: int, prec: int) -> ComplexBall:
        return cls(n << prec, 0, 0, prec)

    @classmethod
    def from_fraction(cls, x: Fraction, prec: int) -> ComplexBall:
        num = x.numerator << prec
        q, r = divmod(num, x.denominator)
        return cls(q, 0, 1 if r else 0, prec)

    # -- inspection ---------------------------------------------------
    @property
    def center(self) -> mpmath.mpc:
        with mpmath.workprec(max(self.prec, 53) + 64):
            s = mpmath.ldexp(1, -self.prec)
            return mpmath.mpc(self.re * s, self.im * s)

    @property
    def radius(self) -> float:
        """Radius rounded up to a double."""
        return _upper_float(self.rad, self.prec)

    def to_complex(self) -> complex:
        return complex(math.ldexp(self.re, -self.prec) if self.re.bit_length() < 1000 + self.prec
                       else float(mpmath.ldexp(self.re, -self.prec)),
                       math.ldexp(self.im, -self.prec) if self.im.bit_length() < 1000 + self.prec
                       else float(mpmath.ldexp(self.im, -self.prec)))

    def abs_upper(self) -> Fraction:
        return Fraction(_abs_hi(self.re, self.im) + self.rad, 1 << self.prec)

    def abs_lower(self) -> Fraction:
        lo = _abs_lo(self.re, self.im) - self.rad
        return Fraction(max(lo, 0), 1 << self.prec)

    def log2_abs_upper(self) -> float:
        m = _abs_hi(self.re, self.im) + self.rad
        return m.bit_length() - self.prec

    def contains(self, z: complex | int | Fraction | mpmath.mpc) -> bool:
        """Exact membership test for integers and fractions; mpc is compared
        at the ball's own precision plus guard bits."""
        if isinstance(z, (int, Fraction)):
            z = Fraction(z)
            dr = Fraction(self.re, 1 << self.prec) - z
            di = Fraction(self.im, 1 << self.prec)
            return dr * dr + di * di <= Fraction(self.rad, 1 << self.prec) ** 2
        with mpmath.workprec(self.prec + 64):
            d = abs(self.center - mpmath.mpc(z))
            return d <= mpmath.ldexp(self.rad, -self.prec)

    def contains_ball(self, other: ComplexBall) -> bool:
        a, b = _align(self, other)
        d = _abs_hi(a.re - b.re, a.im - b.im)
        return d + b.rad <= a.rad

    def overlaps(self, other: ComplexBall) -> bool:
        a, b = _align(self, other)
        d = _abs_lo(a.re - b.re, a.im - b.im)
        return d <= a.rad + b.rad

    def nearest_integer(self) -> int:
        return (self.re + (1 << (self.prec - 1))) >> self.prec if self.prec else self.re

    def integer_distance2(self, n: int) -> int:
        """Squared distance (in ulps^2) from the centre to integer ``n``."""
        dr = self.re - (n << self.prec)
        return dr * dr + self.im * self.im

    def contains_integer(self) -> int | None:
        """The unique integer inside the ball when ``rad < 1/2``; ``None`` if
        there is none.  Raises if the ball is too wide to decide."""
        if 2 * self.rad >= (1 << self.prec):
            raise ValueError("ball too wide to isolate an integer")
        n = self.nearest_integer()
        if self.integer_distance2(n) <= self.rad * self.rad:
            return n
        return None

    # -- precision ----------------------------------------------------
    def with_prec(self, prec: int) -> ComplexBall:
        if prec == self.prec:
            return self
        if prec > self.prec:
            s = prec - self.prec
            return ComplexBall(self.re << s, self.im << s, self.rad << s, prec)
        s = self.prec - prec
        return ComplexBall(self.re >> s, self.im >> s, _cdiv(self.rad, 1 << s) + 2, prec)

    # -- arithmetic ---------------------------------------------------
    def __neg__(self) -> ComplexBall:
        return ComplexBall(-self.re, -self.im, self.rad, self.prec)

    def conjugate(self) -> ComplexBall:
        return ComplexBall(self.re, -self.im, self.rad, self.prec)

    def __add__(self, other):
        if isinstance(other, int):
            return ComplexBall(self.re + (other << self.prec), self.im, self.rad, self.prec)
        a, b = _align(self, other)
        return ComplexBall(a.re + b.re, a.im + b.im, a.rad + b.rad, a.prec)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, int):
            return ComplexBall(self.re - (other << self.prec), self.im, self.rad, self.prec)
        a, b = _align(self, other)
        return ComplexBall(a.re - b.re, a.im - b.im, a.rad + b.rad, a.prec)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, int):
            return ComplexBall(self.re * other, self.im * other, self.rad * abs(other), self.prec)
        a, b = _align(self, other)
        p = a.prec
        if a.im == 0 and b.im == 0:
            re = (a.re * b.re) >> p
            im = 0
            err = 1
        else:
            re = (a.re * b.re - a.im * b.im) >> p
            im = (a.re * b.im + a.im * b.re) >> p
            err = 2
        rad = err
        if a.rad or b.rad:
            prop = _abs_hi(a.re, a.im) * b.rad + _abs_hi(b.re, b.im) * a.rad + a.rad * b.rad
            rad += _cdiv(prop, 1 << p)
        return ComplexBall(re, im, rad, p)

    __rmul__ = __mul__

    def sqr(self) -> ComplexBall:
        return self * self

    def div_int(self, n: int) -> ComplexBall:
        if n == 0:
            raise ZeroDivisionError("ball division by zero")
        if n < 0:
            return (-self).div_int(-n)
        return ComplexBall(self.re // n, self.im // n, _cdiv(self.rad, n) + 2, self.prec)

    def mul_2exp(self, k: int) -> ComplexBall:
        if k >= 0:
            return ComplexBall(self.re << k, self.im << k, self.rad << k, self.prec)
        return ComplexBall(self.re >> -k, self.im >> -k, _cdiv(self.rad, 1 << -k) + 2, self.prec)

    def inverse(self) -> ComplexBall:
        p = self.prec
        n2 = self.re * self.re + self.im * self.im
        lo = _abs_lo(self.re, self.im)
        if lo <= self.rad:
            raise ZeroDivisionError("ball contains zero")
        scale = 1 << (2 * p)
        re = (self.re * scale) // n2
        im = (-self.im * scale) // n2
        rad = 2
        if self.rad:
            rad += _cdiv(self.rad * scale, lo * (lo - self.rad))
        return ComplexBall(re, im, rad, p)

    def __truediv__(self, other):
        if isinstance(other, int):
            return self.div_int(other)
        return self * other.inverse()

    def __pow__(self, n: int) -> ComplexBall:
        if n < 0:
            return self.inverse() ** (-n)
        result = ComplexBall.from_int(1, self.prec)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def add_error(self, ulps: int) -> ComplexBall:
        return ComplexBall(self.re, self.im, self.rad + ulps, self.prec)

    def __repr__(self) -> str:
        c = self.center
        return f"ComplexBall({mpmath.nstr(c, 20)} +/- {self.radius:.3g})"


def _align(a: ComplexBall, b: ComplexBall) -> tuple[ComplexBall, ComplexBall]:
    if a.prec == b.prec:
        return a, b
    p = min(a.prec, b.prec)
    return a.with_prec(p), b.with_prec(p)


def _upper_float(num: int, prec: int) -> float:
    if num == 0:
        return 0.0
    e = num.bit_length() - 60
    if e > 0:
        num = (num >> e) + 1
        prec -= e
    return math.ldexp(float(num), -prec) * (1 + 2 ** -50)


# -- constants --------------------------------------------------------

def _atan_inv(x: int, prec: int) -> tuple[int, int]:
    """floor-ish fixed-point atan(1/x) and an error bound in ulps."""
    one = 1 << prec
    total = 0
    k = 0
    power = x
    x2 = x * x
    while True:
        term = one // ((2 * k + 1) * power)
        if term == 0:
            break
        total += term if k % 2 == 0 else -term
        k += 1
        power *= x2
    # one truncation per term plus the (alternating) tail < 1 ulp
    return total, k + 1


@lru_cache(maxsize=64)
def pi_ball(prec: int) -> ComplexBall:
    g = prec + 16
    a, ea = _atan_inv(5, g)
    b, eb = _atan_inv(239, g)
    val = 16 * a - 4 * b
    err = 16 * ea + 4 * eb
    return ComplexBall(val, 0, err, g).with_prec(prec)


@lru_cache(maxsize=64)
def ln2_ball(prec: int) -> ComplexBall:
    # ln 2 = 2 atanh(1/3) = sum_k 2 / ((2k+1) 3^(2k+1))
    g = prec + 16
    one = 2 << g
    total = 0
    k = 0
    power = 3
    while True:
        term = one // ((2 * k + 1) * power)
        if term == 0:
            break
        total += term
        k += 1
        power *= 9
    # truncations plus the geometric tail (< one more term)
    return ComplexBall(total, 0, k + 2, g).with_prec(prec)


def sqrt_int(n: int, prec: int) -> ComplexBall:
    """Ball around sqrt(n) for a nonnegative integer n."""
    s = isqrt(n << (2 * prec))
    exact = s * s == n << (2 * prec)
    return ComplexBall(s, 0, 0 if exact else 1, prec)


# -- elementary functions ---------------------------------------------

def _ulps_from_log2(log2_value: float, prec: int) -> int:
    """Conservative ulp count for a nonnegative quantity given by its log2."""
    e = log2_value + prec + 1e-6 * (abs(log2_value) + 1)
    if e < 0:
        return 1
    return math.ceil(2.0 ** e) + 1 if e < 1000 else (1 << (math.ceil(e) + 1))


def _exp_taylor(x: ComplexBall, bound: Fraction) -> ComplexBall:
    """exp(x) by Taylor series, given |x| <= bound <= 1/2."""
    p = x.prec
    total = ComplexBall.from_int(1, p)
    term = total
    n = 0
    if bound:
        log2_bound = bound.numerator.bit_length() - bound.denominator.bit_length() + 1
    else:
        log2_bound = -math.inf
    while True:
        n += 1
        term = (term * x).div_int(n)
        total = total + term
        # remaining tail sum_{m>n} |x|^m/m! <= 2 |x|^(n+1)/(n+1)!
        log2_tail = 1 + (n + 1) * log2_bound - math.lgamma(n + 2) / math.log(2)
        if log2_tail < -p - 2:
            break
    return total.add_error(_ulps_from_log2(log2_tail, p))


def _reduction_steps(prec: int) -> int:
    return max(4, math.isqrt(prec) // 2)


def exp_real(x: ComplexBall) -> ComplexBall:
    """exp of a real ball (imaginary part must be exactly zero).

    The result keeps the same fractional precision; its absolute error
    scales with exp(x), so the relative error stays near 2**-prec.
    """
    if x.im != 0:
        raise ValueError("exp_real needs a real ball")
    p = x.prec
    s = _reduction_steps(p)
    top = max(x.re.bit_length() - p, 1)
    g = p + s + 2 * top + 24
    xx = x.with_prec(g)
    k = math.floor(float(mpmath.ldexp(xx.re, -g)) / math.log(2))
    red = (xx - ln2_ball(g) * k).mul_2exp(-s)
    bound = Fraction(_abs_hi(red.re, red.im) + red.rad, 1 << g)
    if bound > Fraction(1, 2):
        raise ArithmeticError("argument reduction failed")
    y = _exp_taylor(red, bound)
    for _ in range(s):
        y = y * y
    return y.mul_2exp(k).with_prec(p)


def expi_pi_rational(num: int, den: int, prec: int) -> ComplexBall:
    """exp(i*pi*num/den) on the unit circle."""
    s = _reduction_steps(prec)
    g = prec + s + 24 + max(abs(num), 1).bit_length()
    theta = (pi_ball(g) * num).div_int(den)
    z = ComplexBall(0, theta.re, theta.rad, g).mul_2exp(-s)
    bound = Fraction(_abs_hi(z.re, z.im) + z.rad, 1 << g)
    if bound > Fraction(1, 2):
        raise ArithmeticError("argument reduction failed")
    y = _exp_taylor(z, bound)
    for _ in range(s):
        y = y * y
    return y.with_prec(prec)
