"""Certified evaluation of singular moduli and Hilbert class polynomials.

``j(tau)`` is evaluated as ``E4(q)**3 / (q * P(q)**24)`` where
``P(q) = prod (1 - q**n)`` is summed by Euler's pentagonal series and
``E4 = 1 + 240 * sum sigma_3(n) q**n``.  Both series carry explicit tail
majorants, so every returned :class:`ComplexBall` provably contains the
exact value.  At a CM point attached to a reduced form ``(a, b, c)`` the nome
has modulus ``exp(-pi*sqrt(|delta|)/a) <= exp(-pi*sqrt(3))``.
"""

from __future__ import annotations

import logging
import math
import os
import tempfile
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

from singmod.ball import ComplexBall, exp_real, expi_pi_rational, pi_ball, sqrt_int
from singmod.quadforms import Discriminant, ReducedForm, _as_int, reduced_forms

log = logging.getLogger(__name__)

GUARD_BITS = 32
MAX_PRECISION = 1 << 20


class PrecisionError(ArithmeticError):
    """Raised when a requested accuracy is not reached below the precision cap."""

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index


@dataclass(frozen=True)
class SingularModulus:
    disc: int
    form: ReducedForm
    value: ComplexBall

    @property
    def is_dominant(self) -> bool:
        return self.form.a == 1


@dataclass(frozen=True)
class ClassPolynomial:
    disc: int
    coeffs: tuple[int, ...]  # ascending; coeffs[-1] == 1
    rounding_certificate: float = 0.0

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def descending(self) -> list[int]:
        return list(reversed(self.coeffs))

    def __call__(self, x: int) -> int:
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def __str__(self) -> str:
        terms = []
        for k in range(self.degree, -1, -1):
            c = self.coeffs[k]
            if c == 0:
                continue
            mono = "" if k == 0 else ("x" if k == 1 else f"x^{k}")
            if mono and abs(c) == 1:
                coef = "-" if c < 0 else "+"
            else:
                coef = f"{c:+d}"
            terms.append(f"{coef}{mono}" if mono else coef)
        s = " ".join(terms).replace("+", "+ ").replace("-", "- ")
        return s[2:] if s.startswith("+ ") else s


# -- nome bounds --------------------------------------------------------

def nome_log2_lower(delta: int, a: int) -> int:
    """An integer L with |q| <= 2**-L at every CM point of leading coefficient a."""
    x = math.pi * math.sqrt(-delta) / (a * math.log(2))
    return max(int(math.floor(x * (1 - 1e-12))) - 1, 1)


def magnitude_bits(delta: int, a: int = 1) -> int:
    """Bits needed for the Fourier window bound exp(pi sqrt|delta| / a) + 2079."""
    x = math.pi * math.sqrt(-delta) / (a * math.log(2))
    return max(int(math.ceil(x)) + 1, 12)


def _ulps(log2_bound: float, prec: int) -> int:
    e = log2_bound + prec
    if e < -1:
        return 1
    return (1 << (int(math.ceil(e)) + 1))


# -- series -------------------------------------------------------------

@lru_cache(maxsize=8)
def _sigma3_table(n: int) -> list[int]:
    s = [0] * (n + 1)
    for d in range(1, n + 1):
        d3 = d * d * d
        for m in range(d, n + 1, d):
            s[m] += d3
    return s


def _euler_product(q: ComplexBall, L: int) -> ComplexBall:
    """prod_{n>=1} (1 - q**n) via the pentagonal number theorem, |q| <= 2**-L."""
    p = q.prec
    one = ComplexBall.from_int(1, p)
    total = one
    qk = q  # q**k
    A = q   # q**(k(3k-1)/2)
    k = 1
    while True:
        B = A * qk  # q**(k(3k+1)/2)
        if k % 2:
            total = total - A - B
        else:
            total = total + A + B
        nxt = (k + 1) * (3 * k + 2) // 2
        if L * nxt > p + 8:
            break
        qk_next = qk * q
        A = B * qk * qk_next
        qk = qk_next
        k += 1
    # remaining exponents are distinct and >= nxt; 1/(1-|q|) <= 2
    return total.add_error(_ulps(1 - L * nxt, p))


def _eisenstein_e4(q: ComplexBall, L: int) -> ComplexBall:
    p = q.prec
    N = 1
    while L * (N + 1) - 3 * math.log2(N + 1) - 2 <= p + 8:
        N += 1
    sig = _sigma3_table(N)
    acc = ComplexBall.from_int(sig[N], p)
    for n in range(N - 1, 0, -1):
        acc = acc * q + sig[n]
    acc = acc * q
    # sigma_3(n) <= 2 n^3 and consecutive terms shrink by >= 1/2: tail <= 4 (N+1)^3 |q|^(N+1)
    acc = acc.add_error(_ulps(2 + 3 * math.log2(N + 1) - L * (N + 1), p))
    return acc * 240 + 1


def _j_from_nome(q: ComplexBall, inv_q: ComplexBall, L: int) -> ComplexBall:
    P = _euler_product(q, L)
    P2 = P * P
    P4 = P2 * P2
    P8 = P4 * P4
    P24 = P8 * P8 * P8
    E4 = _eisenstein_e4(q, L)
    return inv_q * (E4 * E4 * E4) * P24.inverse()


def _eval_j_raw(delta: int, a: int, b: int, work: int) -> ComplexBall:
    n = -delta
    t = (pi_ball(work) * sqrt_int(n, work)).div_int(a)
    rot = expi_pi_rational(b, a, work)
    big = exp_real(t)
    small = exp_real(-t)
    inv_q = big * rot.conjugate()
    q = small * rot
    return _j_from_nome(q, inv_q, nome_log2_lower(delta, a))


def _check_radius(ball: ComplexBall, precision_bits: int) -> bool:
    # radius <= 2**-p * max(1, |center|)
    scale_bits = max(0, ball.log2_abs_upper() - 1)
    limit_log2 = -precision_bits + scale_bits
    return ball.rad.bit_length() - ball.prec <= limit_log2


def eval_j(form: ReducedForm, disc, precision_bits: int) -> ComplexBall:
    """Ball containing ``j((b + sqrt(delta)) / 2a)``.

    ``precision_bits`` is relative: the radius is at most
    ``2**-precision_bits * max(1, |center|)``.
    """
    delta = _as_int(disc)
    a, b, c = form
    if b * b - 4 * a * c != delta:
        raise ValueError(f"{form} does not have discriminant {delta}")
    if precision_bits < 64:
        raise ValueError("precision_bits must be at least 64")
    if precision_bits > MAX_PRECISION:
        raise PrecisionError(f"precision {precision_bits} exceeds cap {MAX_PRECISION}")
    ball = _eval_j_raw(delta, a, b, precision_bits + GUARD_BITS)
    if not _check_radius(ball, precision_bits):
        raise PrecisionError(f"radius target missed for {form} at {precision_bits} bits")
    return ball


@lru_cache(maxsize=2048)
def _singular_moduli(delta: int, precision_bits: int) -> tuple[SingularModulus, ...]:
    forms = reduced_forms(delta)
    by_form: dict[ReducedForm, ComplexBall] = {}
    for f in forms:
        if f.b >= 0:
            by_form[f] = eval_j(f, delta, precision_bits)
    # j at (a, -b, c) is the complex conjugate of j at (a, b, c)
    for f in forms:
        if f.b < 0:
            by_form[f] = by_form[ReducedForm(f.a, -f.b, f.c)].conjugate()
    values = [SingularModulus(delta, f, by_form[f]) for f in forms]
    for i in range(len(values)):
        for j in range(i + 1, len(values)):
            if values[i].value.overlaps(values[j].value):
                raise _Overlap()
    return tuple(values)


class _Overlap(Exception):
    pass


def singular_moduli(disc, precision_bits: int = 128) -> list[SingularModulus]:
    """One certified value per reduced form, in form order.

    Overlapping balls trigger precision doubling until they separate.
    """
    delta = _as_int(disc)
    p = precision_bits
    while True:
        try:
            return list(_singular_moduli(delta, p))
        except _Overlap:
            p *= 2
            if p > MAX_PRECISION:
                raise PrecisionError(f"singular moduli of {delta} not separated below cap")
            log.debug("separating singular moduli of %d at %d bits", delta, p)


def dominant_value(disc, precision_bits: int = 128) -> SingularModulus:
    return singular_moduli(disc, precision_bits)[0]


# -- class polynomials ------------------------------------------------------

def default_cache_dir() -> Path | None:
    env = os.environ.get("MODULI_CACHE_DIR")
    return Path(env) if env else None


def _cache_path(cache_dir: Path, delta: int) -> Path:
    return Path(cache_dir) / "hcp" / f"{abs(delta)}.txt"


def _read_cache(path: Path, degree: int) -> tuple[int, ...] | None:
    try:
        lines = path.read_text().split()
    except FileNotFoundError:
        return None
    coeffs = [int(x) for x in lines]
    if len(coeffs) != degree + 1 or coeffs[0] != 1:
        log.warning("ignoring malformed cache file %s", path)
        return None
    return tuple(reversed(coeffs))


def _write_cache(path: Path, coeffs: tuple[int, ...]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    body = "\n".join(str(c) for c in reversed(coeffs)) + "\n"
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    with os.fdopen(fd, "w") as fh:
        fh.write(body)
    os.replace(tmp, path)


def initial_precision(delta: int) -> int:
    forms = reduced_forms(delta)
    coeff_bits = sum(magnitude_bits(delta, f.a) for f in forms)
    start = 3 * math.pi * math.sqrt(-delta) / math.log(2) + 64
    return max(128, int(math.ceil(start)), coeff_bits + 64)


def _expand(values: list[ComplexBall]) -> list[ComplexBall]:
    p = values[0].prec
    coeffs = [ComplexBall.from_int(1, p)]
    for x in values:
        nxt = [None] * (len(coeffs) + 1)
        nxt[len(coeffs)] = coeffs[-1]
        for k in range(len(coeffs) - 1, 0, -1):
            nxt[k] = coeffs[k - 1] - x * coeffs[k]
        nxt[0] = -(x * coeffs[0])
        coeffs = nxt
    return coeffs  # ascending


def _certify(delta: int, precision_bits: int) -> ClassPolynomial:
    values = [m.value for m in singular_moduli(delta, precision_bits)]
    work = max(v.prec for v in values)
    balls = _expand([v.with_prec(work) for v in values])
    out = []
    worst = 0.0
    for i, ball in enumerate(balls):
        try:
            n = ball.contains_integer()
        except ValueError:
            raise PrecisionError(f"coefficient {i} of H_{delta} not isolated", index=i)
        if n is None:
            raise ArithmeticError(f"coefficient {i} of H_{delta} encloses no integer")
        out.append(n)
        worst = max(worst, ball.radius)
    if out[-1] != 1:
        raise ArithmeticError(f"H_{delta} is not monic")
    return ClassPolynomial(delta, tuple(out), worst)


@lru_cache(maxsize=512)
def _hcp(delta: int, cache_dir: str | None) -> ClassPolynomial:
    h = len(reduced_forms(delta))
    path = _cache_path(Path(cache_dir), delta) if cache_dir else None
    if path is not None:
        cached = _read_cache(path, h)
        if cached is not None:
            return ClassPolynomial(delta, cached, 0.0)
    p = initial_precision(delta)
    last: PrecisionError | None = None
    while p <= MAX_PRECISION:
        try:
            poly = _certify(delta, p)
            break
        except PrecisionError as exc:
            last = exc
            p *= 2
    else:
        raise PrecisionError(f"H_{delta}: precision cap reached ({last})",
                             index=getattr(last, "index", None))
    if path is not None:
        _write_cache(path, poly.coeffs)
    return poly


def hilbert_class_polynomial(disc, cache_dir: str | os.PathLike | None = None) -> ClassPolynomial:
    """The monic integer polynomial whose roots are the singular moduli of ``disc``.

    Coefficients are certified: each is the unique integer inside a ball of
    radius < 1/2.  ``cache_dir`` (or ``$MODULI_CACHE_DIR``) enables the on-disk
    cache ``<cache_dir>/hcp/<|delta|>.txt``.
    """
    delta = _as_int(disc)
    if cache_dir is None:
        cache_dir = default_cache_dir()
    return _hcp(delta, str(cache_dir) if cache_dir is not None else None)


def certified_class_polynomial(disc, precision_bits: int) -> ClassPolynomial:
    """Uncached certification at an explicit precision (for reproducibility checks)."""
    return _certify(_as_int(disc), precision_bits)


# -- q-expansion of j ---------------------------------------------------------

def _series_mul(a: list[int], b: list[int], n: int) -> list[int]:
    out = [0] * n
    for i, x in enumerate(a[:n]):
        if x:
            for j, y in enumerate(b[: n - i]):
                out[i + j] += x * y
    return out


def _series_inverse(a: list[int], n: int) -> list[int]:
    if a[0] != 1:
        raise ValueError("leading coefficient must be 1")
    inv = [0] * n
    inv[0] = 1
    for k in range(1, n):
        inv[k] = -sum(a[i] * inv[k - i] for i in range(1, min(k, len(a) - 1) + 1))
    return inv


class JSeries:
    """Exact Fourier coefficients ``c_{-1}, ..., c_N`` of ``j``.

    ``coefficients[n + 1] == c_n``.
    """

    def __init__(self, order: int):
        if order < 1:
            raise ValueError("order must be positive")
        self.order = order
        m = order + 2  # terms of q*j
        sig = _sigma3_table(m)
        e4 = [1] + [240 * sig[k] for k in range(1, m)]
        e4_cubed = _series_mul(_series_mul(e4, e4, m), e4, m)
        euler = [0] * m
        k = 0
        while True:
            hit = False
            for g, sign in ((k * (3 * k - 1) // 2, (-1) ** k), (k * (3 * k + 1) // 2, (-1) ** k)):
                if g < m:
                    euler[g] = sign
                    hit = True
            if not hit:
                break
            k += 1
        p24 = [1] + [0] * (m - 1)
        for _ in range(24):
            p24 = _series_mul(p24, euler, m)
        self.coefficients = tuple(_series_mul(e4_cubed, _series_inverse(p24, m), m))

    def __getitem__(self, n: int) -> int:
        return self.coefficients[n + 1]

    def tail_bound(self, r: float) -> float:
        """Majorant of ``sum_{n > N} c_n r**n`` for ``0 <= r <= exp(-pi*sqrt(3))``,
        from the coefficient bound ``c_n <= exp(4*pi*sqrt(n))``."""
        n = self.order + 1
        if r <= 0:
            return 0.0
        ratio = math.exp(2 * math.pi / math.sqrt(n)) * r
        if ratio >= 0.5:
            raise ValueError("nome too large for the tail majorant")
        return 2 * math.exp(4 * math.pi * math.sqrt(n) + n * math.log(r))

    def partial_sum(self, q: complex) -> complex:
        return sum(self.coefficients[k] * q ** (k - 1) for k in range(len(self.coefficients)))
