"""Prime-splitting tests for fields generated by singular moduli.

A prime ``p`` that does not divide ``delta`` and is represented by the
principal form of ``delta`` splits completely in the ring class field, hence
in every subfield of it.  When ``H mod p`` is squarefree, ``H`` splits into
linear factors mod ``p`` exactly when ``p`` splits completely in the field
generated by one of its roots.  Both facts give one-sided certificates that
two fields differ or that one is not contained in another.
"""

from __future__ import annotations

from functools import lru_cache

from singmod.quadforms import dominant_form

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin for n < 3.3e24."""
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _trim(v: list[int]) -> list[int]:
    while v and v[-1] == 0:
        v.pop()
    return v


def _mulmod(a: list[int], b: list[int], m: list[int], p: int) -> list[int]:
    # a, b ascending of length < deg m; m monic ascending
    n = len(m) - 1
    r = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                r[i + j] += x * y
    for k in range(len(r) - 1, n - 1, -1):
        c = r[k] % p
        if c:
            base = k - n
            for i in range(n):
                r[base + i] -= c * m[i]
    return [x % p for x in r[:n]]


def splits_completely_mod(coeffs: tuple[int, ...] | list[int], p: int) -> bool:
    """Whether the monic polynomial divides x^p - x mod p (distinct linear factors)."""
    m = [c % p for c in coeffs]
    n = len(m) - 1
    if n == 1:
        return True
    result = [1] + [0] * (n - 1)
    base = [0, 1] + [0] * (n - 2)
    e = p
    while e:
        if e & 1:
            result = _mulmod(result, base, m, p)
        e >>= 1
        if e:
            base = _mulmod(base, base, m, p)
    return result == [0, 1] + [0] * (n - 2)


def squarefree_mod(coeffs: tuple[int, ...] | list[int], p: int) -> bool:
    """Whether gcd(H, H') = 1 over F_p."""
    a = _trim([c % p for c in coeffs])
    b = _trim([(i * c) % p for i, c in enumerate(coeffs)][1:])
    if not b:
        return False
    while b:
        inv = pow(b[-1], -1, p)
        while len(a) >= len(b):
            c = a[-1] * inv % p
            s = len(a) - len(b)
            for i, y in enumerate(b):
                a[s + i] = (a[s + i] - c * y) % p
            _trim(a)
        a, b = b, a
    return len(a) == 1


def splitting_pattern(coeffs, p: int) -> bool | None:
    """True/False for (non-)complete splitting, None when p is unusable."""
    if coeffs[-1] % p == 0 or not squarefree_mod(coeffs, p):
        return None
    return splits_completely_mod(coeffs, p)


@lru_cache(maxsize=8192)
def principal_primes(delta: int, n: int = 24) -> tuple[int, ...]:
    """n primes prime to delta represented by its principal form (deterministic search)."""
    f = dominant_form(delta)
    width = 64
    while True:
        bound = f.c * width * width // 4
        vals = set()
        for y in range(0, width + 1):
            for x in range(-width, width + 1):
                v = f.a * x * x + f.b * x * y + f.c * y * y
                if 1 < v <= bound and delta % v and is_prime(v):
                    vals.add(v)
        if len(vals) >= n:
            return tuple(sorted(vals)[:n])
        width *= 2


def small_primes(limit: int) -> list[int]:
    sieve = bytearray([1]) * (limit + 1)
    sieve[:2] = b"\x00\x00"
    for i in range(2, int(limit ** 0.5) + 1):
        if sieve[i]:
            sieve[i * i::i] = bytearray(len(sieve[i * i::i]))
    return [i for i, v in enumerate(sieve) if v]


def not_in_ring_class_field(delta: int, coeffs, n: int = 24) -> bool:
    """Certify that a root of ``coeffs`` does not lie in the ring class field of delta.

    Returns True only with a witness prime; False means undecided.
    """
    for p in principal_primes(delta, n):
        if splitting_pattern(coeffs, p) is False:
            return True
    return False


def fields_differ(coeffs_a, coeffs_b, primes) -> bool:
    """Certify Q(root of a) != Q(root of b) by a prime that splits completely in only one."""
    for p in primes:
        sa = splitting_pattern(coeffs_a, p)
        if sa is None:
            continue
        sb = splitting_pattern(coeffs_b, p)
        if sb is not None and sa != sb:
            return True
    return False
