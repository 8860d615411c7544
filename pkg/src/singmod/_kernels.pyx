# cython: language_level=3
"""Compiled scan over reduced binary quadratic forms of negative discriminant."""

import numpy as np

cdef inline long _gcd(long a, long b) nogil:
    cdef long t
    while b:
        t = a % b
        a = b
        b = t
    return a


def form_stats(long limit):
    """Per-|disc| counts for every discriminant -n with 0 < n <= limit.

    Returns ``(h, amb, lead)``: class numbers, ambiguous-form counts and a
    ``(limit + 1, 6)`` table of form counts by leading coefficient 1..5.
    """
    h_arr = np.zeros(limit + 1, dtype=np.int64)
    amb_arr = np.zeros(limit + 1, dtype=np.int64)
    lead_arr = np.zeros((limit + 1, 6), dtype=np.int64)
    cdef long[::1] h = h_arr
    cdef long[::1] amb = amb_arr
    cdef long[:, ::1] lead = lead_arr
    cdef long a, b, c, g, n, cmax, ab_gcd
    cdef bint ambiguous
    with nogil:
        a = 1
        while 3 * a * a <= limit:
            for b in range(-a + 1, a + 1):
                ab_gcd = _gcd(a, b if b >= 0 else -b)
                cmax = (limit + b * b) // (4 * a)
                for c in range(a, cmax + 1):
                    if c == a and b < 0:
                        continue
                    if ab_gcd != 1:
                        g = _gcd(ab_gcd, c)
                        if g != 1:
                            continue
                    n = 4 * a * c - b * b
                    h[n] += 1
                    ambiguous = b == 0 or b == a or a == c
                    if ambiguous:
                        amb[n] += 1
                    if a <= 5:
                        lead[n, a] += 1
            a += 1
    return h_arr, amb_arr, lead_arr
