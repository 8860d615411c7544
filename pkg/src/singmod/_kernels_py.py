"""Vectorised numpy fallback for :mod:`singmod._kernels`."""

from math import gcd

import numpy as np


def form_stats(limit: int):
    h = np.zeros(limit + 1, dtype=np.int64)
    amb = np.zeros(limit + 1, dtype=np.int64)
    lead = np.zeros((limit + 1, 6), dtype=np.int64)
    a = 1
    while 3 * a * a <= limit:
        for b in range(-a + 1, a + 1):
            cmax = (limit + b * b) // (4 * a)
            cmin = a if b >= 0 else a + 1
            if cmax < cmin:
                continue
            c = np.arange(cmin, cmax + 1, dtype=np.int64)
            g = gcd(a, b)
            if g != 1:
                c = c[np.gcd(c, g) == 1]
            n = 4 * a * c - b * b
            np.add.at(h, n, 1)
            if b == 0 or b == a:
                np.add.at(amb, n, 1)
            else:
                eq = n[c == a]
                if eq.size:
                    np.add.at(amb, eq, 1)
            if a <= 5:
                np.add.at(lead[:, a], n, 1)
        a += 1
    return h, amb, lead
