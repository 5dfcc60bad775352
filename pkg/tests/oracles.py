"""Independent reference computations used by several test files."""

import numpy as np
from scipy import optimize


def f_ref(x, s1, s2, E, K, p):
    A = E - K * x
    return s1 * np.abs(A) ** (p - 2) * A - s2 * A - s2 * x


def grid_scan_root(s1, s2, E, K, p, points=1_000_001, zooms=3):
    """Locate the sign change of f on a dense grid, then zoom in on it.

    Needs nothing but evaluation of f.
    """
    lo, hi = root_interval(E, K)
    lo, hi = lo - 1e-12, hi + 1e-12
    for _ in range(zooms):
        x = np.linspace(lo, hi, points)
        v = f_ref(x, s1, s2, E, K, p)
        exact = np.flatnonzero(v == 0)
        if exact.size:
            return float(x[exact[0]])
        k = np.flatnonzero(np.sign(v[:-1]) != np.sign(v[1:]))
        assert k.size == 1, "matching function must change sign exactly once"
        lo, hi = x[k[0]], x[k[0] + 1]
    return 0.5 * (lo + hi)


def root_interval(E, K):
    """f > 0 at -E/(1-K) and f < 0 at E/K, so the root lies between them."""
    a, b = -E / (1 - K), E / K
    return min(a, b), max(a, b)


def brentq_root(s1, s2, E, K, p):
    lo, hi = root_interval(E, K)
    lo, hi = lo - 1e-9, hi + 1e-9
    return optimize.brentq(f_ref, lo, hi, args=(s1, s2, E, K, p), xtol=1e-300, rtol=1e-15)


def random_problems(rng, n, p_range=(1.2, 4.0)):
    """sigma1, sigma2 log-uniform on [0.1, 10]; |E| in [0.1, 5]; K in [0.02, 0.65]."""
    s1 = 10 ** rng.uniform(-1, 1, n)
    s2 = 10 ** rng.uniform(-1, 1, n)
    E = rng.uniform(0.1, 5, n) * rng.choice([-1.0, 1.0], n)
    K = rng.uniform(0.02, 0.65, n)
    p = rng.uniform(*p_range, n)
    return list(zip(s1, s2, E, K, p))
