"""Independent oracles shared by the test modules.

Nothing here calls into the solver path: kernels are re-typed from their
closed forms in naive numpy (safe for |x| well below 700), root counting is a
plain sign scan on a dense grid and refinement uses scipy's brentq.
"""
import math

import numpy as np
import pytest
from scipy.optimize import brentq


def naive_f(x, theta):
    x = np.asarray(x, dtype=float)
    return np.log((np.exp(x) + 2 * theta) / (theta**2 + theta * np.exp(x) + 1))


def naive_F(h, theta, m):
    """F_i typed directly from the general-m formula, no log-space tricks."""
    h = np.asarray(h, dtype=float)
    out = []
    for i in range(m):
        num = sum(theta ** abs(i - j) * math.exp(h[j]) for j in range(m)) + theta ** (m - i)
        den = sum(theta ** (m - j) * math.exp(h[j]) for j in range(m)) + 1
        out.append(math.log(num / den))
    return np.array(out)


def sign_changes(values):
    s = np.sign(values)
    s = s[s != 0]
    return int(np.count_nonzero(s[:-1] != s[1:]))


def dense_roots(fn, lo, hi, points=10**6):
    xs = np.linspace(lo, hi, points)
    r = fn(xs)
    idx = np.nonzero(np.sign(r[:-1]) * np.sign(r[1:]) < 0)[0]
    return [brentq(fn, xs[i], xs[i + 1], xtol=1e-15) for i in idx]


def oracle_ti_roots(theta, k, points=10**6):
    bound = k * max(abs(math.log(theta)), abs(math.log(2 * theta / (theta**2 + 1)))) + 1
    return dense_roots(lambda h: h - k * naive_f(h, theta), -bound, bound, points)


def oracle_h_star(theta, k):
    roots = oracle_ti_roots(theta, k, 200_001)
    return roots[1] if len(roots) == 3 else roots[0]


def oracle_count_eq9(theta, c, k, h_star, points=10**6):
    """Number of real l2 with l2 = d f(l2) + c h*/k, by dense sign scan."""
    d = k - c
    shift = c * h_star / k
    bound = d * max(abs(math.log(theta)), abs(math.log(2 * theta / (theta**2 + 1)))) + abs(shift) + 1
    xs = np.linspace(-bound, bound, points)
    return sign_changes(xs - d * naive_f(xs, theta) - shift)


def boundary_theta_c0(d, which):
    """theta < theta_c(d) where c = 0 sits exactly on c*_which (1 or 2).

    With c = 0 the slope is eta = 2 theta^(d+1), so the boundary solves
    ln(2 theta^(d+1)) = ln(eta_i(theta)); computed from the quadratic directly.
    """
    tc = (d - 1) / math.sqrt(d * d + 6 * d + 1)

    def gap(t):
        z = (1 + t * t) / (2 * t * t)
        s = (z - 1) * (d - 1) - 2
        disc = s * s - 4 * z
        x = (s - math.sqrt(disc)) / 2 if which == 2 else (s + math.sqrt(disc)) / 2
        # x1 gives eta1 (lower edge -> c*2), x2 gives eta2 (upper edge -> c*1)
        eta = ((1 + x) / (z + x)) ** d / x
        return math.log(2) + (d + 1) * math.log(t) - math.log(eta)

    grid = np.linspace(1e-3, tc * (1 - 1e-9), 4001)
    vals = [gap(t) for t in grid]
    for i in range(len(grid) - 1):
        if vals[i] * vals[i + 1] < 0:
            return brentq(gap, grid[i], grid[i + 1], xtol=1e-17, rtol=1e-15)
    raise ValueError("no boundary theta found")


@pytest.fixture
def rng():
    return np.random.default_rng(20261019)
