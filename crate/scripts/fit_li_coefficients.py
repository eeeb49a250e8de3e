"""Fit the degree-(3,3) rational seed used by the Li dispatch branch.

Builds a 200x200 grid over |x| < 3, 0.0005 < c < 0.9995 with reference
volatilities from a bracketed root search on the log-price, then runs a
Sanathanan-Koerner iteration of relative-error least squares with n00 = 1
and the denominator held positive on the grid.

Usage: python3 scripts/fit_li_coefficients.py [output]
"""

import math
import sys

import cvxpy as cp
import numpy as np
from scipy.optimize import brentq
from scipy.special import erfcx

N = 200
ITERATIONS = 12
DEN_FLOOR = 0.05
IDX = [(i, j) for i in range(4) for j in range(4 - i)]


def log_price(x, v):
    h = x / v
    t = 0.5 * v
    d = erfcx(-(h + t) / math.sqrt(2)) - erfcx(-(h - t) / math.sqrt(2))
    return -0.5 * (h * h + t * t) - 0.5 * x - math.log(2) + math.log(d)


def implied(x, c):
    lc = math.log(c)
    lv = brentq(lambda u: log_price(x, math.exp(u)) - lc, -12, 4, xtol=1e-14)
    return math.exp(lv)


def grid():
    # cosine spacing concentrates nodes near x = 0 and both ends of the c range
    xs = -3 * (1 - np.cos(np.pi * (np.arange(N) + 0.5) / N / 2))
    u = (np.arange(N) + 0.5) / N
    cs = 0.0005 + 0.999 * (1 - np.cos(np.pi * u)) / 2
    rows = [(x, c, implied(x, c)) for x in xs for c in cs]
    return np.array(rows).T


def monomials(x, c):
    return np.stack([x**i * c**j for i, j in IDX], 1)


def fit(x, c, v):
    a = monomials(x, c)
    m = cp.Variable(len(IDX))
    n = cp.Variable(len(IDX))
    q = np.ones_like(v)
    for it in range(ITERATIONS):
        r = cp.multiply(1 / (v * q), a @ m - cp.multiply(v, a @ n))
        cp.Problem(cp.Minimize(cp.sum_squares(r)), [n[0] == 1, a @ n >= DEN_FLOOR]).solve()
        q = a @ n.value
        rel = np.abs((a @ m.value) / q / v - 1)
        print(f"iter {it}: max rel {rel.max():.4f} mean {rel.mean():.4f} min den {q.min():.4f}")
    return m.value, n.value


def main():
    out = sys.argv[1] if len(sys.argv) > 1 else "crates/impvol/data/li_coefficients.txt"
    x, c, v = grid()
    m, n = fit(x, c, v)
    with open(out, "w") as f:
        f.write("# degree-(3,3) rational seed v(x, c) = sum m_ij x^i c^j / sum n_ij x^i c^j\n")
        f.write("# order: m00 m01 m02 m03 m10 m11 m12 m20 m21 m30, then n in the same order\n")
        for val in list(m) + list(n):
            f.write(repr(float(val)) + "\n")


if __name__ == "__main__":
    main()
