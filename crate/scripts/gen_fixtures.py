"""Multiprecision reference values for the test suite.

Every value is computed with mpmath at 60 significant digits and written as a
pair of doubles (hi, lo) whose sum carries about 32 digits. Rerunning the
script reproduces the files byte for byte.

Usage: python3 scripts/gen_fixtures.py [outdir]
"""

import csv
import math
import os
import random
import sys

import mpmath as mp

mp.mp.dps = 60


def split(v):
    hi = float(v)
    lo = float(v - mp.mpf(hi))
    return repr(hi), repr(lo)


def black(x, v):
    x = mp.mpf(x)
    v = mp.mpf(v)
    d1 = x / v + v / 2
    d2 = x / v - v / 2
    # Phi(d1) - e^{-x} Phi(d2), written through erfc so deep tails keep their digits
    return (mp.erfc(-d1 / mp.sqrt(2)) - mp.exp(-x) * mp.erfc(-d2 / mp.sqrt(2))) / 2


def black_quad(x, v):
    """Independent evaluation: c = e^{-x} phi(z0) int_0^inf expm1(v u) e^{-z0 u - u^2/2} du."""
    x = mp.mpf(x)
    v = mp.mpf(v)
    z0 = -x / v + v / 2
    f = lambda u: mp.expm1(v * u) * mp.exp(-z0 * u - u * u / 2)
    peak = max(mp.mpf(0), v - z0)
    s = 1 / max(mp.mpf(1), z0 - v)
    pts = [mp.mpf(0)] + [peak * (1 - mp.mpf(2) ** -k) for k in range(1, 5) if peak > 0]
    pts += [peak + s * mp.mpf(2) ** k for k in range(-3, 9)] + [mp.inf]
    return mp.exp(-x) * mp.npdf(z0) * mp.quad(f, pts)


def implied(x, c):
    lc = mp.log(mp.mpf(c))

    def g(lv):
        c = black(x, mp.exp(lv))
        return mp.log(c) - lc if c > 0 else mp.mpf(-1)

    lo, hi = mp.mpf(-60), mp.mpf(5)
    for _ in range(400):
        mid = (lo + hi) / 2
        if g(mid) < 0:
            lo = mid
        else:
            hi = mid
    return mp.exp((lo + hi) / 2)


def write(path, header, rows):
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def erfcx_rows():
    zs = [-10 + 40 * i / 999 for i in range(1000)]
    zs += [0.0, 1.0, 2.0, 2.5, 2.4999999999999996, 4.0, 0.46875, -0.46875, -26.0]
    rows = []
    for z in zs:
        e = mp.exp(mp.mpf(z) ** 2) * mp.erfc(z)
        rows.append((repr(z),) + split(e))
    return rows


def normal_rows():
    zs = [-40.0, -38.0, -20.0, -8.0, -1.5, -1.0, -0.1, 0.0, 0.1, 1.0, 1.23, 3.0, 8.0]
    rows = []
    for z in zs:
        rows.append((repr(z),) + split(mp.ncdf(z)) + split(mp.npdf(z)))
    return rows


def black_rows():
    rnd = random.Random(20240611)
    pts = [(-5.0, 0.79), (-1.0, 0.5), (0.0, 0.2), (-30.0, 0.5), (-13.8, 0.3), (-1e-8, 1e-3), (-1e-9, 1e-9)]
    pts += [(-0.0488, 0.025), (-1e-4, 1e-3), (-0.5, 0.01), (-3.0, 0.05), (0.0, 1e-6), (-2.0, 6.0)]
    for _ in range(300):
        x = -10 ** rnd.uniform(-10, math.log10(20))
        v = 10 ** rnd.uniform(-4, math.log10(6))
        pts.append((x, v))
    for _ in range(60):
        pts.append((0.0, 10 ** rnd.uniform(-8, 0.5)))
    rows = []
    for x, v in pts:
        c = black(x, v)
        rows.append((repr(x), repr(v)) + split(mp.log(c)))
    return rows


def quadrature_rows():
    rnd = random.Random(7)
    pts = [(-1.0, 0.5)]
    while len(pts) < 100:
        x = -10 ** rnd.uniform(-6, math.log10(8))
        v = 10 ** rnd.uniform(-2, math.log10(3))
        c = black(x, v)
        if c > 1e-200:
            pts.append((x, v))
    rows = []
    for x, v in pts:
        rows.append((repr(x), repr(v)) + split(black_quad(x, v)))
    return rows


def root_rows():
    named = [
        ("atm_v0.1", 0.0, black(0.0, 0.1)),
        ("atm_v0.2", 0.0, black(0.0, 0.2)),
        ("put_100_80_sigma0.3", math.log(0.8), black(math.log(0.8), 0.3 * 0.5)),
        ("x-1_c0.01", -1.0, mp.mpf(0.01)),
        ("x0_c0.0797", 0.0, mp.mpf(0.0797)),
        ("x-3_c1e-12", -3.0, mp.mpf(1e-12)),
        ("x-3_c1e-3", -3.0, mp.mpf(1e-3)),
        ("x0_c1e-4", 0.0, mp.mpf(1e-4)),
        ("x-1_q0.005", -1.0, 1 - mp.mpf(0.005)),
        ("x-13.8_c1e-30", -13.8, mp.mpf(1e-30)),
        ("x-1e-8_c1e-6", -1e-8, mp.mpf(1e-6)),
        ("x-1e-9_c1e-20", -1e-9, mp.mpf(1e-20)),
        ("x0_c1e-7", 0.0, mp.mpf(1e-7)),
        ("x-5e-9_c3e-7", -5e-9, mp.mpf(3e-7)),
        ("x-1e-8_c1e-15", -1e-8, mp.mpf(1e-15)),
    ]
    rows = []
    for name, x, c in named:
        cf = float(c)
        v = implied(x, mp.mpf(cf))
        rows.append((name, repr(x), repr(cf)) + split(v))
    return rows


def main():
    out = sys.argv[1] if len(sys.argv) > 1 else "crates/impvol/tests/fixtures"
    os.makedirs(out, exist_ok=True)
    write(os.path.join(out, "erfcx.csv"), ["z", "hi", "lo"], erfcx_rows())
    write(os.path.join(out, "normal.csv"), ["z", "cdf_hi", "cdf_lo", "pdf_hi", "pdf_lo"], normal_rows())
    write(os.path.join(out, "black.csv"), ["x", "v", "lnc_hi", "lnc_lo"], black_rows())
    write(os.path.join(out, "quadrature.csv"), ["x", "v", "c_hi", "c_lo"], quadrature_rows())
    write(os.path.join(out, "roots.csv"), ["name", "x", "c", "v_hi", "v_lo"], root_rows())


if __name__ == "__main__":
    main()
