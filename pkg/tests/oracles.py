"""Reference computations that share no code with the package.

Everything here works straight from the series definition:
F(x) = sum_j t^j dist(2^j x, Z), t = 2^-alpha.
"""

from fractions import Fraction

import mpmath
import numpy as np


def series_value(x, alpha, terms=400, dps=40):
    """Direct partial sum at a rational x with exact tent-map iterates.

    The truncation error is at most t^terms / (2 (1 - t)), below 1e-20 for
    alpha >= 0.3 and the default number of terms.
    """
    x = Fraction(x)
    with mpmath.workdps(dps):
        t = mpmath.mpf(2) ** (-mpmath.mpf(Fraction(alpha).numerator) / Fraction(alpha).denominator)
        acc = mpmath.mpf(0)
        w = mpmath.mpf(1)
        y = x
        for _ in range(terms):
            frac = y - (y.numerator // y.denominator)
            d = min(frac, 1 - frac)
            acc += w * mpmath.mpf(d.numerator) / d.denominator
            w *= t
            y = 2 * frac
        return acc


def grid_values(n, alpha):
    """F(K / 2^n) for K = 0..2^n as floats, from integer tent-map iterates."""
    t = 2.0 ** -alpha
    size = 1 << n
    K = np.arange(size + 1, dtype=np.int64)
    acc = np.zeros(size + 1)
    mask = size - 1
    for j in range(n):
        m = (K << j) & mask
        acc += t ** j * np.minimum(m, size - m) / size
    return acc


def fmax(alpha):
    t = 2.0 ** -alpha
    return 1.0 / (3.0 * (1.0 - t))


def grid_interval_extrema(values, n, depth, alpha):
    """Per-interval (min, max, argmax) at dyadic depth ``depth`` from grid values.

    Returns ``(mins, maxs, argmax, slack)``: the true max lies in
    ``[maxs, maxs + slack]`` because F exceeds the chord of a grid cell by at
    most t^n max F; minima sit at dyadic points, so they are exact.
    """
    step = 1 << (n - depth)
    blocks = values[:-1].reshape(1 << depth, step)
    right = values[step::step]
    mins = np.minimum(blocks.min(axis=1), right)
    maxs = np.maximum(blocks.max(axis=1), right)
    arg = blocks.argmax(axis=1)
    slack = (2.0 ** -alpha) ** n * fmax(alpha)
    return mins, maxs, arg, slack


def _clamp_integral(a, b, lo, hi):
    """Integral over [0, 1] of clamp(a + (b - a) u, lo, hi), via ramp antiderivatives."""
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    d = b - a
    flat = np.abs(d) < 1e-300
    dd = np.where(flat, 1.0, d)

    def ramp2(z):
        return 0.5 * np.maximum(z, 0.0) ** 2

    sloped = lo + (ramp2(b - lo) - ramp2(a - lo) - ramp2(b - hi) + ramp2(a - hi)) / dd
    return np.where(flat, np.clip(a, lo, hi), sloped)


def omega_measure_bracket(x0, y0, r, alpha, n):
    """Rigorous bracket of the area of Omega in the sup-norm box of radius r.

    Uniform grid of depth n; on each cell F lies between the chord and the
    chord plus t^n max F.  The box x-range is clipped to [0, 1].  Accurate
    only to about r * t^n * max F, so n must be well beyond -log2 r.
    """
    xa, xb = max(0.0, x0 - r), min(1.0, x0 + r)
    v = grid_values(n, alpha)
    h = 2.0 ** -n
    k0, k1 = int(np.floor(xa / h)), int(np.ceil(xb / h))
    k = np.arange(k0, k1)
    left, right = k * h, (k + 1) * h
    u0 = np.clip((xa - left) / h, 0.0, 1.0)
    u1 = np.clip((xb - left) / h, 0.0, 1.0)
    fa, fb = v[k], v[k + 1]
    # chord restricted to the part of the cell inside the box
    ga = fa + (fb - fa) * u0
    gb = fa + (fb - fa) * u1
    width = (u1 - u0) * h
    ylo, yhi = max(0.0, y0 - r), y0 + r
    top = (2.0 ** -alpha) ** n * fmax(alpha)
    low = np.sum(width * (_clamp_integral(ga, gb, ylo, yhi) - ylo))
    high = np.sum(width * (_clamp_integral(ga + top, gb + top, ylo, yhi) - ylo))
    return low, high, (xb - xa) * 2 * r


def trapezoid_measure(x0, y0, r, alpha, n):
    """Naive estimate: F sampled on the 2^-n grid, columns clipped in y, trapezoid rule."""
    xa, xb = max(0.0, x0 - r), min(1.0, x0 + r)
    v = grid_values(n, alpha)
    h = 2.0 ** -n
    k0, k1 = int(round(xa / h)), int(round(xb / h))
    col = np.clip(v[k0:k1 + 1], max(0.0, y0 - r), y0 + r) - max(0.0, y0 - r)
    return float(h * (col.sum() - 0.5 * (col[0] + col[-1])))
