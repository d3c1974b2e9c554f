"""The Takagi-Knopp function F(x) = sum_j 2^(-alpha j) Lambda(tau^j x).

Values of the partial sums F_n at points with exact digit tails are exact
Laurent polynomials in ``t = 2^-alpha`` with rational coefficients
(:class:`TPoly`).  Numeric brackets are obtained by outward-rounded interval
evaluation.  Float helpers at the bottom are used by the scanning code paths
where millions of evaluations are needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from mpmath import iv

from .bounds import DEFAULT_PREC, MAX_PREC, RealBound, iv_rational, working_precision
from .digits import DigitStream, EventuallyPeriodic, FiniteDyadic, Truncated
from .errors import DepthExceeded, OutOfDomain, PrecisionUnreachable


@dataclass(frozen=True)
class Alpha:
    """Regularity parameter in (0, 1).

    ``value`` is kept as an exact rational (decimal literals are read
    exactly, so ``Alpha(0.3)`` means 3/10).
    """

    value: Fraction

    def __post_init__(self):
        v = self.value
        if isinstance(v, float):
            v = Fraction(repr(v))
        v = Fraction(v)
        if not 0 < v < 1:
            raise OutOfDomain(f"alpha must lie in (0, 1), got {v}")
        object.__setattr__(self, "value", v)

    @classmethod
    def of(cls, a) -> "Alpha":
        return a if isinstance(a, Alpha) else cls(a)

    @property
    def alpha(self) -> float:
        return float(self.value)

    @property
    def t_scale(self) -> float:
        """2^-alpha, the ratio of the series."""
        return 2.0 ** -self.alpha

    @property
    def t_slope(self) -> float:
        """2^(1-alpha) = 2 * t_scale, the growth factor of the slopes."""
        return 2.0 ** (1.0 - self.alpha)

    def t_scale_iv(self):
        return iv.mpf(2) ** (-iv_rational(self.value))

    def t_slope_iv(self):
        return 2 * self.t_scale_iv()

    @property
    def fmax(self) -> float:
        """Global maximum F(1/3) = 1 / (3 (1 - t))."""
        return 1.0 / (3.0 * (1.0 - self.t_scale))

    @property
    def fmean(self) -> float:
        """Integral of F over [0, 1] = 1 / (4 (1 - t))."""
        return 1.0 / (4.0 * (1.0 - self.t_scale))


class TPoly:
    """Finite Laurent polynomial sum_j c_j t^j with rational coefficients."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=None):
        items = {}
        for j, c in dict(coeffs or {}).items():
            c = Fraction(c)
            if c:
                items[int(j)] = c
        self.coeffs = items

    @classmethod
    def constant(cls, c) -> "TPoly":
        return cls({0: c})

    def __add__(self, other: "TPoly") -> "TPoly":
        out = dict(self.coeffs)
        for j, c in _as_tpoly(other).coeffs.items():
            out[j] = out.get(j, 0) + c
        return TPoly(out)

    __radd__ = __add__

    def __neg__(self) -> "TPoly":
        return TPoly({j: -c for j, c in self.coeffs.items()})

    def __sub__(self, other) -> "TPoly":
        return self + (-_as_tpoly(other))

    def __rsub__(self, other) -> "TPoly":
        return _as_tpoly(other) - self

    def __mul__(self, other) -> "TPoly":
        if isinstance(other, TPoly):
            out = {}
            for i, a in self.coeffs.items():
                for j, b in other.coeffs.items():
                    out[i + j] = out.get(i + j, 0) + a * b
            return TPoly(out)
        q = Fraction(other)
        return TPoly({j: c * q for j, c in self.coeffs.items()})

    __rmul__ = __mul__

    def shift(self, k: int) -> "TPoly":
        """Multiply by t^k."""
        return TPoly({j + k: c for j, c in self.coeffs.items()})

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = TPoly.constant(other)
        return isinstance(other, TPoly) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(frozenset(self.coeffs.items()))

    def is_zero(self) -> bool:
        return not self.coeffs

    def coefficient(self, j: int) -> Fraction:
        return self.coeffs.get(j, Fraction(0))

    def evaluate_iv(self, alpha: Alpha):
        """Interval enclosure at the current working precision."""
        if not self.coeffs:
            return iv.mpf(0)
        t = alpha.t_scale_iv()
        lo, hi = min(self.coeffs), max(self.coeffs)
        acc = iv.mpf(0)
        for j in range(hi, lo - 1, -1):
            acc = acc * t + iv_rational(self.coeffs.get(j, 0))
        if lo:
            acc = acc * t ** lo
        return acc

    def evaluate(self, alpha, prec: int = DEFAULT_PREC) -> RealBound:
        alpha = Alpha.of(alpha)
        with working_precision(prec):
            return RealBound.from_iv(self.evaluate_iv(alpha))

    def value(self, alpha) -> float:
        """Float value at t = 2^-alpha (no guarantee; for reporting)."""
        t = Alpha.of(alpha).t_scale
        return float(sum(float(c) * t ** j for j, c in self.coeffs.items()))

    def reduced(self, alpha) -> "TPoly":
        """Canonical form modulo the minimal polynomial of t.

        With alpha = P/Q in lowest terms, t^Q = 2^-P and x^Q - 2^-P is
        irreducible, so the value is zero iff the reduced form is empty.
        """
        a = Alpha.of(alpha).value
        P, Q = a.numerator, a.denominator
        out = {}
        for j, c in self.coeffs.items():
            q, r = divmod(j, Q)
            out[r] = out.get(r, 0) + c * Fraction(2) ** (-P * q)
        return TPoly(out)

    def vanishes_at(self, alpha) -> bool:
        return self.reduced(alpha).is_zero()

    def sign(self, alpha, prec: int = DEFAULT_PREC) -> int:
        """Exact sign of the value at t = 2^-alpha."""
        if self.vanishes_at(alpha):
            return 0
        p = prec
        while p <= MAX_PREC:
            b = self.evaluate(alpha, p)
            if b.lower > 0:
                return 1
            if b.upper < 0:
                return -1
            p *= 2
        raise PrecisionUnreachable(f"sign of a non-zero value unresolved at {MAX_PREC} bits")

    def __repr__(self):
        if not self.coeffs:
            return "TPoly(0)"
        terms = [f"{c}*t^{j}" if j else f"{c}" for j, c in sorted(self.coeffs.items())]
        return "TPoly(" + " + ".join(terms) + ")"


def _as_tpoly(x) -> TPoly:
    return x if isinstance(x, TPoly) else TPoly.constant(x)


# --------------------------------------------------------------------------


def lambda_(x) -> Fraction:
    """Tent map min(x, 1 - x) on [0, 1] (the distance to the integers)."""
    x = Fraction(x)
    if not 0 <= x <= 1:
        raise OutOfDomain(f"{x} is outside [0, 1]")
    return min(x, 1 - x)


def _lambda_range(a: Fraction, b: Fraction) -> tuple:
    lo = min(lambda_(a), lambda_(b))
    hi = Fraction(1, 2) if a <= Fraction(1, 2) <= b else max(lambda_(a), lambda_(b))
    return lo, hi


def _tail_value(x: DigitStream, j: int, guard: int) -> tuple:
    return x.tail_bracket(j, guard)


def partial_sum_value(x: DigitStream, n: int, alpha=None, guard: int = DEFAULT_PREC) -> TPoly:
    """F_n(x) as a polynomial in t; exact for dyadic and periodic streams.

    Other streams read digits ``j+1 .. j+guard`` for each coefficient and
    use the midpoint of the resulting range, so each coefficient is off by
    at most 2^-guard; :func:`partial_sum_bracket` gives rigorous bounds.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    coeffs = {}
    for j in range(n + 1):
        lo, hi = _tail_value(x, j, guard)
        coeffs[j] = lambda_(lo) if lo == hi else (sum(_lambda_range(lo, hi)) / 2)
    return TPoly(coeffs)


def partial_sum_bracket(x: DigitStream, n: int, guard: int = DEFAULT_PREC) -> tuple:
    """``(lower, upper)`` TPoly pair enclosing F_n(x) coefficientwise."""
    lo_c, hi_c = {}, {}
    for j in range(n + 1):
        a, b = _tail_value(x, j, guard)
        lo_c[j], hi_c[j] = _lambda_range(a, b)
    return TPoly(lo_c), TPoly(hi_c)


def dyadic_value(K: int, N: int) -> TPoly:
    """F(K / 2^N) exactly; only the first N terms of the series are non-zero."""
    x = FiniteDyadic(K, N)
    if x.N == 0:
        return TPoly()
    return partial_sum_value(x, x.N - 1)


def slope_poly(x: DigitStream, n: int) -> TPoly:
    """C_n(x) = sum_{j<=n} (-1)^{i_{j+1}} 2^j t^j."""
    bits = x.digits(1, n + 2)
    return TPoly({j: (-1 if bits[j] else 1) * (1 << j) for j in range(n + 1)})


def slope(x: DigitStream, n: int, alpha, prec: int = DEFAULT_PREC):
    """Slope of the affine piece of F_n containing x: exact TPoly and bracket."""
    p = slope_poly(x, n)
    return p, p.evaluate(alpha, prec)


def tail_bound(n: int, alpha, prec: int = DEFAULT_PREC) -> RealBound:
    """T(n) = t^(n+1) / (2 (1 - t)), so that 0 <= F - F_n <= T(n)."""
    if n < 0:
        raise ValueError("n must be non-negative")
    a = Alpha.of(alpha)
    with working_precision(prec):
        t = a.t_scale_iv()
        return RealBound.from_iv(t ** (n + 1) / (2 * (1 - t)))


def _periodic_value_iv(x: EventuallyPeriodic, alpha: Alpha):
    a, p = len(x.preamble), len(x.period)
    t = alpha.t_scale_iv()
    head = partial_sum_value(x, a - 1).evaluate_iv(alpha) if a else iv.mpf(0)
    y = x.shift(a)
    cycle = partial_sum_value(y, p - 1).evaluate_iv(alpha)
    return head + t ** a * cycle / (1 - t ** p)


def _series_bracket_iv(x: DigitStream, alpha: Alpha, n: int, guard: int):
    lo, hi = partial_sum_bracket(x, n, guard)
    t = alpha.t_scale_iv()
    tail = t ** (n + 1) / (2 * (1 - t))
    a, b = lo.evaluate_iv(alpha), hi.evaluate_iv(alpha) + tail
    return iv.mpf([a.a, b.b])


def eval_F(x: DigitStream, alpha, eps: float = 1e-12, prec: int = DEFAULT_PREC) -> RealBound:
    """Bracket of F(x) of width at most ``eps``.

    Dyadic and periodic points are summed in closed form; other streams use
    F_n plus the tail bound, reading enough digits for the requested width.
    Precision doubles from ``prec`` up to ``MAX_PREC`` before giving up.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    a = Alpha.of(alpha)
    t = a.t_scale
    n = max(0, math.ceil(math.log(eps * (1 - t) / 2) / math.log(t)))
    guard = max(8, math.ceil(-math.log2(eps * (1 - t))) + 3)
    if isinstance(x, Truncated) and n + guard > x.depth:
        # the unknown tail of a truncated stream limits the reachable width
        n = max(0, x.depth - 1)
    p = prec
    while p <= MAX_PREC:
        with working_precision(p):
            if isinstance(x, FiniteDyadic):
                v = dyadic_value(x.K, x.N).evaluate_iv(a)
            elif isinstance(x, EventuallyPeriodic):
                v = _periodic_value_iv(x, a)
            else:
                v = _series_bracket_iv(x, a, n, guard)
            b = RealBound.from_iv(v)
        if b.width <= eps:
            return b
        if isinstance(x, Truncated):
            raise DepthExceeded(x.depth, n + guard)
        p *= 2
    raise PrecisionUnreachable(f"width {b.width} > {eps} at {MAX_PREC} bits")


# --------------------------------------------------------------------------
# float paths


def F_float(x, alpha, max_terms: int = 1100) -> np.ndarray:
    """F at float arguments.

    A double is a dyadic rational, so tau^j x reaches 0 after finitely many
    doublings and the series terminates; the only error is float rounding.
    """
    t = Alpha.of(alpha).t_scale
    y = np.array(x, dtype=float, copy=True)
    if np.any((y < 0) | (y > 1)):
        raise OutOfDomain("arguments must lie in [0, 1]")
    acc = np.zeros_like(y)
    w = 1.0
    for _ in range(max_terms):
        acc += w * np.minimum(y, 1.0 - y)
        y = np.where(y >= 0.5, 2.0 * y - 1.0, 2.0 * y)
        w *= t
        if np.all((y == 0.0) | (y == 1.0)):
            break
    return acc


def dyadic_grid_values(N: int, alpha) -> np.ndarray:
    """Floats F(k / 2^N), k = 0..2^N, by midpoint displacement."""
    t = Alpha.of(alpha).t_scale
    v = np.zeros(2)
    tm = 1.0
    for m in range(N):
        mids = 0.5 * (v[:-1] + v[1:]) + 0.5 * tm
        out = np.empty(2 * len(v) - 1)
        out[0::2] = v
        out[1::2] = mids
        v = out
        tm *= t
    return v


def holder_probe(alpha, pair_count: int, seed: int) -> float:
    """Largest |F(x) - F(y)| / |x - y|^alpha over seeded random pairs."""
    if pair_count < 1:
        raise ValueError("pair_count must be positive")
    a = Alpha.of(alpha)
    rng = np.random.default_rng(seed)
    x = rng.random(pair_count)
    d = np.exp2(-rng.uniform(1.0, 40.0, pair_count)) * rng.choice([-1.0, 1.0], pair_count)
    y = np.clip(x + d, 0.0, 1.0)
    keep = y != x
    x, y = x[keep], y[keep]
    num = np.abs(F_float(x, a) - F_float(y, a))
    return float(np.max(num / np.abs(x - y) ** a.alpha))
