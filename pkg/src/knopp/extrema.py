"""Minima and maxima of F on dyadic intervals.

On ``I = [k/2^N, (k+1)/2^N]`` the graph of F is an affine map of the whole
graph plus a linear term, so extrema on I reduce to extrema of
``F(x) + p x`` on [0, 1].  The maximiser of the latter is one of the points
``1/(3 2^n)`` (or a mirror image), chosen by comparing ``p`` with the
thresholds ``theta_n = -(s^n - 1)/(s - 1)``, ``s = 2^(1-alpha)``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

import numpy as np
from mpmath import iv

from .bounds import DEFAULT_PREC, RealBound, iv_rational, working_precision
from .core import Alpha, TPoly, _periodic_value_iv, dyadic_value, eval_F
from .digits import DigitStream, EventuallyPeriodic, Membership, Unknown, classify_membership
from .errors import KnoppError, OutOfDomain, ThresholdAmbiguity

# thresholds grow geometrically; no finite p needs more than this many
MAX_THRESHOLD_INDEX = 4096


class ExtremumKind(enum.Enum):
    LOCAL_MIN = "LocalMin"
    LOCAL_MAX = "LocalMax"
    GLOBAL_MIN = "GlobalMin"
    GLOBAL_MAX = "GlobalMax"
    NOT_EXTREMUM = "NotExtremum"


@dataclass(frozen=True)
class DyadicInterval:
    k: int
    N: int

    def __post_init__(self):
        if self.N < 0 or not 0 <= self.k < (1 << self.N):
            raise OutOfDomain(f"need 0 <= k < 2^N, got k={self.k}, N={self.N}")

    @property
    def left(self) -> Fraction:
        return Fraction(self.k, 1 << self.N)

    @property
    def right(self) -> Fraction:
        return Fraction(self.k + 1, 1 << self.N)

    @property
    def length(self) -> Fraction:
        return Fraction(1, 1 << self.N)


@dataclass(frozen=True)
class ExtremumReport:
    """Outcome of :func:`classify_extremum` or an interval search.

    ``locations`` lists every tied abscissa; ``location`` is the first.
    ``unknown`` is set when membership could not be decided.
    """

    location: Optional[Fraction]
    value: Union[RealBound, TPoly]
    kind: ExtremumKind
    locations: frozenset = field(default_factory=frozenset)
    unknown: bool = False


def threshold(n: int) -> TPoly:
    """theta_n = -(1 + s + ... + s^(n-1)) with s = 2t."""
    return TPoly({j: -(1 << j) for j in range(n)})


def _as_p(p):
    if isinstance(p, (TPoly, RealBound)):
        return p
    if isinstance(p, float):
        p = Fraction(p)
    return TPoly.constant(p)


def _compare(p, theta: TPoly, alpha: Alpha) -> int:
    """Sign of p - theta; exact for TPoly and rational p."""
    if isinstance(p, TPoly):
        return (p - theta).sign(alpha)
    th = theta.evaluate(alpha)
    if p.lower > th.upper:
        return 1
    if p.upper < th.lower:
        return -1
    raise ThresholdAmbiguity(f"p bracket {p!r} overlaps threshold {th!r}")


def _negate(p):
    if isinstance(p, TPoly):
        return -p
    return RealBound(-p.upper, -p.lower)


def _threshold_index(p, alpha: Alpha) -> tuple:
    """For p <= 0 return (n, tie) with theta_{n+1} < p <= theta_n."""
    for n in range(MAX_THRESHOLD_INDEX):
        c = _compare(p, threshold(n + 1), alpha)
        if c > 0:
            tie = _compare(p, threshold(n), alpha) == 0
            return n, tie
        if c == 0:
            return n + 1, True
    raise ThresholdAmbiguity("p lies beyond the tabulated thresholds")


def _sign(p, alpha: Alpha) -> int:
    return _compare(p, TPoly(), alpha)


def maxima_positions(p, alpha) -> frozenset:
    """Maximisers X(p) of F(x) + p x on [0, 1] as exact rationals.

    ``p`` may be a rational, a float (read exactly), a :class:`TPoly` or a
    :class:`RealBound`.  At a threshold the two-point set is returned.
    """
    a = Alpha.of(alpha)
    p = _as_p(p)
    if _sign(p, a) > 0:
        return frozenset(1 - x for x in maxima_positions(_negate(p), a))
    n, tie = _threshold_index(p, a)
    first = Fraction(1, 3 << n)
    return frozenset({first, 2 * first}) if tie else frozenset({first})


def _value_at_iv(x: Fraction, a: Alpha):
    s = EventuallyPeriodic.from_fraction(x)
    if isinstance(s, EventuallyPeriodic):
        return _periodic_value_iv(s, a)
    return dyadic_value(s.K, s.N).evaluate_iv(a)


def _p_iv(p, a: Alpha):
    if isinstance(p, TPoly):
        return p.evaluate_iv(a)
    return p.to_iv()


def max_value(p, alpha, prec: int = DEFAULT_PREC) -> RealBound:
    """M(p), the maximum of F(x) + p x over [0, 1]."""
    a = Alpha.of(alpha)
    p = _as_p(p)
    xs = sorted(maxima_positions(p, a))
    with working_precision(prec):
        pv = _p_iv(p, a)
        vals = [_value_at_iv(x, a) + pv * iv_rational(x) for x in xs]
        out = RealBound.from_iv(vals[0])
        for v in vals[1:]:
            # both branches of a tie give the same maximum
            assert out.overlaps(RealBound.from_iv(v)), "tied maxima disagree"
    return out


def min_on_interval(I: DyadicInterval, alpha) -> tuple:
    """``(location, TPoly value)`` of the minimum of F on I.

    The minimum sits at an endpoint; ties go to the left one.
    """
    a = Alpha.of(alpha)
    fa, fb = dyadic_value(I.k, I.N), dyadic_value(I.k + 1, I.N)
    if (fb - fa).sign(a) < 0:
        return I.right, fb
    return I.left, fa


def interval_slope_ratio(I: DyadicInterval) -> TPoly:
    """p = C_{N-1} / s^N = (F(b) - F(a)) / t^N as an exact Laurent polynomial."""
    fa, fb = dyadic_value(I.k, I.N), dyadic_value(I.k + 1, I.N)
    return (fb - fa).shift(-I.N)


def max_on_interval(I: DyadicInterval, alpha, prec: int = DEFAULT_PREC) -> RealBound:
    """Certified bracket of max F on I, F(a) + t^N M(p)."""
    a = Alpha.of(alpha)
    p = interval_slope_ratio(I)
    m = max_value(p, a, prec)
    with working_precision(prec):
        fa = dyadic_value(I.k, I.N).evaluate_iv(a)
        return RealBound.from_iv(fa + a.t_scale_iv() ** I.N * m.to_iv())


def argmax_on_interval(I: DyadicInterval, alpha) -> frozenset:
    """Abscissas of the maximum of F on I."""
    p = interval_slope_ratio(I)
    return frozenset(I.left + x * I.length for x in maxima_positions(p, alpha))


def classify_extremum(x: DigitStream, alpha, eps: float = 1e-12) -> ExtremumReport:
    """Dyadic points are local minima, points of the maxima set local maxima."""
    a = Alpha.of(alpha)
    m = classify_membership(x)
    loc = x.exact_value
    try:
        value = eval_F(x, a, eps)
    except KnoppError:
        # a truncated stream may not pin F down; fall back to the range of F
        value = RealBound(0.0, a.fmax)
    if isinstance(m, Unknown):
        return ExtremumReport(loc, value, ExtremumKind.NOT_EXTREMUM, frozenset(), unknown=True)
    locs = frozenset({loc}) if loc is not None else frozenset()
    if m == Membership.DYADIC:
        if loc in (0, 1):
            return ExtremumReport(loc, value, ExtremumKind.GLOBAL_MIN, frozenset({Fraction(0), Fraction(1)}))
        return ExtremumReport(loc, value, ExtremumKind.LOCAL_MIN, locs)
    if m == Membership.MAXIMA_SET:
        if loc in (Fraction(1, 3), Fraction(2, 3)):
            return ExtremumReport(loc, value, ExtremumKind.GLOBAL_MAX, frozenset({Fraction(1, 3), Fraction(2, 3)}))
        return ExtremumReport(loc, value, ExtremumKind.LOCAL_MAX, locs)
    return ExtremumReport(loc, value, ExtremumKind.NOT_EXTREMUM, locs)


# --------------------------------------------------------------------------
# float versions for scans over all 2^N intervals


def max_value_float(p: np.ndarray, alpha) -> np.ndarray:
    """Vectorised M(p) in floating point."""
    a = Alpha.of(alpha)
    s, t = a.t_slope, a.t_scale
    p = np.asarray(p, dtype=float)
    q = -np.abs(p)
    n_max = 64
    n = np.arange(n_max + 1)
    theta = -(s ** n - 1) / (s - 1)  # decreasing
    # index n with theta_{n+1} < q <= theta_n
    idx = np.clip(np.searchsorted(-theta, -q, side="right") - 1, 0, n_max)
    xs = 1.0 / (3.0 * 2.0 ** idx)
    fx = (s ** idx - 1) / ((s - 1) * 3.0 * 2.0 ** idx) + t ** idx * a.fmax
    m = fx + q * xs
    return np.where(p > 0, p + m, m)


def interval_extrema_float(N: int, alpha, values: Optional[np.ndarray] = None) -> tuple:
    """Arrays ``(mins, maxs)`` of F over the 2^N intervals of depth N."""
    from .core import dyadic_grid_values

    a = Alpha.of(alpha)
    v = dyadic_grid_values(N, a) if values is None else values
    fa, fb = v[:-1], v[1:]
    tN = a.t_scale ** N
    p = (fb - fa) / tN
    return np.minimum(fa, fb), fa + tN * max_value_float(p, a)
