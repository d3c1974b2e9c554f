"""Local geometry of the domain under the graph of F.

``Omega = {(x, y): 0 <= x <= 1, 0 <= y <= F(x)}``.  The main primitive is a
certified bracket of the area of Omega (or of its complement) inside the
sup-norm box of radius r around a boundary point.  On a dyadic interval of
depth m, F is its chord plus ``t^m`` times a copy of F, so F lies between
the chord and the chord plus ``t^m max F``; intervals are split until those
envelopes pin the clipped area down to the requested relative accuracy.

Accessibility exponents are read off the ratios
``log meas / log r - 2`` over a range of radii ``r = 2^-k``.
"""

from __future__ import annotations

import csv
import functools
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
from mpmath import iv
from mpmath.libmp import mpf_shift, to_int

from .bounds import RealBound, working_precision
from .core import Alpha, eval_F, F_float
from .digits import DigitStream, FiniteDyadic
from .errors import OutOfDomain, PrecisionUnreachable, WitnessNotFound
from .extrema import interval_extrema_float

OMEGA = "Omega"
COMPLEMENT = "OmegaComplement"
SIDES = (OMEGA, COMPLEMENT)

# cap on simultaneously refined intervals in one measurement
MAX_ACTIVE = 1 << 21
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class ProbePoint:
    """A point (x, y) of the graph; ``y`` defaults to a bracket of F(x)."""

    x: DigitStream
    alpha: Alpha
    y: Optional[RealBound] = None
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "alpha", Alpha.of(self.alpha))

    def value(self, eps: float) -> RealBound:
        if self.y is not None:
            return self.y
        return _default_value(self.x, self.alpha, eps)


@functools.lru_cache(maxsize=4096)
def _default_value(x: DigitStream, alpha: Alpha, eps: float) -> RealBound:
    return eval_F(x, alpha, eps)


@dataclass(frozen=True)
class MeasureBound:
    lower: float
    upper: float
    radius: float
    side: str
    area: float
    flag: str = ""
    norm: str = "sup"

    def ratio(self) -> tuple:
        """``(lo, hi)`` bracket of log(meas) / log(r) - 2."""
        lr = math.log(self.radius)
        lo = math.log(self.upper) / lr - 2 if self.upper > 0 else math.inf
        hi = math.log(self.lower) / lr - 2 if self.lower > 0 else math.inf
        return lo, hi


# --------------------------------------------------------------------------
# measurement engine


def _band_parts(g0, g1, L, H):
    """Mean over [0, 1] of clamp(g) - L and of H - clamp(g) for linear g.

    Both are assembled from the pieces below, inside and above the band so
    that small results are not obtained by cancellation.
    """
    lo = np.minimum(g0, g1)
    hi = np.maximum(g0, g1)
    d = hi - lo
    pos = d > 0
    dd = np.where(pos, d, 1.0)
    sL = np.where(pos, np.clip((L - lo) / dd, 0.0, 1.0), (lo < L).astype(float))
    sH = np.where(pos, np.clip((H - lo) / dd, 0.0, 1.0), (lo < H).astype(float))
    gL = np.maximum(lo, L)
    gH = np.minimum(hi, H)
    mid = np.maximum(sH - sL, 0.0)
    band = H - L
    above = (1.0 - sH) * band + mid * (0.5 * ((gL - L) + (gH - L)))
    below = sL * band + mid * (0.5 * ((H - gL) + (H - gH)))
    return above, below


def _node_bounds(ha, hb, e, w, tm, L, H, fmax, fmean):
    """Bracket the Omega / complement parts of the band over each interval."""
    top = tm * fmax
    lo0, lo1 = ha - e, hb - e
    hi0, hi1 = ha + e + top, hb + e + top
    om_lo, oc_hi = _band_parts(lo0, lo1, L, H)
    om_hi, oc_lo = _band_parts(hi0, hi1, L, H)
    inband = (np.minimum(lo0, lo1) >= L) & (np.maximum(hi0, hi1) <= H)
    if inband.any():
        mean = 0.5 * (ha + hb) + tm * fmean
        om_lo = np.where(inband, mean - L - e, om_lo)
        om_hi = np.where(inband, mean - L + e, om_hi)
        oc_lo = np.where(inband, H - mean - e, oc_lo)
        oc_hi = np.where(inband, H - mean + e, oc_hi)
    trivial = (np.minimum(lo0, lo1) >= H) | (np.maximum(hi0, hi1) <= L)
    slack = np.where(trivial, 0.0, 16 * _EPS * (np.abs(ha) + np.abs(hb) + 2 * e + top + abs(L) + abs(H)))
    return (
        w * np.maximum(om_lo - slack, 0.0),
        w * (om_hi + slack),
        w * np.maximum(oc_lo - slack, 0.0),
        w * (oc_hi + slack),
    )


def _x_bracket(x: DigitStream, depth: int) -> tuple:
    v = x.exact_value
    if v is not None:
        return v, v
    return x.value_bracket(depth)


def _anchor_nodes(A: int, B: int, D: int, t, y0):
    """Maximal dyadic intervals tiling [A/2^D, B/2^D] with F - y0 at their ends.

    Values come from midpoint displacement in interval arithmetic along the
    two paths from [0, 1] to the ends, so only O(D) operations are needed.
    """
    out = []
    stack = [(0, 0, iv.mpf(0), iv.mpf(0), iv.mpf(1))]
    while stack:
        K, m, fa, fb, tm = stack.pop()
        lo, hi = K << (D - m), (K + 1) << (D - m)
        if hi <= A or lo >= B:
            continue
        if A <= lo and hi <= B:
            out.append((m, fa - y0, fb - y0))
            continue
        fc = (fa + fb) / 2 + tm / 2
        stack.append((2 * K + 1, m + 1, fc, fb, tm * t))
        stack.append((2 * K, m + 1, fa, fc, tm * t))
    return out


def _to_float(v) -> tuple:
    a, b = float(v.a), float(v.b)
    mid = 0.5 * (a + b)
    rad = max(b - mid, mid - a) + 4 * _EPS * max(abs(a), abs(b)) + 1e-300
    return mid, rad


def _to_fixed(v, P: int) -> tuple:
    """Interval ``v`` as ``(floor(mid * 2^P), radius in units of 2^-P)``."""
    lo = to_int(mpf_shift(v._mpi_[0], P), "f")
    hi = to_int(mpf_shift(v._mpi_[1], P), "c")
    return (lo + hi) // 2, (hi - lo) // 2 + 2


class _FloatNodes:
    """Interval states in doubles: chord end values relative to y0, an error
    radius, and t^m.  Fast, but rounding errors accumulate with depth."""

    def __init__(self, m, ha, hb, e, tm, t):
        self.m, self.ha, self.hb, self.e, self.tm, self.t = m, ha, hb, e, tm, t

    @classmethod
    def from_anchors(cls, nodes, alpha: Alpha, P: int):
        m = np.array([n[0] for n in nodes], dtype=np.int64)
        fa = [_to_float(n[1]) for n in nodes]
        fb = [_to_float(n[2]) for n in nodes]
        e = np.maximum([v[1] for v in fa], [v[1] for v in fb])
        tm = np.exp2(-alpha.alpha * m.astype(float))
        return cls(m, np.array([v[0] for v in fa]), np.array([v[0] for v in fb]), e, tm, alpha.t_scale)

    @property
    def size(self) -> int:
        return self.m.size

    def floats(self) -> tuple:
        # the float t^m is within a few ulps per level of the true one
        e = self.e + 4 * _EPS * (self.m + 2) * self.tm
        return self.ha, self.hb, e, self.tm

    def take(self, mask) -> "_FloatNodes":
        return _FloatNodes(self.m[mask], self.ha[mask], self.hb[mask], self.e[mask], self.tm[mask], self.t)

    def split(self, mask) -> "_FloatNodes":
        s = self.take(mask)
        rest = self.take(~mask)
        hc = 0.5 * (s.ha + s.hb) + 0.5 * s.tm
        ec = s.e + 4 * _EPS * (np.abs(s.ha) + np.abs(s.hb) + s.tm)
        tc = s.tm * self.t
        return _FloatNodes(
            np.concatenate([rest.m, s.m + 1, s.m + 1]),
            np.concatenate([rest.ha, s.ha, hc]),
            np.concatenate([rest.hb, hc, s.hb]),
            np.concatenate([rest.e, ec, ec]),
            np.concatenate([rest.tm, tc, tc]),
            self.t,
        )


class _FixedNodes:
    """Interval states as integers in units of 2^-P.

    Midpoint displacement is then exact up to one unit per level, so the
    error stays far below the scale of the box however large F - y0 is on
    the coarse intervals.
    """

    def __init__(self, m, ha, hb, ea, tm, t_int, P):
        self.m, self.ha, self.hb, self.ea, self.tm, self.t_int, self.P = m, ha, hb, ea, tm, t_int, P

    @classmethod
    def from_anchors(cls, nodes, alpha: Alpha, P: int):
        m = np.array([n[0] for n in nodes], dtype=np.int64)
        fa = [_to_fixed(n[1], P) for n in nodes]
        fb = [_to_fixed(n[2], P) for n in nodes]
        ea = np.array([max(u[1], v[1]) for u, v in zip(fa, fb)], dtype=object)
        t = alpha.t_scale_iv()
        t_int = _to_fixed(t, P)[0]
        tm = np.array([_to_fixed(t ** int(j), P)[0] for j in m], dtype=object)
        return cls(m, np.array([v[0] for v in fa], dtype=object), np.array([v[0] for v in fb], dtype=object),
                   ea, tm, t_int, P)

    @property
    def size(self) -> int:
        return self.m.size

    def floats(self) -> tuple:
        P = self.P
        ha = np.ldexp(self.ha.astype(float), -P)
        hb = np.ldexp(self.hb.astype(float), -P)
        tm = np.ldexp(self.tm.astype(float), -P)
        units = self.ea.astype(float) + (self.m + 4.0) ** 2
        e = np.ldexp(units, -P) + 2 * _EPS * (np.abs(ha) + np.abs(hb) + tm)
        return ha, hb, e, tm

    def take(self, mask) -> "_FixedNodes":
        return _FixedNodes(self.m[mask], self.ha[mask], self.hb[mask], self.ea[mask], self.tm[mask], self.t_int, self.P)

    def split(self, mask) -> "_FixedNodes":
        s = self.take(mask)
        rest = self.take(~mask)
        hc = ((s.ha + s.hb) >> 1) + (s.tm >> 1)
        tc = (s.tm * self.t_int) >> self.P
        return _FixedNodes(
            np.concatenate([rest.m, s.m + 1, s.m + 1]),
            np.concatenate([rest.ha, s.ha, hc]),
            np.concatenate([rest.hb, hc, s.hb]),
            np.concatenate([rest.ea, s.ea, s.ea]),
            np.concatenate([rest.tm, tc, tc]),
            self.t_int,
            self.P,
        )


class _FloatTooCoarse(Exception):
    pass


def _refine(nodes, L, H, fmax, fmean, side, rel_tol, n_cap, max_active, const_lower, extra_gap, strict):
    """Split intervals until the bracket of the requested side is tight.

    An interval is retired once its gap per unit width drops below
    ``rel_tol * lower / (4 W)``, W the total width, so retired intervals
    use at most a quarter of the final tolerance and only intervals that
    cross the band edges stay active.  Returns the four accumulated sums and
    a flag.  With ``strict`` the float representation gives up as soon as
    its rounding error, rather than the envelopes, dominates the remaining
    gap.
    """
    fin = np.zeros(4)
    want = 0 if side == OMEGA else 2
    width = float(np.sum(np.exp2(-nodes.m.astype(float))))
    while True:
        ha, hb, e, tm = nodes.floats()
        w = np.exp2(-nodes.m.astype(float))
        b = _node_bounds(ha, hb, e, w, tm, L, H, fmax, fmean)
        gap = np.maximum(b[1] - b[0], b[3] - b[2])
        lower = fin[want] + float(np.sum(b[want])) + const_lower
        target = rel_tol * lower
        fin_gap = max(fin[1] - fin[0], fin[3] - fin[2])
        total_gap = fin_gap + float(np.sum(gap)) + extra_gap
        if lower > 0 and total_gap <= target:
            return fin + [float(np.sum(v)) for v in b], ""
        rho = target / (4 * width) if lower > 0 else 0.0
        done = (gap <= rho * w) | (nodes.m >= n_cap)
        if done.any():
            fin += [float(np.sum(v[done])) for v in b]
            keep = ~done
            nodes = nodes.take(keep)
            e, w = e[keep], w[keep]
        if nodes.size == 0:
            lower = fin[want] + const_lower
            ok = lower > 0 and max(fin[1] - fin[0], fin[3] - fin[2]) + extra_gap <= rel_tol * lower
            return fin, "" if ok else "tol"
        if strict and (float(np.max(e)) > rel_tol * (H - L) / 64
                       or (lower > 0 and 2 * float(np.sum(w * e)) > target / 4)):
            raise _FloatTooCoarse
        if 2 * nodes.size > max_active:
            ha, hb, e, tm = nodes.floats()
            b = _node_bounds(ha, hb, e, w, tm, L, H, fmax, fmean)
            return fin + [float(np.sum(v)) for v in b], "budget"
        nodes = nodes.split(np.ones(nodes.size, dtype=bool))


@functools.lru_cache(maxsize=8192)
def _measure(x: DigitStream, alpha: Alpha, y: RealBound, r: Fraction, side: str, rel_tol: float,
             n_cap: int, max_active: int) -> MeasureBound:
    a = alpha
    k = -math.log2(r)
    D = min(math.ceil(k / a.alpha + math.log2(1.0 / rel_tol)) + 8, n_cap)
    xl, xh = _x_bracket(x, D + 8)
    outer_lo, outer_hi = max(Fraction(0), xl - r), min(Fraction(1), xh + r)
    inner_lo, inner_hi = max(Fraction(0), xh - r), min(Fraction(1), xl + r)
    A = math.ceil(inner_lo * (1 << D))
    B = math.floor(inner_hi * (1 << D))
    if B <= A:
        raise PrecisionUnreachable("probe point bracket is wider than the box")
    W = Fraction(B - A, 1 << D)
    sliver = float(outer_hi - outer_lo - W)
    r_f = float(r)
    area = float(outer_hi - outer_lo) * 2 * r_f

    # fixed-point resolution: well below rel_tol * r, with room for m^2 units
    P = math.ceil(max(k, 0.0) + math.log2(1.0 / rel_tol)) + 2 * math.ceil(math.log2(n_cap + 4)) + 64
    prec = max(96 + 2 * D, P + 64)
    with working_precision(prec):
        y0 = y.to_iv()
        anchors = _anchor_nodes(A, B, D, a.t_scale_iv(), y0)
        # the lower edge of the box is cut at y = 0 when y0 < r
        if y.lower < r_f:
            L, eL = _to_float(-y0)
            L = max(L, -r_f)
        else:
            L, eL = -r_f, 0.0
        H = r_f
        Wf = float(W)
        below_zero = Wf * (L + r_f)  # part of the box under the x-axis, in the complement
        extra_gap = 2 * Wf * eL + sliver * 2 * r_f
        args = (L, H, a.fmax * (1 + 1e-14), a.fmean, side, rel_tol, n_cap, max_active,
                below_zero if side == COMPLEMENT else 0.0, extra_gap)
        try:
            fin, flag = _refine(_FloatNodes.from_anchors(anchors, a, P), *args, strict=True)
        except _FloatTooCoarse:
            fin, flag = _refine(_FixedNodes.from_anchors(anchors, a, P), *args, strict=False)
    om_lo, om_hi, oc_lo, oc_hi = fin
    lo, hi = (om_lo, om_hi) if side == OMEGA else (oc_lo + below_zero, oc_hi + below_zero)
    lo = max(0.0, (lo - Wf * eL) * (1 - 1e-12))
    hi = min(area, (hi + Wf * eL + sliver * 2 * r_f) * (1 + 1e-12))
    return MeasureBound(lo, hi, r_f, side, area, flag)


def default_n_cap(k: float, alpha, rel_tol: float) -> int:
    """Deepest dyadic level refined at radius 2^-k."""
    a = Alpha.of(alpha).alpha
    return max(40, math.ceil((k + math.log2(1.0 / rel_tol)) / a) + 16)


def measure_in_box(X0: ProbePoint, r, side: str, rel_tol: float = 1e-3,
                   n_cap: Optional[int] = None, max_active: int = MAX_ACTIVE) -> MeasureBound:
    """Certified bracket of the area of Omega (or its complement) in the box.

    The box is ``[x0 - r, x0 + r] x [y0 - r, y0 + r]`` clipped to
    ``0 <= x <= 1``.  ``flag`` is ``"tol"`` or ``"budget"`` when the relative
    accuracy could not be reached; the bracket is still valid.
    """
    if side not in SIDES:
        raise ValueError(f"side must be one of {SIDES}")
    if not 0 < rel_tol < 1:
        raise ValueError("rel_tol must lie in (0, 1)")
    r = Fraction(float(r)) if not isinstance(r, Fraction) else r
    if r <= 0:
        raise ValueError("radius must be positive")
    a = X0.alpha
    k = -math.log2(r)
    if n_cap is None:
        n_cap = default_n_cap(max(k, 0.0), a, rel_tol)
    eps_y = min(1e-12, rel_tol * 2.0 ** (-max(k, 0.0) / a.alpha) / 256)
    y = X0.value(eps_y)
    x = X0.x
    ex = x.exact_value
    if ex is not None and not 0 <= ex <= 1:
        raise OutOfDomain("probe abscissa outside [0, 1]")
    return _measure(x, a, y, r, side, rel_tol, n_cap, max_active)


# --------------------------------------------------------------------------
# exponent traces


@dataclass(frozen=True)
class TraceEntry:
    k: float
    r: float
    measure: MeasureBound
    ratio_lo: float
    ratio_hi: float

    @property
    def flag(self) -> str:
        return self.measure.flag


@dataclass
class ExponentTrace:
    side: str
    entries: list = field(default_factory=list)
    window: int = 1

    def _tail(self) -> list:
        # flagged entries still carry valid brackets, which the bounds use
        return self.entries[-self.window:] if self.window else list(self.entries)

    @property
    def E_w(self) -> dict:
        """Weak exponent: minimum over the tail window."""
        tail = self._tail()
        if not tail:
            return {"est": math.nan, "lo": math.nan, "hi": math.nan}
        hi = min(e.ratio_hi for e in tail)
        return {"est": hi, "lo": min(e.ratio_lo for e in tail), "hi": hi}

    @property
    def E_s(self) -> dict:
        """Strong exponent: maximum over the tail window."""
        tail = self._tail()
        if not tail:
            return {"est": math.nan, "lo": math.nan, "hi": math.nan}
        lo = max(e.ratio_lo for e in tail)
        return {"est": lo, "lo": lo, "hi": max(e.ratio_hi for e in tail)}

    def slopes(self) -> list:
        """Local log-log slopes ``(k, lo, hi)`` between consecutive entries.

        ``-log2(meas_{i+1} / meas_i) / (k_{i+1} - k_i) - 2``; unlike the
        ratios these carry no bias from the constant in meas ~ C r^(2+E).
        """
        out = []
        for a, b in zip(self.entries, self.entries[1:]):
            dk = b.k - a.k
            m0, m1 = a.measure, b.measure
            if m1.upper <= 0:
                lo = math.inf
            else:
                lo = -math.log2(m1.upper / m0.lower) / dk - 2 if m0.lower > 0 else -math.inf
            hi = -math.log2(m1.lower / m0.upper) / dk - 2 if m1.lower > 0 else math.inf
            out.append((b.k, lo, hi))
        return out

    @property
    def E_w_slope(self) -> dict:
        tail = self.slopes()[-self.window:]
        if not tail:
            return {"est": math.nan, "lo": math.nan, "hi": math.nan}
        hi = min(s[2] for s in tail)
        return {"est": hi, "lo": min(s[1] for s in tail), "hi": hi}

    @property
    def E_s_slope(self) -> dict:
        tail = self.slopes()[-self.window:]
        if not tail:
            return {"est": math.nan, "lo": math.nan, "hi": math.nan}
        lo = max(s[1] for s in tail)
        return {"est": lo, "lo": lo, "hi": max(s[2] for s in tail)}

    @property
    def summary(self) -> tuple:
        return self.E_w["est"], self.E_s["est"]


def _window(n_entries: int) -> int:
    return max(1, math.ceil((n_entries - 1) / 3))


def _trace(X0: ProbePoint, side: str, ks: Sequence, rel_tol: float) -> ExponentTrace:
    tr = ExponentTrace(side=side, window=_window(len(ks)))
    for k in ks:
        r = Fraction(1, 2 ** k) if float(k).is_integer() else Fraction(2.0 ** -k)
        mb = measure_in_box(X0, r, side, rel_tol)
        lo, hi = mb.ratio()
        tr.entries.append(TraceEntry(float(k), float(r), mb, lo, hi))
    return tr


def exponent_trace(X0: ProbePoint, side: str, k_min: int, k_max: int, rel_tol: float = 1e-3) -> ExponentTrace:
    """Ratios at r = 2^-k for k_min <= k <= k_max."""
    if k_min < 2 or k_max <= k_min:
        raise ValueError("need 2 <= k_min < k_max")
    return _trace(X0, side, list(range(k_min, k_max + 1)), rel_tol)


def exponent_trace_on_subsequence(X0: ProbePoint, side: str, scales: Sequence, rel_tol: float = 1e-3) -> ExponentTrace:
    """Ratios at r = 2^-k for an explicit increasing list of scales k."""
    ks = list(scales)
    if not ks or any(b <= a for a, b in zip(ks, ks[1:])):
        raise ValueError("scales must be non-empty and strictly increasing (radii decreasing)")
    return _trace(X0, side, ks, rel_tol)


def construction_scales(x, alpha, kind: str, length: int, k_max: Optional[int] = None) -> list:
    """Radii exponents where x looks like a dyadic (``kind="dyadic"``) or a
    local maximum (``kind="maxima"``).

    A run of digits from J to J' puts x within 2^-J' of such a point z of
    scale J.  At radius 2^-k the box sees the same picture as around z when
    its x-extent stays inside the basin of z (k > J) and the offset is
    invisible at the vertical scale (k < alpha J').  The midpoint of that
    range is returned for each run that leaves it non-empty.
    """
    a = Alpha.of(alpha).alpha
    out = []
    for J, Jp in x.interesting_scales(kind, length):
        lo, hi = J, a * Jp
        k = round((lo + hi) / 2)
        if hi - lo >= 2 and k >= 2 and (k_max is None or k <= k_max) and (not out or k > out[-1]):
            out.append(k)
    return out


# --------------------------------------------------------------------------
# p-exponent


def optimal_constant_value(m: float, p: float) -> float:
    """min over c in [0, 1] of c^p (1 - m) + (1 - c)^p m."""
    if not p >= 1:
        raise ValueError("p must be at least 1")
    m = min(max(m, 0.0), 1.0)
    if m in (0.0, 1.0):
        return 0.0
    if p == 1:
        return min(m, 1 - m)
    c = 1.0 / (1.0 + ((1 - m) / m) ** (1.0 / (p - 1)))
    return c ** p * (1 - m) + (1 - c) ** p * m


@dataclass
class PExponentResult:
    """``estimate`` is the smallest per-scale exponent log(value)/log(rho)
    over the tail window (the definition bounds value by C rho^u at every
    scale); ``regression`` is the least-squares slope over all scales."""

    estimate: float
    regression: float
    p: float
    ks: list
    values: list
    fractions: list
    window: int


def p_exponent_direct(X0: ProbePoint, p: float, k_min: int, k_max: int, rel_tol: float = 1e-3) -> PExponentResult:
    """Decay exponent u of the best constant L^p approximation of the indicator of Omega.

    At radius rho the normalised error is
    ``(rho^-2 * area * min_c [c^p (1 - m) + (1 - c)^p m])^(1/p)`` with m the
    fraction of the box in Omega.
    """
    if not p >= 1 or math.isinf(p):
        raise ValueError("p must be finite and at least 1")
    if k_min < 2 or k_max <= k_min:
        raise ValueError("need 2 <= k_min < k_max")
    ks, vals, fracs = [], [], []
    for k in range(k_min, k_max + 1):
        r = Fraction(1, 2 ** k)
        mo = measure_in_box(X0, r, OMEGA, rel_tol)
        mc = measure_in_box(X0, r, COMPLEMENT, rel_tol)
        so, sc = 0.5 * (mo.lower + mo.upper), 0.5 * (mc.lower + mc.upper)
        frac = so / (so + sc)
        v = optimal_constant_value(frac, p)
        ks.append(k)
        vals.append((mo.area / float(r) ** 2 * v) ** (1.0 / p))
        fracs.append(frac)
    logs = np.log2(np.maximum(vals, 1e-300))
    per_scale = -logs / np.array(ks, dtype=float)
    window = _window(len(ks))
    slope = np.polyfit(np.array(ks, dtype=float), logs, 1)[0]
    return PExponentResult(float(per_scale[-window:].min()), float(-slope), p, ks, vals, fracs, window)


# --------------------------------------------------------------------------
# box dimension


@dataclass
class BoxDimResult:
    estimate: float
    ks: list
    counts: list
    intercept: float


def box_counts(alpha, k: int) -> int:
    """Number of grid squares of side 2^-k met by the graph of F."""
    mins, maxs = interval_extrema_float(k, alpha)
    delta = 2.0 ** -k
    return int(np.sum(np.floor(maxs / delta) - np.floor(mins / delta) + 1))


def box_dimension(alpha, k_min: int = 4, k_max: int = 16) -> BoxDimResult:
    """Least-squares slope of log2 N(k) against k."""
    if k_max <= k_min:
        raise ValueError("need k_min < k_max")
    ks = list(range(k_min, k_max + 1))
    counts = [box_counts(alpha, k) for k in ks]
    slope, icpt = np.polyfit(np.array(ks, float), np.log2(np.array(counts, float)), 1)
    return BoxDimResult(float(slope), ks, counts, float(icpt))


# --------------------------------------------------------------------------
# mean-value witnesses


@dataclass(frozen=True)
class Witness:
    x: Fraction
    value: RealBound
    gap: RealBound
    scale: int

    def constant(self, alpha) -> float:
        """gap / 2^(-alpha J), the normalised height difference at this scale."""
        return self.gap.lo * 2.0 ** (Alpha.of(alpha).alpha * self.scale)


def mean_value_witness(X0: ProbePoint, direction: str, J: int, c: float = 0.0, extra: int = 8) -> Witness:
    """A dyadic x within 2^-J of x0 with F(x) < F(x0) (``below``) or > (``above``).

    Dyadics of depth J + extra in the window are scanned and the best is
    certified with exact values.  ``c`` > 0 additionally demands a gap of at
    least c 2^(-alpha J).
    """
    if direction not in ("below", "above"):
        raise ValueError("direction must be 'below' or 'above'")
    a = X0.alpha
    eps = 2.0 ** (-a.alpha * J) * 1e-6
    y0 = X0.value(eps)
    depth = J + extra
    xl, xh = _x_bracket(X0.x, depth + 8)
    lo = max(Fraction(0), xh - Fraction(1, 1 << J))
    hi = min(Fraction(1), xl + Fraction(1, 1 << J))
    K0 = math.ceil(lo * (1 << depth))
    K1 = math.floor(hi * (1 << depth))
    Ks = np.arange(K0, K1 + 1)
    # coarse float values pick candidates; the chosen one is certified exactly
    vals = F_float(np.clip(Ks.astype(float) / 2.0 ** depth, 0.0, 1.0), a)
    order = np.argsort(vals if direction == "below" else -vals)
    need = c * 2.0 ** (-a.alpha * J)
    for idx in order[:16]:
        K = int(Ks[idx])
        pt = FiniteDyadic(K, depth)
        v = eval_F(pt, a, 1e-30)
        gap = (y0 - v) if direction == "below" else (v - y0)
        if gap.lo > need:
            return Witness(Fraction(K, 1 << depth), v, gap, J)
    raise WitnessNotFound(J, f"no point {direction} F(x0) found within 2^-{J}")


# --------------------------------------------------------------------------
# output


CSV_COLUMNS = ("side", "k", "r", "meas_lo", "meas_hi", "ratio_lo", "ratio_hi", "flag")


def _fmt(v: float) -> str:
    return repr(float(v))


def _fmt_k(k: float) -> str:
    return str(int(k)) if float(k).is_integer() else repr(k)


def traces_to_csv(traces: Sequence[ExponentTrace]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for tr in sorted(traces, key=lambda t: t.side):
        for e in tr.entries:
            w.writerow([tr.side, _fmt_k(e.k), _fmt(e.r), _fmt(e.measure.lower), _fmt(e.measure.upper),
                        _fmt(e.ratio_lo), _fmt(e.ratio_hi), e.flag])
    return buf.getvalue()


def _json_num(v: float):
    return None if v is None or math.isnan(v) else (str(v) if math.isinf(v) else v)


def trace_summary(tr: ExponentTrace, point_spec: str, alpha, k_range) -> dict:
    return {
        "point_spec": point_spec,
        "alpha": Alpha.of(alpha).alpha,
        "side": tr.side,
        "E_w": {key: _json_num(v) for key, v in tr.E_w.items()},
        "E_s": {key: _json_num(v) for key, v in tr.E_s.items()},
        "window": tr.window,
        "k_range": list(k_range),
    }


def summaries_to_json(summaries: list, defaults: Optional[dict] = None) -> str:
    doc = {"defaults": defaults or {}, "summaries": summaries}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
