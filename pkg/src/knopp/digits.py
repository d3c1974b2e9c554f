"""Binary digit streams for points of [0, 1].

A point is represented by the digits ``i_1, i_2, ...`` of its binary
expansion.  Four representations are supported: finite dyadics (under either
the terminating-in-zeros or terminating-in-ones convention), eventually
periodic expansions (every rational), rule-based expansions built from an
explicit construction, and truncated digit lists.

Rule-based streams are stateless: digit ``l`` is a pure function of ``l``.
"""

from __future__ import annotations

import enum
import functools
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

from mpmath import iv

from .bounds import DEFAULT_PREC, RealBound, iv_rational, working_precision
from .errors import DepthExceeded, InvalidTarget, OutOfDomain, PointSpecError

# extra digits read past the scale of interest when bracketing inexact streams
GUARD_DIGITS = 64
# cap on adaptive reading for unbounded streams, as a multiple of the scale
MAX_READ_FACTOR = 64


class Membership(enum.Enum):
    DYADIC = "Dyadic"
    MAXIMA_SET = "MaximaSet"
    NEITHER = "Neither"
    UNKNOWN = "Unknown"


@dataclass(frozen=True)
class Unknown:
    """Membership could not be decided from the first ``depth`` digits."""

    depth: Optional[int]
    kind: Membership = Membership.UNKNOWN


class DigitStream:
    """Common interface; concrete streams are frozen dataclasses below."""

    depth: Optional[int] = None  # None means every digit is available

    def digit(self, l: int) -> int:
        raise NotImplementedError

    def prefix_int(self, length: int) -> int:
        """Digits ``i_1 .. i_length`` packed into an integer (``i_1`` most significant)."""
        self._check_depth(length)
        value = 0
        for l in range(1, length + 1):
            value = (value << 1) | self.digit(l)
        return value

    def digits(self, start: int, stop: int) -> list:
        """Digits ``i_start .. i_{stop-1}``."""
        if stop <= start:
            return []
        p = self.prefix_int(stop - 1)
        return [(p >> (stop - 1 - l)) & 1 for l in range(start, stop)]

    def shift(self, j: int) -> "DigitStream":
        raise NotImplementedError

    @property
    def exact_value(self) -> Optional[Fraction]:
        return None

    def value_bracket(self, length: int) -> tuple:
        """Exact rationals ``(lo, hi)`` with ``lo <= x <= hi``."""
        v = self.exact_value
        if v is not None:
            return v, v
        if self.depth is not None:
            length = min(length, self.depth)
        p = self.prefix_int(length)
        return Fraction(p, 1 << length), Fraction(p + 1, 1 << length)

    def tail_bracket(self, j: int, guard: int) -> tuple:
        """Bracket of ``tau^j x`` read from digits ``j+1 .. j+guard``."""
        v = self.exact_tail(j)
        if v is not None:
            return v, v
        length = j + guard
        if self.depth is not None:
            length = min(length, self.depth)
            if length <= j:
                raise DepthExceeded(self.depth, j + 1)
        p = self.prefix_int(length) & ((1 << (length - j)) - 1)
        return Fraction(p, 1 << (length - j)), Fraction(p + 1, 1 << (length - j))

    def exact_tail(self, j: int) -> Optional[Fraction]:
        return None

    def _check_depth(self, l: int) -> None:
        if self.depth is not None and l > self.depth:
            raise DepthExceeded(self.depth, l)


@dataclass(frozen=True)
class FiniteDyadic(DigitStream):
    """The dyadic ``K / 2^N``; ``ones`` selects the expansion ending in 1s.

    ``K`` is normalised to be odd (or the point is 0 or 1).  The point 1 only
    has the all-ones expansion inside [0, 1].
    """

    K: int
    N: int
    ones: bool = False

    def __post_init__(self):
        K, N = self.K, self.N
        if N < 0 or K < 0 or K > (1 << N):
            raise OutOfDomain(f"{K}/2^{N} is not a point of [0, 1]")
        while N > 0 and K % 2 == 0:
            K //= 2
            N -= 1
        if K == 0:
            N = 0
            if self.ones:
                raise OutOfDomain("0 has no expansion ending in ones")
        ones = self.ones or (K == 1 and N == 0)
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "N", N)
        object.__setattr__(self, "ones", ones)

    def digit(self, l: int) -> int:
        if l < 1:
            raise ValueError("digits are indexed from 1")
        if self.ones:
            if l <= self.N:
                return ((self.K - 1) >> (self.N - l)) & 1
            return 1
        if l <= self.N:
            return (self.K >> (self.N - l)) & 1
        return 0

    def prefix_int(self, length: int) -> int:
        K, N = (self.K - 1, self.N) if self.ones else (self.K, self.N)
        if length <= N:
            return K >> (N - length)
        p = K << (length - N)
        if self.ones:
            p |= (1 << (length - N)) - 1
        return p

    def shift(self, j: int) -> "FiniteDyadic":
        if j < 0:
            raise ValueError("shift must be non-negative")
        if j == 0:
            return self
        if self.ones:
            if j >= self.N:
                return FiniteDyadic(1, 0, ones=True)
            m = self.N - j
            return FiniteDyadic((self.K - 1) % (1 << m) + 1, m, ones=True)
        if j >= self.N:
            return FiniteDyadic(0, 0)
        m = self.N - j
        return FiniteDyadic(self.K % (1 << m), m)

    @property
    def exact_value(self) -> Fraction:
        return Fraction(self.K, 1 << self.N)

    def exact_tail(self, j: int) -> Fraction:
        return self.shift(j).exact_value

    def twin(self) -> "FiniteDyadic":
        """Same point under the other digit convention (0 and 1 have none)."""
        if self.K == 0 or (self.K == 1 and self.N == 0):
            return self
        return FiniteDyadic(self.K, self.N, ones=not self.ones)


def _minimal_period(period: tuple) -> tuple:
    p = len(period)
    for d in range(1, p + 1):
        if p % d == 0 and period[:d] * (p // d) == period:
            return period[:d]
    return period


@dataclass(frozen=True)
class EventuallyPeriodic(DigitStream):
    """Digits ``preamble`` followed by ``period`` repeated forever.

    Stored in canonical form (minimal period, shortest preamble) so that
    structural equality is equality of points' expansions.
    """

    preamble: tuple
    period: tuple

    def __post_init__(self):
        pre = tuple(int(b) for b in self.preamble)
        per = tuple(int(b) for b in self.period)
        if not per:
            raise ValueError("period must be non-empty")
        if any(b not in (0, 1) for b in pre + per):
            raise ValueError("digits must be 0 or 1")
        per = _minimal_period(per)
        while pre and pre[-1] == per[-1]:
            pre = pre[:-1]
            per = (per[-1],) + per[:-1]
        object.__setattr__(self, "preamble", pre)
        object.__setattr__(self, "period", per)

    @classmethod
    def from_fraction(cls, q) -> Union["EventuallyPeriodic", FiniteDyadic]:
        """Long division in base 2; dyadic rationals come back as ``FiniteDyadic``."""
        q = Fraction(q)
        if not 0 <= q <= 1:
            raise OutOfDomain(f"{q} is not in [0, 1]")
        d = q.denominator
        if d & (d - 1) == 0:
            return FiniteDyadic(q.numerator, d.bit_length() - 1)
        num = q.numerator
        seen = {}
        bits = []
        while num not in seen:
            seen[num] = len(bits)
            num *= 2
            bits.append(num // d)
            num %= d
        start = seen[num]
        return cls(tuple(bits[:start]), tuple(bits[start:]))

    def digit(self, l: int) -> int:
        if l < 1:
            raise ValueError("digits are indexed from 1")
        a = len(self.preamble)
        if l <= a:
            return self.preamble[l - 1]
        return self.period[(l - a - 1) % len(self.period)]

    def prefix_int(self, length: int) -> int:
        a, p = len(self.preamble), len(self.period)
        bits = list(self.preamble[:length])
        if length > a:
            reps, rem = divmod(length - a, p)
            bits += list(self.period) * reps + list(self.period[:rem])
        return int("".join(map(str, bits)), 2) if bits else 0

    def shift(self, j: int) -> "EventuallyPeriodic":
        if j < 0:
            raise ValueError("shift must be non-negative")
        a, p = len(self.preamble), len(self.period)
        if j <= a:
            return EventuallyPeriodic(self.preamble[j:], self.period)
        r = (j - a) % p
        return EventuallyPeriodic((), self.period[r:] + self.period[:r])

    @property
    def exact_value(self) -> Fraction:
        a, p = len(self.preamble), len(self.period)
        A = int("".join(map(str, self.preamble)), 2) if a else 0
        B = int("".join(map(str, self.period)), 2)
        return (A + Fraction(B, (1 << p) - 1)) / (1 << a)

    def exact_tail(self, j: int) -> Fraction:
        return self.shift(j).exact_value


@dataclass(frozen=True)
class Truncated(DigitStream):
    """Only the first ``depth`` digits are known; the rest are not zeros."""

    bits: tuple
    depth: int = None

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if any(b not in (0, 1) for b in bits):
            raise ValueError("digits must be 0 or 1")
        depth = len(bits) if self.depth is None else int(self.depth)
        if depth > len(bits) or depth < 0:
            raise ValueError("depth must not exceed the number of digits given")
        object.__setattr__(self, "bits", bits[:depth])
        object.__setattr__(self, "depth", depth)

    def digit(self, l: int) -> int:
        if l < 1:
            raise ValueError("digits are indexed from 1")
        self._check_depth(l)
        return self.bits[l - 1]

    def prefix_int(self, length: int) -> int:
        self._check_depth(length)
        return int("".join(map(str, self.bits[:length])), 2) if length else 0

    def shift(self, j: int) -> "Truncated":
        if j == 0:
            return self
        if j >= self.depth:
            raise DepthExceeded(self.depth, j + 1)
        return Truncated(self.bits[j:], self.depth - j)


# --------------------------------------------------------------------------
# rule-based constructions


def _floor_pow(base: Fraction, n: int) -> int:
    return math.floor(base ** n)


@dataclass(frozen=True)
class Rule:
    """Explicit digit construction with prescribed approximation rates.

    ``kind`` is ``"r"`` (sum of 2^-[u^n]), ``"s"`` (1/3 minus sum of
    2^-2[u^n]) or ``"rs"`` (alternating blocks then zero blocks, growth
    ratios ``s`` and ``u``).  ``literal`` keeps the upper summation limit
    [s^n u^(n+1)] of the joint construction exactly as printed, which turns
    out to produce a point whose digits eventually alternate.
    """

    kind: str
    u: Fraction
    s: Optional[Fraction] = None
    literal: bool = False

    def ones_upto(self, L: int) -> list:
        """Sorted positions ``<= L`` holding a 1."""
        return _ones_upto(self, L)

    @property
    def label(self) -> str:
        if self.kind == "r":
            return f"rule:r={_fmt(self.u)}"
        if self.kind == "s":
            return f"rule:s={_fmt(self.u)}"
        return f"rule:r={_fmt(self.u)},s={_fmt(self.s)}"


def _fmt(q: Fraction) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    f = float(q)
    return repr(f) if Fraction(repr(f)) == q else f"{q.numerator}/{q.denominator}"


@functools.lru_cache(maxsize=256)
def _ones_upto(rule: Rule, L: int) -> list:
    u = rule.u
    if rule.kind == "r":
        pos, n = set(), 0
        while True:
            p = _floor_pow(u, n)
            if p > L:
                break
            pos.add(p)
            n += 1
        return sorted(pos)
    if rule.kind == "s":
        removed, n = set(), 0
        while True:
            p = 2 * _floor_pow(u, n)
            if p > L:
                break
            removed.add(p)
            n += 1
        return [p for p in range(2, L + 1, 2) if p not in removed]
    s = rule.s
    pos, n = set(), 1
    while True:
        head = math.floor(s ** (n - 1) * u ** n)
        if 2 * head > L:
            break
        pos.add(2 * head)
        top = math.floor(s ** n * u ** (n + 1)) if rule.literal else math.floor(s ** n * u ** n)
        for k in range(head + 1, top):
            if 2 * k > L:
                break
            pos.add(2 * k)
        n += 1
    return sorted(pos)


@dataclass(frozen=True)
class RuleBased(DigitStream):
    """Digits ``i_{offset+1}, i_{offset+2}, ...`` of a :class:`Rule`."""

    rule: Rule
    offset: int = 0
    certified: Optional[Membership] = Membership.NEITHER

    def prefix_int(self, length: int) -> int:
        top = self.offset + length
        p = 0
        for q in self.rule.ones_upto(top):
            if q > self.offset:
                p |= 1 << (top - q)
        return p

    def digit(self, l: int) -> int:
        if l < 1:
            raise ValueError("digits are indexed from 1")
        return self.prefix_int(l) & 1

    def shift(self, j: int) -> "RuleBased":
        if j < 0:
            raise ValueError("shift must be non-negative")
        return RuleBased(self.rule, self.offset + j, self.certified)

    def interesting_scales(self, kind: str, length: int, min_ratio: float = 1.5) -> list:
        """Scale pairs ``(J, J')`` of the long runs in the first ``length`` digits.

        For ``kind="dyadic"`` these are constant runs (x lies within 2^-J'
        of a dyadic of scale J); for ``kind="maxima"`` alternating runs (x
        lies within 2^-J' of a point of the maxima set at scale J).
        """
        return long_runs(self, kind, length, min_ratio)

    @property
    def label(self) -> str:
        return self.rule.label if self.offset == 0 else f"{self.rule.label}>>{self.offset}"


def long_runs(x: DigitStream, kind: str, length: int, min_ratio: float = 1.5) -> list:
    """Maximal runs with ``J' / J >= min_ratio`` among digits 1..length.

    A run ending at ``length`` is reported with ``J' = length`` (it may
    continue further).
    """
    bits = x.digits(1, length + 1)
    out = []
    a = 0
    while a < length:
        b = a
        if kind == "dyadic":
            while b + 1 < length and bits[b + 1] == bits[a]:
                b += 1
        elif kind == "maxima":
            while b + 1 < length and bits[b + 1] != bits[b]:
                b += 1
        else:
            raise ValueError(f"unknown run kind {kind!r}")
        J, Jp = a, b + 1  # digits a+1..b+1 (1-based) form the run
        if J > 0 and Jp / J >= min_ratio:
            out.append((J, Jp))
        a = b + 1 if b > a else a + 1
    return out


def construct_point(r_target=None, s_target=None, *, literal: bool = False) -> RuleBased:
    """Point with dyadic rate ``r_target`` and/or maxima rate ``s_target``."""
    if r_target is None and s_target is None:
        raise InvalidTarget("give r_target, s_target or both")
    u = None if r_target is None else Fraction(str(r_target)) if isinstance(r_target, float) else Fraction(r_target)
    s = None if s_target is None else Fraction(str(s_target)) if isinstance(s_target, float) else Fraction(s_target)
    for name, v in (("r", u), ("s", s)):
        if v is not None and v <= 1:
            raise InvalidTarget(f"{name} target must exceed 1, got {v}")
    if s is None:
        rule = Rule("r", u)
    elif u is None:
        rule = Rule("s", s)
    else:
        rule = Rule("rs", u, s, literal=literal)
    certified = Membership.MAXIMA_SET if literal and u is not None and s is not None else Membership.NEITHER
    return RuleBased(rule, 0, certified)


# --------------------------------------------------------------------------
# operations


def digit(x: DigitStream, l: int) -> int:
    return x.digit(l)


def shift(x: DigitStream, j: int) -> DigitStream:
    return x.shift(j)


def classify_membership(x: DigitStream):
    """``Membership`` for decidable streams, otherwise ``Unknown(depth)``."""
    if isinstance(x, FiniteDyadic):
        return Membership.DYADIC
    if isinstance(x, EventuallyPeriodic):
        if x.period in ((0,), (1,)):
            return Membership.DYADIC
        if x.period in ((0, 1), (1, 0)):
            return Membership.MAXIMA_SET
        return Membership.NEITHER
    if isinstance(x, RuleBased) and x.certified is not None:
        return x.certified
    return Unknown(x.depth)


def _dist_to_grid(y: Fraction, offsets) -> tuple:
    """Nearest ``n + c`` (``c`` in offsets, integer n) to ``y`` and its distance."""
    best = None
    f = math.floor(y)
    for n in (f - 1, f, f + 1):
        for c in offsets:
            cand = n + c
            d = abs(cand - y)
            if best is None or d < best[1] or (d == best[1] and cand < best[0]):
                best = (cand, d)
    return best


def _nearest(x: DigitStream, j: int, offsets, lo_cand: Fraction, hi_cand: Fraction):
    if x.depth is not None and j >= x.depth:
        raise DepthExceeded(x.depth, j + 1)
    scale = 1 << j
    length = j + GUARD_DIGITS
    while True:
        lo, hi = x.value_bracket(length)
        mid = (lo + hi) / 2
        cand, d = _dist_to_grid(mid * scale, offsets)
        cand = min(max(cand, lo_cand), hi_cand)
        d = abs(cand - mid * scale) / scale
        half = (hi - lo) / 2
        # unbounded streams: read deeper until the distance is resolved
        resolved = half == 0 or (d - half > 0 and 2 * half <= (d - half) / 8)
        if resolved or x.depth is not None or length > MAX_READ_FACTOR * j + 4096:
            break
        length *= 2
    return cand / scale, max(d - half, Fraction(0)), d + half


def nearest_dyadic(x: DigitStream, j: int):
    """``(K_j, distance)`` with ``K_j / 2^j`` the closest grid point to x."""
    if j < 1:
        raise ValueError("scale must be positive")
    point, dlo, dhi = _nearest(x, j, (Fraction(0),), Fraction(0), Fraction(1 << j))
    K = int(point * (1 << j))
    return K, _bracket(dlo, dhi)


def nearest_maxima_point(x: DigitStream, j: int):
    """Closest ``k/2^j + v/(3*2^j)`` (``v`` in {1, 2}) to x and its distance."""
    if j < 1:
        raise ValueError("scale must be positive")
    top = (1 << j) - 1 + Fraction(2, 3)
    point, dlo, dhi = _nearest(x, j, (Fraction(1, 3), Fraction(2, 3)), Fraction(1, 3), top)
    return point, _bracket(dlo, dhi)


def _bracket(lo: Fraction, hi: Fraction) -> RealBound:
    if lo == hi:
        return RealBound.exact(lo)
    with working_precision(DEFAULT_PREC):
        return RealBound.from_iv(iv.mpf([iv_rational(lo).a, iv_rational(hi).b]))


@dataclass(frozen=True)
class RateEntry:
    j: int
    distance: RealBound
    ratio: RealBound


@dataclass
class ApproxRateTrace:
    kind: str
    entries: list = field(default_factory=list)
    window: int = 0

    @property
    def limsup_estimate(self) -> float:
        """Max of the ratio midpoints over the last ``window`` entries."""
        tail = self.entries[-self.window:] if self.window else self.entries
        return max(_ratio_mid(e.ratio) for e in tail)


def _ratio_mid(b: RealBound) -> float:
    return math.inf if b.hi == math.inf else b.mid


def _log_ratio(d: RealBound, j: int) -> RealBound:
    with working_precision(DEFAULT_PREC):
        log2j = iv.mpf(j) * iv.log(iv.mpf(2))
        hi = iv.mpf(iv.inf) if d.lower == 0 else -iv.log(iv.mpf(d.lower)) / log2j
        lo = -iv.log(iv.mpf(d.upper)) / log2j if d.upper > 0 else iv.mpf(iv.inf)
        return RealBound(lo.a, hi.b)


def rate_trace(x: DigitStream, kind: str, j_max: int) -> ApproxRateTrace:
    """Per-scale approximation ratios ``log|nearest - x| / log 2^-j``."""
    if kind not in ("dyadic", "maxima"):
        raise ValueError(f"unknown rate kind {kind!r}")
    near = nearest_dyadic if kind == "dyadic" else nearest_maxima_point
    trace = ApproxRateTrace(kind=kind, window=max(1, math.ceil(j_max / 3)))
    for j in range(1, j_max + 1):
        _, d = near(x, j)
        trace.entries.append(RateEntry(j, d, _log_ratio(d, j)))
    return trace


# --------------------------------------------------------------------------
# point-spec grammar

_NUM = r"[0-9]+(?:\.[0-9]+)?"
_SPEC_PATTERNS = {
    "dyadic": re.compile(r"([0-9]+)/2\^([0-9]+)"),
    "rational": re.compile(r"([0-9]+)/([0-9]+)"),
    "smax": re.compile(r"([0-9]+):([0-9]+):([0-9]+)"),
    "rule": re.compile(rf"r=({_NUM})(?:,s=({_NUM}))?|()s=({_NUM})"),
    "bits": re.compile(r"0\.([01]*)"),
}
_SPEC_CHARS = {
    "dyadic": set("0123456789/^"),
    "rational": set("0123456789/"),
    "smax": set("0123456789:"),
    "rule": set("0123456789.,rs="),
    "bits": set("01."),
}


def parse_point(text: str) -> DigitStream:
    """Parse ``dyadic:K/2^N``, ``rational:P/Q``, ``smax:N:K:v``,
    ``rule:r=U[,s=S]`` or ``bits:0.b1b2...``."""
    if not isinstance(text, str) or ":" not in text:
        raise PointSpecError(str(text), 0, "expected '<kind>:<body>'")
    kind, body = text.split(":", 1)
    pat = _SPEC_PATTERNS.get(kind)
    if pat is None:
        raise PointSpecError(text, 0, f"unknown point kind {kind!r}")
    offset = len(kind) + 1
    m = pat.fullmatch(body)
    if m is None:
        bad = next((i for i, c in enumerate(body) if c not in _SPEC_CHARS[kind]), None)
        if bad is not None:
            raise PointSpecError(text, offset + bad, f"unexpected character {body[bad]!r} in {kind} spec")
        good = 0
        for i in range(len(body), -1, -1):
            if pat.match(body[:i]) and pat.match(body[:i]).end() == i:
                good = i
                break
        raise PointSpecError(text, offset + good, f"malformed {kind} spec")
    if kind == "dyadic":
        K, N = int(m.group(1)), int(m.group(2))
        if K > (1 << N):
            raise OutOfDomain(f"{K}/2^{N} lies outside [0, 1]")
        return FiniteDyadic(K, N)
    if kind == "rational":
        P, Q = int(m.group(1)), int(m.group(2))
        if Q == 0:
            raise PointSpecError(text, offset + body.index("/") + 1, "zero denominator")
        return EventuallyPeriodic.from_fraction(Fraction(P, Q))
    if kind == "smax":
        N, K, v = (int(g) for g in m.groups())
        if v not in (1, 2):
            raise PointSpecError(text, offset + body.rindex(":") + 1, "v must be 1 or 2")
        if K >= (1 << N):
            raise OutOfDomain(f"K={K} must be below 2^{N}")
        return EventuallyPeriodic.from_fraction(Fraction(K, 1 << N) + Fraction(v, 3 << N))
    if kind == "rule":
        r = Fraction(m.group(1)) if m.group(1) else None
        s_text = m.group(2) or m.group(4)
        s = Fraction(s_text) if s_text else None
        return construct_point(r, s)
    return Truncated(tuple(int(c) for c in m.group(1)))
