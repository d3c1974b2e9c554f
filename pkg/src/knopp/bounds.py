"""Rigorous real brackets on top of mpmath's interval context."""

from __future__ import annotations

import contextlib
import math
import threading
from dataclasses import dataclass
from fractions import Fraction

from mpmath import iv, mp
from mpmath.libmp import from_float, from_man_exp, to_rational

DEFAULT_PREC = 128
MAX_PREC = 1024

_prec_lock = threading.RLock()


@contextlib.contextmanager
def working_precision(bits: int):
    """Temporarily set the interval context precision.

    mpmath keeps precision on the context object, so the change is guarded
    by a lock and always restored.
    """
    with _prec_lock:
        old = iv.prec
        iv.prec = max(int(bits), 53)
        try:
            yield
        finally:
            iv.prec = old


def iv_rational(q) -> "iv.mpf":
    """Outward-rounded enclosure of an exact rational."""
    q = Fraction(q)
    if q.denominator == 1:
        return iv.mpf(q.numerator)
    return iv.mpf(q.numerator) / iv.mpf(q.denominator)


def _mpf_to_fraction(raw) -> Fraction:
    p, q = to_rational(raw)
    return Fraction(int(p), int(q))


@dataclass(frozen=True)
class RealBound:
    """Closed interval ``[lower, upper]`` known to contain a real number."""

    lower: object
    upper: object

    def __post_init__(self):
        lo, hi = mp.make_mpf(_raw(self.lower)), mp.make_mpf(_raw(self.upper))
        if lo > hi:
            raise ValueError(f"empty bracket [{lo}, {hi}]")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def from_iv(cls, x) -> "RealBound":
        a, b = x._mpi_
        return cls(mp.make_mpf(a), mp.make_mpf(b))

    @classmethod
    def exact(cls, q) -> "RealBound":
        return cls.from_iv(iv_rational(q))

    @classmethod
    def point(cls, value) -> "RealBound":
        v = mp.make_mpf(_raw(value))
        return cls(v, v)

    def to_iv(self):
        return iv.mpf([self.lower, self.upper])

    @property
    def width(self) -> float:
        if mp.isinf(self.upper) or mp.isinf(self.lower):
            return math.inf
        return float(_mpf_to_fraction(self.upper._mpf_) - _mpf_to_fraction(self.lower._mpf_))

    @property
    def mid(self) -> float:
        if mp.isinf(self.upper) or mp.isinf(self.lower):
            return float(self.lower) if mp.isinf(self.upper) else float(self.upper)
        return float((_mpf_to_fraction(self.lower._mpf_) + _mpf_to_fraction(self.upper._mpf_)) / 2)

    @property
    def lo(self) -> float:
        """Lower endpoint rounded down to a float."""
        f = float(self.lower)
        if not math.isinf(f) and Fraction(f) > _mpf_to_fraction(self.lower._mpf_):
            f = math.nextafter(f, -math.inf)
        return f

    @property
    def hi(self) -> float:
        """Upper endpoint rounded up to a float."""
        f = float(self.upper)
        if not math.isinf(f) and Fraction(f) < _mpf_to_fraction(self.upper._mpf_):
            f = math.nextafter(f, math.inf)
        return f

    def contains(self, value) -> bool:
        if isinstance(value, RealBound):
            return self.lower <= value.lower and value.upper <= self.upper
        if isinstance(value, Fraction):
            if mp.isinf(self.lower) or mp.isinf(self.upper):
                return (mp.isinf(self.lower) or _mpf_to_fraction(self.lower._mpf_) <= value) and (
                    mp.isinf(self.upper) or value <= _mpf_to_fraction(self.upper._mpf_))
            return _mpf_to_fraction(self.lower._mpf_) <= value <= _mpf_to_fraction(self.upper._mpf_)
        return self.lower <= value <= self.upper

    def overlaps(self, other: "RealBound") -> bool:
        return not (self.upper < other.lower or other.upper < self.lower)

    def __add__(self, other):
        return RealBound.from_iv(self.to_iv() + _as_iv(other))

    def __sub__(self, other):
        return RealBound.from_iv(self.to_iv() - _as_iv(other))

    def __mul__(self, other):
        return RealBound.from_iv(self.to_iv() * _as_iv(other))

    def __float__(self):
        return self.mid

    def __repr__(self):
        return f"RealBound({mp.nstr(self.lower, 17)}, {mp.nstr(self.upper, 17)})"


def _raw(v):
    if hasattr(v, "_mpf_"):
        return v._mpf_
    if isinstance(v, (int, Fraction)):
        v = Fraction(v)
        d = v.denominator
        if d & (d - 1):
            raise TypeError("non-dyadic rational endpoint; use RealBound.exact")
        return from_man_exp(v.numerator, -(d.bit_length() - 1))
    if isinstance(v, float):
        return from_float(v)
    return mp.mpf(v)._mpf_


def _as_iv(x):
    if isinstance(x, RealBound):
        return x.to_iv()
    if isinstance(x, (int, Fraction)):
        return iv_rational(x)
    return iv.mpf(x)
