from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from conftest import grid24
from knopp.core import Alpha, TPoly
from knopp.digits import EventuallyPeriodic, FiniteDyadic, Truncated, parse_point
from knopp.errors import OutOfDomain, ThresholdAmbiguity
from knopp.extrema import (
    DyadicInterval,
    ExtremumKind,
    argmax_on_interval,
    classify_extremum,
    interval_extrema_float,
    max_on_interval,
    max_value,
    max_value_float,
    maxima_positions,
    min_on_interval,
    threshold,
)
from knopp.bounds import RealBound

HALF = Alpha(Fraction(1, 2))


def test_global_maxima():
    assert maxima_positions(0, HALF) == {Fraction(1, 3), Fraction(2, 3)}
    assert abs(max_value(0, HALF).mid - HALF.fmax) < 1e-15


def test_positions_between_thresholds():
    # theta_1 = -1: at p = -1 the set is {1/6, 1/3}
    assert maxima_positions(-1, HALF) == {Fraction(1, 6), Fraction(1, 3)}
    assert maxima_positions(1, HALF) == {Fraction(2, 3), Fraction(5, 6)}
    assert maxima_positions(Fraction(-1, 2), HALF) == {Fraction(1, 3)}
    # theta_2 = -(1 + s) with s = sqrt 2
    assert maxima_positions(-2, HALF) == {Fraction(1, 6)}
    assert maxima_positions(-3, HALF) == {Fraction(1, 12)}


def test_exact_threshold_tie_as_tpoly():
    p = threshold(2)
    assert maxima_positions(p, HALF) == {Fraction(1, 12), Fraction(1, 6)}


def test_bracket_straddling_threshold_is_ambiguous():
    with pytest.raises(ThresholdAmbiguity):
        maxima_positions(RealBound(-1.01, -0.99), HALF)


@settings(max_examples=80, deadline=None)
@given(st.fractions(min_value=-40, max_value=40, max_denominator=64), st.sampled_from(["3/10", "1/2", "7/10"]))
def test_symmetry(p, alpha):
    a = Alpha(Fraction(alpha))
    assert maxima_positions(p, a) == frozenset(1 - x for x in maxima_positions(-p, a))


@settings(max_examples=40, deadline=None)
@given(st.floats(min_value=-30, max_value=30, allow_nan=False), st.sampled_from(["3/10", "1/2", "7/10"]))
def test_max_value_is_maximum_on_grid(p, alpha):
    a = Alpha(Fraction(alpha))
    v = oracles.grid_values(14, float(a.value))
    xs = np.arange(v.size) / (v.size - 1)
    grid_max = np.max(v + p * xs)
    m = max_value(p, a)
    slack = a.t_scale ** 14 * a.fmax
    assert grid_max <= m.hi + 1e-12
    assert m.lo <= grid_max + slack + 1e-12
    assert abs(float(max_value_float(np.array([p]), a)[0]) - m.mid) < 1e-12


def test_min_on_interval_examples():
    # [1/4, 1/2]: F(1/4) = 1/4 + t/2 > F(1/2) = 1/2 when t > 1/2
    loc, val = min_on_interval(DyadicInterval(1, 2), HALF)
    assert loc == Fraction(1, 2)
    assert val == TPoly.constant(Fraction(1, 2))
    loc, _ = min_on_interval(DyadicInterval(0, 1), HALF)
    assert loc == 0


def test_max_on_half_interval():
    # the maximum of F on [0, 1/2] is the global one at 1/3
    I = DyadicInterval(0, 1)
    assert argmax_on_interval(I, HALF) == {Fraction(1, 3)}
    assert abs(max_on_interval(I, HALF).mid - HALF.fmax) < 1e-15


def test_interval_validation():
    with pytest.raises(OutOfDomain):
        DyadicInterval(4, 2)


@pytest.mark.parametrize("alpha", ["3/10", "1/2", "7/10"])
def test_interval_extrema_against_grid(alpha):
    a = Alpha(Fraction(alpha))
    v = grid24(float(a.value))
    for N in range(0, 7):
        mins, maxs, arg, slack = oracles.grid_interval_extrema(v, 24, N, float(a.value))
        for k in range(1 << N):
            I = DyadicInterval(k, N)
            _, mv = min_on_interval(I, a)
            assert abs(mv.evaluate(a).mid - mins[k]) < 1e-12
            mb = max_on_interval(I, a)
            assert mb.lo <= maxs[k] + slack + 1e-12 and maxs[k] <= mb.hi + 1e-12
        fmins, fmaxs = interval_extrema_float(N, a)
        assert np.max(np.abs(fmins - mins)) < 1e-12
        assert np.all(fmaxs >= maxs - 1e-12) and np.all(fmaxs <= maxs + slack + 1e-12)


def test_classify():
    assert classify_extremum(FiniteDyadic(0, 0), HALF).kind == ExtremumKind.GLOBAL_MIN
    assert classify_extremum(FiniteDyadic(5, 4), HALF).kind == ExtremumKind.LOCAL_MIN
    r = classify_extremum(EventuallyPeriodic.from_fraction(Fraction(1, 3)), HALF)
    assert r.kind == ExtremumKind.GLOBAL_MAX and r.locations == {Fraction(1, 3), Fraction(2, 3)}
    assert classify_extremum(parse_point("smax:3:2:1"), HALF).kind == ExtremumKind.LOCAL_MAX
    assert classify_extremum(parse_point("rule:r=2"), HALF).kind == ExtremumKind.NOT_EXTREMUM
    u = classify_extremum(Truncated((0, 1, 1)), HALF)
    assert u.unknown and u.kind == ExtremumKind.NOT_EXTREMUM
