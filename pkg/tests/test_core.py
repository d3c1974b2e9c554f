import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from knopp.core import (
    Alpha,
    F_float,
    TPoly,
    dyadic_grid_values,
    dyadic_value,
    eval_F,
    holder_probe,
    lambda_,
    partial_sum_bracket,
    partial_sum_value,
    slope,
    tail_bound,
)
from knopp.digits import EventuallyPeriodic, FiniteDyadic, Truncated, parse_point
from knopp.errors import DepthExceeded, OutOfDomain

# frozen from oracles.series_value (400 terms, 40 digits)
FROZEN = {
    ("1/2", "1/3"): 1.1380711874576983496,
    ("1/2", "1/7"): 0.86499543491531093131,
    ("1/2", "1/5"): 0.96568542494923801952,
    ("1/2", "5/16"): 0.87944173824159220275,
    ("3/10", "1/3"): 1.7754332245209676068,
    ("3/10", "1/7"): 1.4170699171442655547,
    ("7/10", "1/7"): 0.62750348265129126124,
    ("7/10", "5/16"): 0.75470098685117261049,
}


@pytest.mark.parametrize("key", sorted(FROZEN))
def test_frozen_values(key):
    a, x = (Fraction(v) for v in key)
    b = eval_F(EventuallyPeriodic.from_fraction(x), Alpha(a), 1e-14)
    assert b.width <= 1e-14
    assert b.contains(FROZEN[key]) or abs(b.mid - FROZEN[key]) < 1e-15


def test_alpha_reads_decimals_exactly():
    assert Alpha(0.3).value == Fraction(3, 10)
    with pytest.raises(OutOfDomain):
        Alpha(1)
    with pytest.raises(OutOfDomain):
        Alpha(0)


def test_tpoly_arithmetic():
    t = TPoly({1: 1})
    p = (t + 1) * (t - 1)
    assert p == TPoly({2: 1, 0: -1})
    assert p.shift(-2) == TPoly({0: 1, -2: -1})
    assert (p - p).is_zero


def test_tpoly_exact_sign_at_root():
    # 2 t^2 - 1 vanishes at alpha = 1/2
    p = TPoly({2: 2, 0: -1})
    assert p.sign(Alpha(Fraction(1, 2))) == 0
    assert p.sign(Alpha(Fraction(3, 10))) > 0
    assert p.sign(Alpha(Fraction(7, 10))) < 0


def test_lambda():
    assert lambda_(Fraction(1, 4)) == Fraction(1, 4)
    assert lambda_(Fraction(3, 4)) == Fraction(1, 4)
    with pytest.raises(OutOfDomain):
        lambda_(Fraction(3, 2))


@pytest.mark.parametrize("alpha", ["3/10", "1/2", "7/10"])
def test_closed_forms(alpha):
    a = Alpha(Fraction(alpha))
    t = a.t_scale
    assert eval_F(FiniteDyadic(1, 1), a).contains(Fraction(1, 2))
    assert abs(eval_F(FiniteDyadic(1, 2), a).mid - (0.25 + t / 2)) < 1e-15
    assert abs(eval_F(EventuallyPeriodic.from_fraction(Fraction(1, 3)), a).mid - a.fmax) < 1e-15


def test_dyadic_value_is_finite_sum():
    # F(3/8) = 3/8 + t/4 + t^2/2
    assert dyadic_value(3, 3) == TPoly({0: Fraction(3, 8), 1: Fraction(1, 4), 2: Fraction(1, 2)})


@pytest.mark.parametrize("K,N", [(1, 3), (5, 4), (11, 5), (77, 9)])
def test_both_conventions_agree(K, N):
    a = Alpha(Fraction(1, 2))
    v0 = eval_F(FiniteDyadic(K, N), a, 1e-13)
    v1 = eval_F(FiniteDyadic(K, N, ones=True), a, 1e-13)
    assert v0.overlaps(v1)


def test_rule_point_against_oracle():
    x = parse_point("rule:r=2")
    q = sum(Fraction(1, 2 ** (2 ** n)) for n in range(8))  # exact to 2^-256
    b = eval_F(x, Alpha(Fraction(1, 2)), 1e-13)
    ref = float(oracles.series_value(q, Fraction(1, 2)))
    assert abs(b.mid - ref) < 1e-12


def test_tail_bound_and_partial_sums():
    a = Alpha(Fraction(1, 2))
    x = EventuallyPeriodic.from_fraction(Fraction(1, 7))
    full = eval_F(x, a, 1e-14).mid
    for n in range(0, 30, 3):
        fn = partial_sum_value(x, n).evaluate(a).mid
        assert 0 <= full - fn <= tail_bound(n, a).hi + 1e-15


def test_partial_sum_bracket_for_inexact_stream():
    a = Alpha(Fraction(1, 2))
    x = parse_point("rule:s=2")
    lo, hi = partial_sum_bracket(x, 20, guard=40)
    assert lo.evaluate(a).lower <= hi.evaluate(a).upper
    assert hi.evaluate(a).mid - lo.evaluate(a).mid < 1e-9


def test_truncated_eval_limits():
    x = Truncated(tuple([0, 1] * 10))
    with pytest.raises(DepthExceeded):
        eval_F(x, Alpha(Fraction(1, 2)), 1e-12)
    b = eval_F(x, Alpha(Fraction(1, 2)), 1e-2)
    assert b.contains(1.1380711874576983) or b.lower < 1.1380711874576983 < b.upper


def test_slope_of_dyadic_interval():
    a = Alpha(Fraction(1, 2))
    x = FiniteDyadic(5, 4)
    p, b = slope(x, 3, a)
    # F_3 is affine on [5/16, 6/16] and agrees with F at both ends
    chord = (dyadic_value(6, 4) - dyadic_value(5, 4)).evaluate(a).mid * 16
    assert abs(b.mid - chord) < 1e-12
    assert p == TPoly({0: 1, 1: -2, 2: 4, 3: -8})


def test_float_paths_agree_with_oracle():
    a = 0.5
    v = dyadic_grid_values(12, a)
    ref = oracles.grid_values(12, a)
    assert np.max(np.abs(v - ref)) < 1e-14
    xs = np.arange(4097) / 4096.0
    assert np.max(np.abs(F_float(xs, a) - ref)) < 1e-14


def test_holder_probe_deterministic():
    assert holder_probe(0.5, 2000, 7) == holder_probe(0.5, 2000, 7)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 200), st.integers(1, 400), st.sampled_from(["3/10", "1/2", "7/10"]))
def test_eval_matches_series_oracle(p, q, alpha):
    if p > q:
        p, q = q, p
    x = Fraction(p, q)
    a = Alpha(Fraction(alpha))
    b = eval_F(EventuallyPeriodic.from_fraction(x), a, 1e-13)
    ref = float(oracles.series_value(x, Fraction(alpha), terms=300, dps=30))
    assert abs(b.mid - ref) <= 1e-13


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 20), st.sampled_from(["3/10", "1/2", "7/10"]))
def test_bounds_and_symmetry(K, alpha):
    a = Alpha(Fraction(alpha))
    x = Fraction(K, 2 ** 20)
    v = eval_F(FiniteDyadic(K, 20), a).mid
    w = eval_F(FiniteDyadic(2 ** 20 - K, 20), a).mid
    assert 0 <= v <= a.fmax + 1e-15
    assert abs(v - w) < 1e-14  # F(x) = F(1 - x)
    assert abs(v - float(oracles.series_value(x, Fraction(alpha), terms=25))) < 1e-14
