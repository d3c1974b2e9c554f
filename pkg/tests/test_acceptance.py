"""Acceptance criteria, one test each.

Every test prints its individual checks and then a single summary line
``CRITERION n PASS|FAIL: ...`` to the terminal, capture or not.
"""

from fractions import Fraction

import numpy as np
import pytest

import oracles
from conftest import grid24
from knopp.core import Alpha
from knopp.extrema import (
    DyadicInterval,
    interval_extrema_float,
    max_on_interval,
    maxima_positions,
    min_on_interval,
)
from knopp.verify import (
    Check,
    suite_boxdim,
    suite_dalpha,
    suite_dyadic,
    suite_exact,
    suite_invariants,
    suite_maxima,
    suite_nonextremum,
    suite_pexponent,
)


def _conclude(report, number, title, checks):
    for c in checks:
        report("    " + c.line())
    failed = [c.name for c in checks if not c.passed]
    status = "FAIL" if failed else "PASS"
    extra = f" ({len(failed)} failing: {', '.join(failed)})" if failed else ""
    report(f"CRITERION {number} {status}: {title}, {len(checks)} checks{extra}")
    assert not failed, failed


def test_criterion_1_dyadic_points(report):
    _conclude(report, 1, "dyadic points, complement exponent 1/alpha - 1", suite_dyadic())


def test_criterion_2_local_maxima(report):
    _conclude(report, 2, "local maxima, Omega exponent 1/alpha - 1", suite_maxima())


def test_criterion_3_non_extrema(report):
    _conclude(report, 3, "non-extrema, weak exponents vanish", suite_nonextremum())


def test_criterion_4_dalpha_subsequence(report):
    _conclude(report, 4, "rule:r=3,s=3 construction scales and dense radii", suite_dalpha())


def test_criterion_5_p_exponent(report):
    _conclude(report, 5, "p * u against the larger weak exponent", suite_pexponent())


def test_criterion_6_box_dimension(report):
    _conclude(report, 6, "box dimension 2 - alpha", suite_boxdim())


def test_criterion_7_exact_values(report):
    _conclude(report, 7, "closed-form values and digit conventions", suite_exact())


def _extrema_checks(alpha_str, depth=8):
    a = Alpha(Fraction(alpha_str))
    af = float(a.value)
    v = grid24(af)
    worst_min = 0.0
    worst_max = 0.0
    bad = 0
    for N in range(depth + 1):
        mins, maxs, _, slack = oracles.grid_interval_extrema(v, 24, N, af)
        for k in range(1 << N):
            I = DyadicInterval(k, N)
            _, mv = min_on_interval(I, a)
            dm = abs(mv.evaluate(a).mid - mins[k])
            mb = max_on_interval(I, a)
            # certified bracket must meet the oracle window [maxs, maxs + slack]
            miss = max(mb.lo - (maxs[k] + slack), maxs[k] - mb.hi, 0.0)
            worst_min = max(worst_min, dm)
            worst_max = max(worst_max, miss)
            if dm > 1e-12 or miss > 1e-12:
                bad += 1
        fmins, fmaxs = interval_extrema_float(N, a)
        if np.max(np.abs(fmins - mins)) > 1e-12 or np.any(fmaxs < maxs - 1e-12) or np.any(fmaxs > maxs + slack + 1e-12):
            bad += 1
    return Check(f"extrema vs 2^-24 grid alpha={af:g} depth<={depth}", bad == 0, float(bad), 0.0, 1e-12,
                 f"worst min error {worst_min:.2e}, worst max miss {worst_max:.2e}")


def _symmetry_check():
    rng = np.random.default_rng(0)
    bad = 0
    count = 0
    for a in ("3/10", "1/2", "7/10"):
        ps = [Fraction(int(rng.integers(-4000, 4001)), int(rng.integers(1, 200))) for _ in range(200)]
        ps += [Fraction(0), Fraction(1), Fraction(-1)]
        for p in ps:
            count += 1
            if maxima_positions(p, a) != frozenset(1 - x for x in maxima_positions(-p, a)):
                bad += 1
    return Check(f"X(p) = 1 - X(-p) on {count} rational p", bad == 0, float(bad), 0.0, 0.0)


@pytest.mark.parametrize("depth", [8])
def test_criterion_8_extrema_oracle(report, depth):
    checks = [_extrema_checks(a, depth) for a in ("3/10", "1/2", "7/10")] + [_symmetry_check()]
    _conclude(report, 8, "interval extrema match the grid oracle", checks)


def test_criterion_9_invariants(report):
    _conclude(report, 9, "slope bound, d_n, additivity, Holder probe", suite_invariants())
