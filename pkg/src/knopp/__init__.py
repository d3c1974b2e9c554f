"""Takagi-Knopp function F(x) = sum_j 2^(-alpha j) dist(2^j x, Z) and the
local geometry of the domain under its graph."""

__version__ = "0.1.0"

from .bounds import RealBound
from .core import Alpha, TPoly, eval_F, F_float, dyadic_value, holder_probe, partial_sum_value, slope, tail_bound
from .digits import (
    EventuallyPeriodic,
    FiniteDyadic,
    Membership,
    RuleBased,
    Truncated,
    Unknown,
    classify_membership,
    construct_point,
    nearest_dyadic,
    nearest_maxima_point,
    parse_point,
    rate_trace,
)
from .errors import (
    DepthExceeded,
    InvalidTarget,
    KnoppError,
    OutOfDomain,
    PointSpecError,
    PrecisionUnreachable,
    ThresholdAmbiguity,
    WitnessNotFound,
)
from .extrema import (
    DyadicInterval,
    ExtremumKind,
    ExtremumReport,
    argmax_on_interval,
    classify_extremum,
    max_on_interval,
    max_value,
    maxima_positions,
    min_on_interval,
)
from .geometry import (
    COMPLEMENT,
    OMEGA,
    ExponentTrace,
    MeasureBound,
    ProbePoint,
    box_dimension,
    construction_scales,
    exponent_trace,
    exponent_trace_on_subsequence,
    mean_value_witness,
    measure_in_box,
    p_exponent_direct,
)
