"""Exception types shared across the package."""


class KnoppError(Exception):
    """Base class for every error raised by this package."""


class DepthExceeded(KnoppError):
    """A digit beyond the inspectable depth of a stream was requested."""

    def __init__(self, depth, requested):
        super().__init__(f"digit {requested} requested but stream depth is {depth}")
        self.depth = depth
        self.requested = requested


class InvalidTarget(KnoppError, ValueError):
    pass


class OutOfDomain(KnoppError, ValueError):
    pass


class PointSpecError(KnoppError, ValueError):
    """Malformed point-spec string; ``position`` is the offending column."""

    def __init__(self, text, position, reason):
        super().__init__(f"{reason} at position {position} in {text!r}")
        self.text = text
        self.position = position
        self.reason = reason


class PrecisionUnreachable(KnoppError):
    pass


class ThresholdAmbiguity(KnoppError):
    """A slope argument could not be separated from a maxima threshold."""


class WitnessNotFound(KnoppError):
    def __init__(self, scale, reason=""):
        super().__init__(f"no witness at scale {scale}" + (f": {reason}" if reason else ""))
        self.scale = scale
