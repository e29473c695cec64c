"""Exception hierarchy shared by all modules."""


class ScatterError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(ScatterError, ValueError):
    """A parameter bundle violates a physical or numerical invariant."""


class NonPositiveMass(ValidationError):
    pass


class NonPositiveMomentum(ValidationError):
    pass


class SpreadTooWide(ValidationError):
    pass


class PacketsOverlap(ValidationError):
    pass


class AngleOutOfRange(ValidationError):
    pass


class ParamsMismatch(ScatterError, ValueError):
    pass


class GridTooCoarse(ScatterError, ValueError):
    pass


class TooFewFringes(ScatterError):
    pass


class ForwardSingularity(ScatterError, ValueError):
    """The probe's final x-momentum coincides with its initial one."""


class DegenerateDensity(ScatterError):
    pass


class ToleranceNotReached(ScatterError, ArithmeticError):
    pass


class NoSignChange(ScatterError, ValueError):
    pass


class NotAnExtremum(ScatterError, ValueError):
    pass


class ConfigParse(ScatterError, ValueError):
    """Malformed parameter file, override or command line."""
