"""Exception hierarchy shared by all modules."""


class SchottkyZetaError(Exception):
    """Base class for every error raised by this package."""


class NotLoxodromic(SchottkyZetaError):
    pass


class DegenerateFixedPoints(SchottkyZetaError):
    pass


class FixesInfinity(SchottkyZetaError):
    pass


class BadLetter(SchottkyZetaError):
    pass


class NotCyclicallyReduced(SchottkyZetaError):
    pass


class CirclesOverlap(SchottkyZetaError):
    pass


class NoValidRadius(SchottkyZetaError):
    pass


class CirclesRequired(SchottkyZetaError):
    pass


class GenusTooSmall(SchottkyZetaError):
    pass


class PoleTooClose(SchottkyZetaError):
    pass


class NoConvergence(SchottkyZetaError):
    pass


class SingularPairing(SchottkyZetaError):
    pass


class FitFailed(SchottkyZetaError):
    pass


class DimensionMismatch(SchottkyZetaError):
    pass


class NotDivisible(SchottkyZetaError):
    pass


class SpecError(SchottkyZetaError):
    """Malformed group specification (schema or value error)."""
