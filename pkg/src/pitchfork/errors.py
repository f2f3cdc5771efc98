"""Exception types raised across the toolkit."""


class PitchforkError(Exception):
    """Base class for all toolkit errors."""


class AmbiguousProjection(PitchforkError, ValueError):
    """Point sits at a focal point of the manifold (no unique nearest point)."""


class OutsideTube(PitchforkError, ValueError):
    """Normal offset exceeds the declared tube radius."""


class UnsupportedManifold(PitchforkError, ValueError):
    pass


class MeshError(PitchforkError, ValueError):
    pass


class LeftTube(PitchforkError):
    """A map or flow carried a point out of N(alpha)."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class NewtonDivergence(PitchforkError):
    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace or []


class NoInverseProvided(PitchforkError):
    pass


class NotRotation(PitchforkError, ValueError):
    pass


class NoCrossing(PitchforkError):
    pass


class NotContracting(PitchforkError):
    def __init__(self, message, run=None):
        super().__init__(message)
        self.run = run


class BranchCollapse(PitchforkError):
    def __init__(self, message, run=None):
        super().__init__(message)
        self.run = run


class InterpolationOutOfRange(PitchforkError):
    pass


class ParamsViolateIneq(PitchforkError, ValueError):
    pass


class NoBifurcation(PitchforkError):
    pass


class SpecError(PitchforkError, ValueError):
    """Malformed problem definition."""
