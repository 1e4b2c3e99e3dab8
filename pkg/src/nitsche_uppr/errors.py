"""Exception types raised by the pipeline."""


class NitscheError(Exception):
    """Base class for all pipeline errors."""


class MeshError(NitscheError):
    """Corrupt or invalid triangulation."""


class AssumptionViolation(NitscheError):
    """The interface crosses an element boundary other than exactly twice."""

    def __init__(self, message, elements=()):
        super().__init__(message)
        self.elements = list(elements)


class NoConvergence(NitscheError):
    """Edge root finding did not converge."""


class DegenerateCut(NitscheError):
    """One side of a cut element has (numerically) zero area."""


class NotConverged(NitscheError):
    """Iterative solver hit its iteration cap; ``x`` holds the best iterate."""

    def __init__(self, message, x=None, report=None):
        super().__init__(message)
        self.x = x
        self.report = report


class IndefiniteDetected(NitscheError):
    """Conjugate gradients met a non-positive curvature direction."""


class PatchFailure(NitscheError):
    """Recovery patch stayed rank deficient after maximal ring expansion."""


class BudgetExceeded(NitscheError):
    """Adaptive mesh generation ran out of levels with violations left."""

    def __init__(self, message, mesh=None, elements=()):
        super().__init__(message)
        self.mesh = mesh
        self.elements = list(elements)


class ConfigError(NitscheError):
    """Bad experiment configuration."""
