"""Exception hierarchy shared by all modules."""

__all__ = [
    "GKdVError",
    "NoPeriodicOrbit",
    "DegenerateOrbit",
    "QuadratureFailure",
    "NearSeparatrix",
    "IntegratorFailure",
    "ClosureFailure",
    "NotApplicable",
    "DetDrift",
    "GenericityViolation",
    "CrossCheckFailure",
    "NotPowerLaw",
    "PathLeavesAdmissibleRegion",
    "DegenerateCubic",
    "NewtonDivergence",
    "BranchCollision",
    "ParityViolation",
    "ScanTooShort",
    "TruncationNotConverged",
    "ConfigError",
    "ValidationFailure",
]


class GKdVError(Exception):
    """Base class for computation errors raised by this package."""


class NoPeriodicOrbit(GKdVError):
    pass


class DegenerateOrbit(GKdVError):
    pass


class QuadratureFailure(GKdVError):
    pass


class NearSeparatrix(GKdVError):
    """Finite-difference stencil left the family of periodic orbits."""


class IntegratorFailure(GKdVError):
    pass


class ClosureFailure(GKdVError):
    pass


class NotApplicable(GKdVError):
    pass


class DetDrift(GKdVError):
    pass


class GenericityViolation(GKdVError):
    pass


class CrossCheckFailure(GKdVError):
    pass


class NotPowerLaw(GKdVError):
    pass


class PathLeavesAdmissibleRegion(GKdVError):
    pass


class DegenerateCubic(GKdVError):
    pass


class NewtonDivergence(GKdVError):
    def __init__(self, message, last_kappa=None):
        super().__init__(message)
        self.last_kappa = last_kappa


class BranchCollision(GKdVError):
    def __init__(self, message, kappa=None):
        super().__init__(message)
        self.kappa = kappa


class ParityViolation(GKdVError):
    pass


class ScanTooShort(GKdVError):
    pass


class TruncationNotConverged(GKdVError):
    pass


class ConfigError(Exception):
    """Invalid command-line or configuration-file input."""


class ValidationFailure(Exception):
    """One or more invariants of the validation suite failed."""
