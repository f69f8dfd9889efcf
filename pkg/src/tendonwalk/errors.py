"""Exception types raised across the package."""


class TendonWalkError(Exception):
    """Base class for all package-specific errors."""


class Unreachable(TendonWalkError):
    """Foot target lies outside the leg's reachable annulus."""


class OutOfLimits(TendonWalkError):
    """Foot target is reachable only with joint angles outside the limits."""


class InfeasibleShape(TendonWalkError):
    """Trajectory shape parameters produce infeasible points."""


class InvalidDuration(TendonWalkError):
    """Requested signal duration is not positive."""


class NumericalDivergence(TendonWalkError):
    """Simulation state exceeded sanity bounds (bad parameters or time step)."""


class NonFiniteInput(TendonWalkError):
    """Network input contains NaN or infinity."""


class ShapeMismatch(TendonWalkError):
    """Array arguments have incompatible shapes."""


class DatasetTooSmall(TendonWalkError):
    """Not enough samples to split and train."""


class SeriesTooShort(TendonWalkError):
    """Time series too short for the requested analysis scales."""


class ConstantSeries(TendonWalkError):
    """Time series has zero fluctuation; the analysis is degenerate."""


class DegenerateRegion(TendonWalkError):
    """Reference region has zero area."""


class InsufficientData(TendonWalkError):
    """Too few values per group for a two-sample test."""
