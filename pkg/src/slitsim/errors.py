"""Exception types shared across the solvers."""


class SlitsimError(Exception):
    """Base class for all errors raised by this package."""


class NodeError(SlitsimError):
    """Velocity or quantum potential requested where |psi|^2 is below the
    node threshold; the quantity is undefined there."""


class GridTooSmall(SlitsimError):
    """Grid has fewer points per axis than the boundary stencils need."""


class NormDrift(SlitsimError):
    """Norm conservation tolerance exceeded during propagation (usually a
    sign that the time step is too large for the grid)."""


class TooFewPoints(SlitsimError):
    """Point set smaller than the requested neighbor count."""


class IllConditioned(SlitsimError):
    """Normal-equation matrix too ill-conditioned for a trustworthy fit."""


class MaskedRegion(SlitsimError):
    """Interpolation stencil dominated by near-node (masked) grid points.

    Carries the time of incursion in ``t`` when raised during trajectory
    integration (None otherwise).
    """

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class ConfigError(SlitsimError):
    """Scenario configuration file failed to parse or validate."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
