"""Exception types raised by spinform."""


class SpinformError(Exception):
    """Base class for all library errors."""


class GeometryError(SpinformError, ValueError):
    """Bad geometric input: off-space point, dimension mismatch, degenerate chart."""


class StencilError(SpinformError, ValueError):
    """A finite-difference stencil would leave the parameter domain."""


class VanishingSpinorError(SpinformError, ValueError):
    """A spinor field vanishes where a nonzero value is required."""


class FlatnessError(SpinformError):
    """The modified connection is not flat: Gauss or Codazzi fails."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class ConfigError(SpinformError, ValueError):
    """Invalid run configuration."""
