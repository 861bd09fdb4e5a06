"""Exception types shared across the package."""


class MicroclimapError(Exception):
    """Base class for all package-specific errors."""


class DomainError(MicroclimapError, ValueError):
    """Input is outside the physical domain of an operation."""


class ValidityError(MicroclimapError, ValueError):
    """Input is outside the validity range of the UTCI approximation."""


class SchemaError(MicroclimapError, ValueError):
    """Input file does not match the expected schema."""


class GridError(MicroclimapError, ValueError):
    """Raster grids are malformed or not co-registered."""


class MatchError(MicroclimapError, LookupError):
    """No sample found within the matching tolerance."""


class DayRejectedError(MicroclimapError):
    """Campaign day fails the radiative-day selection criteria."""

    def __init__(self, reasons):
        self.reasons = list(reasons)
        super().__init__("day rejected: " + "; ".join(self.reasons))


class ConfigError(MicroclimapError, ValueError):
    """Run configuration is invalid or references missing files."""
