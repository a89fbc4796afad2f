"""Exception types raised across the analysis pipeline.

Every stage failure maps to one of these so batch code can tell a bad
input file from a fit that went sideways.
"""


class ResqError(Exception):
    """Base class for all package-specific errors."""


class InvalidInput(ResqError):
    """Arguments violate a precondition (non-finite, empty, out of range)."""


class NonPhysicalFit(ResqError):
    """Extracted parameters imply a negative or infinite internal Q."""


class ConvergenceFailure(ResqError):
    """An iterative solver ran out of iterations or stalled."""


class DegenerateGeometry(ResqError):
    """Circle fit input is collinear or has no resolvable resonance circle."""


class InsufficientWings(ResqError):
    """Too few off-resonance points to anchor the background."""


class WindowMismatch(ResqError):
    """Resonance frequency falls outside the swept window."""


class MetadataMissing(ResqError):
    """A sweep file lacks required header metadata (e.g. power_dbm)."""


class MalformedSweep(ResqError):
    """Sweep data is structurally invalid (non-monotone, NaN, ragged rows)."""


class UnsupportedFormat(ResqError):
    """File format or format option not handled by this parser."""


class InsufficientSeries(ResqError):
    """Not enough accepted points to form or score a power series."""
