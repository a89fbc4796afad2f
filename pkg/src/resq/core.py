"""Quality-factor algebra, power unit conversions, and physical constants.

All frequencies in this package are plain Hz stored as doubles; angular
frequencies are computed on demand as ``2*pi*f`` and never stored.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidInput, NonPhysicalFit

# Fixed physical constants (SI). Not configurable.
HBAR = 1.054571817e-34  # J s
C0 = 299792458.0        # m/s


def dbm_to_watts(p_dbm: float) -> float:
    """Convert a power level in dBm to watts."""
    if not math.isfinite(p_dbm):
        raise InvalidInput(f"power must be finite, got {p_dbm!r}")
    return 1e-3 * 10.0 ** (p_dbm / 10.0)


def watts_to_dbm(p_watts: float) -> float:
    """Convert a power level in watts to dBm."""
    if not math.isfinite(p_watts) or p_watts <= 0.0:
        raise InvalidInput(f"power must be finite and positive, got {p_watts!r}")
    return 10.0 * math.log10(p_watts / 1e-3)


def q_internal(q_loaded: float, q_external: float) -> float:
    """Internal quality factor from loaded and (real) external Q.

    Inverse loss rates add: 1/Ql = 1/Qe + 1/Qi, so
    Qi = 1 / (1/Ql - 1/Qe).
    """
    if q_loaded <= 0.0 or q_external <= 0.0:
        raise InvalidInput("q_loaded and q_external must be positive")
    inv_qi = 1.0 / q_loaded - 1.0 / q_external
    if inv_qi <= 0.0:
        raise NonPhysicalFit(
            f"q_external={q_external:g} <= q_loaded={q_loaded:g} implies "
            "non-positive internal loss"
        )
    return 1.0 / inv_qi


def q_internal_from_fit(q_loaded: float, q_external_mag: float, theta: float) -> float:
    """Internal Q from a complex-phased external Q (notch-fit convention).

    The lineshape fit returns |Qe| and its phase theta; only the real part
    of 1/Qe drains energy, so

        1/Qi = 1/Ql - cos(theta)/|Qe|.

    Reduces exactly to :func:`q_internal` at theta = 0.
    """
    if q_loaded <= 0.0 or q_external_mag <= 0.0:
        raise InvalidInput("q_loaded and q_external_mag must be positive")
    inv_qi = 1.0 / q_loaded - math.cos(theta) / q_external_mag
    if inv_qi <= 0.0:
        raise NonPhysicalFit(
            f"1/Qi = {inv_qi:.3e} <= 0 for q_loaded={q_loaded:g}, "
            f"|q_e|={q_external_mag:g}, theta={theta:g}"
        )
    return 1.0 / inv_qi


def q_loaded_from_internal(q_internal_: float, q_external_mag: float, theta: float = 0.0) -> float:
    """Loaded Q implied by internal Q and a complex-phased external Q."""
    if q_internal_ <= 0.0 or q_external_mag <= 0.0:
        raise InvalidInput("q_internal and q_external_mag must be positive")
    return 1.0 / (1.0 / q_internal_ + math.cos(theta) / q_external_mag)


@dataclass(frozen=True)
class QualityFactors:
    """Loaded, external (magnitude/phase), and derived internal Q of one fit."""

    q_loaded: float
    q_external_mag: float
    q_external_phase_theta: float = 0.0

    def __post_init__(self):
        if self.q_loaded <= 0.0 or self.q_external_mag <= 0.0:
            raise InvalidInput("quality factors must be positive")
        if not -math.pi < self.q_external_phase_theta <= math.pi:
            raise InvalidInput("theta must lie in (-pi, pi]")
        # Raises NonPhysicalFit if the record is inconsistent.
        q_internal_from_fit(self.q_loaded, self.q_external_mag, self.q_external_phase_theta)

    @property
    def q_internal(self) -> float:
        return q_internal_from_fit(
            self.q_loaded, self.q_external_mag, self.q_external_phase_theta
        )
