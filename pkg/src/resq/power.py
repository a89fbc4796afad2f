"""On-chip power calibration and intracavity photon number.

The instrument output reaches the chip through a fixed attenuation budget
(discrete attenuators, filters, cabling); on-chip power in dBm is the
source power minus the budget's applied total. Mean photon number follows

    n_bar = 2 P_chip[W] Ql^2 / (hbar omega_r^2 Qe),   omega_r = 2 pi f_r.

Shifting the budget rescales every n_bar but never touches the fitted Qs.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

from .core import HBAR, dbm_to_watts
from .errors import InsufficientSeries, InvalidInput
from .fitting import ResonanceFit

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class BudgetItem:
    label: str
    loss_db: float
    note: str = ""

    def __post_init__(self):
        if self.loss_db < 0.0 or not math.isfinite(self.loss_db):
            raise InvalidInput(f"loss_db must be finite and >= 0, got {self.loss_db!r}")


@dataclass(frozen=True)
class AttenuationBudget:
    """Itemized input-line losses; ``used_db`` is the value actually applied.

    By default ``used_db`` is the total rounded to the nearest integer dB;
    an explicit value farther than 1 dB from the total must be flagged as a
    deliberate override.
    """

    items: tuple[BudgetItem, ...]
    used_db: float = field(default=math.nan)
    overridden: bool = False

    def __post_init__(self):
        if not self.items:
            raise InvalidInput("budget must contain at least one item")
        object.__setattr__(self, "items", tuple(self.items))
        if math.isnan(self.used_db):
            object.__setattr__(self, "used_db", float(round(self.total_db)))
        elif abs(self.used_db - self.total_db) > 1.0 and not self.overridden:
            raise InvalidInput(
                f"used_db={self.used_db:g} is more than 1 dB from total "
                f"{self.total_db:g}; pass overridden=True if intended"
            )

    @property
    def total_db(self) -> float:
        total = 0.0
        for item in self.items:
            total += item.loss_db
        return total


def chip_power(p_source_dbm: float, budget: AttenuationBudget) -> float:
    """Power at the device plane: source power minus the applied attenuation."""
    if not math.isfinite(p_source_dbm):
        raise InvalidInput("source power must be finite")
    return p_source_dbm - budget.used_db


def photon_number(p_chip_watts: float, f_r: float, q_loaded: float, q_external_mag: float) -> float:
    """Mean intracavity photon number for the given drive and fitted Qs."""
    if p_chip_watts < 0.0 or f_r <= 0.0 or q_loaded <= 0.0 or q_external_mag <= 0.0:
        raise InvalidInput("photon_number arguments must be positive")
    omega = 2.0 * math.pi * f_r
    return 2.0 * p_chip_watts * q_loaded * q_loaded / (HBAR * omega * omega * q_external_mag)


@dataclass(frozen=True)
class PowerPoint:
    """One (power, photon number, internal Q) sample of a resonator."""

    p_source_dbm: float
    p_chip_dbm: float
    n_bar: float
    q_internal: float
    sigma_q_internal: float | None = None
    fit: ResonanceFit | None = None


@dataclass(frozen=True)
class PowerSeries:
    """All accepted power points of one resonator, sorted by photon number."""

    resonator_id: str
    points: tuple[PowerPoint, ...]
    f_r_median: float

    def __post_init__(self):
        pts = tuple(sorted(self.points, key=lambda p: p.n_bar))
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def n_bars(self):
        return [p.n_bar for p in self.points]

    @property
    def q_internals(self):
        return [p.q_internal for p in self.points]


def build_power_series(
    fits: list[tuple[float, ResonanceFit]],
    budget: AttenuationBudget,
    resonator_id: str,
) -> PowerSeries:
    """Assemble a resonator's power series from per-power fits.

    Each point uses its own fit's Ql, |Qe| and f_r in the photon-number
    conversion. Fits that failed the acceptance gate are dropped with a
    logged reason; fewer than 4 surviving points is an error.
    """
    points = []
    for p_source_dbm, fit in fits:
        if not fit.accepted:
            reason = "; ".join(fit.notes) if fit.notes else "fit not converged"
            log.info("%s @ %+g dBm rejected: %s", resonator_id, p_source_dbm, reason)
            continue
        p_chip_dbm = chip_power(p_source_dbm, budget)
        n_bar = photon_number(
            dbm_to_watts(p_chip_dbm),
            fit.params.f_r,
            fit.params.q_loaded,
            fit.params.q_external_mag,
        )
        points.append(PowerPoint(
            p_source_dbm=p_source_dbm,
            p_chip_dbm=p_chip_dbm,
            n_bar=n_bar,
            q_internal=fit.q_internal,
            sigma_q_internal=fit.sigma.get("q_internal"),
            fit=fit,
        ))
    if len(points) < 4:
        raise InsufficientSeries(
            f"{resonator_id}: only {len(points)} accepted fits, need >= 4"
        )
    f_r_median = _median(sorted(p.fit.params.f_r for p in points))
    return PowerSeries(resonator_id=resonator_id, points=tuple(points), f_r_median=f_r_median)


def series_from_values(
    resonator_id: str,
    n_bars,
    q_internals,
    sigmas=None,
    f_r: float = 5e9,
) -> PowerSeries:
    """Build a series directly from (n_bar, Qi) values, e.g. model-generated."""
    if len(n_bars) != len(q_internals):
        raise InvalidInput("n_bars and q_internals must have equal length")
    if sigmas is not None and len(sigmas) != len(n_bars):
        raise InvalidInput("sigmas must match n_bars length")
    points = tuple(
        PowerPoint(
            p_source_dbm=0.0,
            p_chip_dbm=0.0,
            n_bar=float(n),
            q_internal=float(q),
            sigma_q_internal=None if sigmas is None else float(sigmas[i]),
        )
        for i, (n, q) in enumerate(zip(n_bars, q_internals))
    )
    return PowerSeries(resonator_id=resonator_id, points=points, f_r_median=f_r)


def _median(sorted_values) -> float:
    n = len(sorted_values)
    mid = n // 2
    if n % 2:
        return float(sorted_values[mid])
    return 0.5 * (sorted_values[mid - 1] + sorted_values[mid])
