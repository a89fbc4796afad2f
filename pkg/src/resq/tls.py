"""Saturable two-level-system loss model, fits, and cohort comparison.

Internal loss decomposes into a power-independent background and a TLS
channel that saturates with drive:

    1/Qi(n_bar) = 1/Q0 + (1/Q_TLS) / sqrt(1 + n_bar/n_c).

Fits run in inverse-Q (loss) space, where independent channels add
linearly, with positivity enforced by log-parametrization. Fit quality is
scored by the relative residual standard deviation (RRSD): the standard
deviation of the percentage residuals of measured vs modeled loss, a
power-independent metric.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceFailure, InsufficientSeries, InvalidInput
from .leastsq import levenberg_marquardt
from .power import PowerSeries


def tls_model(n_bar, q0: float, q_tls: float, n_c: float):
    """Total internal loss 1/Qi at photon number ``n_bar`` (scalar or array)."""
    if q0 <= 0.0 or q_tls <= 0.0 or n_c <= 0.0:
        raise InvalidInput("q0, q_tls and n_c must be positive")
    n_bar = np.asarray(n_bar, dtype=float)
    out = 1.0 / q0 + (1.0 / q_tls) / np.sqrt(1.0 + n_bar / n_c)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class TlsFit:
    """Fitted (Q0, Q_TLS, n_c) with uncertainties and loss decomposition."""

    q0: float
    q_tls: float
    n_c: float
    sigma: dict[str, float]
    rrsd_percent: float
    mean_residual_percent: float
    converged: bool
    flags: tuple[str, ...] = field(default_factory=tuple)

    @property
    def frac_tls_lowpower(self) -> float:
        """TLS share of the unsaturated (n_bar -> 0) loss."""
        tls = 1.0 / self.q_tls
        return tls / (1.0 / self.q0 + tls)

    @property
    def frac_background_lowpower(self) -> float:
        return 1.0 - self.frac_tls_lowpower


def _series_arrays(series: PowerSeries):
    n_bars = np.array(series.n_bars, dtype=float)
    losses = 1.0 / np.array(series.q_internals, dtype=float)
    return n_bars, losses


def fit_tls(series: PowerSeries) -> TlsFit:
    """Weighted least-squares fit of the saturation model to a power series.

    Weights come from the propagated per-point loss uncertainties when every
    point carries one; otherwise uniform. Initial guesses are data-driven:
    the background from the highest-power point, the TLS term from the
    low-power excess, n_c from the geometric middle of the n_bar range.
    A fit whose n_c is looser than its own uncertainty is flagged
    ``nc_degenerate`` rather than rejected.
    """
    if len(series) < 4:
        raise InsufficientSeries(f"need >= 4 points, got {len(series)}")
    n_bars, losses = _series_arrays(series)
    if np.any(n_bars <= 0.0):
        raise InvalidInput("all n_bar values must be positive")

    flags = []
    decades = math.log10(n_bars.max() / n_bars.min())
    if decades < 2.0:
        flags.append("insufficient_dynamic_range")

    sigmas = [p.sigma_q_internal for p in series.points]
    if all(s is not None and s > 0.0 for s in sigmas):
        sigma_loss = np.array(sigmas) / np.array(series.q_internals, dtype=float) ** 2
        weights = 1.0 / sigma_loss
        weights /= weights.max()
    else:
        weights = np.ones_like(losses)

    loss_high = losses[np.argmax(n_bars)]
    loss_low = losses[np.argmin(n_bars)]
    q0_init = 1.0 / loss_high
    inv_qtls_init = max(loss_low - loss_high, 0.1 * loss_high)
    nc_init = math.sqrt(n_bars.min() * n_bars.max())

    def residual(p):
        ln_q0, ln_qtls, ln_nc = p
        model = np.exp(-ln_q0) + np.exp(-ln_qtls) / np.sqrt(1.0 + n_bars * np.exp(-ln_nc))
        return weights * (model - losses)

    x0 = [math.log(q0_init), -math.log(inv_qtls_init), math.log(nc_init)]
    result = levenberg_marquardt(residual, x0, max_iter=200)
    if not result.converged:
        raise ConvergenceFailure(f"TLS fit did not converge: {result.message}")

    q0, q_tls, n_c = (math.exp(v) for v in result.x)
    sig_log = np.sqrt(np.maximum(np.diag(result.covariance), 0.0))
    sigma = {
        "q0": q0 * float(sig_log[0]),
        "q_tls": q_tls * float(sig_log[1]),
        "n_c": n_c * float(sig_log[2]),
    }
    if sigma["n_c"] > n_c:
        flags.append("nc_degenerate")

    model = tls_model(n_bars, q0, q_tls, n_c)
    rel = (losses - model) / losses
    rrsd_percent = 100.0 * float(np.std(rel, ddof=1))
    mean_residual_percent = 100.0 * float(np.mean(rel))

    return TlsFit(
        q0=q0,
        q_tls=q_tls,
        n_c=n_c,
        sigma=sigma,
        rrsd_percent=rrsd_percent,
        mean_residual_percent=mean_residual_percent,
        converged=True,
        flags=tuple(flags),
    )


def rrsd(series: PowerSeries, fit: TlsFit) -> float:
    """Relative residual standard deviation in percent.

    residual_j = (1/Qi_meas,j - 1/Qi_model,j) / (1/Qi_meas,j); the RRSD is
    the sample standard deviation (N-1 denominator) of these, times 100.
    A constant relative offset therefore scores 0; it shows up in the mean
    residual, which is reported separately on the fit.
    """
    if not fit.converged:
        raise InvalidInput("rrsd requires a converged fit")
    if len(series) < 3:
        raise InsufficientSeries(f"need >= 3 points, got {len(series)}")
    n_bars, losses = _series_arrays(series)
    model = tls_model(n_bars, fit.q0, fit.q_tls, fit.n_c)
    rel = (losses - model) / losses
    return 100.0 * float(np.std(rel, ddof=1))


def decompose_loss(fit: TlsFit, n_bar: float) -> tuple[float, float, float]:
    """Split the modeled loss at ``n_bar`` into (background, TLS, TLS fraction)."""
    if not fit.converged:
        raise InvalidInput("decompose_loss requires a converged fit")
    if n_bar < 0.0:
        raise InvalidInput("n_bar must be >= 0")
    background = 1.0 / fit.q0
    tls = (1.0 / fit.q_tls) / math.sqrt(1.0 + n_bar / fit.n_c)
    return background, tls, tls / (background + tls)


@dataclass(frozen=True)
class CohortSummary:
    """Q_TLS values of one device cohort (e.g. fresh bilayer, aged, control)."""

    cohort_label: str
    q_tls_values: tuple[float, ...]

    def __post_init__(self):
        if not self.q_tls_values:
            raise InvalidInput(f"cohort {self.cohort_label!r} is empty")
        if any(v <= 0.0 for v in self.q_tls_values):
            raise InvalidInput("Q_TLS values must be positive")
        object.__setattr__(self, "q_tls_values", tuple(float(v) for v in self.q_tls_values))

    @property
    def mean_q_tls(self) -> float:
        return sum(self.q_tls_values) / len(self.q_tls_values)

    @property
    def min_q_tls(self) -> float:
        return min(self.q_tls_values)

    @property
    def max_q_tls(self) -> float:
        return max(self.q_tls_values)


@dataclass(frozen=True)
class CohortComparison:
    """Cohorts ordered by mean Q_TLS plus all pairwise mean ratios."""

    cohorts: tuple[CohortSummary, ...]          # ordered by descending mean
    mean_ratios: dict[tuple[str, str], float]   # (a, b) -> mean_a / mean_b

    @property
    def ordering(self) -> tuple[str, ...]:
        return tuple(c.cohort_label for c in self.cohorts)


def compare_cohorts(cohorts: list[CohortSummary]) -> CohortComparison:
    """Rank cohorts by mean Q_TLS and tabulate pairwise mean ratios."""
    if len(cohorts) < 2:
        raise InvalidInput("need at least 2 cohorts to compare")
    ordered = tuple(sorted(cohorts, key=lambda c: c.mean_q_tls, reverse=True))
    ratios: dict[tuple[str, str], float] = {}
    for a in cohorts:
        for b in cohorts:
            if a.cohort_label != b.cohort_label:
                ratios[(a.cohort_label, b.cohort_label)] = a.mean_q_tls / b.mean_q_tls
    return CohortComparison(cohorts=ordered, mean_ratios=ratios)
