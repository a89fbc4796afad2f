"""Extraction of resonance parameters from a measured complex sweep.

The pipeline is the standard notch-port circle-fit chain: estimate and
remove the cable delay, normalize the background on the window wings, fit
the resonance circle (Taubin algebraic fit), fit the phase-vs-frequency arc
for f_r and Ql, then refine everything jointly against the raw complex data
with Levenberg-Marquardt. Internal Q follows the complex-phased external-Q
convention (real-part correction).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .core import q_internal_from_fit
from .errors import (
    ConvergenceFailure,
    DegenerateGeometry,
    InsufficientWings,
    InvalidInput,
    WindowMismatch,
)
from .leastsq import levenberg_marquardt
from .s21 import MIN_FIT_POINTS, BackgroundParams, ComplexSweep, ResonanceParams

log = logging.getLogger(__name__)

WING_FRACTION = 0.2
MIN_WING_POINTS = 6
# Resonance circle diameters below this many wing-noise sigmas are treated
# as "no resonance present" rather than fitted.
MIN_DEPTH_SNR = 5.0


@dataclass(frozen=True)
class ResonanceFit:
    """Fitted lineshape, background, derived internal Q, and diagnostics."""

    params: ResonanceParams
    background: BackgroundParams
    q_internal: float
    sigma: dict[str, float]
    residual_rms: float
    n_points_used: int
    converged: bool
    accepted: bool
    window: tuple[float, float]
    method_tag: str = "circle+phase+lm"
    notes: tuple[str, ...] = field(default_factory=tuple)


def _wing_indices(n: int) -> np.ndarray:
    n_wing = int(round(WING_FRACTION * n))
    if n_wing < MIN_WING_POINTS:
        raise InsufficientWings(
            f"need >= {MIN_WING_POINTS} wing points per side, got {n_wing}"
        )
    return np.r_[0:n_wing, n - n_wing:n]


def estimate_delay(sweep: ComplexSweep) -> float:
    """Cable delay from the phase slope of the window wings.

    Fits one line to the unwrapped phase over the outer 20% of the window
    on each side; tau = -slope / (2 pi). Multiplying the sweep by
    exp(+2i pi f tau) then flattens the wing phase. Accurate when the
    resonance sits well inside the window (wide windows); the joint
    refinement absorbs any residual.
    """
    idx = _wing_indices(len(sweep))
    phase = np.unwrap(np.angle(sweep.s21))
    f = sweep.freqs
    slope, _ = np.polyfit(f[idx] - f[idx].mean(), phase[idx], 1)
    return -slope / (2.0 * np.pi)


def fit_circle(points: np.ndarray) -> tuple[complex, float]:
    """Taubin algebraic circle fit; exact on noiseless circular data."""
    z = np.asarray(points, dtype=complex)
    if z.size < 8:
        raise InvalidInput(f"circle fit needs >= 8 points, got {z.size}")
    x = z.real - z.real.mean()
    y = z.imag - z.imag.mean()

    # Collinearity gate on the point scatter.
    scatter = np.array([[x @ x, x @ y], [x @ y, y @ y]])
    eig = np.linalg.eigvalsh(scatter)
    if eig[0] <= 0.0 or eig[1] / eig[0] > 1e12:
        raise DegenerateGeometry("points are collinear within tolerance")

    q = x * x + y * y
    q_mean = q.mean()
    q0 = (q - q_mean) / (2.0 * math.sqrt(q_mean))
    design = np.column_stack([q0, x, y])
    _, _, vt = np.linalg.svd(design, full_matrices=False)
    a0, a1, a2 = vt[2]
    a0 /= 2.0 * math.sqrt(q_mean)
    a3 = -q_mean * a0
    if abs(a0) < 1e-15 * max(abs(a1), abs(a2), 1e-300):
        raise DegenerateGeometry("fitted curvature vanishes (arc is a straight line)")
    cx = -a1 / (2.0 * a0) + z.real.mean()
    cy = -a2 / (2.0 * a0) + z.imag.mean()
    radius = math.sqrt(a1 * a1 + a2 * a2 - 4.0 * a0 * a3) / (2.0 * abs(a0))
    if not (math.isfinite(cx) and math.isfinite(cy) and math.isfinite(radius)):
        raise DegenerateGeometry("circle fit produced non-finite geometry")
    return complex(cx, cy), radius


def fit_phase(sweep_translated: ComplexSweep, center: complex) -> tuple[float, float]:
    """Resonance frequency and loaded Q from the centered-phase arc.

    Fits phi(f) = phi0 + 2 atan(2 Ql (1 - f/f_r)) to the unwrapped angle of
    (S21 - center).
    """
    f = sweep_translated.freqs
    angles = np.unwrap(np.angle(sweep_translated.s21 - center))
    f_lo, f_hi = float(f[0]), float(f[-1])
    span = f_hi - f_lo
    f_mid = 0.5 * (f_lo + f_hi)

    # Steepest phase roll-off locates the resonance; its slope sets Ql.
    dphi = np.diff(angles) / np.diff(f)
    i_steep = int(np.argmax(np.abs(dphi)))
    f_r0 = 0.5 * (f[i_steep] + f[i_steep + 1])
    ql0 = max(abs(dphi[i_steep]) * f_r0 / 4.0, 1.0)
    phi00 = float(np.interp(f_r0, f, angles))

    def residual(p):
        phi0, ln_ql, x_fr = p
        f_r = f_mid + x_fr * span
        return phi0 + 2.0 * np.arctan(2.0 * np.exp(ln_ql) * (1.0 - f / f_r)) - angles

    x0 = [phi00, math.log(ql0), (f_r0 - f_mid) / span]
    result = levenberg_marquardt(residual, x0, max_iter=200)
    if not result.converged:
        raise ConvergenceFailure(f"phase fit did not converge: {result.message}")
    phi0, ln_ql, x_fr = result.x
    f_r = f_mid + x_fr * span
    if not f_lo <= f_r <= f_hi:
        raise WindowMismatch(f"fitted f_r = {f_r:.6g} Hz outside window [{f_lo:.6g}, {f_hi:.6g}]")
    return float(f_r), float(math.exp(ln_ql))


def _wrap_angle(theta: float) -> float:
    wrapped = (theta + math.pi) % (2.0 * math.pi) - math.pi
    return math.pi if wrapped == -math.pi else wrapped


def _model_scaled(x, f, f_ref, span):
    """Forward model over scaled parameter vector (see fit_resonance)."""
    x_fr, ln_ql, ln_qe, theta, amp_db, slope_win, phi_ref, wind = x
    f_r = f_ref + x_fr * span
    ql = np.exp(ln_ql)
    qe = np.exp(ln_qe)
    rel = (f - f_ref) / span
    mag = 10.0 ** ((amp_db + slope_win * rel) / 20.0)
    bg = mag * np.exp(1j * (phi_ref - 2.0 * np.pi * wind * rel))
    dip = (ql / qe) * np.exp(1j * theta) / (1.0 + 2j * ql * (f - f_r) / f_r)
    return bg * (1.0 - dip)


def fit_resonance(sweep: ComplexSweep) -> ResonanceFit:
    """Fit one notch resonance in ``sweep``; see module docstring for stages.

    Raises the failing stage's error (InsufficientWings, DegenerateGeometry,
    WindowMismatch, ConvergenceFailure, NonPhysicalFit). A fit that survives
    is additionally gated into ``accepted`` by sigma(Qi)/Qi < 0.5 and f_r
    strictly inside the window.
    """
    n = len(sweep)
    if n < MIN_FIT_POINTS:
        raise InvalidInput(f"sweep has {n} points; fits require >= {MIN_FIT_POINTS}")
    f = sweep.freqs
    f_lo, f_hi = float(f[0]), float(f[-1])
    span = f_hi - f_lo
    f_ref = 0.5 * (f_lo + f_hi)
    idx = _wing_indices(n)

    # Stage 1: cable delay off, then anchor the background on the wings.
    tau0 = estimate_delay(sweep)
    z1 = sweep.s21 * np.exp(2j * np.pi * f * tau0)
    mag_db = 20.0 * np.log10(np.abs(z1))
    slope_db, amp_db0 = np.polyfit(f[idx] - f_ref, mag_db[idx], 1)
    wing_phase = np.angle(z1[idx])
    alpha0 = float(np.angle(np.exp(1j * wing_phase).mean()))
    bg_mag = 10.0 ** ((amp_db0 + slope_db * (f - f_ref)) / 20.0)
    z_norm = z1 / (bg_mag * np.exp(1j * alpha0))

    # Wing scatter sets the noise floor used by the no-resonance gate.
    wing_pts = z_norm[idx]
    noise = float(np.sqrt((np.var(wing_pts.real) + np.var(wing_pts.imag)) / 2.0))

    # Stage 2: circle geometry on the normalized data.
    center, radius = fit_circle(z_norm)
    if noise > 0.0 and 2.0 * radius < MIN_DEPTH_SNR * noise:
        raise DegenerateGeometry(
            f"dip depth {2 * radius:.3g} below {MIN_DEPTH_SNR} x wing noise {noise:.3g}"
        )
    theta0 = float(np.angle(1.0 - center))
    depth0 = min(2.0 * radius, 1.0)

    # Stage 3: phase arc for f_r and Ql, then |Qe| from the circle diameter.
    norm_sweep = ComplexSweep(freqs=f, s21=z_norm,
                              power_dbm_at_source=sweep.power_dbm_at_source)
    f_r0, ql0 = fit_phase(norm_sweep, center)
    qe0 = ql0 / depth0

    # Stage 4: joint refinement on the raw data, all in O(1) scaled units:
    # x = [(f_r - f_ref)/span, ln Ql, ln |Qe|, theta,
    #      amp_db at f_ref, amp slope in dB per span,
    #      phase at f_ref, delay windings tau * span].
    x0 = np.array([
        (f_r0 - f_ref) / span,
        math.log(ql0),
        math.log(qe0),
        theta0,
        amp_db0,
        slope_db * span,
        _wrap_angle(alpha0 - 2.0 * math.pi * f_ref * tau0),
        tau0 * span,
    ])

    data = sweep.s21

    def residual(x):
        diff = _model_scaled(x, f, f_ref, span) - data
        return np.concatenate([diff.real, diff.imag])

    result = levenberg_marquardt(residual, x0, max_iter=200)
    if not result.converged:
        raise ConvergenceFailure(f"joint refinement did not converge: {result.message}")

    x_fr, ln_ql, ln_qe, theta, amp_db, slope_win, phi_ref, wind = result.x
    f_r = f_ref + x_fr * span
    ql = math.exp(ln_ql)
    qe = math.exp(ln_qe)
    theta = _wrap_angle(theta)
    tau = wind / span
    alpha = _wrap_angle(phi_ref + 2.0 * math.pi * f_ref * tau)
    slope = slope_win / span

    qi = q_internal_from_fit(ql, qe, theta)  # raises NonPhysicalFit when <= 0

    cov = result.covariance
    sig = np.sqrt(np.maximum(np.diag(cov), 0.0))
    # d(1/Qi) over the scaled parameters (ln Ql, ln Qe, theta).
    grad_inv_qi = np.array([-1.0 / ql, math.cos(theta) / qe, math.sin(theta) / qe])
    cov_q = cov[np.ix_([1, 2, 3], [1, 2, 3])]
    var_inv_qi = float(grad_inv_qi @ cov_q @ grad_inv_qi)
    sigma_qi = qi * qi * math.sqrt(max(var_inv_qi, 0.0))

    sigma = {
        "f_r": float(sig[0] * span),
        "q_loaded": float(ql * sig[1]),
        "q_external_mag": float(qe * sig[2]),
        "theta": float(sig[3]),
        "amp_db_at_fref": float(sig[4]),
        "amp_slope_db_per_hz": float(sig[5] / span),
        "phase_offset_alpha": float(sig[6]),
        "cable_delay_tau": float(sig[7] / span),
        "q_internal": sigma_qi,
    }

    residual_rms = math.sqrt(result.cost / n)
    notes = []
    if sigma_qi / qi >= 0.5:
        notes.append(f"gate: sigma(Qi)/Qi = {sigma_qi / qi:.3g} >= 0.5")
    if not f_lo < f_r < f_hi:
        notes.append("gate: refined f_r outside window")
    accepted = result.converged and not notes

    return ResonanceFit(
        params=ResonanceParams(
            f_r=float(f_r), q_loaded=float(ql),
            q_external_mag=float(qe), theta=float(theta),
        ),
        background=BackgroundParams(
            amp_db_at_fref=float(amp_db),
            amp_slope_db_per_hz=float(slope),
            phase_offset_alpha=float(alpha),
            cable_delay_tau=float(tau),
            f_ref=float(f_ref),
        ),
        q_internal=float(qi),
        sigma=sigma,
        residual_rms=float(residual_rms),
        n_points_used=n,
        converged=bool(result.converged),
        accepted=bool(accepted),
        window=(f_lo, f_hi),
        notes=tuple(notes),
    )
