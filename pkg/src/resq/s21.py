"""Notch-type resonance lineshape and synthetic sweep generation.

The forward model is

    S21(f) = a(f) * [1 - (Ql/|Qe|) e^{i theta} / (1 + 2i Ql (f - f_r)/f_r)]

with an instrumental background a(f) that is linear in dB across the window
plus a constant phase offset and a linear cable-delay phase:

    a(f) = 10^{(A0 + A1 (f - f_ref)) / 20} * exp[i (alpha - 2 pi f tau)].

Synthetic sweeps from this model (plus seeded complex Gaussian noise) are
the oracle the inverse fitting code is validated against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInput, MalformedSweep

# Fitting-side floor; shorter sweeps can exist but are rejected by the fitter.
MIN_FIT_POINTS = 32


@dataclass(frozen=True)
class ResonanceParams:
    """Resonance frequency and the three lineshape quality parameters."""

    f_r: float
    q_loaded: float
    q_external_mag: float
    theta: float = 0.0

    def __post_init__(self):
        if self.f_r <= 0.0 or self.q_loaded <= 0.0 or self.q_external_mag <= 0.0:
            raise InvalidInput("f_r, q_loaded and q_external_mag must be positive")
        if not -math.pi < self.theta <= math.pi:
            raise InvalidInput("theta must lie in (-pi, pi]")
        if not 0.0 < self.q_loaded / self.q_external_mag <= 1.0:
            raise InvalidInput("dip depth q_loaded/q_external_mag must lie in (0, 1]")

    @property
    def depth(self) -> float:
        """Dip depth Ql/|Qe| (the diameter of the resonance circle)."""
        return self.q_loaded / self.q_external_mag


@dataclass(frozen=True)
class BackgroundParams:
    """Instrumental background: dB-linear amplitude, phase offset, cable delay."""

    amp_db_at_fref: float = 0.0
    amp_slope_db_per_hz: float = 0.0
    phase_offset_alpha: float = 0.0
    cable_delay_tau: float = 0.0
    f_ref: float = 0.0


@dataclass(frozen=True)
class ComplexSweep:
    """One frequency sweep of complex transmission samples plus metadata."""

    freqs: np.ndarray
    s21: np.ndarray
    power_dbm_at_source: float = 0.0
    metadata: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        freqs = np.asarray(self.freqs, dtype=float)
        s21 = np.asarray(self.s21, dtype=complex)
        object.__setattr__(self, "freqs", freqs)
        object.__setattr__(self, "s21", s21)
        if freqs.ndim != 1 or s21.ndim != 1 or freqs.size != s21.size:
            raise MalformedSweep("freqs and s21 must be 1-d arrays of equal length")
        if freqs.size < 2:
            raise MalformedSweep("sweep needs at least 2 points")
        if not np.all(np.diff(freqs) > 0.0):
            raise MalformedSweep("frequencies must be strictly increasing")
        if not (np.all(np.isfinite(freqs)) and np.all(np.isfinite(s21.real)) and np.all(np.isfinite(s21.imag))):
            raise MalformedSweep("sweep contains NaN or Inf samples")

    def __len__(self) -> int:
        return int(self.freqs.size)

    @property
    def span(self) -> float:
        return float(self.freqs[-1] - self.freqs[0])


def background_amplitude(bg: BackgroundParams, f) -> np.ndarray:
    """Complex background a(f) evaluated on scalar or array frequency."""
    f = np.asarray(f, dtype=float)
    mag = 10.0 ** ((bg.amp_db_at_fref + bg.amp_slope_db_per_hz * (f - bg.f_ref)) / 20.0)
    return mag * np.exp(1j * (bg.phase_offset_alpha - 2.0 * np.pi * f * bg.cable_delay_tau))


def eval_s21(res: ResonanceParams, bg: BackgroundParams, f):
    """Forward lineshape model at frequency ``f`` (scalar or array)."""
    f = np.asarray(f, dtype=float)
    detune = 1.0 + 2j * res.q_loaded * (f - res.f_r) / res.f_r
    dip = res.depth * np.exp(1j * res.theta) / detune
    out = background_amplitude(bg, f) * (1.0 - dip)
    return complex(out) if out.ndim == 0 else out


def ideal_circle(res: ResonanceParams) -> tuple[complex, float]:
    """Center and radius of the S21 locus for a unit background.

    The notch traces a circle of radius Ql/(2|Qe|) centered at
    1 - (Ql/(2|Qe|)) e^{i theta}.
    """
    r = res.depth / 2.0
    return 1.0 - r * np.exp(1j * res.theta), r


def synthesize_sweep(
    res: ResonanceParams,
    bg: BackgroundParams,
    window: tuple[float, float, int],
    noise_sigma: float = 0.0,
    seed: int = 0,
    power_dbm_at_source: float = 0.0,
    metadata: dict[str, str] | None = None,
) -> ComplexSweep:
    """Evaluate the model on a grid and add seeded per-quadrature noise.

    Deterministic for a fixed seed: the generator is created per call.
    A window that does not contain f_r is flagged in the metadata rather
    than rejected.
    """
    f_start, f_stop, n_points = window
    if n_points < 2:
        raise InvalidInput("window needs at least 2 points")
    if f_stop <= f_start:
        raise InvalidInput("window must have f_stop > f_start")
    if noise_sigma < 0.0:
        raise InvalidInput("noise_sigma must be >= 0")

    freqs = np.linspace(f_start, f_stop, int(n_points))
    s21 = np.asarray(eval_s21(res, bg, freqs), dtype=complex)
    if noise_sigma > 0.0:
        rng = np.random.default_rng(seed)
        s21 = s21 + noise_sigma * (rng.standard_normal(len(freqs)) + 1j * rng.standard_normal(len(freqs)))

    meta = dict(metadata or {})
    if not f_start <= res.f_r <= f_stop:
        meta["warning"] = "window_mismatch"
    return ComplexSweep(freqs=freqs, s21=s21, power_dbm_at_source=power_dbm_at_source, metadata=meta)
