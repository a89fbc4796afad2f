"""Superconducting CPW resonator analysis toolkit.

Converts measured complex transmission sweeps into (f_r, Ql, Qe, Qi),
calibrates intracavity photon number from an attenuation budget, fits the
TLS saturation-loss model across power, and embeds the quarter-wave CPW
design equations.
"""

from .core import HBAR, C0, QualityFactors, dbm_to_watts, q_internal, q_internal_from_fit, watts_to_dbm
from .cpw import (
    CouplingDesign,
    CpwGeometry,
    DesignSummary,
    LineParameters,
    coupled_resonance,
    design_quarterwave,
    elliptic_k,
    external_q,
    external_q_approx,
    line_parameters,
    quarterwave_length_for,
    uncoupled_quarterwave_freq,
)
from .errors import (
    ConvergenceFailure,
    DegenerateGeometry,
    InsufficientSeries,
    InsufficientWings,
    InvalidInput,
    MalformedSweep,
    MetadataMissing,
    NonPhysicalFit,
    ResqError,
    UnsupportedFormat,
    WindowMismatch,
)
from .fitting import ResonanceFit, estimate_delay, fit_circle, fit_phase, fit_resonance
from .power import (
    AttenuationBudget,
    BudgetItem,
    PowerPoint,
    PowerSeries,
    build_power_series,
    chip_power,
    photon_number,
    series_from_values,
)
from .s21 import (
    BackgroundParams,
    ComplexSweep,
    ResonanceParams,
    eval_s21,
    ideal_circle,
    synthesize_sweep,
)
from .tls import (
    CohortComparison,
    CohortSummary,
    TlsFit,
    compare_cohorts,
    decompose_loss,
    fit_tls,
    rrsd,
    tls_model,
)

__version__ = "0.1.0"
