"""Forward design equations for quarter-wave coplanar-waveguide resonators.

Line parameters come from the quasi-static conformal mapping of a CPW on an
infinitely thick substrate (zero metal thickness, no trenching), which is
adequate at the few-GHz design stage. The feedline coupling is modeled by a
Norton-transformed series capacitor loading a lumped LC equivalent of the
line, which gives the coupled resonance shift and the external Q.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .core import C0
from .errors import ConvergenceFailure, InvalidInput

# Default relative permittivity of high-resistivity silicon.
DEFAULT_EPS_R = 11.68


def elliptic_k(k: float) -> float:
    """Complete elliptic integral of the first kind K(k), modulus convention.

    Evaluated by arithmetic-geometric-mean iteration,
    K(k) = pi / (2 * AGM(1, sqrt(1 - k^2))), converged to 1e-12 relative.
    """
    if not 0.0 <= k < 1.0:
        raise InvalidInput(f"modulus must satisfy 0 <= k < 1, got {k!r}")
    a = 1.0
    b = math.sqrt(1.0 - k * k)
    for _ in range(64):
        if abs(a - b) <= 1e-12 * a:
            break
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    else:
        raise ConvergenceFailure("AGM iteration did not converge")
    return math.pi / (a + b)


@dataclass(frozen=True)
class CpwGeometry:
    """CPW cross-section and length: center width s, gap g, substrate eps_r."""

    center_width_s: float
    gap_g: float
    substrate_eps_r: float
    length_ell: float = 0.0  # optional; 0 means "not specified"

    def __post_init__(self):
        if self.center_width_s <= 0.0 or self.gap_g <= 0.0:
            raise InvalidInput("center width and gap must be positive")
        if self.substrate_eps_r < 1.0:
            raise InvalidInput("substrate eps_r must be >= 1")
        if self.length_ell < 0.0:
            raise InvalidInput("length must be non-negative")

    @property
    def k_ratio(self) -> float:
        """Conformal-mapping aspect ratio k = s/(s + 2g), strictly in (0, 1)."""
        return self.center_width_s / (self.center_width_s + 2.0 * self.gap_g)


@dataclass(frozen=True)
class LineParameters:
    """Characteristic impedance and per-unit-length L, C of the CPW mode."""

    z0: float          # ohm
    eps_eff: float     # dimensionless
    l_per_len: float   # H/m
    c_per_len: float   # F/m


def line_parameters(geom: CpwGeometry) -> LineParameters:
    """Quasi-static CPW line parameters for an infinitely thick substrate.

    eps_eff = (eps_r + 1)/2 and Z0 = (30*pi/sqrt(eps_eff)) * K(k')/K(k)
    with k = s/(s + 2g), k' = sqrt(1 - k^2).
    """
    k = geom.k_ratio
    kp = math.sqrt(1.0 - k * k)
    eps_eff = 0.5 * (geom.substrate_eps_r + 1.0)
    z0 = 30.0 * math.pi / math.sqrt(eps_eff) * elliptic_k(kp) / elliptic_k(k)
    c_per_len = math.sqrt(eps_eff) / (z0 * C0)
    l_per_len = z0 * math.sqrt(eps_eff) / C0
    return LineParameters(z0=z0, eps_eff=eps_eff, l_per_len=l_per_len, c_per_len=c_per_len)


def uncoupled_quarterwave_freq(line: LineParameters, length: float, n: int = 1) -> float:
    """Resonance of the n-th quarter-wave mode, f_n = (2n-1) c0 / (4 l sqrt(eps_eff))."""
    if n < 1:
        raise InvalidInput("mode index n must be >= 1")
    if length <= 0.0:
        raise InvalidInput("length must be positive")
    return (2 * n - 1) * C0 / (4.0 * length * math.sqrt(line.eps_eff))


def quarterwave_length_for(line: LineParameters, f_target: float, n: int = 1) -> float:
    """Length that puts the n-th quarter-wave mode at ``f_target``."""
    if f_target <= 0.0:
        raise InvalidInput("target frequency must be positive")
    return (2 * n - 1) * C0 / (4.0 * f_target * math.sqrt(line.eps_eff))


@dataclass(frozen=True)
class CouplingDesign:
    """Lumped equivalent of a coupled resonator: C = C_l*l/2, L_n = 2*L_l*l/(n*pi)^2."""

    c_k: float            # coupling capacitance, F
    r_load: float         # feedline impedance, ohm
    mode_index_n: int
    c_equiv: float        # F
    l_equiv_n: float      # H

    def __post_init__(self):
        if self.c_k < 0.0 or self.r_load <= 0.0:
            raise InvalidInput("c_k must be >= 0 and r_load > 0")
        if self.mode_index_n < 1:
            raise InvalidInput("mode index n must be >= 1")
        if self.c_equiv <= 0.0 or self.l_equiv_n <= 0.0:
            raise InvalidInput("equivalent L and C must be positive")

    @classmethod
    def from_line(
        cls,
        line: LineParameters,
        length: float,
        c_k: float,
        r_load: float = 50.0,
        n: int = 1,
    ) -> "CouplingDesign":
        if length <= 0.0:
            raise InvalidInput("length must be positive")
        return cls(
            c_k=c_k,
            r_load=r_load,
            mode_index_n=n,
            c_equiv=line.c_per_len * length / 2.0,
            l_equiv_n=2.0 * line.l_per_len * length / (n * math.pi) ** 2,
        )


def _norton_c_star(c_k: float, omega: float, r_load: float) -> float:
    # Norton transform of the series coupling capacitor. The capacitor (not
    # the resonator) capacitance sits in the numerator; with the resonator C
    # there instead, the c_k -> 0 limit would not recover the bare resonance.
    return c_k / (1.0 + omega * omega * c_k * c_k * r_load * r_load)


def coupled_resonance(coupling: CouplingDesign) -> float:
    """Coupled lumped resonance in Hz.

    Solves omega = 1/sqrt(L_n (C + 2 C*)), C* = C_k/(1 + omega^2 C_k^2 R_L^2),
    by fixed-point iteration from the uncoupled omega = 1/sqrt(L_n C).
    The loading only ever pulls the frequency down.
    """
    ln = coupling.l_equiv_n
    c = coupling.c_equiv
    omega = 1.0 / math.sqrt(ln * c)
    if coupling.c_k == 0.0:
        return omega / (2.0 * math.pi)
    for _ in range(100):
        c_star = _norton_c_star(coupling.c_k, omega, coupling.r_load)
        omega_next = 1.0 / math.sqrt(ln * (c + 2.0 * c_star))
        if abs(omega_next - omega) <= 1e-12 * omega:
            return omega_next / (2.0 * math.pi)
        omega = omega_next
    raise ConvergenceFailure("coupled resonance fixed point did not converge in 100 iterations")


def external_q(coupling: CouplingDesign, omega_n: float) -> float:
    """External Q of the capacitively coupled mode (exact form).

    Q_e = C (1 + omega^2 C_k^2 R_L^2) / (2 omega C_k^2 R_L).
    """
    if omega_n <= 0.0:
        raise InvalidInput("omega_n must be positive")
    if coupling.c_k <= 0.0:
        return math.inf
    x = omega_n * coupling.c_k * coupling.r_load
    return coupling.c_equiv * (1.0 + x * x) / (2.0 * omega_n * coupling.c_k ** 2 * coupling.r_load)


def external_q_approx(coupling: CouplingDesign, omega_n: float) -> float:
    """Small-reactance approximation Q_e ~= C / (2 omega C_k^2 R_L)."""
    if omega_n <= 0.0:
        raise InvalidInput("omega_n must be positive")
    if coupling.c_k <= 0.0:
        return math.inf
    return coupling.c_equiv / (2.0 * omega_n * coupling.c_k ** 2 * coupling.r_load)


@dataclass(frozen=True)
class DesignSummary:
    """Everything the design CLI prints for one geometry/coupling choice."""

    line: LineParameters
    length: float
    mode_index_n: int
    f_uncoupled: float
    f_coupled: float
    c_k: float
    r_load: float
    coupling_reactance_sq: float    # omega^2 C_k^2 R_L^2 at the coupled mode
    q_external_exact: float
    q_external_approx: float
    notes: tuple[str, ...] = field(default_factory=tuple)


def design_quarterwave(
    geom: CpwGeometry,
    length: float | None = None,
    f_target: float | None = None,
    c_k: float = 0.0,
    r_load: float = 50.0,
    n: int = 1,
) -> DesignSummary:
    """Full forward design for one quarter-wave resonator.

    Exactly one of ``length`` / ``f_target`` may fix the geometry; when a
    target frequency is given, the quarter-wave length is solved for it.
    The Norton loading shift is applied multiplicatively to the quarter-wave
    spectrum, relative to the lumped model's own c_k = 0 limit, so that the
    uncoupled odd-harmonic spectrum stays exact.
    """
    if (length is None) == (f_target is None):
        raise InvalidInput("specify exactly one of length or f_target")
    line = line_parameters(geom)
    if length is None:
        length = quarterwave_length_for(line, f_target, n=n)
    f_unc = uncoupled_quarterwave_freq(line, length, n=n)

    notes = ("norton transform uses the coupling capacitance in the numerator",)
    if c_k > 0.0:
        coupling = CouplingDesign.from_line(line, length, c_k=c_k, r_load=r_load, n=n)
        f_lumped = coupled_resonance(coupling)
        f_lumped_bare = 1.0 / (2.0 * math.pi * math.sqrt(coupling.l_equiv_n * coupling.c_equiv))
        f_coupled = f_unc * (f_lumped / f_lumped_bare)
        omega = 2.0 * math.pi * f_coupled
        x = omega * c_k * r_load
        qe = external_q(coupling, omega)
        qe_approx = external_q_approx(coupling, omega)
        reactance_sq = x * x
    else:
        f_coupled = f_unc
        qe = math.inf
        qe_approx = math.inf
        reactance_sq = 0.0

    return DesignSummary(
        line=line,
        length=length,
        mode_index_n=n,
        f_uncoupled=f_unc,
        f_coupled=f_coupled,
        c_k=c_k,
        r_load=r_load,
        coupling_reactance_sq=reactance_sq,
        q_external_exact=qe,
        q_external_approx=qe_approx,
        notes=notes,
    )
