import math

import numpy as np
import pytest

from resq import (
    ConvergenceFailure,
    CouplingDesign,
    CpwGeometry,
    InvalidInput,
    coupled_resonance,
    design_quarterwave,
    elliptic_k,
    external_q,
    external_q_approx,
    line_parameters,
    quarterwave_length_for,
    uncoupled_quarterwave_freq,
)


def elliptic_k_quadrature(k, n=200001):
    """Independent oracle: Simpson quadrature of the defining integral."""
    th = np.linspace(0.0, np.pi / 2.0, n)
    integrand = 1.0 / np.sqrt(1.0 - (k * np.sin(th)) ** 2)
    h = th[1] - th[0]
    w = np.ones(n)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return h / 3.0 * float(np.sum(w * integrand))


def test_elliptic_k_identity():
    assert elliptic_k(0.0) == pytest.approx(math.pi / 2.0, rel=1e-14)


def test_elliptic_k_against_quadrature():
    # frozen from the quadrature oracle above
    assert elliptic_k(0.5) == pytest.approx(1.6857503548125958, abs=1e-5)
    assert elliptic_k(0.8660254) == pytest.approx(2.156515635754643, abs=1e-5)
    for k in [0.1, 0.3, 0.7, 0.95, 0.999]:
        assert elliptic_k(k) == pytest.approx(elliptic_k_quadrature(k), rel=1e-8)


def test_elliptic_k_rejects_bad_modulus():
    with pytest.raises(InvalidInput):
        elliptic_k(1.0)
    with pytest.raises(InvalidInput):
        elliptic_k(-0.1)


def test_line_parameters_reproduce_design_values():
    geom = CpwGeometry(center_width_s=15.0e-6, gap_g=7.5e-6, substrate_eps_r=11.68)
    line = line_parameters(geom)
    assert line.z0 == pytest.approx(47.9, abs=0.1)
    assert line.eps_eff == pytest.approx(6.34, abs=0.01)


def test_line_parameters_vacuum_symmetry():
    geom = CpwGeometry(center_width_s=8e-6, gap_g=4e-6, substrate_eps_r=1.0)
    assert line_parameters(geom).eps_eff == 1.0


def test_line_parameters_against_quadrature_oracle():
    # z0 at k = 10/22 frozen from brute-force quadrature of both K integrals
    geom = CpwGeometry(center_width_s=10e-6, gap_g=6e-6, substrate_eps_r=11.68)
    assert line_parameters(geom).z0 == pytest.approx(50.47339466500672, rel=1e-7)


def test_line_parameters_internal_consistency():
    from resq.core import C0

    for s, g, er in [(15e-6, 7.5e-6, 11.68), (10e-6, 6e-6, 11.68), (20e-6, 10e-6, 9.8)]:
        line = line_parameters(CpwGeometry(s, g, er))
        assert line.z0 == pytest.approx(math.sqrt(line.l_per_len / line.c_per_len), rel=1e-9)
        v_phase = C0 / math.sqrt(line.eps_eff)
        assert v_phase == pytest.approx(1.0 / math.sqrt(line.l_per_len * line.c_per_len), rel=1e-9)


def test_z0_decreasing_in_aspect_ratio():
    prev = None
    for k in np.linspace(0.1, 0.9, 17):
        # pick s, g realizing this k = s/(s+2g)
        s = 10e-6
        g = s * (1.0 - k) / (2.0 * k)
        z0 = line_parameters(CpwGeometry(s, g, 11.68)).z0
        if prev is not None:
            assert z0 < prev
        prev = z0


def test_quarterwave_frequency():
    line = line_parameters(CpwGeometry(15e-6, 7.5e-6, 11.68))
    f1 = uncoupled_quarterwave_freq(line, 5.957e-3, n=1)
    assert f1 == pytest.approx(5.0e9, rel=0.005)
    # odd-harmonic ratio
    assert uncoupled_quarterwave_freq(line, 5.957e-3, n=2) == pytest.approx(3.0 * f1, rel=1e-12)


def test_quarterwave_definitional_vacuum():
    from resq.core import C0
    from resq.cpw import LineParameters

    line = LineParameters(z0=50.0, eps_eff=1.0, l_per_len=50.0 / C0, c_per_len=1.0 / (50.0 * C0))
    length = C0 / (4.0 * 1e9)
    assert uncoupled_quarterwave_freq(line, length) == pytest.approx(1e9, rel=1e-12)


def test_quarterwave_length_inversion():
    line = line_parameters(CpwGeometry(15e-6, 7.5e-6, 11.68))
    length = quarterwave_length_for(line, 5e9)
    assert length == pytest.approx(5.96e-3, rel=0.005)
    assert uncoupled_quarterwave_freq(line, length) == pytest.approx(5e9, rel=1e-12)


def _coupling(c_k, length=5.957e-3, n=1):
    line = line_parameters(CpwGeometry(15e-6, 7.5e-6, 11.68))
    return CouplingDesign.from_line(line, length, c_k=c_k, r_load=50.0, n=n)


def test_coupled_resonance_zero_coupling():
    coupling = _coupling(0.0)
    expected = 1.0 / (2.0 * math.pi * math.sqrt(coupling.l_equiv_n * coupling.c_equiv))
    assert coupled_resonance(coupling) == pytest.approx(expected, rel=1e-14)


def bisection_oracle(coupling):
    """Independent scalar root-finder on the same transcendental equation."""
    ln, c = coupling.l_equiv_n, coupling.c_equiv
    ck, rl = coupling.c_k, coupling.r_load

    def g(omega):
        c_star = ck / (1.0 + omega**2 * ck**2 * rl**2)
        return omega**2 * ln * (c + 2.0 * c_star) - 1.0

    lo = 0.25 / math.sqrt(ln * c)
    hi = 1.0 / math.sqrt(ln * c)
    assert g(lo) < 0.0 < g(hi)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if g(mid) > 0.0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi) / (2.0 * math.pi)


def test_coupled_resonance_against_bisection():
    coupling = _coupling(15.6e-15)
    f_fixed = coupled_resonance(coupling)
    f_zero = coupled_resonance(_coupling(0.0))
    assert f_fixed < f_zero
    assert f_fixed == pytest.approx(bisection_oracle(coupling), rel=1e-9)


def test_coupled_resonance_monotone_in_ck():
    f0 = coupled_resonance(_coupling(0.0))
    shifts = [f0 - coupled_resonance(_coupling(ck)) for ck in (5e-15, 10e-15, 20e-15)]
    assert shifts[0] < shifts[1] < shifts[2]
    assert all(s > 0 for s in shifts)


def test_coupled_resonance_converges_to_uncoupled():
    f0 = coupled_resonance(_coupling(0.0))
    errors = [abs(coupled_resonance(_coupling(ck)) - f0) / f0 for ck in (10e-15, 1e-15, 0.1e-15)]
    assert errors[0] > errors[1] > errors[2]
    assert errors[2] < 1e-6


def test_external_q_reactance_scale():
    coupling = _coupling(15.557e-15)
    omega = 2.0 * math.pi * 5e9
    x2 = (omega * coupling.c_k * coupling.r_load) ** 2
    assert x2 == pytest.approx(6.0e-4, rel=0.01)
    # exact / approximate ratio is exactly 1 + x^2
    assert external_q(coupling, omega) / external_q_approx(coupling, omega) == pytest.approx(
        1.0 + x2, rel=1e-12
    )


def test_external_q_ck_squared_scaling():
    omega = 2.0 * math.pi * 5e9
    q1 = external_q_approx(_coupling(10e-15), omega)
    q2 = external_q_approx(_coupling(20e-15), omega)
    assert q1 / q2 == pytest.approx(4.0, rel=1e-12)


def test_design_summary_shift_and_qe():
    geom = CpwGeometry(15e-6, 7.5e-6, 11.68)
    summary = design_quarterwave(geom, f_target=5e9, c_k=15.557e-15, r_load=50.0)
    assert summary.f_uncoupled == pytest.approx(5e9, rel=1e-12)
    assert summary.f_coupled < summary.f_uncoupled
    assert summary.coupling_reactance_sq == pytest.approx(6.0e-4, rel=0.02)
    assert summary.q_external_exact / summary.q_external_approx == pytest.approx(
        1.0 + summary.coupling_reactance_sq, rel=1e-9
    )


def test_design_requires_exactly_one_of_length_or_target():
    geom = CpwGeometry(15e-6, 7.5e-6, 11.68)
    with pytest.raises(InvalidInput):
        design_quarterwave(geom)
    with pytest.raises(InvalidInput):
        design_quarterwave(geom, length=5e-3, f_target=5e9)


def test_geometry_validation():
    with pytest.raises(InvalidInput):
        CpwGeometry(-1e-6, 7.5e-6, 11.68)
    with pytest.raises(InvalidInput):
        CpwGeometry(15e-6, 7.5e-6, 0.5)
