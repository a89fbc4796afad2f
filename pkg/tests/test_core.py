import math

import numpy as np
import pytest

from resq import (
    InvalidInput,
    NonPhysicalFit,
    QualityFactors,
    dbm_to_watts,
    q_internal,
    q_internal_from_fit,
    watts_to_dbm,
)
from resq.core import q_loaded_from_internal


def test_dbm_to_watts_definition():
    assert dbm_to_watts(0.0) == pytest.approx(1.0e-3, rel=1e-15)
    assert dbm_to_watts(30.0) == pytest.approx(1.0, rel=1e-15)


def test_dbm_to_watts_low_power():
    # direct evaluation of 1e-3 * 10^(-14.9)
    assert dbm_to_watts(-149.0) == pytest.approx(1.2589254117941663e-18, rel=1e-4)


def test_dbm_to_watts_rejects_nonfinite():
    with pytest.raises(InvalidInput):
        dbm_to_watts(float("nan"))
    with pytest.raises(InvalidInput):
        dbm_to_watts(float("inf"))


def test_dbm_watts_roundtrip():
    for p in [-149.0, -80.0, -30.0, 0.0, 17.3]:
        assert watts_to_dbm(dbm_to_watts(p)) == pytest.approx(p, abs=1e-12)


def test_dbm_monotone_and_ten_db_decade():
    rng = np.random.default_rng(7)
    p = np.sort(rng.uniform(-150, 30, 50))
    w = [dbm_to_watts(v) for v in p]
    assert all(a < b for a, b in zip(w, w[1:]))
    for v in p:
        assert dbm_to_watts(v + 10.0) == pytest.approx(10.0 * dbm_to_watts(v), rel=1e-12)


def test_q_internal_no_loading_limit():
    assert q_internal(1e5, 1e30) == pytest.approx(1e5, rel=1e-12)


def test_q_internal_direct_value():
    # 1/(1/95238 - 1/100000), evaluated independently
    assert q_internal(9.5238e4, 1.0e5) == pytest.approx(1999958.000839988, rel=1e-6)
    # and the displayed round figure at its own precision
    assert q_internal(9.5238e4, 1.0e5) == pytest.approx(2.0e6, rel=1e-4)


def test_q_internal_boundary_raises():
    with pytest.raises(NonPhysicalFit):
        q_internal(1e5, 1e5)
    with pytest.raises(NonPhysicalFit):
        q_internal(1e5, 9e4)


def test_q_internal_rejects_nonpositive():
    with pytest.raises(InvalidInput):
        q_internal(-1.0, 1e5)
    with pytest.raises(InvalidInput):
        q_internal(1e5, 0.0)


def test_q_internal_from_fit_theta_zero_reduces():
    ql = q_loaded_from_internal(2.0e6, 1.0e5)
    assert q_internal_from_fit(ql, 1.0e5, 0.0) == pytest.approx(2.0e6, rel=1e-10)
    assert q_internal_from_fit(9.5238e4, 1.0e5, 0.0) == pytest.approx(
        q_internal(9.5238e4, 1.0e5), rel=1e-15
    )


def test_q_internal_from_fit_theta_increases_qi():
    base = q_internal_from_fit(9.5238e4, 1.0e5, 0.0)
    tilted = q_internal_from_fit(9.5238e4, 1.0e5, 0.1)
    assert tilted > base


def test_q_internal_from_fit_edge_raises():
    # cos(pi/2) = 0 puts 1/Qi exactly at 1/Ql > 0, so the failing edge is
    # q_loaded = q_external with theta -> 0, or theta = pi/2 with 1/Ql -> 0.
    with pytest.raises(NonPhysicalFit):
        q_internal_from_fit(1e5, 1e5, 0.0)
    # theta = pi/2 removes all external correction: Qi = Ql, strictly positive
    assert q_internal_from_fit(1e5, 1e5, math.pi / 2) == pytest.approx(1e5, rel=1e-9)


def test_q_internal_roundtrip_property():
    rng = np.random.default_rng(11)
    for _ in range(100):
        qi = 10.0 ** rng.uniform(4.5, 7.5)
        qe = 10.0 ** rng.uniform(4.0, 6.0)
        ql = q_loaded_from_internal(qi, qe)
        assert q_internal(ql, qe) == pytest.approx(qi, rel=1e-10)


def test_q_internal_monotonicity_property():
    rng = np.random.default_rng(13)
    for _ in range(100):
        qe = 10.0 ** rng.uniform(4.0, 6.0)
        ql = qe / (1.0 + 10.0 ** rng.uniform(-3, 1))  # ql < qe
        up = q_internal(ql * 1.01, qe) if ql * 1.01 < qe else None
        if up is not None:
            assert up > q_internal(ql, qe)
        assert q_internal(ql, qe * 1.5) < q_internal(ql, qe)


def test_quality_factors_record():
    qf = QualityFactors(q_loaded=9.5238e4, q_external_mag=1.0e5, q_external_phase_theta=0.0)
    assert qf.q_internal == pytest.approx(1999958.000839988, rel=1e-9)
    assert qf.q_loaded <= qf.q_internal
    with pytest.raises(NonPhysicalFit):
        QualityFactors(q_loaded=1e5, q_external_mag=1e5, q_external_phase_theta=0.0)
