from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sntip.models.canonical import (CanonicalParams, canonical_field, canonical_rhs,
                                    classify_regime, map_back, regime_exponent_zeta,
                                    rescale_large_amplitude, rescaled_field)
from sntip.models.morris_lecar import (MLParams, MLRegimeError, _static_current_d1,
                                       _static_current_d2, ml_field, ml_normalize,
                                       ml_normalized_field, ml_rest_state, static_current)
from sntip.models.seaice import (BranchRangeError, default_seaice_params, h_branch_inverse,
                                 scaled_params, seaice_full_field, seaice_h_field,
                                 seaice_normalize, seaice_rhs_full)


# --- canonical --------------------------------------------------------------

def test_canonical_defaults_and_validation():
    p = CanonicalParams(0.01, a0=4.0)
    assert p.x0 == 2.0
    with pytest.raises(ValueError):
        CanonicalParams(0.0)
    with pytest.raises(ValueError):
        CanonicalParams(0.01, Omega=-1)
    with pytest.raises(ValueError):
        CanonicalParams(0.01, a0=-1.0)


def test_canonical_field_matches_reference_rhs():
    p = CanonicalParams(0.01, A=0.7, Omega=3.0)
    y = np.array([0.3, 0.9])
    f = canonical_field(1.7, y, p.as_array())
    assert tuple(f) == pytest.approx(canonical_rhs(0.3, 0.9, 1.7, p))


def test_exponent_and_lambda():
    p = CanonicalParams(0.001).with_lambda(0.5)
    assert p.Omega == pytest.approx(0.001 ** -0.5)
    assert p.lam == pytest.approx(0.5)
    assert regime_exponent_zeta(2.0, 0.5) == 0.0


@pytest.mark.parametrize("kw,tag", [
    (dict(mu=0.001, A=1.0, Omega=0.001 ** -0.5), "HighFrequency"),
    (dict(mu=0.01, A=5.0, Omega=0.01, a0=20), "LowFreqOrderMu"),
    (dict(mu=0.01, A=5.0, Omega=0.5, a0=20), "LowFreqNu"),
    (dict(mu=0.001, A=0.001 ** -1.5, Omega=0.001 ** -0.5), "RescaledLowFrequency"),
])
def test_classify_regime(kw, tag):
    assert classify_regime(CanonicalParams(**kw)).tag == tag


@given(st.floats(1e-4, 0.05), st.floats(0.1, 50.0), st.floats(0.1, 100.0), st.floats(0.1, 20.0))
def test_rescale_round_trip(mu, A, Omega, a0):
    p = CanonicalParams(mu, A, Omega, a0)
    q = map_back(rescale_large_amplitude(p), A)
    for k in ("mu", "A", "Omega", "a0", "x0"):
        assert getattr(q, k) == pytest.approx(getattr(p, k), rel=1e-12)


@given(st.floats(1e-4, 0.05), st.floats(0.1, 50.0), st.floats(0.1, 100.0),
       st.floats(-3, 3), st.floats(-3, 3), st.floats(0, 10))
def test_rescale_equivariance(mu, A, Omega, x, a, t):
    """dz/dS = (dx/dt)/A at corresponding points."""
    p = CanonicalParams(mu, A, Omega, a0=1.0)
    r = rescale_large_amplitude(p)
    rA = math.sqrt(A)
    f = canonical_field(t, np.array([x, a]), p.as_array())
    g = rescaled_field(rA * t, np.array([x / rA, a / A]), np.array([r.M, 1.0, r.omega]))
    assert g[0] == pytest.approx(f[0] / A, rel=1e-9, abs=1e-12)
    assert g[1] == pytest.approx(f[1] / A ** 1.5, rel=1e-12)


# --- Morris-Lecar -------------------------------------------------------------

@pytest.fixture(scope="module")
def ml():
    return ml_normalize(MLParams())


def test_ml_fold(ml):
    assert ml.I_c == pytest.approx(44.09192, abs=1e-4)
    assert ml.v_c == pytest.approx(-27.13739, abs=1e-4)
    assert abs(ml.k0) < 1e-8 and abs(ml.k1) < 1e-8
    assert ml.k2 == pytest.approx(-2.263782, abs=1e-5)
    v2, I2 = ml.other_folds[0]
    assert v2 == pytest.approx(-3.2685, abs=1e-3) and I2 == pytest.approx(3.4556, abs=1e-3)


def test_ml_normalized_scales(ml):
    assert ml.mu == pytest.approx(20 * 0.0014 / 27.13739, rel=1e-6)
    m = ml.with_forcing(mu=0.001, A=2.0, Omega=30.0)
    assert m.params.A_hat == pytest.approx(2.0 * ml.v_c)
    assert m.params.Omega_hat == pytest.approx(1.5)
    assert ml_normalize(m.params).mu == pytest.approx(0.001)
    assert float(ml.I_from_b(ml.b_from_I(41.3))) == pytest.approx(41.3)
    assert float(ml.v_from_x(ml.x_from_v(-50.0))) == pytest.approx(-50.0)


@given(st.floats(-70, 10))
def test_ml_analytic_derivatives(v):
    p = MLParams()
    h = 1e-5
    fd1 = (static_current(v + h, p) - static_current(v - h, p)) / (2 * h)
    fd2 = (_static_current_d1(v + h, p) - _static_current_d1(v - h, p)) / (2 * h)
    assert _static_current_d1(v, p) == pytest.approx(fd1, abs=1e-6)
    assert _static_current_d2(v, p) == pytest.approx(fd2, abs=1e-6)


@given(st.floats(-0.5, 0.5), st.floats(0.0, 0.5), st.floats(-0.3, 0.3), st.floats(0, 100))
def test_ml_normalized_field_is_rescaled_physical(x, w, b, t):
    """x = (v - v_c)/v_c, b = (I - I_c)/v_c and physical time t_hat = gamma t."""
    n = ml_normalize(MLParams()).with_forcing(A=0.8, Omega=3.0)
    v, I = float(n.v_from_x(x)), float(n.I_from_b(b))
    fp = ml_field(n.gamma * t, np.array([v, w, I]), n.params.as_array())
    fn = ml_normalized_field(t, np.array([x, w, b]), n.as_array())
    assert fn[0] == pytest.approx(fp[0] * n.gamma / n.v_c, rel=1e-9, abs=1e-9)
    assert fn[1] == pytest.approx(fp[1] * n.gamma, rel=1e-9, abs=1e-12)
    assert fn[2] == pytest.approx(fp[2] * n.gamma / n.v_c, rel=1e-12)
    assert fn[2] == pytest.approx(-n.mu)


def test_ml_rest_state(ml):
    v, w = ml_rest_state(MLParams(), 40.0)
    assert static_current(v, MLParams()) == pytest.approx(40.0)
    assert v < ml.v_c
    with pytest.raises(MLRegimeError):
        ml_rest_state(MLParams(), 45.0)


# --- sea ice ---------------------------------------------------------------------

@pytest.fixture(scope="module")
def sea():
    return seaice_normalize(default_seaice_params())


def test_seaice_normalization(sea):
    assert sea.E_c == pytest.approx(9.869093, abs=1e-5)
    assert sea.dF0c == pytest.approx(5.634428, abs=1e-5)
    assert abs(sea.residual) < 1e-10
    assert abs(float(sea.dH(0.0))) < 1e-9
    assert float(sea.d2H(0.0)) < 0
    lo, hi = sea.critical_points
    assert lo == pytest.approx(-2.0, abs=1e-9) and hi == pytest.approx(0.0, abs=1e-9)
    assert sea.Omega == pytest.approx(2 * math.pi)
    assert sea.params.synthetic


def test_seaice_branches(sea):
    assert h_branch_inverse(sea, 0.3, "upper") == pytest.approx(1.24453, abs=1e-5)
    assert h_branch_inverse(sea, 0.3, "middle") == pytest.approx(-0.49313, abs=1e-5)
    assert h_branch_inverse(sea, 0.3, "lower") == pytest.approx(-15.107, abs=1e-3)
    for br in ("upper", "middle", "lower"):
        x = h_branch_inverse(sea, 0.3, br)
        assert float(sea.H(x)) + 0.3 == pytest.approx(0.0, abs=1e-10)
    assert h_branch_inverse(sea, 0.0, "upper") == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(BranchRangeError):
        h_branch_inverse(sea, -0.1, "upper")


def test_seaice_fields_consistent(sea):
    p = sea.params
    E, dF0, t = 12.0, 7.0, 0.37
    f = seaice_full_field(t, np.array([E, dF0]), p.as_array())
    assert tuple(f) == pytest.approx(seaice_rhs_full(E, dF0, t, p))
    # averaged H form equals the period-mean of the energy equation scaled by E_c
    x, b = float(sea.x_from_E(E)), float(sea.b_from_dF0(dF0))
    ts = (np.arange(4096) + 0.5) / 4096
    mean_full = np.mean([seaice_rhs_full(E, dF0, s, p)[0] for s in ts])
    hq = seaice_h_field(t, np.array([x, b]), sea.h_array(with_forcing=False))
    assert hq[0] == pytest.approx(mean_full / sea.E_c, rel=1e-9, abs=1e-12)


def test_seaice_scaled_params():
    p = default_seaice_params()
    q = scaled_params(p, FT_factor=2.0)
    assert q.FT.mean == pytest.approx(2 * p.FT.mean)
    r = scaled_params(p, FT_shift=0.5, cH_ratio=2.0)
    assert r.FT.mean == pytest.approx(p.FT.mean + 0.5) and r.cH == 2 * p.cH
