from __future__ import annotations

import dataclasses
import math
import warnings

import numpy as np
import pytest

from sntip.app_asymptotics.ml import (MLDegenerateError, ml_hf_tipping, ml_initial_b,
                                      ml_lf_broot, ml_lf_critical, ml_lf_tipping,
                                      ml_unforced_tipping, ml_w_coefficients)
from sntip.app_asymptotics.seaice import (HysteresisLoss, seaice_averaged_tipping,
                                          seaice_h_averages, seaice_hysteresis,
                                          seaice_lower_end, seaice_tipping, seaice_xstar)
from sntip.asymptotics import (NoCriticalPairError, RegimeWarning, lf_f, quadratic_tipping)
from sntip.forcing import constant
from sntip.models.morris_lecar import MLParams, ml_normalize
from sntip.models.seaice import default_seaice_params, seaice_normalize


@pytest.fixture(scope="module")
def ml():
    return ml_normalize(MLParams())


@pytest.fixture(scope="module")
def sea():
    return seaice_normalize(default_seaice_params())


def _ml_mu(n, mu_hat):
    return mu_hat * n.gamma / abs(n.v_c)


def _flat(n):
    zero = constant(0.0, n.Omega)
    return dataclasses.replace(n, q=zero, Q_time=zero)


# --- Morris-Lecar ------------------------------------------------------------

@pytest.mark.parametrize("mu_hat,I_tip", [(0.0014, 44.58), (0.0271, 47.65)])
def test_ml_unforced_examples(ml, mu_hat, I_tip):
    pr = ml_unforced_tipping(ml, _ml_mu(ml, mu_hat))
    assert pr.extras["I_bias"] == pytest.approx(I_tip, rel=0.01)
    assert pr.extras["I_bias"] == pytest.approx(I_tip, abs=0.01)


def test_ml_unforced_static_limit(ml):
    pr = ml_unforced_tipping(ml, 1e-12)
    assert pr.extras["I_bias"] == pytest.approx(ml.I_c, abs=1e-6)
    assert ml.I_c == pytest.approx(44.09, abs=0.2)


def test_ml_w_zero_amplitude_limit(ml):
    W = ml_w_coefficients(ml, 0.0, 5.0)
    assert W.W00 == 0.0
    assert W.W0d == ml.kappa0
    assert W.W01 == pytest.approx(ml.w_inf1, rel=1e-14)
    assert W.W02 == pytest.approx(0.5 * ml.w_inf2, rel=1e-12)


def test_ml_w00_scaling(ml):
    r = 0.1
    W = ml_w_coefficients(ml, r * 10.0, 10.0)
    bracket = (ml.w_inf1 * ml.kappa1 + 0.5 * ml.w_inf2 * ml.kappa0) / W.W0d
    assert W.W00 == pytest.approx(0.5 * r * r * bracket, rel=1e-14)


def _w_ratio(n, z, r, T=np.linspace(0.0, 2 * np.pi, 4097)[:-1]):
    # period average of kappa*w_inf over that of kappa, both on the quadratic Taylor forms
    X = z - r * np.cos(T)
    k = n.kappa0 + n.kappa1 * X + 0.5 * n.kappa2 * X * X
    w = n.w_inf0 + n.w_inf1 * X + 0.5 * n.w_inf2 * X * X
    return np.mean(k * w) / np.mean(k)


def test_ml_w_quadrature_oracle(ml):
    h = 1e-3
    errs = []
    for r in (0.1, 0.05):
        W = ml_w_coefficients(ml, r * 10.0, 10.0)
        r0, rp, rm = (_w_ratio(ml, z, r) for z in (0.0, h, -h))
        errs.append((abs(r0 - ml.w_inf0 - W.W00), abs((rp - rm) / (2 * h) - W.W01),
                     abs((rp - 2 * r0 + rm) / (2 * h * h) - W.W02)))
    (e00a, e01a, e02a), (e00b, e01b, e02b) = errs
    # W00 is exact to O(r^4); W01 and W02 carry O(r^2) truncation errors
    assert e00a < 1e-6 and e00a / e00b == pytest.approx(16, rel=0.1)
    assert e01a < 1e-3 and e01a / e01b == pytest.approx(4, rel=0.1)
    assert e02a < 1e-3 and e02a / e02b == pytest.approx(4, rel=0.1)


def test_ml_hf_zero_amplitude_exact(ml):
    mu = _ml_mu(ml, 0.001)
    assert ml_hf_tipping(ml, 0.0, 30.0, mu).value == ml_unforced_tipping(ml, mu).value


def test_ml_hf_infinite_frequency_limit(ml):
    mu = _ml_mu(ml, 0.001)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RegimeWarning)
        far = ml_hf_tipping(ml, 2.0, 1e6, mu).value
    assert far == pytest.approx(ml_unforced_tipping(ml, mu).value, abs=1e-8)


def test_ml_hf_larger_amplitude_tips_earlier(ml):
    mu = 0.003
    Om = mu ** -0.5
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RegimeWarning)
        small = ml_hf_tipping(ml, 2.0, Om, mu).extras["I_bias"]
        large = ml_hf_tipping(ml, 8.0, Om, mu).extras["I_bias"]
    assert large < small


def test_ml_hf_warns_at_low_frequency(ml):
    with pytest.warns(RegimeWarning):
        ml_hf_tipping(ml, 1.0, 0.5, 0.01)


def test_ml_lf_zero_amplitude(ml):
    assert ml_lf_tipping(ml, 0.04, 0.0, 5.0).value == ml_unforced_tipping(ml, 0.04).value


def test_ml_lf_root_shares_canonical_form(ml):
    b0 = 3.0
    b_r = ml_lf_broot(ml, 2.5, 5.0, b0)
    assert abs(lf_f(b_r, 2.5, 5.0, b0)) <= 1e-10
    pr = ml_lf_tipping(ml, 0.04, 2.5, 5.0, b0)
    assert pr.extras["residual"] <= 1e-10
    assert pr.value == pytest.approx(pr.delay_component + pr.shift_component, abs=1e-14)


def test_ml_lf_critical(ml):
    ca = ml_lf_critical(ml, 0.04, 0.2, b0=3.0)
    assert ca.A_c > ca.A_m
    assert max(ca.residuals) <= 1e-9
    C = 0.2 / 0.04
    assert 1 + C * C * ca.a_star ** 2 == pytest.approx(C * C * ca.A_m ** 2, rel=1e-12)
    assert ca.A_c == pytest.approx(ca.A_m + 0.2 * ca.A_m / math.sqrt(2 * abs(ml.k2) * ca.a_star),
                                   rel=1e-14)


def test_ml_lf_critical_needs_room_below_start(ml):
    # the default ramp starts too close to the fold for C b0 to reach 2 pi
    assert 0.2 / 0.04 * ml_initial_b(ml) < 2 * math.pi
    with pytest.raises(NoCriticalPairError):
        ml_lf_critical(ml, 0.04, 0.2)


def test_ml_lf_warns_outside_order_one_c(ml):
    with pytest.warns(RegimeWarning):
        ml_lf_critical(ml, 0.04, 1e-4, b0=2e5)


def test_ml_degenerate_k2(ml):
    with pytest.raises(MLDegenerateError):
        ml_unforced_tipping(dataclasses.replace(ml, k2=0.0), 0.01)


# --- sea ice -----------------------------------------------------------------

def test_seaice_xstar_default(sea):
    b_star, x_star = seaice_xstar(sea)
    assert x_star == pytest.approx(2.2, abs=0.1)
    assert b_star == pytest.approx(-float(sea.H(x_star)), abs=1e-12)


def test_seaice_flat_forcing_falls_back_to_fold(sea):
    b_star, x_star = seaice_xstar(_flat(sea))
    assert x_star == pytest.approx(sea.critical_points[1], abs=1e-12)
    assert b_star == pytest.approx(0.0, abs=1e-9)


def test_seaice_flat_forcing_averages_are_taylor_data(sea):
    x = 1.3
    av = seaice_h_averages(_flat(sea), x_star=x)
    assert av.H0_bar == pytest.approx(float(sea.H(x)), abs=1e-13)
    assert av.H1_bar == pytest.approx(float(sea.dH(x)), abs=1e-13)
    assert av.H2_bar == pytest.approx(0.5 * float(sea.d2H(x)), abs=1e-13)


def test_seaice_averages_against_trapezoid_oracle(sea):
    # periodic trapezoid is spectrally accurate: an independent check on Simpson
    av = seaice_h_averages(sea)
    T = 2 * math.pi / sea.Omega
    t = np.linspace(0.0, T, 20001)[:-1]
    X = av.x_star + sea.Q_time(t)
    assert av.H0_bar == pytest.approx(float(np.mean(sea.H(X))), abs=1e-10)
    assert av.H1_bar == pytest.approx(float(np.mean(sea.dH(X))), abs=1e-10)
    assert av.H2_bar == pytest.approx(float(np.mean(0.5 * sea.d2H(X))), abs=1e-10)
    assert av.quad_error < 1e-9


def test_seaice_default_h2_negative(sea):
    assert seaice_h_averages(sea).H2_bar < 0


def test_seaice_flat_forcing_reduces_to_quadratic_law(sea):
    flat = _flat(sea)
    forced = seaice_tipping(flat).value
    taylor = quadratic_tipping(1.0, float(sea.H(0.0)), float(sea.dH(0.0)),
                               0.5 * float(sea.d2H(0.0)), sea.mu).value
    assert forced == pytest.approx(taylor, abs=1e-10)
    assert seaice_averaged_tipping(sea).value == pytest.approx(taylor, abs=1e-10)


def test_seaice_forced_above_averaged(sea):
    forced = seaice_tipping(sea)
    avg = seaice_averaged_tipping(sea)
    assert forced.value > avg.value
    assert forced.extras["dF0"] > avg.extras["dF0"]
    assert forced.extras["dF0"] == pytest.approx(sea.dF0c + forced.value * sea.E_c, rel=1e-14)


def test_seaice_slow_drift_limit(sea):
    vals = [seaice_tipping(sea, mu=sea.mu * f).value for f in (1.0, 0.1, 0.01, 0.001)]
    b_end = -seaice_tipping(sea).extras["b_Q"]
    assert np.all(np.diff(vals) > 0)
    assert abs(vals[-1] - b_end) < abs(vals[0] - b_end) / 50


def test_seaice_hysteresis_report(sea):
    base = default_seaice_params()
    rep = seaice_hysteresis(base, 1.0)
    assert not rep.lost and rep.xstar_ok and rep.overlap > 0
    assert rep.b_lower_end == pytest.approx(seaice_lower_end(sea), abs=1e-12)
    gone = seaice_hysteresis(base, 3.5)
    assert gone.lost and gone.reason
    assert set(rep.to_dict()) >= {"FT_factor", "hysteresis_lost", "overlap", "x_star"}


def test_seaice_hysteresis_overlap_shrinks_with_ft_amplitude():
    base = default_seaice_params()
    ov = [seaice_hysteresis(base, f).overlap for f in (1.0, 2.0, 2.7, 3.0, 3.3)]
    assert np.all(np.diff(ov) < 0)


def test_seaice_xstar_raises_when_branches_vanish():
    from sntip.models.seaice import scaled_params
    n = seaice_normalize(scaled_params(default_seaice_params(), FT_factor=8.0))
    with pytest.raises((HysteresisLoss, ValueError)):
        seaice_xstar(n)
