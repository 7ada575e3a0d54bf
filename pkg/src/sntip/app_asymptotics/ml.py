"""Morris-Lecar tipping predictions in normalized variables.

All b values follow b = (I_bias - I_c)/v_c; each Prediction also carries
the matching I_bias in ``extras["I_bias"]``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from ..asymptotics import (ConcavityRegimeError, CriticalAmplitude, FPRIME_GUARD, Prediction,
                           RegimeWarning, lf_critical_pair, lf_f, lf_f_prime, lf_first_root,
                           quadratic_tipping)
from ..models.canonical import REGIME_THRESHOLDS
from ..models.morris_lecar import MLNormalized
from ..specfun import airy_first_zero

__all__ = [
    "MLWCoefficients",
    "MLDegenerateError",
    "ml_unforced_tipping",
    "ml_w_coefficients",
    "ml_hf_coefficients",
    "ml_hf_tipping",
    "ml_lf_broot",
    "ml_lf_tipping",
    "ml_lf_critical",
    "ml_initial_b",
]


class MLDegenerateError(ValueError):
    """A coefficient that must be nonzero (W0d, h2^hf) vanished or has the wrong sign."""


@dataclass(frozen=True)
class MLWCoefficients:
    """Period-averaged gating response w ~ W00 + W01 z + W02 z^2; W0d is its denominator."""

    W00: float
    W01: float
    W02: float
    W0d: float


def _with_I(n: MLNormalized, pred: Prediction) -> Prediction:
    pred.extras["I_bias"] = float(n.I_from_b(pred.value))
    return pred


def ml_initial_b(n: MLNormalized) -> float:
    """b at the start of the ramp, I_bias = I0."""
    return float(n.b_from_I(n.params.I0))


def ml_unforced_tipping(n: MLNormalized, mu: float | None = None) -> Prediction:
    """b_ml = |k2|^(-1/3) a_d, the quadratic law with the fold's Taylor data."""
    mu = n.mu if mu is None else mu
    if not n.k2 < 0:
        raise MLDegenerateError("k2 must be negative")
    ad = mu ** (2.0 / 3.0) * airy_first_zero()
    delay = abs(n.k2) ** (-1.0 / 3.0) * ad
    return _with_I(n, Prediction(delay, delay, 0.0, "MLUnforced", (), {"k2": n.k2}))


def ml_w_coefficients(n: MLNormalized, A: float, Omega: float) -> MLWCoefficients:
    if not Omega > 0:
        raise ValueError("Omega must be positive")
    s = A * A / (2.0 * Omega * Omega)
    k0, k1, k2 = n.kappa0, n.kappa1, n.kappa2
    w1, w2 = n.w_inf1, n.w_inf2
    W0d = k0 + A * A * k2 / (4.0 * Omega * Omega)
    if abs(W0d) < 1e-12 * max(1.0, abs(k0)):
        raise MLDegenerateError("W0d vanishes")
    core = (w1 * k1 + 0.5 * w2 * k0) / W0d
    W00 = core * s
    W01 = w1 * k0 / W0d - k1 * W00 / W0d
    W02 = core + W00 * (-k2 / (2.0 * W0d) + 2.0 * k1 * k1 / W0d ** 2) - w1 * k1 * k0 / W0d ** 2
    return MLWCoefficients(W00, W01, W02, W0d)


def ml_hf_coefficients(n: MLNormalized, A: float, Omega: float) -> tuple[float, float, float]:
    """(h0^hf, h1^hf, h2^hf) of the averaged quadratic normal form."""
    W = ml_w_coefficients(n, A, Omega)
    gK, D = n.params.g_K, n.D
    s = A * A / (2.0 * Omega * Omega)
    h0 = -gK * D * W.W00 + n.h2 * s
    h1 = -gK * (W.W00 + D * (W.W01 - n.w_inf1))
    h2 = n.h2 - gK * (W.W01 + D * W.W02)
    return h0, h1, h2


def ml_hf_tipping(n: MLNormalized, A: float, Omega: float, mu: float | None = None) -> Prediction:
    """b_hf = |h2^hf|^(-1/3) a_d - b_s with b_s = h0^hf + (h1^hf)^2/(4|h2^hf|)."""
    mu = n.mu if mu is None else mu
    if A == 0:
        return ml_unforced_tipping(n, mu)
    notes = []
    lam = -math.log(Omega) / math.log(mu)
    if not (Omega > 1 and lam > REGIME_THRESHOLDS["lambda_min"]):
        msg = f"lambda = {lam:.3g}: high-frequency averaging is not justified"
        notes.append(msg)
        warnings.warn(msg, RegimeWarning, stacklevel=2)
    h0, h1, h2 = ml_hf_coefficients(n, A, Omega)
    if not h2 < 0:
        raise MLDegenerateError(f"h2^hf = {h2!r} is not negative")
    q = quadratic_tipping(1.0, h0, h1, h2, mu)
    pred = Prediction(q.value, q.delay_component, q.shift_component, "MLHighFrequency",
                      tuple(notes), {"h0_hf": h0, "h1_hf": h1, "h2_hf": h2, "b_s": q.extras["a_s"]})
    return _with_I(n, pred)


def ml_lf_broot(n: MLNormalized, A: float, C: float, b0: float | None = None) -> float:
    """Largest root below b0 of F(b) = b + A sin(C (b0 - b))."""
    b0 = ml_initial_b(n) if b0 is None else b0
    return lf_first_root(A, C, b0)


def _c_warn(C: float) -> list[str]:
    notes = []
    if not REGIME_THRESHOLDS["c_min"] <= C <= REGIME_THRESHOLDS["c_max"]:
        msg = f"C = Omega/mu = {C:.3g} is not O(1)"
        notes.append(msg)
        warnings.warn(msg, RegimeWarning, stacklevel=3)
    return notes


def ml_lf_tipping(n: MLNormalized, mu: float, A: float, C: float,
                  b0: float | None = None) -> Prediction:
    """b_lf = b_r + a_d/(F'(b_r) |k2|)^(1/3)."""
    b0 = ml_initial_b(n) if b0 is None else b0
    if A == 0:
        return ml_unforced_tipping(n, mu)
    notes = _c_warn(C)
    b_r = ml_lf_broot(n, A, C, b0)
    fp = float(lf_f_prime(b_r, A, C, b0))
    if not fp > FPRIME_GUARD:
        raise ConcavityRegimeError(f"F'(b_r) = {fp:.3g}: use ml_lf_critical")
    ad = mu ** (2.0 / 3.0) * airy_first_zero()
    delay = ad / (fp * abs(n.k2)) ** (1.0 / 3.0)
    res = abs(float(lf_f(b_r, A, C, b0)))
    pred = Prediction(b_r + delay, delay, b_r, "MLLowFrequency", tuple(notes),
                      {"b_r": b_r, "F_prime": fp, "residual": res})
    return _with_I(n, pred)


def ml_lf_critical(n: MLNormalized, mu: float, Omega: float, b0: float | None = None,
                   k: int | None = None, near: float | None = None) -> CriticalAmplitude:
    """(b_m, A_m, A1 = C A_m / sqrt(2|k2| b_m), A_c = A_m + mu A1)."""
    b0 = ml_initial_b(n) if b0 is None else b0
    C = Omega / mu
    _c_warn(C)
    pr = lf_critical_pair(C, b0, k=k, near=near)
    A1 = C * pr.A_m / math.sqrt(2.0 * abs(n.k2) * pr.a_m)
    res = (abs(float(lf_f(pr.a_m, pr.A_m, C, b0))), abs(float(lf_f_prime(pr.a_m, pr.A_m, C, b0))))
    return CriticalAmplitude(pr.a_m, pr.A_m, A1, pr.A_m + mu * A1, pr.k, res)
