"""Sea-ice tipping from period averaging about the forced upper branch.

Variables are the normalized x = (E - E_c)/E_c and b = (dF0 - dF0_c)/E_c;
predictions carry the matching dF0 in ``extras["dF0"]``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import simpson
from scipy.optimize import brentq

from ..asymptotics import Prediction, quadratic_tipping
from ..forcing import max_over_period, min_over_period
from ..models.seaice import (BranchRangeError, SeaIceNormalized, SeaIceParams,
                             SeaIceRegimeError, h_branch_inverse, scaled_params,
                             seaice_normalize)

__all__ = [
    "SeaIceAverages",
    "HysteresisLoss",
    "HysteresisReport",
    "QuadratureError",
    "seaice_xstar",
    "seaice_lower_end",
    "seaice_h_averages",
    "seaice_tipping",
    "seaice_averaged_tipping",
    "seaice_hysteresis",
    "hysteresis_threshold",
    "QUAD_PANELS",
]

QUAD_PANELS = 4096
QUAD_RTOL = 1e-9
_FLAT_Q = 1e-14


class HysteresisLoss(ValueError):
    """The forced upper branch no longer reaches the middle branch from above."""


class QuadratureError(ArithmeticError):
    pass


@dataclass(frozen=True)
class SeaIceAverages:
    b_star: float
    x_star: float
    H0_bar: float
    H1_bar: float
    H2_bar: float
    b_Q: float
    quad_error: float = 0.0


def _overlap(n: SeaIceNormalized) -> tuple[float, float]:
    """b range where both the upper and the middle branch exist."""
    if len(n.critical_points) != 2:
        raise HysteresisLoss("H is monotone: the averaged model has a single branch")
    x_lo, x_hi = n.critical_points
    return -float(n.H(x_hi)), -float(n.H(x_lo))


def _branch_gap(n: SeaIceNormalized, b: float, upper_shift: float) -> float:
    return (h_branch_inverse(n, b, "upper") + upper_shift) - h_branch_inverse(n, b, "middle")


def seaice_xstar(n: SeaIceNormalized) -> tuple[float, float]:
    """(b*, x*) where the lowest point x* + min Q of the forced upper orbit
    meets the middle branch: H+^-1(-b) + min(Q) = H-^-1(-b).

    Q is the zero-mean antiderivative of q in time (Omega^-1 Q(T) with T = Omega t).
    """
    b_lo, b_hi = _overlap(n)
    _, qmin = min_over_period(n.Q_time)
    if abs(qmin) < _FLAT_Q:
        x_hi = n.critical_points[1]
        return b_lo, x_hi
    g = lambda b: _branch_gap(n, b, qmin)
    g_lo, g_hi = g(b_lo), g(b_hi)
    if not (g_lo < 0 < g_hi):
        raise HysteresisLoss(
            f"forced upper orbit does not meet the middle branch on the overlap "
            f"(gap {g_lo:.3g} .. {g_hi:.3g})")
    b_star = brentq(g, b_lo, b_hi, xtol=1e-14, rtol=4 * np.finfo(float).eps)
    return b_star, h_branch_inverse(n, b_star, "upper")


def seaice_lower_end(n: SeaIceNormalized) -> float:
    """b where the highest point of the forced lower (ice) orbit meets the middle branch.

    The lower orbit exists for b below this value.
    """
    b_lo, b_hi = _overlap(n)
    _, qmax = max_over_period(n.Q_time)
    if abs(qmax) < _FLAT_Q:
        return b_hi
    g = lambda b: (h_branch_inverse(n, b, "lower") + qmax) - h_branch_inverse(n, b, "middle")
    g_lo, g_hi = g(b_lo), g(b_hi)
    if not (g_lo < 0 < g_hi):
        raise HysteresisLoss("forced lower orbit does not meet the middle branch on the overlap")
    return brentq(g, b_lo, b_hi, xtol=1e-14, rtol=4 * np.finfo(float).eps)


def _period_mean(fun, T: float, panels: int) -> float:
    t = np.linspace(0.0, T, panels + 1)
    return float(simpson(fun(t), x=t)) / T


def seaice_h_averages(n: SeaIceNormalized, x_star: float | None = None,
                      panels: int = QUAD_PANELS) -> SeaIceAverages:
    """Period averages of H, H' and H''/2 along x* + Q(t).

    Composite Simpson with ``panels`` panels, checked against half as many.
    """
    if x_star is None:
        b_star, x_star = seaice_xstar(n)
    else:
        b_star = -float(n.H(x_star))
    T = 2.0 * math.pi / n.Omega
    Q = n.Q_time
    funs = (lambda t: n.H(x_star + Q(t)),
            lambda t: n.dH(x_star + Q(t)),
            lambda t: 0.5 * n.d2H(x_star + Q(t)))
    vals, err = [], 0.0
    for f in funs:
        fine = _period_mean(f, T, panels)
        coarse = _period_mean(f, T, panels // 2)
        e = abs(fine - coarse) / 15.0
        if e > QUAD_RTOL * max(1.0, abs(fine)):
            raise QuadratureError(f"period average not converged (estimate {e:.3g})")
        vals.append(fine)
        err = max(err, e)
    H0, H1, H2 = vals
    b_Q = H0 + H1 * H1 / (4.0 * abs(H2)) if H2 != 0 else float("nan")
    return SeaIceAverages(b_star, x_star, H0, H1, H2, b_Q, err)


def _with_dF0(n: SeaIceNormalized, pred: Prediction) -> Prediction:
    pred.extras["dF0"] = float(n.dF0_from_b(pred.value))
    return pred


def seaice_tipping(n: SeaIceNormalized, mu: float | None = None,
                   averages: SeaIceAverages | None = None) -> Prediction:
    """b_tip = |H2_bar|^(-1/3) a_d - b_Q for the forced model."""
    mu = n.mu if mu is None else mu
    av = seaice_h_averages(n) if averages is None else averages
    if not av.H2_bar < 0:
        raise SeaIceRegimeError(f"H2_bar = {av.H2_bar!r} is not negative")
    q = quadratic_tipping(1.0, av.H0_bar, av.H1_bar, av.H2_bar, mu)
    pred = Prediction(q.value, q.delay_component, q.shift_component, "SeaIceForced", (),
                      {"b_star": av.b_star, "x_star": av.x_star, "H0_bar": av.H0_bar,
                       "H1_bar": av.H1_bar, "H2_bar": av.H2_bar, "b_Q": av.b_Q})
    return _with_dF0(n, pred)


def seaice_averaged_tipping(n: SeaIceNormalized, mu: float | None = None) -> Prediction:
    """Tipping of the averaged model (q = 0): quadratic law with H's Taylor data at the fold."""
    mu = n.mu if mu is None else mu
    k0, k1, k2 = float(n.H(0.0)), float(n.dH(0.0)), 0.5 * float(n.d2H(0.0))
    q = quadratic_tipping(1.0, k0, k1, k2, mu)
    pred = Prediction(q.value, q.delay_component, q.shift_component, "SeaIceAveraged", (),
                      {"k0": k0, "k1": k1, "k2": k2})
    return _with_dF0(n, pred)


@dataclass(frozen=True)
class HysteresisReport:
    """Two diagnostics at one parameter set.

    ``xstar_ok``: the upper-orbit equation for x* has a solution.
    ``overlap``: b_lower_end - b_star; the forced upper and lower orbits
    coexist on (b_star, b_lower_end) only when it is positive.
    ``lost`` is True when either diagnostic fails.
    """

    FT_factor: float
    b_star: float | None
    x_star: float | None
    b_lower_end: float | None
    overlap: float | None
    xstar_ok: bool
    lost: bool
    reason: str = ""
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"FT_factor": self.FT_factor, "b_star": self.b_star, "x_star": self.x_star,
                "b_lower_end": self.b_lower_end, "overlap": self.overlap,
                "xstar_ok": self.xstar_ok, "hysteresis_lost": self.lost, "reason": self.reason}


def seaice_hysteresis(p: SeaIceParams, FT_factor: float = 1.0, **variation) -> HysteresisReport:
    """Hysteresis diagnostics with the whole F_T signal scaled by ``FT_factor``.

    Extra keyword arguments go to ``scaled_params``.
    """
    try:
        n = seaice_normalize(scaled_params(p, FT_factor=FT_factor, **variation))
    except SeaIceRegimeError as exc:
        return HysteresisReport(FT_factor, None, None, None, None, False, True, str(exc))
    reasons = []
    b_star = x_star = b_low = overlap = None
    try:
        b_star, x_star = seaice_xstar(n)
        ok = True
    except (HysteresisLoss, BranchRangeError) as exc:
        ok = False
        reasons.append(str(exc))
    try:
        b_low = seaice_lower_end(n)
    except (HysteresisLoss, BranchRangeError) as exc:
        reasons.append(str(exc))
    if b_star is not None and b_low is not None:
        overlap = b_low - b_star
        if overlap <= 0:
            reasons.append("forced upper and lower orbits no longer coexist")
    lost = (not ok) or overlap is None or overlap <= 0
    return HysteresisReport(FT_factor, b_star, x_star, b_low, overlap, ok, lost,
                            "; ".join(reasons), {"E_c": n.E_c, "dF0c": n.dF0c})


def hysteresis_threshold(p: SeaIceParams, lo: float = 1.0, hi: float = 4.0,
                         tol: float = 1e-3, **variation) -> float:
    """Smallest F_T factor in (lo, hi] at which hysteresis is lost, by bisection."""
    if seaice_hysteresis(p, lo, **variation).lost:
        raise ValueError(f"hysteresis already lost at factor {lo!r}")
    if not seaice_hysteresis(p, hi, **variation).lost:
        raise ValueError(f"hysteresis still present at factor {hi!r}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if seaice_hysteresis(p, mid, **variation).lost:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)
