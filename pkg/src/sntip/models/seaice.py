"""Seasonally forced energy-balance model for Arctic sea ice.

E is the energy per unit area (W m^-2 yr), measured from the freezing point:
E < 0 is latent heat stored in ice, E >= 0 sensible heat in the mixed layer.

    dE/dt = (1 - alpha(E)) F_S(t) - F_0(t) + dF0 - F_T(t) E / cH + F_B

with time in years and dF0 the slowly drifting surface-flux perturbation.
The normalized form x = (E - E_c)/E_c, b = (dF0 - dF0_c)/E_c shifts the fold
of the period-averaged model to the origin.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from importlib import resources

import numba
import numpy as np
from scipy.optimize import brentq

from ..forcing import (PeriodicSeries, antiderivative_zero_mean, constant,
                       fit_from_monthly, signals_from_dict)

__all__ = [
    "SeaIceParams",
    "SeaIceNormalized",
    "SeaIceRegimeError",
    "BranchRangeError",
    "default_forcing",
    "default_seaice_params",
    "scaled_params",
    "albedo",
    "energy_to_state",
    "averaged_static_forcing",
    "seaice_rhs_full",
    "seaice_rhs_h",
    "seaice_full_field",
    "seaice_h_field",
    "seaice_g_field",
    "seaice_normalize",
    "h_branch_inverse",
]

FOLD_GRID = 2000
FOLD_XTOL = 1e-10


class SeaIceRegimeError(ValueError):
    """The period-averaged model has no fold for E > 0."""


class BranchRangeError(ValueError):
    """b lies outside the range of the requested branch of H."""


def _load_climatology() -> dict:
    text = resources.files("sntip").joinpath("data/seaice_forcing_synthetic.json").read_text()
    return json.loads(text)


def single_harmonic_forcing() -> dict[str, PeriodicSeries]:
    """One harmonic per signal, spanning the quoted seasonal ranges.

    Shortwave peaks at midsummer (t = 0.5 yr) and is zero at t = 0; the
    longwave terms peak in midwinter.  Monthly midpoint samples are clipped
    at zero (shortwave only) and fitted like any other monthly data.
    """
    tm = (np.arange(12) + 0.5) / 12.0
    c = np.cos(2 * np.pi * tm)
    f0 = 92.0 + 38.0 * c
    ft = 2.9 + 0.4 * c
    fs = np.maximum(155.0 - 155.0 * c, 0.0)
    return {"F0": fit_from_monthly(f0), "FT": fit_from_monthly(ft), "FS": fit_from_monthly(fs)}


def default_forcing(kind: str = "climatology") -> tuple[dict[str, PeriodicSeries], dict]:
    """Synthetic seasonal forcing.  ``kind`` is 'climatology' or 'single_harmonic'."""
    if kind == "climatology":
        sig, meta = signals_from_dict(_load_climatology())
        meta = dict(meta, kind="climatology", synthetic=True)
        return sig, meta
    if kind == "single_harmonic":
        return single_harmonic_forcing(), {"kind": "single_harmonic", "synthetic": True}
    raise ValueError(f"unknown forcing kind {kind!r}")


@dataclass(frozen=True)
class SeaIceParams:
    F0: PeriodicSeries
    FT: PeriodicSeries
    FS: PeriodicSeries
    L_i: float = 9.4          # W m^-3 yr
    cH: float = 9.4           # W m^-2 yr K^-1
    alpha_i: float = 0.68
    alpha_ml: float = 0.2
    F_B: float = 2.0          # W m^-2
    h_alpha: float = 0.5      # m
    mu_tilde: float = 0.1     # W m^-2 per yr
    drift_sign: float = -1.0  # dF0 decreases (cooling) by default
    synthetic: bool = True
    forcing_kind: str = "climatology"

    def __post_init__(self):
        if not 0 < self.alpha_ml < self.alpha_i < 1:
            raise ValueError("need 0 < alpha_ml < alpha_i < 1")
        if not self.h_alpha > 0:
            raise ValueError("h_alpha must be positive")
        w = {s.fundamental_frequency for s in (self.F0, self.FT, self.FS)}
        if len({round(v, 12) for v in w}) != 1:
            raise ValueError("forcing signals must share one period")

    @property
    def Omega(self) -> float:
        return self.F0.fundamental_frequency

    def as_array(self) -> np.ndarray:
        return np.concatenate([
            [self.L_i, self.cH, self.alpha_i, self.alpha_ml, self.F_B, self.h_alpha,
             self.drift_sign * self.mu_tilde],
            _pack(self.F0, self.FT, self.FS),
        ])


def default_seaice_params(forcing: str = "climatology", **overrides) -> SeaIceParams:
    sig, meta = default_forcing(forcing)
    kw = dict(F0=sig["F0"], FT=sig["FT"], FS=sig["FS"], synthetic=True, forcing_kind=meta["kind"])
    kw.update(overrides)
    return SeaIceParams(**kw)


def scaled_params(p: SeaIceParams, FT_factor: float = 1.0, FT_shift: float = 0.0,
                  FT_osc_factor: float = 1.0, cH_ratio: float = 1.0,
                  h_alpha: float | None = None, mu_tilde: float | None = None) -> SeaIceParams:
    """Parameter variations used in sensitivity studies.

    FT_factor multiplies the whole F_T signal, FT_osc_factor only its
    seasonal oscillation, FT_shift adds to its mean, cH_ratio multiplies the
    E-to-temperature ratio cH.
    """
    FT = p.FT.with_oscillation_scaled(FT_osc_factor) * FT_factor + FT_shift
    return replace(
        p, FT=FT, cH=p.cH * cH_ratio,
        h_alpha=p.h_alpha if h_alpha is None else h_alpha,
        mu_tilde=p.mu_tilde if mu_tilde is None else mu_tilde,
    )


def albedo(E, p: SeaIceParams):
    return (0.5 * (p.alpha_ml + p.alpha_i)
            + 0.5 * (p.alpha_ml - p.alpha_i) * np.tanh(np.asarray(E) / (p.L_i * p.h_alpha)))


def energy_to_state(E, p: SeaIceParams):
    """Diagnostic (ice thickness in m, mixed-layer temperature in K)."""
    E = np.asarray(E, dtype=float)
    h_i = np.where(E < 0, -E / p.L_i, 0.0)
    T_ml = np.where(E >= 0, E / p.cH, 0.0)
    return h_i, T_ml


def averaged_static_forcing(E, p: SeaIceParams):
    """dF0 that makes E a steady state of the period-averaged model."""
    FS, F0, FT = p.FS.mean, p.F0.mean, p.FT.mean
    return -(1.0 - albedo(E, p)) * FS + F0 + FT * np.asarray(E) / p.cH - p.F_B


def _averaged_static_slope(E, p: SeaIceParams):
    s = 1.0 / (p.L_i * p.h_alpha)
    sech2 = 1.0 / np.cosh(np.asarray(E) * s) ** 2
    dalpha = 0.5 * (p.alpha_ml - p.alpha_i) * s * sech2
    return dalpha * p.FS.mean + p.FT.mean / p.cH


def seaice_rhs_full(E: float, dF0: float, t: float, p: SeaIceParams) -> tuple[float, float]:
    dE = ((1.0 - float(albedo(E, p))) * p.FS(t) - p.F0(t) + dF0
          - p.FT(t) * E / p.cH + p.F_B)
    return dE, p.drift_sign * p.mu_tilde


# --- packed series for jitted fields ---------------------------------------

def _pack(*series: PeriodicSeries) -> np.ndarray:
    """[w, n, mean, cos.., sin.., mean, cos.., sin.., ...] with common n."""
    w = series[0].fundamental_frequency
    n = max(s.n_harmonics for s in series)
    out = [w, float(n)]
    for s in series:
        c = list(s.cos_coeffs) + [0.0] * (n - s.n_harmonics)
        si = list(s.sin_coeffs) + [0.0] * (n - s.n_harmonics)
        out += [s.mean] + c + si
    return np.array(out, dtype=float)


@numba.njit(cache=True)
def _packed_eval(p, base, j, t):
    w = p[base]
    n = int(p[base + 1])
    off = base + 2 + j * (1 + 2 * n)
    v = p[off]
    for k in range(1, n + 1):
        v += p[off + k] * math.cos(k * w * t) + p[off + n + k] * math.sin(k * w * t)
    return v


@numba.njit(cache=True)
def seaice_full_field(t, y, p):
    """State y = (E, dF0); p = SeaIceParams.as_array()."""
    E = y[0]
    F0 = _packed_eval(p, 7, 0, t)
    FT = _packed_eval(p, 7, 1, t)
    FS = _packed_eval(p, 7, 2, t)
    alpha = 0.5 * (p[3] + p[2]) + 0.5 * (p[3] - p[2]) * math.tanh(E / (p[0] * p[5]))
    out = np.empty(2)
    out[0] = (1.0 - alpha) * FS - F0 + y[1] - FT * E / p[1] + p[4]
    out[1] = p[6]
    return out


@numba.njit(cache=True)
def seaice_h_field(t, y, p):
    """State y = (x, b); p = [G1, G2, g3, G4, -mu, packed q]."""
    x = y[0]
    out = np.empty(2)
    out[0] = y[1] + p[0] + p[1] * math.tanh(p[2] * (x + 1.0)) + p[3] * x + _packed_eval(p, 5, 0, t)
    out[1] = p[4]
    return out


@numba.njit(cache=True)
def seaice_g_field(t, y, p):
    """State y = (x, b); p = [g3, -mu, packed (g1, g2, g4)]."""
    x = y[0]
    g1 = _packed_eval(p, 2, 0, t)
    g2 = _packed_eval(p, 2, 1, t)
    g4 = _packed_eval(p, 2, 2, t)
    out = np.empty(2)
    out[0] = g1 + g2 * math.tanh(p[0] * (x + 1.0)) + g4 * x + y[1]
    out[1] = p[1]
    return out


# --- normalization ---------------------------------------------------------

@dataclass(frozen=True)
class SeaIceNormalized:
    params: SeaIceParams
    E_c: float
    dF0c: float
    g3: float
    G1: float
    G2: float
    G4: float
    g1: PeriodicSeries
    g2: PeriodicSeries
    g4: PeriodicSeries
    q: PeriodicSeries
    # zero-mean time antiderivative of q; equals Q(T)/Omega with T = Omega t
    Q_time: PeriodicSeries
    mu: float
    Omega: float
    residual: float = 0.0
    critical_points: tuple = field(default=())

    def H(self, x):
        x = np.asarray(x, dtype=float)
        return self.G1 + self.G2 * np.tanh(self.g3 * (x + 1.0)) + self.G4 * x

    def dH(self, x):
        x = np.asarray(x, dtype=float)
        return self.G2 * self.g3 / np.cosh(self.g3 * (x + 1.0)) ** 2 + self.G4

    def d2H(self, x):
        x = np.asarray(x, dtype=float)
        u = self.g3 * (x + 1.0)
        return -2.0 * self.G2 * self.g3 ** 2 * np.tanh(u) / np.cosh(u) ** 2

    def x_from_E(self, E):
        return (np.asarray(E) - self.E_c) / self.E_c

    def E_from_x(self, x):
        return self.E_c * (np.asarray(x) + 1.0)

    def b_from_dF0(self, dF0):
        return (np.asarray(dF0) - self.dF0c) / self.E_c

    def dF0_from_b(self, b):
        return self.dF0c + np.asarray(b) * self.E_c

    def h_array(self, with_forcing: bool = True) -> np.ndarray:
        q = self.q if with_forcing else constant(0.0, self.Omega)
        return np.concatenate([[self.G1, self.G2, self.g3, self.G4,
                                self.params.drift_sign * self.mu], _pack(q)])

    def g_array(self) -> np.ndarray:
        return np.concatenate([[self.g3, self.params.drift_sign * self.mu],
                               _pack(self.g1, self.g2, self.g4)])


def _fold(p: SeaIceParams) -> tuple[float, float]:
    E = np.linspace(0.0, 20.0 * p.L_i * p.h_alpha, FOLD_GRID)
    d = _averaged_static_slope(E, p)
    idx = np.nonzero((d[:-1] < 0) & (d[1:] >= 0))[0]
    if idx.size == 0:
        raise SeaIceRegimeError("period-averaged model has no fold for E > 0")
    i = int(idx[0])
    Ec = brentq(lambda e: float(_averaged_static_slope(e, p)), E[i], E[i + 1], xtol=FOLD_XTOL)
    return Ec, float(averaged_static_forcing(Ec, p))


def seaice_normalize(p: SeaIceParams) -> SeaIceNormalized:
    Ec, dF0c = _fold(p)
    a_sum = 0.5 * (p.alpha_ml + p.alpha_i)
    a_dif = 0.5 * (p.alpha_ml - p.alpha_i)
    g4 = p.FT * (-1.0 / p.cH)
    g1 = ((1.0 - a_sum) * p.FS - p.F0 + p.F_B) * (1.0 / Ec) + dF0c / Ec + g4
    g2 = p.FS * (-a_dif / Ec)
    g3 = Ec / (p.L_i * p.h_alpha)
    G1, G2, G4 = g1.mean, g2.mean, g4.mean
    q = (g1 - G1) + (g2 - G2)
    q = q.zero_mean()
    n = SeaIceNormalized(
        params=p, E_c=Ec, dF0c=dF0c, g3=g3, G1=G1, G2=G2, G4=G4,
        g1=g1, g2=g2, g4=g4, q=q, Q_time=antiderivative_zero_mean(q),
        mu=p.mu_tilde / Ec, Omega=p.Omega,
    )
    return replace(n, residual=float(n.H(0.0)), critical_points=_critical_points(n))


def _critical_points(n: SeaIceNormalized) -> tuple:
    s = -n.G4 / (n.G2 * n.g3)
    if not 0 < s < 1:
        return ()
    r = math.acosh(1.0 / math.sqrt(s)) / n.g3
    return (-1.0 - r, -1.0 + r)


def seaice_rhs_h(x: float, b: float, t: float, n: SeaIceNormalized) -> tuple[float, float]:
    return float(b + n.H(x) + n.q(t)), n.params.drift_sign * n.mu


def h_branch_inverse(n: SeaIceNormalized, b: float, branch: str = "upper") -> float:
    """x on a monotone piece of H with H(x) = -b.

    Branches: 'upper' (x above the upper critical point, the attracting
    open-water states), 'middle' (between the critical points, unstable),
    'lower' (below the lower critical point).
    """
    if len(n.critical_points) != 2:
        raise BranchRangeError("H is monotone; there are no separate branches")
    x_lo, x_hi = n.critical_points
    target = lambda x: float(n.H(x)) + b
    # b at a branch end is accepted up to round-off of H at the critical point
    tol = 1e-12 * max(1.0, abs(b))
    if branch in ("upper", "middle") and abs(target(x_hi)) <= tol:
        return x_hi
    if branch in ("lower", "middle") and abs(target(x_lo)) <= tol:
        return x_lo
    if branch == "upper":
        if target(x_hi) < 0:
            raise BranchRangeError(f"b={b!r} is below the upper branch range")
        lo, hi = x_hi, x_hi + 1.0
        while target(hi) > 0:
            hi = x_hi + 2.0 * (hi - x_hi)
    elif branch == "middle":
        lo, hi = x_lo, x_hi
        if not target(lo) <= 0 <= target(hi):
            raise BranchRangeError(f"b={b!r} is outside the middle branch range")
    elif branch == "lower":
        if target(x_lo) > 0:
            raise BranchRangeError(f"b={b!r} is above the lower branch range")
        lo, hi = x_lo - 1.0, x_lo
        while target(lo) < 0:
            lo = x_lo - 2.0 * (x_lo - lo)
    else:
        raise ValueError(f"unknown branch {branch!r}")
    if target(lo) == 0:
        return lo
    if target(hi) == 0:
        return hi
    return brentq(target, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
