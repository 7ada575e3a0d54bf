"""Canonical fold normal form with drift and periodic forcing.

    dx/dt = a - x^2 + A sin(Omega t),   da/dt = -mu
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numba
import numpy as np

__all__ = [
    "CanonicalParams",
    "RescaledParams",
    "RegimeInfo",
    "canonical_rhs",
    "canonical_field",
    "rescaled_field",
    "rescale_large_amplitude",
    "map_back",
    "regime_exponent_zeta",
    "classify_regime",
    "REGIME_THRESHOLDS",
]


@dataclass(frozen=True)
class CanonicalParams:
    mu: float
    A: float = 0.0
    Omega: float = 1.0
    a0: float = 1.0
    x0: float | None = None

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError("mu must be positive")
        if not self.Omega > 0:
            raise ValueError("Omega must be positive")
        if self.A < 0:
            raise ValueError("A must be non-negative")
        if self.x0 is None:
            if self.a0 <= 0:
                raise ValueError("x0 must be given when a0 <= 0")
            object.__setattr__(self, "x0", math.sqrt(self.a0))

    @property
    def lam(self) -> float:
        """lambda with Omega = mu^(-lambda)."""
        return -math.log(self.Omega) / math.log(self.mu)

    @property
    def nu(self) -> float:
        """nu with Omega = mu^nu."""
        return math.log(self.Omega) / math.log(self.mu)

    @property
    def c(self) -> float:
        """c with Omega = c mu."""
        return self.Omega / self.mu

    def as_array(self) -> np.ndarray:
        return np.array([self.mu, self.A, self.Omega], dtype=float)

    def with_lambda(self, lam: float) -> "CanonicalParams":
        return replace(self, Omega=self.mu ** (-lam))

    def to_dict(self) -> dict:
        return {"mu": self.mu, "A": self.A, "Omega": self.Omega, "a0": self.a0, "x0": self.x0}


@dataclass(frozen=True)
class RescaledParams:
    """Unit-amplitude form: z = x/sqrt(A), S = sqrt(A) t, h = a/A."""

    omega: float
    M: float
    h0: float
    z0: float


def canonical_rhs(x: float, a: float, t: float, p: CanonicalParams) -> tuple[float, float]:
    return a - x * x + p.A * math.sin(p.Omega * t), -p.mu


@numba.njit(cache=True)
def canonical_field(t, y, p):
    """State y = (x, a); parameters p = (mu, A, Omega)."""
    out = np.empty(2)
    out[0] = y[1] - y[0] * y[0] + p[1] * math.sin(p[2] * t)
    out[1] = -p[0]
    return out


@numba.njit(cache=True)
def rescaled_field(t, y, p):
    """State y = (z, h) in time S; parameters p = (M, 1, omega)."""
    out = np.empty(2)
    out[0] = y[1] - y[0] * y[0] + math.sin(p[2] * t)
    out[1] = -p[0]
    return out


def rescale_large_amplitude(p: CanonicalParams) -> RescaledParams:
    if not p.A > 0:
        raise ValueError("rescaling needs A > 0")
    rA = math.sqrt(p.A)
    return RescaledParams(omega=p.Omega / rA, M=p.mu * p.A ** -1.5, h0=p.a0 / p.A, z0=p.x0 / rA)


def map_back(r: RescaledParams, A: float) -> CanonicalParams:
    if not A > 0:
        raise ValueError("A must be positive")
    rA = math.sqrt(A)
    return CanonicalParams(mu=r.M * A ** 1.5, A=A, Omega=r.omega * rA, a0=r.h0 * A, x0=r.z0 * rA)


def regime_exponent_zeta(P: float, lam: float) -> float:
    """Effective frequency exponent of the unit-amplitude system, A = Omega^P."""
    if not lam > 0:
        raise ValueError("lambda must be positive")
    if P < 1:
        raise ValueError("P must be at least 1")
    return (P - 2.0) / (3.0 * P + 2.0 / lam)


REGIME_THRESHOLDS = {
    "lambda_min": 1.0 / 3.0,    # high-frequency analysis needs lambda above this
    "amp_ratio_max": 0.25,      # A/Omega at or below this counts as A = o(Omega)
    "c_max": 10.0,              # Omega/mu up to this counts as c = O(1)
    "c_min": 0.02,
    "P_rescale": 2.0,           # A = Omega^P with P above this gets rescaled
}


@dataclass(frozen=True)
class RegimeInfo:
    tag: str
    lam: float
    nu: float
    c: float
    P: float | None
    zeta: float | None
    thresholds: dict = field(default_factory=lambda: dict(REGIME_THRESHOLDS))


def classify_regime(p: CanonicalParams) -> RegimeInfo:
    th = dict(REGIME_THRESHOLDS)
    lam, nu, c = p.lam, p.nu, p.c
    P = zeta = None
    if p.Omega > 1.0 and p.A > 1.0:
        P = math.log(p.A) / math.log(p.Omega)
        if lam > 0 and P >= 1:
            zeta = regime_exponent_zeta(P, lam)
    if p.mu >= 1.0:
        tag = "Indeterminate"
    elif P is not None and P > th["P_rescale"] and lam > 0:
        tag = "RescaledLowFrequency"
    elif p.Omega > 1.0:
        if lam > th["lambda_min"] and p.A / p.Omega <= th["amp_ratio_max"]:
            tag = "HighFrequency"
        else:
            tag = "Indeterminate"
    elif th["c_min"] <= c <= th["c_max"]:
        tag = "LowFreqOrderMu"
    elif c > th["c_max"]:
        tag = "LowFreqNu"
    else:
        tag = "Indeterminate"
    return RegimeInfo(tag, lam, nu, c, P, zeta, th)
