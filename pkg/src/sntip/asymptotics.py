"""Closed-form tipping predictions for the canonical drifted fold.

All values are locations in the drifting parameter a (with da/dt = -mu) at
which the attracting solution blows up.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .models.canonical import REGIME_THRESHOLDS, CanonicalParams
from .specfun import AiryPoleError, airy_first_zero, airy_log_ratio

__all__ = [
    "Prediction",
    "CriticalAmplitude",
    "CriticalPair",
    "RegimeWarning",
    "ConcavityRegimeError",
    "NoRootError",
    "NoCriticalPairError",
    "delayed_tipping",
    "slow_equilibrium",
    "hf_tipping",
    "hf_static_threshold",
    "hf_has_attracting_solution",
    "hf_attracting_outer",
    "hf_attracting_local",
    "quadratic_tipping",
    "lf_f",
    "lf_f_prime",
    "first_root_descending",
    "lf_first_root",
    "lf_tipping",
    "lf_tipping_with_jumps",
    "lf_critical_pairs",
    "lf_critical_pair",
    "lf_critical_amplitude",
    "lf_critical_amplitudes",
    "lf_concavity_line",
    "lf_nu_critical",
    "BLEND_FACTOR",
    "FPRIME_GUARD",
]

BLEND_FACTOR = 5.0
FPRIME_GUARD = 0.1
ROOT_XTOL = 1e-12


class RegimeWarning(UserWarning):
    """Parameters are outside the stated validity regime of a formula."""


class ConcavityRegimeError(ValueError):
    """f'(a_r) is too small for the Airy correction; use the critical-amplitude analysis."""


class NoRootError(ValueError):
    pass


class NoCriticalPairError(ValueError):
    pass


@dataclass(frozen=True)
class Prediction:
    """value = delay_component + shift_component."""

    value: float
    delay_component: float
    shift_component: float
    regime: str
    notes: tuple[str, ...] = ()
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "delay_component": self.delay_component,
            "shift_component": self.shift_component,
            "regime": self.regime,
            "warnings": list(self.notes),
            **{k: v for k, v in self.extras.items()},
        }


@dataclass(frozen=True)
class CriticalPair:
    a_m: float
    A_m: float
    k: int


@dataclass(frozen=True)
class CriticalAmplitude:
    """Jump location: a_star is a_m (c = O(1)) or a_min (Omega = mu^nu).

    A_m and A1 are NaN for the Omega = mu^nu system, which has no tangency pair.
    """

    a_star: float
    A_m: float
    A1: float
    A_c: float
    k: int | None = None
    residuals: tuple[float, ...] = ()

    def to_dict(self) -> dict:
        return {"a_star": self.a_star, "A_m": self.A_m, "A1": self.A1, "A_c": self.A_c,
                "k": self.k, "residuals": list(self.residuals)}


def _ad(mu: float) -> float:
    if not mu > 0:
        raise ValueError("mu must be positive")
    return mu ** (2.0 / 3.0) * airy_first_zero()


def _warn(notes: list[str], msg: str) -> None:
    notes.append(msg)
    warnings.warn(msg, RegimeWarning, stacklevel=3)


def delayed_tipping(mu: float) -> Prediction:
    """a_d = mu^(2/3) z1, z1 the first zero of Ai."""
    ad = _ad(mu)
    return Prediction(ad, ad, 0.0, "Delayed")


def slow_equilibrium(a: float, mu: float) -> float:
    """Attracting slow solution x(a) of the unforced drifted fold.

    Three-term outer expansion for a >= 5 mu^(2/3), the Airy-ratio inner
    form below.
    """
    if not mu > 0:
        raise ValueError("mu must be positive")
    m23 = mu ** (2.0 / 3.0)
    if a >= BLEND_FACTOR * m23:
        return math.sqrt(a) + mu / (4.0 * a) - 5.0 * mu * mu / (32.0 * a ** 2.5)
    s = a / m23
    if s <= airy_first_zero() + 1e-8:
        raise AiryPoleError(s, airy_first_zero())
    return mu ** (1.0 / 3.0) * airy_log_ratio(s)


def hf_static_threshold(A: float, Omega: float) -> float:
    """a_p = A^2 / (2 Omega^2): no attracting solution below it when mu = 0."""
    if not Omega > 0:
        raise ValueError("Omega must be positive")
    return A * A / (2.0 * Omega * Omega)


def hf_has_attracting_solution(a: float, A: float, Omega: float) -> bool:
    """Static (mu = 0) test for an attracting oscillatory solution."""
    return a >= hf_static_threshold(A, Omega)


def hf_tipping(mu: float, A: float, Omega: float) -> Prediction:
    """a_hf = a_d + A^2/(2 Omega^2)."""
    if not Omega > 0:
        raise ValueError("Omega must be positive")
    ad = _ad(mu)
    notes: list[str] = []
    if Omega <= 1.0:
        _warn(notes, "Omega <= 1: high-frequency analysis does not apply")
    else:
        lam = -math.log(Omega) / math.log(mu) if mu < 1 else float("nan")
        if not lam > REGIME_THRESHOLDS["lambda_min"]:
            _warn(notes, f"lambda = {lam:.3g} is not above 1/3")
        if A / Omega > REGIME_THRESHOLDS["amp_ratio_max"]:
            _warn(notes, f"A/Omega = {A / Omega:.3g} is not small")
    ap = hf_static_threshold(A, Omega)
    return Prediction(ad + ap, ad, ap, "HighFrequency", tuple(notes), {"a_p": ap})


def hf_attracting_outer(a: float, t: float, p: CanonicalParams) -> float:
    return math.sqrt(a) + p.mu / (4.0 * a) - p.A / p.Omega * math.cos(p.Omega * t)


def hf_attracting_local(a: float, t: float, p: CanonicalParams) -> float:
    s = (a - hf_static_threshold(p.A, p.Omega)) / p.mu ** (2.0 / 3.0)
    return -p.A / p.Omega * math.cos(p.Omega * t) + p.mu ** (1.0 / 3.0) * airy_log_ratio(s)


def quadratic_tipping(D: float, k0: float, k1: float, k2: float, mu: float) -> Prediction:
    """Tipping of dx/dt = D a + k0 + k1 x + k2 x^2, da/dt = -mu."""
    if not k2 < 0:
        raise ValueError("k2 must be negative")
    if not D > 0:
        raise ValueError("D must be positive")
    ad = _ad(mu)
    a_s = k0 + k1 * k1 / (4.0 * abs(k2))
    delay = (D * abs(k2)) ** (-1.0 / 3.0) * ad
    shift = -a_s / D
    return Prediction(delay + shift, delay, shift, "Quadratic", (), {"a_s": a_s})


# --- low frequency, Omega = c mu -------------------------------------------

def lf_f(a, A: float, c: float, a0: float):
    """Slow outer forcing f(a) = a + A sin(c (a0 - a))."""
    return a + A * np.sin(c * (a0 - np.asarray(a, dtype=float)))


def lf_f_prime(a, A: float, c: float, a0: float):
    return 1.0 - c * A * np.cos(c * (a0 - np.asarray(a, dtype=float)))


def first_root_descending(f: Callable, start: float, step: float, floor: float) -> float:
    """Largest a < start with f(a) = 0 and f > 0 above it, by grid scan + brentq.

    ``f`` must accept arrays.
    """
    if not f(start) > 0:
        raise ValueError("f must be positive at the starting point")
    n = int(math.ceil((start - floor) / step)) + 1
    grid = start - step * np.arange(n)
    vals = np.asarray(f(grid), dtype=float)
    idx = np.nonzero(vals <= 0)[0]
    if idx.size == 0:
        raise NoRootError(f"no root of f above {floor!r}")
    i = int(idx[0])
    if vals[i] == 0.0:
        return float(grid[i])
    g = lambda a: float(f(a))
    return brentq(g, grid[i], grid[i - 1], xtol=ROOT_XTOL, rtol=4 * np.finfo(float).eps)


def _lf_step(c: float) -> float:
    return min(0.01, 0.01 / c)


def lf_first_root(A: float, c: float, a0: float) -> float:
    """a_r: largest root of f below a0 with f > 0 on (a_r, a0]."""
    if not c > 0:
        raise ValueError("c must be positive")
    if A == 0:
        if a0 <= 0:
            raise ValueError("f(a0) = a0 must be positive")
        return 0.0
    # f(a) <= a + |A| < 0 below -|A|, so the scan always terminates there
    floor = -abs(A) - 2 * _lf_step(c)
    return first_root_descending(lambda a: lf_f(a, A, c, a0), a0, _lf_step(c), floor)


def _lf_prediction(mu, A, c, a0, a_r, regime="LowFreqOrderMu", notes=()):
    fp = float(lf_f_prime(a_r, A, c, a0))
    if not fp > FPRIME_GUARD:
        raise ConcavityRegimeError(
            f"f'(a_r) = {fp:.3g} <= {FPRIME_GUARD}: tipping is set by the critical-amplitude analysis")
    ad = _ad(mu)
    delay = ad / fp ** (1.0 / 3.0)
    return Prediction(a_r + delay, delay, a_r, regime, tuple(notes), {"a_r": a_r, "f_prime": fp})


def _c_notes(c: float) -> list[str]:
    notes: list[str] = []
    if not REGIME_THRESHOLDS["c_min"] <= c <= REGIME_THRESHOLDS["c_max"]:
        _warn(notes, f"c = Omega/mu = {c:.3g} is not O(1)")
    return notes


def lf_tipping(mu: float, A: float, c: float, a0: float) -> Prediction:
    """a_lf = a_r + a_d / f'(a_r)^(1/3)."""
    notes = _c_notes(c)
    a_r = lf_first_root(A, c, a0)
    if A == 0:
        ad = _ad(mu)
        return Prediction(ad, ad, 0.0, "LowFreqOrderMu", tuple(notes), {"a_r": 0.0, "f_prime": 1.0})
    return _lf_prediction(mu, A, c, a0, a_r, notes=notes)


def lf_critical_pairs(c: float, a0: float) -> list[CriticalPair]:
    """All tangency pairs f(a_m) = f'(a_m) = 0 with 0 < a_m < a0, ordered by k.

    With theta = c (a0 - a_m): a_m = -tan(theta)/c, A_m = 1/(c cos theta), and
    theta - tan(theta) = c a0 on branch theta in (2 pi k - pi/2, 2 pi k).
    """
    if not c > 0:
        raise ValueError("c must be positive")
    target = c * a0
    out = []
    k = 1
    while 2 * math.pi * k < target:
        lo = 2 * math.pi * k - math.pi / 2
        hi = 2 * math.pi * k
        g = lambda th: th - math.tan(th) - target
        eps = 1e-12
        th = brentq(g, lo + eps, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
        a_m = -math.tan(th) / c
        A_m = 1.0 / (c * math.cos(th))
        if 0 < a_m < a0:
            out.append(CriticalPair(a_m, A_m, k))
        k += 1
    return out


def lf_critical_pair(c: float, a0: float, k: int | None = None,
                     near: float | None = None) -> CriticalPair:
    """One tangency pair.

    Selection: branch ``k`` if given, else the pair whose A_m is nearest to
    ``near``, else the pair nearest below a0 (k = 1 when it exists).
    """
    pairs = lf_critical_pairs(c, a0)
    if not pairs:
        raise NoCriticalPairError(f"no tangency pair with 0 < a_m < a0 for c={c!r}, a0={a0!r}")
    if k is not None:
        for pr in pairs:
            if pr.k == k:
                return pr
        raise NoCriticalPairError(f"branch k={k} has no admissible pair")
    if near is not None:
        return min(pairs, key=lambda pr: abs(pr.A_m - near))
    return pairs[0]


def _critical_from_pair(mu: float, Omega: float, pr: CriticalPair) -> CriticalAmplitude:
    c = Omega / mu
    cA = c * pr.A_m
    A1 = math.sqrt(Omega * cA * cA / (2.0 * mu * math.sqrt(cA * cA - 1.0)))
    return CriticalAmplitude(pr.a_m, pr.A_m, A1, pr.A_m + mu * A1, pr.k)


def _pair_residuals(pr: CriticalPair, c: float, a0: float) -> tuple[float, float]:
    return (abs(float(lf_f(pr.a_m, pr.A_m, c, a0))), abs(float(lf_f_prime(pr.a_m, pr.A_m, c, a0))))


def lf_critical_amplitude(mu: float, Omega: float, a0: float, k: int | None = None,
                          near: float | None = None) -> CriticalAmplitude:
    """A_c = A_m + mu A1 for one tangency pair (selection as lf_critical_pair)."""
    c = Omega / mu
    _c_notes(c)
    pr = lf_critical_pair(c, a0, k=k, near=near)
    ca = _critical_from_pair(mu, Omega, pr)
    return CriticalAmplitude(ca.a_star, ca.A_m, ca.A1, ca.A_c, ca.k, _pair_residuals(pr, c, a0))


def lf_critical_amplitudes(mu: float, Omega: float, a0: float) -> list[CriticalAmplitude]:
    c = Omega / mu
    out = []
    for pr in lf_critical_pairs(c, a0):
        ca = _critical_from_pair(mu, Omega, pr)
        out.append(CriticalAmplitude(ca.a_star, ca.A_m, ca.A1, ca.A_c, ca.k,
                                     _pair_residuals(pr, c, a0)))
    return out


def lf_concavity_line(eta, a_m: float, A_m: float, A1: float, c: float):
    """xi_c(eta) separating concave-up from concave-down local trajectories."""
    if not A1 > 0:
        raise ValueError("A1 must be positive")
    return c * c * A_m / (2.0 * A1) * np.asarray(eta) - 1.0 / (2.0 * a_m)


def lf_tipping_with_jumps(mu: float, A: float, c: float, a0: float,
                          critical: list[CriticalAmplitude] | None = None) -> Prediction:
    """lf_tipping that skips dips of f the trajectory survives.

    A dip of f below zero near a tangency pair with A_m < A < A_c does not
    tip the system; the scan continues to the next root.  This reproduces
    the jumps of the tipping location at the critical amplitudes.
    """
    notes = _c_notes(c)
    if A == 0:
        return lf_tipping(mu, A, c, a0)
    Omega = c * mu
    if critical is None:
        critical = lf_critical_amplitudes(mu, Omega, a0)
    f = lambda a: lf_f(a, A, c, a0)
    step = _lf_step(c)
    floor = -abs(A) - 2 * step
    start = a0
    skipped = []
    while True:
        a_r = first_root_descending(f, start, step, floor)
        match = [ca for ca in critical if abs(ca.a_star - a_r) < math.pi / c]
        survive = any(ca.A_m < A < ca.A_c for ca in match)
        if not survive:
            break
        # leave the dip: next point below a_r where f is positive again
        n = int(math.ceil((a_r - floor) / step)) + 1
        grid = a_r - step * np.arange(1, n)
        pos = np.nonzero(f(grid) > 0)[0]
        if pos.size == 0:
            break
        start = float(grid[pos[0]])
        skipped.append(a_r)
    try:
        pred = _lf_prediction(mu, A, c, a0, a_r, notes=notes)
    except ConcavityRegimeError:
        fp = float(lf_f_prime(a_r, A, c, a0))
        notes.append("f'(a_r) small: Airy correction dropped")
        pred = Prediction(a_r, 0.0, a_r, "LowFreqOrderMu", tuple(notes), {"a_r": a_r, "f_prime": fp})
    pred.extras["skipped_dips"] = skipped
    return pred


# --- Omega = mu^nu ---------------------------------------------------------

def lf_nu_critical(mu: float, Omega: float, a0: float, k_max: int | None = None,
                   grid: int = 2000) -> list[CriticalAmplitude]:
    """Solve the (a_min, A_c) system for each branch k.

        a_min = sqrt(A^2 - r^2) - (Omega/sqrt 2) (A^2 - r^2)^(1/4)
        a_min = a0 + r (arccos(r/A) - 2 k pi),      r = mu/Omega

    ``k_max=None`` keeps every k whose a_min can still be positive.
    """
    if not (mu > 0 and Omega > 0):
        raise ValueError("mu and Omega must be positive")
    notes: list[str] = []
    if Omega >= 1 or mu / Omega > 0.5:
        _warn(notes, "mu << Omega << 1 does not hold")
    r = mu / Omega

    def lhs(A):
        d = A * A - r * r
        return math.sqrt(d) - Omega / math.sqrt(2.0) * d ** 0.25

    def rhs(A, k):
        return a0 + r * (math.acos(min(1.0, r / A)) - 2.0 * k * math.pi)

    out = []
    k = 1
    while a0 + r * (math.pi / 2 - 2 * k * math.pi) > 0:
        if k_max is not None and k > k_max:
            break
        g = lambda A: lhs(A) - rhs(A, k)
        A_lo = r * (1.0 + 1e-9)
        A_hi = a0 + r + Omega * Omega + 10.0
        while g(A_hi) <= 0:
            A_hi *= 2.0
        As = np.linspace(A_lo, A_hi, grid)
        vals = np.array([g(x) for x in As])
        for i in np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]:
            A_c = brentq(g, As[i], As[i + 1], xtol=ROOT_XTOL, rtol=4 * np.finfo(float).eps)
            a_min = rhs(A_c, k)
            if 0 < a_min < a0:
                res = (abs(a_min - lhs(A_c)), 0.0)
                out.append(CriticalAmplitude(a_min, float("nan"), float("nan"), A_c, k, res))
        k += 1
    return out
