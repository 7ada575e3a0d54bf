"""Tipping detection on trajectories and the early-escape probability under noise."""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numba
import numpy as np
from scipy.stats import binomtest

from .integrate import (RNG_ALGORITHM, CrossingNotFound, Trajectory, box_muller,
                        find_threshold_crossing, path_generator)
from .models.canonical import CanonicalParams

__all__ = [
    "TippingEvent",
    "NoTippingError",
    "EscapeEstimate",
    "detect_tipping",
    "detect_tipping_canonical",
    "detect_tipping_ml",
    "detect_tipping_seaice",
    "escape_probability",
    "wilson_interval",
    "SEAICE_X_FLOOR",
]

# Prefer OpenMP threads; older TBB builds make numba warn on first use.
if "NUMBA_THREADING_LAYER_PRIORITY" not in os.environ:
    numba.config.THREADING_LAYER_PRIORITY = ["omp", "tbb", "workqueue"]

CANONICAL_LEVEL = -10.0
# The attached seasonal orbit dips to about x = -0.5 near the fold, so the
# floor sits at the lower critical point of the averaged H (E = -E_c), below
# every point of the unstable middle branch.
SEAICE_X_FLOOR = -2.0
ESCAPE_DT = 0.01
ESCAPE_BLOWUP = -10.0
_CHUNK = 1000


class NoTippingError(LookupError):
    """The trajectory never meets the tipping criterion."""


@dataclass(frozen=True)
class TippingEvent:
    t_tip: float
    param_at_tip: float
    threshold_used: float
    crossing_index: int

    def to_dict(self) -> dict:
        return {"t_tip": self.t_tip, "param_at_tip": self.param_at_tip,
                "threshold_used": self.threshold_used, "crossing_index": self.crossing_index}


def detect_tipping(traj: Trajectory, component: int, level: float, direction: int,
                   start_index: int = 0) -> TippingEvent:
    """First crossing of ``level``, preferring an integrator event at that level.

    Integrator events are located on every step; stored samples may be decimated.
    """
    for c in traj.events:
        if math.isclose(c.state[component], level, rel_tol=1e-9, abs_tol=1e-9) \
                and c.step >= start_index * traj.store_every:
            idx = int(np.searchsorted(traj.times, c.t))
            return TippingEvent(c.t, c.drift_param, level, idx)
    try:
        t, d, idx = find_threshold_crossing(traj, component, level, direction, start_index)
    except CrossingNotFound as exc:
        raise NoTippingError(str(exc)) from None
    return TippingEvent(t, d, level, idx)


def detect_tipping_canonical(traj: Trajectory, level: float = CANONICAL_LEVEL) -> TippingEvent:
    """First downward crossing of x = -10; param_at_tip is a."""
    return detect_tipping(traj, 0, level, -1)


def detect_tipping_ml(traj: Trajectory, v_c: float) -> TippingEvent:
    """First upward crossing of v = |v_c|; param_at_tip is I_bias."""
    return detect_tipping(traj, 0, abs(v_c), +1)


def detect_tipping_seaice(traj: Trajectory, x_floor: float = SEAICE_X_FLOOR,
                          E_c: float | None = None) -> TippingEvent:
    """First downward crossing of x = x_floor after the trajectory has been at x > 0.

    With ``E_c`` the first component is taken to be E and x = E/E_c - 1.
    param_at_tip is the drift parameter column as stored.
    """
    x = traj.states[:, 0]
    if E_c is not None:
        x = x / E_c - 1.0
    above = np.nonzero(x > 0)[0]
    if above.size == 0:
        raise NoTippingError("trajectory never visits x > 0")
    start = int(above[0])
    level = x_floor if E_c is None else E_c * (x_floor + 1.0)
    return detect_tipping(traj, 0, level, -1, start_index=start)


# --- early escape under additive noise ------------------------------------

@dataclass(frozen=True)
class EscapeEstimate:
    p_hat: float
    ci95: tuple[float, float]
    counts: tuple[int, int]
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"p_hat": self.p_hat, "ci95": list(self.ci95), "escaped": self.counts[0],
                "n_paths": self.counts[1], **self.meta}


def wilson_interval(k: int, n: int, level: float = 0.95) -> tuple[float, float]:
    ci = binomtest(int(k), int(n)).proportion_ci(confidence_level=level, method="wilson")
    return float(ci.low), float(ci.high)


@numba.njit(parallel=True, cache=True)
def _escape_chunk(noise, x0, a0, mu, A, Omega, eps, dt, a_lo, a_hi, blowup):
    n_paths, n_steps = noise.shape
    hit = np.zeros(n_paths, dtype=np.int64)
    sq = math.sqrt(dt)
    for k in numba.prange(n_paths):
        x = x0
        for i in range(n_steps):
            t = i * dt
            a = a0 - mu * t
            x = x + dt * (a - x * x + A * math.sin(Omega * t)) + eps * sq * noise[k, i]
            a_new = a0 - mu * (t + dt)
            if x < blowup and a_new > a_hi:
                break  # ran off before the window opened
            if a_new <= a_hi and a_new >= a_lo and x < -math.sqrt(a_new):
                hit[k] = 1
                break
    return hit


def escape_probability(p: CanonicalParams, eps: float, a_window: tuple[float, float],
                       n_paths: int, seed: int, dt: float = ESCAPE_DT) -> EscapeEstimate:
    """Fraction of Euler-Maruyama paths seen below the unstable branch
    x = -sqrt(a) while a lies in the window.

    A path counts if x < -sqrt(a) at some step with a in [a_lo, a_hi].  Paths
    that run off to x < -10 before a reaches a_hi escaped earlier than the
    window; they stay in the denominator but are not counted.  Each path draws
    its noise from its own counter-based stream, so results do not depend on
    chunking or thread count.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    if n_paths < 100:
        raise ValueError("n_paths must be at least 100")
    a_lo, a_hi = sorted(map(float, a_window))
    if not 0 <= a_lo < a_hi < p.a0:
        raise ValueError("window must satisfy 0 <= a_lo < a_hi < a0")
    n_steps = int(math.ceil((p.a0 - a_lo) / (p.mu * dt)))
    hits = 0
    for start in range(0, n_paths, _CHUNK):
        m = min(_CHUNK, n_paths - start)
        noise = np.empty((m, n_steps))
        for j in range(m):
            noise[j] = box_muller(path_generator(seed, start + j), n_steps)
        hits += int(_escape_chunk(noise, p.x0, p.a0, p.mu, p.A, p.Omega, eps, dt,
                                  a_lo, a_hi, ESCAPE_BLOWUP).sum())
    lo, hi = wilson_interval(hits, n_paths)
    meta = {"eps": eps, "mu": p.mu, "a_window": [a_lo, a_hi], "dt": dt, "seed": int(seed),
            "rng": RNG_ALGORITHM, "a0": p.a0, "x0": p.x0, "A": p.A, "Omega": p.Omega}
    return EscapeEstimate(hits / n_paths, (lo, hi), (hits, n_paths), meta)
