"""Fixed-step integrators and threshold-crossing location.

Right-hand sides have the signature ``rhs(t, y, p) -> ndarray`` with ``y``
and ``p`` one-dimensional float arrays.  A numba-jitted ``rhs`` runs inside a
compiled loop; a plain Python callable runs the same loop uncompiled.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numba
import numpy as np
from numba.core.dispatcher import Dispatcher

__all__ = [
    "DivergenceError",
    "CrossingNotFound",
    "ThresholdEvent",
    "StopSpec",
    "Crossing",
    "Trajectory",
    "default_dt",
    "rk2_integrate",
    "rk4_integrate",
    "euler_maruyama",
    "path_generator",
    "box_muller",
    "find_threshold_crossing",
    "write_trajectory",
    "RNG_ALGORITHM",
    "GUARD",
]

GUARD = 1e6
MAX_STORED = 200_000
RNG_ALGORITHM = "Philox4x64-10 per path, SeedSequence([seed, path_index]), Box-Muller normals"

_STATUS = {0: "t_max", 1: "guard", 2: "event", 3: "nonfinite"}


class DivergenceError(ArithmeticError):
    """Non-finite state; carries the last finite sample."""

    def __init__(self, t: float, state: np.ndarray, trajectory: "Trajectory | None" = None):
        self.t = t
        self.state = np.asarray(state)
        self.trajectory = trajectory
        super().__init__(f"non-finite state after t={t!r}; last finite state {self.state!r}")


class CrossingNotFound(LookupError):
    """The trajectory never crosses the requested level."""


@dataclass(frozen=True)
class ThresholdEvent:
    component: int
    level: float
    direction: int = -1  # -1 downward, +1 upward, 0 either way
    terminal: bool = True


@dataclass(frozen=True)
class StopSpec:
    t_max: float
    guard_component: int = 0
    state_floor: float = -GUARD
    state_ceiling: float = GUARD
    events: tuple[ThresholdEvent, ...] = ()

    def __post_init__(self):
        if not self.t_max > 0:
            raise ValueError("t_max must be positive")
        object.__setattr__(self, "events", tuple(self.events))


@dataclass(frozen=True)
class Crossing:
    t: float
    state: np.ndarray
    drift_param: float
    event_index: int
    step: int


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    drift_index: int
    dt: float
    method: str
    status: str
    events: list[Crossing] = field(default_factory=list)
    store_every: int = 1
    names: tuple[str, ...] = ()
    meta: dict = field(default_factory=dict)

    @property
    def drift_param(self) -> np.ndarray:
        return self.states[:, self.drift_index]

    def component(self, i: int) -> np.ndarray:
        return self.states[:, i]

    def __len__(self) -> int:
        return self.times.size


def default_dt(mu: float, Omega: float | None = None) -> float:
    """min(0.01, 0.01 * 2 pi / Omega, 0.01 / mu^(1/3))."""
    dt = min(0.01, 0.01 / mu ** (1.0 / 3.0))
    if Omega is not None and Omega > 0:
        dt = min(dt, 0.01 * 2.0 * math.pi / Omega)
    return dt


@numba.njit
def _kernel(rhs, y0, t0, dt, n_steps, p, method, store_every,
            gc, floor, ceil, ev_comp, ev_level, ev_dir, ev_term,
            noise, eps, noise_mask):
    dim = y0.size
    cap = n_steps // store_every + 3
    times = np.empty(cap)
    states = np.empty((cap, dim))
    n_ev = ev_comp.size
    ev_hit = np.zeros(n_ev, dtype=np.int64)
    ev_step = np.zeros(n_ev, dtype=np.int64)
    ev_t = np.zeros(n_ev)
    ev_y = np.zeros((n_ev, dim))
    y = y0.copy()
    times[0] = t0
    states[0] = y
    n = 1
    status = 0
    sq = math.sqrt(dt)
    for i in range(n_steps):
        t = t0 + i * dt
        if method == 1:
            f = rhs(t, y, p)
            y_new = y + dt * f
            for j in range(dim):
                if noise_mask[j]:
                    y_new[j] += eps * sq * noise[i]
        elif method == 2:
            k1 = rhs(t, y, p)
            k2 = rhs(t + 0.5 * dt, y + 0.5 * dt * k1, p)
            y_new = y + dt * k2
        else:
            k1 = rhs(t, y, p)
            k2 = rhs(t + 0.5 * dt, y + 0.5 * dt * k1, p)
            k3 = rhs(t + 0.5 * dt, y + 0.5 * dt * k2, p)
            k4 = rhs(t + dt, y + dt * k3, p)
            y_new = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        finite = True
        for j in range(dim):
            if not math.isfinite(y_new[j]):
                finite = False
        if not finite:
            status = 3
            if times[n - 1] != t:
                times[n] = t
                states[n] = y
                n += 1
            break
        t_new = t0 + (i + 1) * dt
        stop = False
        for e in range(n_ev):
            if ev_hit[e]:
                continue
            c = ev_comp[e]
            d0 = y[c] - ev_level[e]
            d1 = y_new[c] - ev_level[e]
            crossed = False
            if ev_dir[e] <= 0 and d0 > 0.0 and d1 <= 0.0:
                crossed = True
            if ev_dir[e] >= 0 and d0 < 0.0 and d1 >= 0.0:
                crossed = True
            if crossed:
                s = d0 / (d0 - d1)
                ev_hit[e] = 1
                ev_step[e] = i + 1
                ev_t[e] = t + s * dt
                for j in range(dim):
                    ev_y[e, j] = y[j] + s * (y_new[j] - y[j])
                if ev_term[e]:
                    stop = True
        y = y_new
        if y[gc] <= floor or y[gc] >= ceil:
            status = 1
            stop = True
        if stop and status == 0:
            status = 2
        if (i + 1) % store_every == 0 or stop or i == n_steps - 1:
            times[n] = t_new
            states[n] = y
            n += 1
        if stop:
            break
    return times[:n], states[:n], status, ev_hit, ev_step, ev_t, ev_y, y


def _run(rhs, y0, stop: StopSpec, dt, params, method_id, t0, drift_index, store_every,
         max_stored, noise=None, eps=0.0, noise_components=()):
    if not dt > 0:
        raise ValueError("dt must be positive")
    y0 = np.asarray(y0, dtype=float).copy()
    p = np.asarray(params if params is not None else (), dtype=float)
    n_steps = int(math.ceil(stop.t_max / dt - 1e-9))
    if max_stored:
        store_every = max(int(store_every), int(math.ceil(n_steps / max_stored)))
    ev = stop.events
    ev_comp = np.array([e.component for e in ev], dtype=np.int64)
    ev_level = np.array([e.level for e in ev], dtype=float)
    ev_dir = np.array([e.direction for e in ev], dtype=np.int64)
    ev_term = np.array([e.terminal for e in ev], dtype=np.bool_)
    if noise is None:
        noise = np.zeros(1)
    mask = np.zeros(y0.size, dtype=np.bool_)
    for j in noise_components:
        mask[j] = True
    kernel = _kernel if isinstance(rhs, Dispatcher) else _kernel.py_func
    out = kernel(rhs, y0, float(t0), float(dt), n_steps, p, method_id, int(store_every),
                 int(stop.guard_component), float(stop.state_floor), float(stop.state_ceiling),
                 ev_comp, ev_level, ev_dir, ev_term, noise, float(eps), mask)
    times, states, status, ev_hit, ev_step, ev_t, ev_y, _ = out
    events = [
        Crossing(float(ev_t[e]), ev_y[e].copy(), float(ev_y[e, drift_index]), e, int(ev_step[e]))
        for e in range(len(ev)) if ev_hit[e]
    ]
    events.sort(key=lambda c: c.t)
    return times, states, _STATUS[int(status)], events, store_every


def _integrate(rhs, y0, stop, dt, params, method_id, name, t0, drift_index, store_every,
               max_stored, names):
    times, states, status, events, se = _run(rhs, y0, stop, dt, params, method_id, t0,
                                             drift_index, store_every, max_stored)
    traj = Trajectory(times, states, drift_index % len(np.atleast_1d(y0)), dt, name, status,
                      events, se, tuple(names))
    if status == "nonfinite":
        raise DivergenceError(float(times[-1]), states[-1], traj)
    return traj


def rk2_integrate(rhs: Callable, y0: Sequence[float], stop: StopSpec, dt: float,
                  params=None, t0: float = 0.0, drift_index: int = -1,
                  store_every: int = 1, max_stored: int | None = MAX_STORED,
                  names: Sequence[str] = ()) -> Trajectory:
    """Explicit midpoint rule with fixed step."""
    return _integrate(rhs, y0, stop, dt, params, 2, "rk2", t0, drift_index, store_every,
                      max_stored, names)


def rk4_integrate(rhs: Callable, y0: Sequence[float], stop: StopSpec, dt: float,
                  params=None, t0: float = 0.0, drift_index: int = -1,
                  store_every: int = 1, max_stored: int | None = MAX_STORED,
                  names: Sequence[str] = ()) -> Trajectory:
    """Classical fourth-order Runge-Kutta with fixed step."""
    return _integrate(rhs, y0, stop, dt, params, 4, "rk4", t0, drift_index, store_every,
                      max_stored, names)


def path_generator(seed: int, path_index: int = 0) -> np.random.Generator:
    """Independent counter-based stream for one Monte Carlo path."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(path_index)])))


def box_muller(rng: np.random.Generator, n: int) -> np.ndarray:
    """n standard normals from uniform pairs (both Box-Muller outputs used)."""
    m = (n + 1) // 2
    u1 = 1.0 - rng.random(m)  # in (0, 1]
    u2 = rng.random(m)
    r = np.sqrt(-2.0 * np.log(u1))
    z = np.empty(2 * m)
    z[0::2] = r * np.cos(2.0 * np.pi * u2)
    z[1::2] = r * np.sin(2.0 * np.pi * u2)
    return z[:n]


def euler_maruyama(drift: Callable, eps: float, y0: Sequence[float], stop: StopSpec, dt: float,
                   seed: int, params=None, path_index: int = 0, t0: float = 0.0,
                   drift_index: int = -1, noise_components: Sequence[int] = (0,),
                   store_every: int = 1, max_stored: int | None = MAX_STORED,
                   names: Sequence[str] = ()) -> Trajectory:
    """One path of dy = f dt + eps dW on the listed components."""
    if eps < 0:
        raise ValueError("eps must be non-negative")
    n_steps = int(math.ceil(stop.t_max / dt - 1e-9))
    noise = box_muller(path_generator(seed, path_index), n_steps)
    times, states, status, events, se = _run(drift, y0, stop, dt, params, 1, t0, drift_index,
                                             store_every, max_stored, noise, eps,
                                             tuple(noise_components))
    traj = Trajectory(times, states, drift_index % len(np.atleast_1d(y0)), dt, "euler_maruyama",
                      status, events, se, tuple(names),
                      {"seed": int(seed), "path_index": int(path_index), "rng": RNG_ALGORITHM})
    if status == "nonfinite":
        raise DivergenceError(float(times[-1]), states[-1], traj)
    return traj


def find_threshold_crossing(traj: Trajectory, component: int, level: float,
                            direction: int = -1, start_index: int = 0) -> tuple[float, float, int]:
    """First crossing of ``level`` by linear interpolation between samples.

    Returns (t*, drift_param*, index of the sample after the crossing).
    """
    y = traj.states[start_index:, component] - level
    if direction <= 0:
        down = np.nonzero((y[:-1] > 0) & (y[1:] <= 0))[0]
    else:
        down = np.array([], dtype=int)
    if direction >= 0:
        up = np.nonzero((y[:-1] < 0) & (y[1:] >= 0))[0]
    else:
        up = np.array([], dtype=int)
    cand = np.concatenate([down, up])
    if cand.size == 0:
        raise CrossingNotFound(f"component {component} never crosses {level!r}")
    i = int(cand.min())
    s = y[i] / (y[i] - y[i + 1])
    t = traj.times[start_index + i] + s * (traj.times[start_index + i + 1] - traj.times[start_index + i])
    d = traj.drift_param[start_index:]
    dp = d[i] + s * (d[i + 1] - d[i])
    return float(t), float(dp), start_index + i + 1


def write_trajectory(traj: Trajectory, path: str | Path, names: Sequence[str] | None = None,
                     meta: dict | None = None) -> tuple[Path, Path]:
    """CSV with header t,<components>,drift_param and a JSON sidecar."""
    path = Path(path)
    names = list(names or traj.names or [f"y{i}" for i in range(traj.states.shape[1])])
    table = np.column_stack([traj.times, traj.states, traj.drift_param])
    header = ",".join(["t", *names, "drift_param"])
    np.savetxt(path, table, delimiter=",", header=header, comments="", fmt="%.17g")
    side = path.with_suffix(path.suffix + ".json")
    info = {
        "dt": traj.dt,
        "method": traj.method,
        "status": traj.status,
        "store_every": traj.store_every,
        "seed": traj.meta.get("seed"),
        "rng": traj.meta.get("rng"),
        "events": [{"t": c.t, "drift_param": c.drift_param, "event_index": c.event_index}
                   for c in traj.events],
    }
    info.update(meta or {})
    side.write_text(json.dumps(info, indent=2, default=float))
    return path, side
