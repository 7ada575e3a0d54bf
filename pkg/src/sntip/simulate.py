"""Ready-made simulations of the three models up to and past tipping."""
from __future__ import annotations

import math
from dataclasses import replace

import numpy as np

from .integrate import (StopSpec, ThresholdEvent, Trajectory, default_dt, rk2_integrate,
                        rk4_integrate)
from .models.canonical import CanonicalParams, canonical_field
from .models.morris_lecar import MLNormalized, MLParams, ml_field, ml_normalize, ml_rest_state
from .models.seaice import (SeaIceNormalized, seaice_full_field, seaice_h_field,
                            h_branch_inverse)
from .tipping import SEAICE_X_FLOOR

__all__ = [
    "CANONICAL_THRESHOLD",
    "ML_RELAX_MS",
    "simulate_canonical",
    "simulate_ml",
    "simulate_seaice",
]

CANONICAL_THRESHOLD = -10.0
ML_RELAX_MS = 2000.0
SEAICE_RELAX_PERIODS = 20

_METHODS = {"rk2": rk2_integrate, "rk4": rk4_integrate}


def _integrator(method: str):
    try:
        return _METHODS[method]
    except KeyError:
        raise ValueError(f"unknown method {method!r}; choose rk2 or rk4") from None


def simulate_canonical(p: CanonicalParams, dt: float | None = None, method: str = "rk2",
                       a_end: float | None = None, threshold: float = CANONICAL_THRESHOLD,
                       store_every: int = 1, max_stored: int | None = 200_000) -> Trajectory:
    """Integrate (x, a) from (x0, a0) until x crosses ``threshold`` or a reaches a_end.

    a_end defaults to -(1 + 2A), below which f(a) <= a + A stays negative.
    """
    dt = default_dt(p.mu, p.Omega) if dt is None else dt
    a_end = -(1.0 + 2.0 * p.A) if a_end is None else a_end
    if not a_end < p.a0:
        raise ValueError("a_end must be below a0")
    stop = StopSpec(t_max=(p.a0 - a_end) / p.mu, guard_component=0,
                    events=(ThresholdEvent(0, threshold, -1),))
    traj = _integrator(method)(canonical_field, [p.x0, p.a0], stop, dt, p.as_array(),
                               drift_index=1, store_every=store_every, max_stored=max_stored,
                               names=("x", "a"))
    traj.meta.update({"model": "canonical", **p.to_dict()})
    return traj


def simulate_ml(n: MLNormalized | MLParams, dt: float | None = None, method: str = "rk4",
                I_end: float | None = None, relax_ms: float = ML_RELAX_MS,
                store_every: int = 1, max_stored: int | None = 200_000) -> Trajectory:
    """Physical-units Morris-Lecar run: relax at I0 (no drift, no input), then ramp.

    The ramp starts at t = 0 with the periodic input switched on and stops
    when v crosses |v_c| upward or I_bias reaches I_end (default I_c + 20).
    """
    if isinstance(n, MLParams):
        n = ml_normalize(n)
    p = n.params
    if not p.mu_hat > 0:
        raise ValueError("mu_hat must be positive")
    if p.I0 >= n.I_c:
        raise ValueError("I0 must lie below the fold current")
    if dt is None:
        dt = 0.05
        if p.A_hat != 0:
            dt = min(dt, 0.02 * 2.0 * math.pi / p.Omega_hat)
    v, w = ml_rest_state(p, p.I0)
    if relax_ms > 0:
        rest = replace(p, mu_hat=0.0, A_hat=0.0)
        r = rk4_integrate(ml_field, [v, w, p.I0], StopSpec(relax_ms), 0.05, rest.as_array(),
                          max_stored=10)
        v, w = r.states[-1, 0], r.states[-1, 1]
    I_end = n.I_c + 20.0 if I_end is None else I_end
    stop = StopSpec(t_max=(I_end - p.I0) / p.mu_hat,
                    events=(ThresholdEvent(0, abs(n.v_c), +1),))
    traj = _integrator(method)(ml_field, [v, w, p.I0], stop, dt, p.as_array(), drift_index=2,
                               store_every=store_every, max_stored=max_stored,
                               names=("v", "w", "I_bias"))
    traj.meta.update({"model": "morris_lecar", "v_c": n.v_c, "I_c": n.I_c,
                      "mu_hat": p.mu_hat, "A_hat": p.A_hat, "Omega_hat": p.Omega_hat})
    return traj


def simulate_seaice(n: SeaIceNormalized, b0: float = 2.0, b_end: float = -1.0,
                    form: str = "forced", dt: float | None = None, method: str = "rk4",
                    relax_periods: int = SEAICE_RELAX_PERIODS, x_floor: float = SEAICE_X_FLOOR,
                    store_every: int = 1, max_stored: int | None = 200_000) -> Trajectory:
    """Sea-ice run in normalized (x, b) variables.

    form: 'forced' (H plus the periodic q), 'averaged' (q = 0) or 'full'
    (the energy model with state (E, dF0), reported back as (x, b)).
    Starts on the upper branch at b0, relaxes for ``relax_periods`` with
    the drift off, then drifts b downward until x falls below ``x_floor``.
    """
    if form not in ("forced", "averaged", "full"):
        raise ValueError(f"unknown form {form!r}")
    if not n.mu > 0:
        raise ValueError("drift rate must be positive")
    if not b_end < b0:
        raise ValueError("b_end must be below b0")
    dt = 0.001 * 2.0 * math.pi / n.Omega if dt is None else dt
    integ = _integrator(method)
    x0 = h_branch_inverse(n, b0, "upper")
    T = 2.0 * math.pi / n.Omega
    if form == "full":
        field = seaice_full_field
        sp = n.params
        par = sp.as_array()
        y0 = [float(n.E_from_x(x0)), float(n.dF0_from_b(b0))]
        level = float(n.E_from_x(x_floor))
    else:
        field = seaice_h_field
        par = n.h_array(with_forcing=(form == "forced"))
        y0 = [x0, b0]
        level = x_floor
    if relax_periods > 0:
        still = par.copy()
        still[6 if form == "full" else 4] = 0.0
        r = integ(field, y0, StopSpec(relax_periods * T, state_floor=-np.inf, state_ceiling=np.inf),
                  dt, still, max_stored=10)
        y0 = list(r.states[-1])
    stop = StopSpec(t_max=(b0 - b_end) / n.mu, state_floor=-np.inf, state_ceiling=np.inf,
                    events=(ThresholdEvent(0, level, -1),))
    traj = integ(field, y0, stop, dt, par, drift_index=1, store_every=store_every,
                 max_stored=max_stored)
    if form == "full":
        states = np.column_stack([n.x_from_E(traj.states[:, 0]), n.b_from_dF0(traj.states[:, 1])])
        events = [replace(c, state=np.array([float(n.x_from_E(c.state[0])),
                                             float(n.b_from_dF0(c.state[1]))]),
                          drift_param=float(n.b_from_dF0(c.drift_param))) for c in traj.events]
        traj = replace(traj, states=states, events=events)
    traj.names = ("x", "b")
    traj.meta.update({"model": "seaice", "form": form, "E_c": n.E_c, "dF0c": n.dF0c,
                      "x_floor": x_floor, "b0": b0})
    return traj
