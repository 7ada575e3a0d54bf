"""Turn flat parameter dictionaries into model objects, simulations and predictions.

Each model reports tipping in its own drift parameter: a (canonical),
I_bias (Morris-Lecar) and dF0 (sea ice).
"""
from __future__ import annotations

import dataclasses

from ..asymptotics import (Prediction, delayed_tipping, hf_tipping, lf_tipping,
                           lf_tipping_with_jumps)
from ..app_asymptotics.ml import ml_hf_tipping, ml_lf_tipping, ml_unforced_tipping
from ..app_asymptotics.seaice import seaice_averaged_tipping, seaice_tipping
from ..models.canonical import CanonicalParams, classify_regime
from ..models.morris_lecar import MLNormalized, MLParams, ml_normalize
from ..models.seaice import (SeaIceNormalized, default_seaice_params, scaled_params,
                             seaice_normalize)
from ..simulate import simulate_canonical, simulate_ml, simulate_seaice
from ..tipping import (SEAICE_X_FLOOR, detect_tipping_canonical, detect_tipping_ml,
                       detect_tipping_seaice)
from .config import ConfigError

__all__ = [
    "MODELS",
    "canonical_case",
    "ml_case",
    "seaice_case",
    "build_case",
    "predict_case",
    "simulate_case",
]

MODELS = ("canonical", "ml", "seaice")

_CANON_KEYS = {"mu", "A", "Omega", "a0", "x0", "lambda", "nu", "c"}
_ML_PHYS = {f.name for f in dataclasses.fields(MLParams)}
_ML_NORM = {"mu", "A", "Omega", "lambda", "c"}
_SEA_VARY = {"FT_factor", "FT_shift", "FT_osc_factor", "cH_ratio"}
_SEA_DIRECT = {"L_i", "cH", "alpha_i", "alpha_ml", "F_B", "h_alpha", "mu_tilde"}
_SIM_KEYS = {"dt", "method", "form", "forcing", "x_floor", "b0", "threshold", "regime"}


def _check_keys(params: dict, allowed: set, model: str) -> None:
    bad = set(params) - allowed - _SIM_KEYS
    if bad:
        raise ConfigError(f"unknown {model} parameter(s): {', '.join(sorted(bad))}")


def _frequency(params: dict, mu: float, default: float) -> float:
    given = [k for k in ("Omega", "lambda", "nu", "c") if k in params]
    if len(given) > 1:
        raise ConfigError(f"frequency over-specified by {given}")
    if "Omega" in params:
        return float(params["Omega"])
    if "lambda" in params:
        return mu ** (-float(params["lambda"]))
    if "nu" in params:
        return mu ** float(params["nu"])
    if "c" in params:
        return float(params["c"]) * mu
    return default


def canonical_case(params: dict) -> CanonicalParams:
    _check_keys(params, _CANON_KEYS, "canonical")
    if "mu" not in params:
        raise ConfigError("canonical model needs mu")
    mu = float(params["mu"])
    try:
        return CanonicalParams(mu=mu, A=float(params.get("A", 0.0)),
                               Omega=_frequency(params, mu, 1.0),
                               a0=float(params.get("a0", 1.0)),
                               x0=None if params.get("x0") is None else float(params["x0"]))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def ml_case(params: dict) -> MLNormalized:
    """Physical MLParams fields plus normalized overrides mu, A, Omega/lambda/c."""
    _check_keys(params, _ML_PHYS | _ML_NORM, "ml")
    phys = {k: float(v) for k, v in params.items() if k in _ML_PHYS}
    try:
        n = ml_normalize(MLParams(**phys))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    mu = float(params.get("mu", n.mu))
    Omega = _frequency(params, mu, n.Omega)
    A = float(params.get("A", n.A))
    return n.with_forcing(mu=mu, A=A, Omega=Omega)


def seaice_case(params: dict) -> SeaIceNormalized:
    _check_keys(params, _SEA_VARY | _SEA_DIRECT, "seaice")
    direct = {k: float(params[k]) for k in _SEA_DIRECT if k in params}
    try:
        p = default_seaice_params(params.get("forcing", "climatology"), **direct)
        p = scaled_params(p, **{k: float(params[k]) for k in _SEA_VARY if k in params})
        return seaice_normalize(p)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def build_case(model: str, params: dict):
    if model == "canonical":
        return canonical_case(params)
    if model == "ml":
        return ml_case(params)
    if model == "seaice":
        return seaice_case(params)
    raise ConfigError(f"unknown model {model!r}; choose from {MODELS}")


def _predict_canonical(p: CanonicalParams, regime: str) -> Prediction:
    if regime == "auto":
        if p.A == 0:
            regime = "delayed"
        else:
            tag = classify_regime(p).tag
            regime = "hf" if tag == "HighFrequency" or (tag != "LowFreqOrderMu" and p.Omega > 1) \
                else "lf-jumps"
    if regime == "delayed":
        return delayed_tipping(p.mu)
    if regime == "hf":
        return hf_tipping(p.mu, p.A, p.Omega)
    if regime == "lf":
        return lf_tipping(p.mu, p.A, p.c, p.a0)
    if regime == "lf-jumps":
        return lf_tipping_with_jumps(p.mu, p.A, p.c, p.a0)
    raise ConfigError(f"unknown canonical regime {regime!r}")


def _predict_ml(n: MLNormalized, regime: str) -> Prediction:
    if regime == "auto":
        regime = "unforced" if n.A == 0 else ("hf" if n.Omega > 1 else "lf")
    if regime == "unforced":
        return ml_unforced_tipping(n)
    if regime == "hf":
        return ml_hf_tipping(n, n.A, n.Omega)
    if regime == "lf":
        return ml_lf_tipping(n, n.mu, n.A, n.Omega / n.mu)
    raise ConfigError(f"unknown ml regime {regime!r}")


def _predict_seaice(n: SeaIceNormalized, regime: str) -> Prediction:
    if regime in ("auto", "forced", "full"):
        return seaice_tipping(n)
    if regime == "averaged":
        return seaice_averaged_tipping(n)
    raise ConfigError(f"unknown seaice regime {regime!r}")


def predict_case(model: str, case, regime: str = "auto") -> tuple[float, Prediction]:
    """(prediction in the model's reporting parameter, full Prediction)."""
    if model == "canonical":
        pr = _predict_canonical(case, regime)
        return pr.value, pr
    if model == "ml":
        pr = _predict_ml(case, regime)
        return pr.extras["I_bias"], pr
    if model == "seaice":
        pr = _predict_seaice(case, regime)
        return pr.extras["dF0"], pr
    raise ConfigError(f"unknown model {model!r}")


def simulate_case(model: str, case, options: dict | None = None):
    """(simulated tipping in the reporting parameter, TippingEvent, Trajectory)."""
    o = dict(options or {})
    dt = o.get("dt")
    if model == "canonical":
        traj = simulate_canonical(case, dt=dt, method=o.get("method", "rk2"),
                                  threshold=float(o.get("threshold", -10.0)))
        ev = detect_tipping_canonical(traj, float(o.get("threshold", -10.0)))
        return ev.param_at_tip, ev, traj
    if model == "ml":
        traj = simulate_ml(case, dt=dt, method=o.get("method", "rk4"))
        ev = detect_tipping_ml(traj, case.v_c)
        return ev.param_at_tip, ev, traj
    if model == "seaice":
        form = o.get("form", "forced")
        x_floor = float(o.get("x_floor", SEAICE_X_FLOOR))
        traj = simulate_seaice(case, b0=float(o.get("b0", 2.0)), form=form, dt=dt,
                               method=o.get("method", "rk4"), x_floor=x_floor)
        ev = detect_tipping_seaice(traj, x_floor)
        return float(case.dF0_from_b(ev.param_at_tip)), ev, traj
    raise ConfigError(f"unknown model {model!r}")

