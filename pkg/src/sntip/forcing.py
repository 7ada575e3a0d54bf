"""Periodic forcing signals as truncated Fourier series."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

__all__ = [
    "PeriodicSeries",
    "NonZeroMeanError",
    "eval_series",
    "sinusoid",
    "constant",
    "antiderivative_zero_mean",
    "min_over_period",
    "max_over_period",
    "fit_periodic",
    "fit_from_monthly",
    "load_signals",
]

EXTREMUM_SAMPLES = 4096
EXTREMUM_BISECTIONS = 20
MONTHLY_HARMONICS = 5


class NonZeroMeanError(ValueError):
    """A zero-mean signal was required."""


@dataclass(frozen=True)
class PeriodicSeries:
    """mean + sum_k cos_k cos(k w t) + sin_k sin(k w t), k = 1..n."""

    mean: float
    cos_coeffs: tuple[float, ...] = field(default=())
    sin_coeffs: tuple[float, ...] = field(default=())
    fundamental_frequency: float = 2.0 * math.pi

    def __post_init__(self):
        c = tuple(float(v) for v in self.cos_coeffs)
        s = tuple(float(v) for v in self.sin_coeffs)
        n = max(len(c), len(s))
        c = c + (0.0,) * (n - len(c))
        s = s + (0.0,) * (n - len(s))
        object.__setattr__(self, "cos_coeffs", c)
        object.__setattr__(self, "sin_coeffs", s)
        object.__setattr__(self, "mean", float(self.mean))
        if not self.fundamental_frequency > 0:
            raise ValueError("fundamental_frequency must be positive")
        object.__setattr__(self, "fundamental_frequency", float(self.fundamental_frequency))

    @property
    def n_harmonics(self) -> int:
        return len(self.cos_coeffs)

    @property
    def period(self) -> float:
        return 2.0 * math.pi / self.fundamental_frequency

    def __call__(self, t):
        return eval_series(self, t)

    def derivative(self) -> "PeriodicSeries":
        w = self.fundamental_frequency
        k = np.arange(1, self.n_harmonics + 1)
        c = np.asarray(self.cos_coeffs)
        s = np.asarray(self.sin_coeffs)
        return PeriodicSeries(0.0, tuple(k * w * s), tuple(-k * w * c), w)

    def zero_mean(self) -> "PeriodicSeries":
        return PeriodicSeries(0.0, self.cos_coeffs, self.sin_coeffs, self.fundamental_frequency)

    def amplitudes(self) -> np.ndarray:
        return np.hypot(self.cos_coeffs, self.sin_coeffs)

    def with_oscillation_scaled(self, factor: float) -> "PeriodicSeries":
        return PeriodicSeries(
            self.mean,
            tuple(factor * v for v in self.cos_coeffs),
            tuple(factor * v for v in self.sin_coeffs),
            self.fundamental_frequency,
        )

    def to_dict(self) -> dict:
        return {
            "mean": self.mean,
            "cos_coeffs": list(self.cos_coeffs),
            "sin_coeffs": list(self.sin_coeffs),
            "fundamental_frequency": self.fundamental_frequency,
        }

    # linear algebra on series sharing a fundamental frequency
    def _align(self, other: "PeriodicSeries"):
        if not math.isclose(self.fundamental_frequency, other.fundamental_frequency, rel_tol=1e-12):
            raise ValueError("series have different fundamental frequencies")
        n = max(self.n_harmonics, other.n_harmonics)
        pad = lambda v: np.concatenate([np.asarray(v, float), np.zeros(n - len(v))])
        return (pad(self.cos_coeffs), pad(self.sin_coeffs),
                pad(other.cos_coeffs), pad(other.sin_coeffs))

    def __add__(self, other):
        if isinstance(other, PeriodicSeries):
            c1, s1, c2, s2 = self._align(other)
            return PeriodicSeries(self.mean + other.mean, tuple(c1 + c2), tuple(s1 + s2),
                                  self.fundamental_frequency)
        return PeriodicSeries(self.mean + float(other), self.cos_coeffs, self.sin_coeffs,
                              self.fundamental_frequency)

    __radd__ = __add__

    def __mul__(self, k):
        k = float(k)
        return PeriodicSeries(k * self.mean, tuple(k * v for v in self.cos_coeffs),
                              tuple(k * v for v in self.sin_coeffs), self.fundamental_frequency)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other


def eval_series(series: PeriodicSeries, t):
    t_arr = np.asarray(t, dtype=float)
    out = np.full(t_arr.shape, series.mean)
    w = series.fundamental_frequency
    for k, (a, b) in enumerate(zip(series.cos_coeffs, series.sin_coeffs), start=1):
        if a:
            out = out + a * np.cos(k * w * t_arr)
        if b:
            out = out + b * np.sin(k * w * t_arr)
    if out.ndim == 0:
        return float(out)
    return out


def sinusoid(amplitude: float, omega: float, phase: float = 0.0, mean: float = 0.0) -> PeriodicSeries:
    """mean + amplitude * sin(omega t + phase)."""
    return PeriodicSeries(mean, (amplitude * math.sin(phase),), (amplitude * math.cos(phase),), omega)


def constant(value: float, omega: float = 2.0 * math.pi) -> PeriodicSeries:
    return PeriodicSeries(value, (), (), omega)


def antiderivative_zero_mean(series: PeriodicSeries, tol: float = 1e-10) -> PeriodicSeries:
    """Q with Q' = q and zero period average.  Requires mean(q) = 0."""
    scale = max(1.0, float(np.max(series.amplitudes(), initial=0.0)))
    if abs(series.mean) > tol * scale:
        raise NonZeroMeanError(f"series mean is {series.mean!r}, not zero")
    w = series.fundamental_frequency
    k = np.arange(1, series.n_harmonics + 1) * w
    c = np.asarray(series.cos_coeffs)
    s = np.asarray(series.sin_coeffs)
    return PeriodicSeries(0.0, tuple(-s / k), tuple(c / k), w)


def _extremum(series: PeriodicSeries, sign: float) -> tuple[float, float]:
    P = series.period
    t = np.arange(EXTREMUM_SAMPLES) * (P / EXTREMUM_SAMPLES)
    v = sign * eval_series(series, t)
    i = int(np.argmin(v))
    if series.n_harmonics == 0:
        return 0.0, series.mean
    d = series.derivative()
    h = P / EXTREMUM_SAMPLES
    lo, hi = t[i] - h, t[i] + h
    dlo, dhi = sign * d(lo), sign * d(hi)
    if dlo <= 0.0 <= dhi:
        for _ in range(EXTREMUM_BISECTIONS):
            mid = 0.5 * (lo + hi)
            if sign * d(mid) <= 0.0:
                lo = mid
            else:
                hi = mid
        t_best = 0.5 * (lo + hi)
        if sign * series(t_best) > v[i]:
            t_best = t[i]
    else:
        t_best = t[i]
    t_best = t_best % P
    return t_best, float(series(t_best))


def min_over_period(series: PeriodicSeries) -> tuple[float, float]:
    """Global minimum over one period: (t_min, value)."""
    return _extremum(series, 1.0)


def max_over_period(series: PeriodicSeries) -> tuple[float, float]:
    return _extremum(series, -1.0)


def fit_periodic(samples: Sequence[float], period: float, n_harmonics: int,
                 times: Sequence[float] | None = None) -> PeriodicSeries:
    """DFT fit of equally spaced samples.

    ``times`` defaults to the midpoints of N equal sub-intervals.  The fit
    reproduces the sample mean exactly; harmonics are limited to k < N/2 so
    that the fitted basis is orthogonal on the sample grid.
    """
    s = np.asarray(samples, dtype=float)
    n = s.size
    if n == 0 or not np.all(np.isfinite(s)):
        raise ValueError("samples must be finite and non-empty")
    if n_harmonics > (n - 1) // 2:
        raise ValueError(f"at most {(n - 1) // 2} harmonics can be fitted from {n} samples")
    w = 2.0 * math.pi / period
    if times is None:
        tm = (np.arange(n) + 0.5) * (period / n)
    else:
        tm = np.asarray(times, dtype=float)
    k = np.arange(1, n_harmonics + 1)[:, None]
    cos_c = 2.0 / n * np.sum(s * np.cos(k * w * tm), axis=1)
    sin_c = 2.0 / n * np.sum(s * np.sin(k * w * tm), axis=1)
    return PeriodicSeries(float(np.mean(s)), tuple(cos_c), tuple(sin_c), w)


def fit_from_monthly(samples: Sequence[float], period: float = 1.0,
                     n_harmonics: int = MONTHLY_HARMONICS) -> PeriodicSeries:
    """Fit 12 monthly values, each taken at its month's midpoint."""
    s = np.asarray(samples, dtype=float)
    if s.shape != (12,):
        raise ValueError("exactly 12 monthly samples are required")
    return fit_periodic(s, period, n_harmonics)


def load_signals(path: str | Path, n_harmonics: int = MONTHLY_HARMONICS) -> tuple[dict[str, PeriodicSeries], dict]:
    """Read named monthly signals from JSON.

    Format::

        {"synthetic": true,
         "signals": {"F0": {"period": 1.0, "samples": [12 numbers]}, ...}}

    A signal entry may carry ``"clip_min"`` (e.g. 0 for shortwave) applied to
    the samples before fitting.  Returns the fitted series and the remaining
    top-level metadata.
    """
    doc = json.loads(Path(path).read_text())
    return signals_from_dict(doc, n_harmonics)


def signals_from_dict(doc: dict, n_harmonics: int = MONTHLY_HARMONICS) -> tuple[dict[str, PeriodicSeries], dict]:
    if "signals" not in doc:
        raise ValueError("forcing document needs a 'signals' object")
    out = {}
    for name, spec in doc["signals"].items():
        samples = np.asarray(spec["samples"], dtype=float)
        if "clip_min" in spec:
            samples = np.maximum(samples, float(spec["clip_min"]))
        out[name] = fit_from_monthly(samples, float(spec.get("period", 1.0)), n_harmonics)
    meta = {k: v for k, v in doc.items() if k != "signals"}
    return out, meta
