"""Parameter sweeps comparing simulated and predicted tipping."""
from __future__ import annotations

import csv
import hashlib
import json
import math
import platform
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numba
import numpy as np
import scipy

from .. import __version__
from ..integrate import RNG_ALGORITHM
from .cases import MODELS, build_case, predict_case, simulate_case
from .config import ConfigError

__all__ = [
    "SweepSpec",
    "ComparisonRow",
    "SweepResult",
    "run_sweep",
    "evaluate_point",
    "sweep_spec_from_dict",
    "write_table",
    "read_table",
    "rows_from_pairs",
    "TABLE_COLUMNS",
]

TABLE_COLUMNS = ("value", "simulated", "predicted", "delay_component", "shift_component",
                 "abs_error", "rel_error", "regime", "warnings", "error")
_SIM_OPTION_KEYS = ("dt", "method", "form", "x_floor", "b0", "threshold")


@dataclass(frozen=True)
class SweepSpec:
    """One sweep: ``param`` takes each value of ``grid`` with ``fixed`` held constant.

    ``grid`` is a list of values or {"min", "max", "count"}.  ``simulation``
    holds integrator options (dt, method, form, x_floor, b0, threshold);
    ``regime`` selects the prediction formula ('auto' by default).
    """

    model: str
    param: str
    grid: tuple[float, ...]
    fixed: dict = field(default_factory=dict)
    simulation: dict = field(default_factory=dict)
    predict: bool = True
    simulate: bool = True
    regime: str = "auto"
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.model not in MODELS:
            raise ConfigError(f"unknown model {self.model!r}; choose from {MODELS}")
        g = _expand_grid(self.grid)
        if g.size == 0:
            raise ConfigError("grid is empty")
        d = np.diff(g)
        if not (np.all(d > 0) or np.all(d < 0)):
            raise ConfigError("grid must be strictly monotone")
        object.__setattr__(self, "grid", tuple(float(v) for v in g))
        bad = set(self.simulation) - set(_SIM_OPTION_KEYS)
        if bad:
            raise ConfigError(f"unknown simulation option(s): {', '.join(sorted(bad))}")
        if not (self.predict or self.simulate):
            raise ConfigError("nothing to do: both predict and simulate are off")
        if int(self.workers) < 1:
            raise ConfigError("workers must be at least 1")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["grid"] = list(self.grid)
        return d

    def config_hash(self) -> str:
        d = self.to_dict()
        d.pop("workers")  # execution detail, does not change results
        blob = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def _expand_grid(grid) -> np.ndarray:
    if isinstance(grid, dict):
        try:
            return np.linspace(float(grid["min"]), float(grid["max"]), int(grid["count"]))
        except KeyError as exc:
            raise ConfigError(f"grid object needs min, max and count (missing {exc})") from None
    return np.asarray(list(grid), dtype=float)


def sweep_spec_from_dict(doc: dict) -> SweepSpec:
    known = {f for f in SweepSpec.__dataclass_fields__}
    bad = set(doc) - known
    if bad:
        raise ConfigError(f"unknown sweep field(s): {', '.join(sorted(bad))}")
    for k in ("model", "param", "grid"):
        if k not in doc:
            raise ConfigError(f"sweep config needs {k!r}")
    kw = dict(doc)
    kw["grid"] = tuple(_expand_grid(doc["grid"]))
    try:
        return SweepSpec(**kw)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


@dataclass(frozen=True)
class ComparisonRow:
    value: float
    simulated: float | None
    predicted: float | None
    delay_component: float | None
    shift_component: float | None
    abs_error: float | None
    rel_error: float | None
    regime: str
    warnings: tuple[str, ...] = ()
    error: str = ""

    @property
    def failed(self) -> bool:
        return bool(self.error)

    def as_record(self) -> dict:
        d = asdict(self)
        d["warnings"] = " | ".join(self.warnings)
        return d


@dataclass
class SweepResult:
    spec: SweepSpec
    rows: list[ComparisonRow]
    meta: dict

    @property
    def n_failed(self) -> int:
        return sum(r.failed for r in self.rows)


def _errors(sim, pred):
    if sim is None or pred is None:
        return None, None
    ae = abs(sim - pred)
    re = ae / abs(pred) if pred != 0 else (0.0 if ae == 0 else math.inf)
    return ae, re


def evaluate_point(spec: SweepSpec, value: float) -> ComparisonRow:
    """One grid point; failures are recorded in the row rather than raised."""
    params = dict(spec.fixed)
    params[spec.param] = value
    sim = pred = delay = shift = None
    regime = ""
    errs: list[str] = []
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            case = build_case(spec.model, params)
        except Exception as exc:  # noqa: BLE001 - recorded in-row
            return ComparisonRow(value, None, None, None, None, None, None, "", (),
                                 f"{type(exc).__name__}: {exc}")
        if spec.predict:
            try:
                pred, pr = predict_case(spec.model, case, spec.regime)
                delay, shift, regime = pr.delay_component, pr.shift_component, pr.regime
            except Exception as exc:  # noqa: BLE001
                errs.append(f"predict: {type(exc).__name__}: {exc}")
        if spec.simulate:
            try:
                sim, _, _ = simulate_case(spec.model, case, spec.simulation)
            except Exception as exc:  # noqa: BLE001
                errs.append(f"simulate: {type(exc).__name__}: {exc}")
    notes = tuple(dict.fromkeys(str(w.message) for w in caught))
    ae, re = _errors(sim, pred)
    f = lambda x: None if x is None else float(x)
    return ComparisonRow(float(value), f(sim), f(pred), f(delay), f(shift), f(ae), f(re),
                         regime, notes, "; ".join(errs))


def _provenance(spec: SweepSpec) -> dict:
    return {
        "config_hash": spec.config_hash(),
        "seed": spec.seed,
        "tool": "sntip",
        "tool_version": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "numba": numba.__version__,
        "python": platform.python_version(),
        "rng": RNG_ALGORITHM,
        "spec": spec.to_dict(),
    }


def run_sweep(spec: SweepSpec) -> SweepResult:
    """Rows are returned in grid order whatever the execution order."""
    grid = list(spec.grid)
    if spec.workers == 1 or len(grid) == 1:
        rows = [evaluate_point(spec, v) for v in grid]
    else:
        with ProcessPoolExecutor(max_workers=spec.workers) as ex:
            futs = [ex.submit(evaluate_point, spec, v) for v in grid]
            rows = [f.result() for f in futs]
    return SweepResult(spec, rows, _provenance(spec))


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_table(result: SweepResult, path: str | Path) -> tuple[Path, Path]:
    """CSV with TABLE_COLUMNS plus a JSON sidecar holding the provenance."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TABLE_COLUMNS)
        for r in result.rows:
            rec = r.as_record()
            w.writerow([_fmt(rec[c]) for c in TABLE_COLUMNS])
    side = path.with_suffix(path.suffix + ".json")
    side.write_text(json.dumps({**result.meta, "param": result.spec.param,
                                "n_rows": len(result.rows), "n_failed": result.n_failed},
                               indent=2))
    return path, side


def read_table(path: str | Path) -> list[ComparisonRow]:
    rows = []
    num = lambda s: float(s) if s != "" else None
    with Path(path).open(newline="") as fh:
        rd = csv.DictReader(fh)
        missing = set(TABLE_COLUMNS) - set(rd.fieldnames or ())
        if missing:
            raise ConfigError(f"table lacks column(s): {', '.join(sorted(missing))}")
        for rec in rd:
            rows.append(ComparisonRow(
                float(rec["value"]), num(rec["simulated"]), num(rec["predicted"]),
                num(rec["delay_component"]), num(rec["shift_component"]),
                num(rec["abs_error"]), num(rec["rel_error"]), rec["regime"],
                tuple(s for s in rec["warnings"].split(" | ") if s), rec["error"]))
    return rows


def rows_from_pairs(values: Sequence[float], simulated: Sequence[float | None],
                    predicted: Sequence[float | None], regime: str = "") -> list[ComparisonRow]:
    """Build rows from plain columns (for reports on externally produced data)."""
    out = []
    for v, s, p in zip(values, simulated, predicted):
        ae, re = _errors(s, p)
        out.append(ComparisonRow(float(v), s, p, None, None, ae, re, regime))
    return out

