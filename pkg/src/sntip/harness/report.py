"""Summaries of sweep tables: error statistics and jumps in the simulated curve."""
from __future__ import annotations

from collections import defaultdict
from dataclasses import replace
from typing import Sequence

import numpy as np

from .sweep import ComparisonRow, SweepSpec, evaluate_point

__all__ = ["JUMP_FACTOR", "detect_jumps", "refine_jump", "compare_report"]

JUMP_FACTOR = 5.0


def detect_jumps(values: Sequence[float], simulated: Sequence[float | None],
                 factor: float = JUMP_FACTOR) -> list[dict]:
    """Adjacent pairs whose gap exceeds ``factor`` times the median adjacent gap."""
    pts = [(v, s) for v, s in zip(values, simulated) if s is not None and np.isfinite(s)]
    if len(pts) < 3:
        return []
    v = np.array([p[0] for p in pts])
    s = np.array([p[1] for p in pts])
    gaps = np.abs(np.diff(s))
    med = float(np.median(gaps))
    scale = max(1.0, float(np.max(np.abs(s))))
    thr = factor * med if med > 0 else 1e-12 * scale
    out = []
    for i in np.nonzero(gaps > thr)[0]:
        out.append({"lo": float(v[i]), "hi": float(v[i + 1]), "gap": float(gaps[i]),
                    "sim_lo": float(s[i]), "sim_hi": float(s[i + 1])})
    return out


def refine_jump(spec: SweepSpec, jump: dict) -> dict:
    """One bisection level: simulate the midpoint and keep the half holding the jump."""
    mid = 0.5 * (jump["lo"] + jump["hi"])
    sim_spec = replace(spec, grid=(mid,), predict=False, simulate=True, workers=1)
    row = evaluate_point(sim_spec, mid)
    out = dict(jump)
    if row.simulated is None:
        out["refined"] = [jump["lo"], jump["hi"]]
        return out
    if abs(row.simulated - jump["sim_lo"]) > abs(row.simulated - jump["sim_hi"]):
        out["refined"] = [jump["lo"], mid]
    else:
        out["refined"] = [mid, jump["hi"]]
    out["sim_mid"] = row.simulated
    return out


def compare_report(rows: Sequence[ComparisonRow], spec: SweepSpec | None = None,
                   factor: float = JUMP_FACTOR) -> dict:
    """Per-regime error statistics, warning and failure counts, simulated jumps.

    With ``spec`` each detected jump is refined by one bisection level.
    """
    if not rows:
        raise ValueError("empty table")
    by_regime: dict[str, list[float]] = defaultdict(list)
    for r in rows:
        if r.rel_error is not None:
            by_regime[r.regime or "unknown"].append(r.rel_error)
    regimes = {
        k: {"n": len(v), "max_rel_error": float(np.max(v)), "median_rel_error": float(np.median(v))}
        for k, v in sorted(by_regime.items())
    }
    jumps = detect_jumps([r.value for r in rows], [r.simulated for r in rows], factor)
    if spec is not None:
        jumps = [refine_jump(spec, j) for j in jumps]
    return {
        "n_rows": len(rows),
        "n_failed": sum(r.failed for r in rows),
        "n_warnings": sum(len(r.warnings) for r in rows),
        "n_rows_with_warnings": sum(bool(r.warnings) for r in rows),
        "regimes": regimes,
        "jumps": jumps,
    }
