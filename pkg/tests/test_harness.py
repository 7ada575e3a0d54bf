from __future__ import annotations

import json
import math

import pytest

from sntip.harness import (ConfigError, SweepSpec, build_case, compare_report, detect_jumps,
                           predict_case, read_table, rows_from_pairs, run_sweep,
                           simulate_case, sweep_spec_from_dict, write_table)
from sntip.harness.config import load_config

LAMBDA_SWEEP = {"model": "canonical", "param": "lambda", "grid": [0.5, 0.7, 0.9],
                "fixed": {"mu": 0.01, "A": 1.0, "a0": 1.0}}


def test_spec_validation():
    with pytest.raises(ConfigError):
        SweepSpec("canonical", "A", ())
    with pytest.raises(ConfigError):
        SweepSpec("canonical", "A", (1.0, 3.0, 2.0))
    with pytest.raises(ConfigError):
        SweepSpec("nope", "A", (1.0,))
    with pytest.raises(ConfigError):
        SweepSpec("canonical", "A", (1.0,), simulation={"bogus": 1})
    with pytest.raises(ConfigError):
        SweepSpec("canonical", "A", (1.0,), predict=False, simulate=False)
    with pytest.raises(ConfigError):
        sweep_spec_from_dict({"model": "canonical", "param": "A"})
    with pytest.raises(ConfigError):
        sweep_spec_from_dict({**LAMBDA_SWEEP, "extra": 1})


def test_grid_object_expands():
    spec = sweep_spec_from_dict({**LAMBDA_SWEEP, "grid": {"min": 0.4, "max": 1.0, "count": 4}})
    assert spec.grid == pytest.approx((0.4, 0.6, 0.8, 1.0))
    assert SweepSpec("canonical", "A", (3.0, 2.0, 1.0)).grid == (3.0, 2.0, 1.0)


def test_config_hash_ignores_workers():
    a = sweep_spec_from_dict(LAMBDA_SWEEP)
    b = sweep_spec_from_dict({**LAMBDA_SWEEP, "workers": 3})
    c = sweep_spec_from_dict({**LAMBDA_SWEEP, "seed": 5})
    assert a.config_hash() == b.config_hash() != c.config_hash()


def test_case_building():
    p = build_case("canonical", {"mu": 0.001, "lambda": 0.5, "A": 1.0})
    assert p.Omega == pytest.approx(0.001 ** -0.5)
    assert build_case("canonical", {"mu": 0.01, "c": 2.0}).Omega == pytest.approx(0.02)
    with pytest.raises(ConfigError):
        build_case("canonical", {"mu": 0.01, "Omega": 1.0, "lambda": 0.5})
    with pytest.raises(ConfigError):
        build_case("canonical", {"mu": 0.01, "typo": 1.0})
    with pytest.raises(ConfigError):
        build_case("canonical", {"A": 1.0})
    n = build_case("ml", {"mu_hat": 0.0014})
    assert n.params.mu_hat == pytest.approx(0.0014)


def test_predict_and_simulate_case_units():
    value, pr = predict_case("ml", build_case("ml", {"mu_hat": 0.0014}))
    assert value == pytest.approx(44.585, abs=1e-3) and value == pr.extras["I_bias"]
    p = build_case("canonical", {"mu": 0.01})
    sim, ev, traj = simulate_case("canonical", p)
    assert sim == ev.param_at_tip
    assert traj.status == "event"


def test_sweep_rows_in_grid_order_and_consistent():
    res = run_sweep(sweep_spec_from_dict(LAMBDA_SWEEP))
    assert [r.value for r in res.rows] == [0.5, 0.7, 0.9]
    for r in res.rows:
        assert not r.failed
        assert r.abs_error == pytest.approx(abs(r.simulated - r.predicted), abs=0)
        assert r.rel_error == pytest.approx(r.abs_error / abs(r.predicted))
        assert r.predicted == pytest.approx(r.delay_component + r.shift_component, abs=1e-14)
        assert r.regime == "HighFrequency"
    assert res.meta["config_hash"] == res.spec.config_hash()
    assert res.meta["rng"].startswith("Philox")
    assert res.n_failed == 0


def test_sweep_serial_equals_parallel():
    serial = run_sweep(sweep_spec_from_dict(LAMBDA_SWEEP))
    parallel = run_sweep(sweep_spec_from_dict({**LAMBDA_SWEEP, "workers": 2}))
    assert serial.rows == parallel.rows


def test_sweep_is_reproducible():
    a = run_sweep(sweep_spec_from_dict(LAMBDA_SWEEP))
    b = run_sweep(sweep_spec_from_dict(LAMBDA_SWEEP))
    assert a.rows == b.rows


def test_sweep_failures_recorded_in_row():
    spec = sweep_spec_from_dict({"model": "canonical", "param": "mu", "grid": [-0.01, 0.01],
                                 "fixed": {"A": 0.0}})
    res = run_sweep(spec)
    assert res.rows[0].failed and res.rows[0].simulated is None
    assert not res.rows[1].failed
    assert res.n_failed == 1


def test_simulation_only_mode():
    res = run_sweep(sweep_spec_from_dict({**LAMBDA_SWEEP, "predict": False}))
    for r in res.rows:
        assert r.predicted is None and r.abs_error is None and r.rel_error is None
        assert r.simulated is not None


def test_table_round_trip(tmp_path):
    res = run_sweep(sweep_spec_from_dict(LAMBDA_SWEEP))
    csv_path, side = write_table(res, tmp_path / "t.csv")
    assert read_table(csv_path) == res.rows
    meta = json.loads(side.read_text())
    assert meta["config_hash"] == res.spec.config_hash()
    assert meta["n_rows"] == 3 and meta["seed"] == 0


def test_read_table_rejects_missing_columns(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("value,simulated\n1,2\n")
    with pytest.raises(ConfigError):
        read_table(bad)


def test_compare_report_perfect_table():
    rows = rows_from_pairs([1, 2, 3, 4], [0.1, 0.2, 0.3, 0.4], [0.1, 0.2, 0.3, 0.4], "X")
    rep = compare_report(rows)
    assert rep["regimes"]["X"]["max_rel_error"] == 0.0
    assert rep["regimes"]["X"]["median_rel_error"] == 0.0
    assert rep["n_failed"] == 0 and rep["jumps"] == []


def test_compare_report_deterministic():
    rows = rows_from_pairs([1, 2, 3, 4, 5], [1.0, 1.1, 1.2, 5.0, 5.1], [1.0, 1.0, 1.0, 1.0, 1.0])
    assert compare_report(rows) == compare_report(list(rows))
    with pytest.raises(ValueError):
        compare_report([])


def test_detect_jumps():
    vals = [1, 2, 3, 4, 5, 6]
    sim = [1.0, 1.1, 1.2, 4.0, 4.1, 4.2]
    (j,) = detect_jumps(vals, sim)
    assert (j["lo"], j["hi"]) == (3, 4)
    assert detect_jumps(vals, [1.0, 1.1, 1.2, 1.3, 1.4, 1.5]) == []
    assert detect_jumps(vals, [None, 1.0, math.nan, 1.1, 5.0, 5.1]) == [
        {"lo": 4, "hi": 5, "gap": pytest.approx(3.9), "sim_lo": 1.1, "sim_hi": 5.0}]


def test_amplitude_sweep_finds_critical_amplitude():
    spec = sweep_spec_from_dict({"model": "canonical", "param": "A",
                                 "grid": {"min": 8.94, "max": 9.0, "count": 5},
                                 "fixed": {"mu": 0.01, "c": 1.0, "a0": 20.0}})
    rep = compare_report(run_sweep(spec).rows, spec)
    (j,) = rep["jumps"]
    lo, hi = j["refined"]
    assert lo < 8.9697 < hi
    assert hi - lo <= 0.0075 + 1e-12


def test_load_config(tmp_path):
    good = tmp_path / "c.json"
    good.write_text(json.dumps(LAMBDA_SWEEP))
    assert load_config(good) == LAMBDA_SWEEP
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(bad)
    with pytest.raises((ConfigError, FileNotFoundError)):
        load_config(tmp_path / "missing.json")
