"""Command-line interface: ``sntip <subcommand>``.

Exit codes: 0 success, 2 some sweep rows failed, 1 configuration error.
"""
from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path

import numpy as np

from ..app_asymptotics.seaice import seaice_averaged_tipping, seaice_hysteresis, seaice_tipping
from ..asymptotics import lf_critical_amplitudes, lf_nu_critical
from ..app_asymptotics.ml import ml_lf_critical
from ..integrate import write_trajectory
from ..models.canonical import CanonicalParams, classify_regime
from ..models.seaice import default_seaice_params
from ..tipping import escape_probability
from .cases import build_case, predict_case, simulate_case
from .config import ConfigError, load_config
from .report import compare_report
from .sweep import read_table, run_sweep, sweep_spec_from_dict, write_table

__all__ = ["main", "build_parser"]

EXIT_OK, EXIT_CONFIG, EXIT_PARTIAL = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _kv(text: str) -> tuple[str, object]:
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    k, v = text.split("=", 1)
    try:
        return k, float(v)
    except ValueError:
        return k, v


def _emit(obj) -> None:
    print(json.dumps(obj, indent=2, default=_json_default))


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if hasattr(o, "to_dict"):
        return o.to_dict()
    raise TypeError(f"not serializable: {type(o).__name__}")


def _params(args) -> dict:
    params = {}
    if getattr(args, "config", None):
        doc = load_config(args.config)
        params.update(doc.get("params", doc))
    params.update(dict(args.set or []))
    return params


def _cmd_simulate(args) -> int:
    params = _params(args)
    sim_opts = {k: params.pop(k) for k in ("dt", "method", "form", "x_floor", "b0", "threshold")
                if k in params}
    case = build_case(args.model, params)
    value, ev, traj = simulate_case(args.model, case, sim_opts)
    out = {"model": args.model, "param_at_tip": value, "event": ev.to_dict(),
           "status": traj.status, "n_samples": len(traj)}
    if args.out:
        csv_path, side = write_trajectory(traj, args.out, meta={"model": args.model,
                                                               "params": params})
        out["trajectory"] = str(csv_path)
    _emit(out)
    return EXIT_OK


def _cmd_predict(args) -> int:
    params = _params(args)
    params.pop("regime", None)
    case = build_case(args.model, params)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        if args.regime == "critical":
            out = _critical(args.model, case, params)
        else:
            value, pr = predict_case(args.model, case, args.regime)
            out = {"model": args.model, "tipping": value, **pr.to_dict()}
            if args.model == "canonical":
                out["classified_regime"] = classify_regime(case).tag
    out.setdefault("warnings", [])
    out["warnings"] = list(out["warnings"]) + [str(w.message) for w in caught
                                               if str(w.message) not in out["warnings"]]
    _emit(out)
    return EXIT_OK


def _critical(model: str, case, params: dict) -> dict:
    if model == "canonical":
        p: CanonicalParams = case
        if p.Omega / p.mu <= 10:
            res = lf_critical_amplitudes(p.mu, p.Omega, p.a0)
            kind = "order_mu"
        else:
            res = lf_nu_critical(p.mu, p.Omega, p.a0)
            kind = "mu_nu"
        return {"model": model, "kind": kind, "critical": [r.to_dict() for r in res]}
    if model == "ml":
        b0 = params.get("b0")
        r = ml_lf_critical(case, case.mu, case.Omega, b0=None if b0 is None else float(b0))
        return {"model": model, "critical": [r.to_dict()]}
    raise ConfigError("critical amplitudes are defined for the canonical and ml models")


def _cmd_sweep(args) -> int:
    doc = load_config(args.config)
    if args.workers is not None:
        doc["workers"] = args.workers
    spec = sweep_spec_from_dict(doc)
    result = run_sweep(spec)
    csv_path, side = write_table(result, args.out)
    report = compare_report(result.rows, spec if args.refine else None)
    summary_path = Path(str(csv_path) + ".summary.json")
    summary_path.write_text(json.dumps(report, indent=2))
    _emit({"table": str(csv_path), "metadata": str(side), "summary": str(summary_path),
           **report})
    return EXIT_PARTIAL if result.n_failed else EXIT_OK


def _cmd_escape(args) -> int:
    p = CanonicalParams(mu=args.mu, A=args.A, Omega=args.Omega, a0=args.a0)
    est = escape_probability(p, args.eps, (args.a_lo, args.a_hi), args.n_paths, args.seed,
                             dt=args.dt)
    _emit(est.to_dict())
    return EXIT_OK


def _cmd_seaice(args) -> int:
    params = _params(args)
    params.setdefault("forcing", args.forcing)
    values = [None]
    if args.vary:
        name, _, raw = args.vary.partition("=")
        if not raw:
            raise ConfigError("--vary needs name=v1,v2,...")
        values = [(name, float(v)) for v in raw.split(",")]
    rows = []
    for item in values:
        p = dict(params)
        if item is not None:
            p[item[0]] = item[1]
        row = {} if item is None else {item[0]: item[1]}
        try:
            n = build_case("seaice", p)
            forced = seaice_tipping(n)
            avg = seaice_averaged_tipping(n)
            row.update({"dF0_tip": forced.extras["dF0"], "b_tip": forced.value,
                        "x_star": forced.extras["x_star"], "b_star": forced.extras["b_star"],
                        "dF0_tip_averaged": avg.extras["dF0"], "E_c": n.E_c, "dF0c": n.dF0c})
            if args.simulate:
                sim, _, _ = simulate_case("seaice", n, {"form": "full"})
                row["dF0_tip_simulated"] = sim
        except Exception as exc:  # noqa: BLE001 - reported per row
            row["error"] = f"{type(exc).__name__}: {exc}"
        base = default_seaice_params(p["forcing"])
        fac = float(p.get("FT_factor", 1.0))
        variation = {k: float(p[k]) for k in ("FT_shift", "FT_osc_factor", "cH_ratio") if k in p}
        for k in ("h_alpha", "mu_tilde"):
            if k in p:
                variation[k] = float(p[k])
        h = seaice_hysteresis(base, fac, **variation)
        row["hysteresis_lost"] = h.lost
        row["hysteresis"] = h.to_dict()
        rows.append(row)
    _emit({"synthetic_forcing": True, "forcing": params["forcing"], "results": rows})
    return EXIT_PARTIAL if any("error" in r for r in rows) else EXIT_OK


def _cmd_compare(args) -> int:
    rows = read_table(args.table)
    _emit(compare_report(rows))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="sntip", description="Tipping in slowly drifted, periodically forced folds.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def model_args(p):
        p.add_argument("--model", choices=("canonical", "ml", "seaice"), default="canonical")
        p.add_argument("--config", help="JSON file with a 'params' object")
        p.add_argument("--set", type=_kv, action="append", metavar="KEY=VALUE",
                       help="parameter override (repeatable), e.g. --set mu=0.001 --set lambda=0.5")

    s = sub.add_parser("simulate", help="simulate one run and report the tipping event")
    model_args(s)
    s.add_argument("--out", help="write the trajectory CSV (plus JSON sidecar) here")
    s.set_defaults(func=_cmd_simulate)

    s = sub.add_parser("predict", help="asymptotic tipping prediction as JSON")
    model_args(s)
    s.add_argument("--regime", default="auto",
                   choices=("auto", "delayed", "hf", "lf", "lf-jumps", "unforced", "forced",
                            "averaged", "critical"))
    s.set_defaults(func=_cmd_predict)

    s = sub.add_parser("sweep", help="run a sweep from a JSON config")
    s.add_argument("config")
    s.add_argument("--out", required=True, help="output CSV path")
    s.add_argument("--workers", type=int)
    s.add_argument("--refine", action="store_true", help="bisect detected jumps once")
    s.set_defaults(func=_cmd_sweep)

    s = sub.add_parser("escape-prob", help="Monte Carlo early-escape probability")
    s.add_argument("--eps", type=float, required=True)
    s.add_argument("--mu", type=float, required=True)
    s.add_argument("--a-lo", type=float, required=True)
    s.add_argument("--a-hi", type=float, required=True)
    s.add_argument("--n-paths", type=int, default=10_000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--a0", type=float, default=1.0)
    s.add_argument("--A", type=float, default=0.0)
    s.add_argument("--Omega", type=float, default=1.0)
    s.add_argument("--dt", type=float, default=0.01)
    s.set_defaults(func=_cmd_escape)

    s = sub.add_parser("seaice-tip", help="sea-ice tipping dF0 and hysteresis flag")
    s.add_argument("--config")
    s.add_argument("--set", type=_kv, action="append", metavar="KEY=VALUE")
    s.add_argument("--forcing", choices=("climatology", "single_harmonic"), default="climatology")
    s.add_argument("--vary", help="parameter axis, e.g. FT_factor=1,2,3")
    s.add_argument("--simulate", action="store_true", help="also simulate the energy model")
    s.set_defaults(func=_cmd_seaice)

    s = sub.add_parser("compare", help="summarize a sweep CSV")
    s.add_argument("table")
    s.set_defaults(func=_cmd_compare)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError, FileNotFoundError) as exc:
        print(f"sntip: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
