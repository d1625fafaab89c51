"""Command-line runner for traces and audits.

Subcommands: trace-minima, trace-geodesic, shortcurves, qgeo-check,
surgery-check, dichotomy-audit.  Each reads an optional JSON config, writes
CSV tables and a constants.json into the output directory, and exits zero
exactly when the enabled audits meet their configured thresholds.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

from teichmin.curves import MeasuredMulticurve
from teichmin.flat import build_flat_surface, flow
from teichmin.harness import (
    RunConfig,
    calibrate_thresholds,
    fitted_band,
    run_decay_audit,
    run_dichotomy_audit,
    run_qgeo_check,
    run_shortcurve_audit,
    run_surgery_check,
    trace_minima_with_tau,
    write_constants,
    _write_csv,
)


def _load_config(args) -> RunConfig:
    if args.config:
        with open(args.config) as fh:
            cfg = RunConfig.from_json(json.load(fh))
    else:
        cfg = RunConfig()
    updates = {}
    if args.out:
        updates["out_dir"] = args.out
    if args.seed is not None:
        updates["seed"] = args.seed
    if updates:
        from dataclasses import replace

        cfg = replace(cfg, **updates)
    return cfg


def cmd_trace_minima(cfg: RunConfig) -> int:
    p, m = cfg.default_pair()
    traced = trace_minima_with_tau(p, m, cfg.grid)
    rows = [
        [
            tp.sample.t,
            tp.sample.point.l,
            tp.sample.point.s,
            tp.sample.objective_value,
            tp.sample.gradient_norm,
            tp.sample.solver_iterations,
        ]
        for tp in traced
    ]
    _write_csv(
        os.path.join(cfg.out_dir, "trace_minima.csv"),
        ["t", "fn_length", "fn_twist", "objective", "grad_norm", "iters"],
        rows,
    )
    print(f"traced {len(rows)} minima points -> {cfg.out_dir}/trace_minima.csv")
    return 0


def cmd_trace_geodesic(cfg: RunConfig) -> int:
    from teichmin.flat import expanding_K, estimate_D, flat_cylinder, q_length
    from teichmin.hyperbolic import systole_t11
    from teichmin.uniformize import tau_to_fn

    p, m = cfg.default_pair()
    q0 = build_flat_surface(p, m)
    rows = []
    for t in cfg.grid:
        qt = flow(q0, t)
        fn = tau_to_fn(qt.conformal_point())
        curve, _l = systole_t11(fn)
        rows.append(
            [
                t,
                str(curve),
                q_length(qt, curve),
                estimate_D(curve, t, p, m, base_surface=q0),
                expanding_K(qt, curve),
                flat_cylinder(qt, curve).modulus,
            ]
        )
    _write_csv(
        os.path.join(cfg.out_dir, "trace_geodesic.csv"),
        ["t", "curve", "q_length", "D", "K", "modF"],
        rows,
    )
    print(f"traced {len(rows)} geodesic points -> {cfg.out_dir}/trace_geodesic.csv")
    return 0


def cmd_shortcurves(cfg: RunConfig) -> int:
    p, m = cfg.default_pair()
    rows = run_shortcurve_audit(cfg, p, m)
    band = fitted_band(rows)
    ok = band <= cfg.tolerances["band_max"]
    write_constants(
        os.path.join(cfg.out_dir, "constants.json"),
        {"shortcurve_band": band, "rows": len(rows)},
    )
    print(f"short-curve band {band:.3f} over {len(rows)} rows "
          f"({'pass' if ok else 'FAIL'})")
    return 0 if ok else 1


def cmd_qgeo_check(cfg: RunConfig) -> int:
    p, m = cfg.default_pair()
    report = run_qgeo_check(cfg, p, m)
    traced = trace_minima_with_tau(p, m, cfg.grid)
    q0 = build_flat_surface(p, m)
    constants = {
        "qgeo_c": report.c,
        "qgeo_C": report.C,
        "qgeo_pairs": report.pair_count,
        "qgeo_violations": report.violations,
        "qgeo_provenance": report.provenance,
        "qgeo_upper_slope": report.upper_slope_hint,
    }
    constants.update(calibrate_thresholds(cfg, traced, q0))
    write_constants(os.path.join(cfg.out_dir, "constants.json"), constants)
    ok = (
        report.violations == 0
        and report.c <= cfg.tolerances["c_max"]
        and report.C <= cfg.tolerances["C_max"]
    )
    print(
        f"quasi-geodesy fit: c={report.c:.3f} C={report.C:.3f} "
        f"pairs={report.pair_count} violations={report.violations} "
        f"({'pass' if ok else 'FAIL'})"
    )
    return 0 if ok else 1


def cmd_surgery_check(cfg: RunConfig) -> int:
    out = run_surgery_check(cfg)
    decay = run_decay_audit(cfg, write=False)
    constants = dict(out)
    constants.update({f"decay_{k}": v for k, v in decay.items()})
    write_constants(os.path.join(cfg.out_dir, "constants.json"), constants)
    ok = (
        out["k_preservation_dev"] < 1e-12
        and out["flow_commutation"]
        and out["area_renormalized"]
        and out["eq8_kappa"] <= cfg.tolerances["surgery_kappa_max"]
    )
    print(
        f"surgery: K deviation {out['k_preservation_dev']:.2e}, "
        f"flow commutation {out['flow_commutation']}, "
        f"kappa {out['eq8_kappa']:.3f} ({'pass' if ok else 'FAIL'})"
    )
    return 0 if ok else 1


def cmd_dichotomy_audit(cfg: RunConfig) -> int:
    rows = run_dichotomy_audit(cfg)
    slack = cfg.tolerances["interval_slack"]
    bad = 0
    for r in rows:
        if r["domination"] == "D" and r["D_dominated_gap"] > slack:
            bad += 1
        if r["domination"] == "K" and r["K_dominated_excess"] > slack:
            bad += 1
        if not r["case_ok"]:
            bad += 1
    write_constants(
        os.path.join(cfg.out_dir, "constants.json"),
        {"dichotomy_rows": len(rows), "dichotomy_failures": bad},
    )
    print(f"dichotomy audit: {len(rows)} intervals, {bad} failures "
          f"({'pass' if bad == 0 else 'FAIL'})")
    return 0 if bad == 0 else 1


COMMANDS = {
    "trace-minima": cmd_trace_minima,
    "trace-geodesic": cmd_trace_geodesic,
    "shortcurves": cmd_shortcurves,
    "qgeo-check": cmd_qgeo_check,
    "surgery-check": cmd_surgery_check,
    "dichotomy-audit": cmd_dichotomy_audit,
}


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="teichmin",
        description="minima-path and geodesic audits on finite-type surfaces",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON run configuration", default=None)
        sp.add_argument("--out", help="output directory", default=None)
        sp.add_argument("--seed", type=int, default=None)
    args = parser.parse_args(argv)
    cfg = _load_config(args)
    return COMMANDS[args.command](cfg)


if __name__ == "__main__":
    sys.exit(main())
