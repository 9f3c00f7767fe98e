"""Command-line front end.

Verbs: run, sweep, converge, oracle, check.  Exit codes: 0 success (and,
for run/sweep, assumptions pass with no validity violations), 1 gate or
validity failure, 2 parse/usage error, 3 solver failure.

Artifacts: trajectory CSV (17 significant digits, byte-deterministic for
identical scenarios) and schema-versioned JSON reports.  Sweep and
convergence members run in parallel; STEFAN_ISS_THREADS caps the pool.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import analysis, control, oracle, solver_one_phase, solver_two_phase
from .core import (
    SCHEMA_VERSION,
    DisturbanceSpec,
    NumericalBlowup,
    Scenario,
    ScenarioError,
    Trajectory,
    ZINC,
    check_assumptions,
    load_scenario,
    scenario_to_dict,
)

__all__ = ["main", "write_trajectory_csv", "build_report"]


def _fmt(v: float) -> str:
    return f"{float(v):.17g}"


def write_trajectory_csv(traj: Trajectory, path) -> None:
    """Columns: t, s, q_c, q_f, T0_minus_Tm, E, V, Psi (+ TL_minus_Tm 2-phase)."""
    cols = [("t", traj.times), ("s", traj.interface), ("q_c", traj.heat_input),
            ("q_f", traj.heat_loss), ("T0_minus_Tm", traj.boundary_temp),
            ("E", traj.energy), ("V", traj.lyapunov), ("Psi", traj.error_norm)]
    if traj.variant == "two-phase":
        cols.append(("TL_minus_Tm", traj.far_temp))
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(",".join(name for name, _ in cols) + "\n")
        for i in range(traj.n_snapshots):
            f.write(",".join(_fmt(arr[i]) for _, arr in cols) + "\n")


def build_report(traj: Trajectory, runtime_seconds: float) -> dict:
    """Assemble the run report: assumption gate, terminal summary, energy and
    flux-equivalence residuals, fitted ISS envelope, validity scan."""
    sc = traj.scenario
    report = check_assumptions(sc)
    violations = analysis.validity_monitor(traj)
    s_final = float(traj.interface[-1])
    psi_final = float(traj.error_norm[-1])
    energy_residual = analysis.energy_balance_residual(traj)
    flux_residual = None
    if sc.mode == "closed-loop":
        flux_residual = control.flux_equivalence_residual(traj)
    envelope = analysis.fit_iss_envelope(traj)
    doc = {
        "schema_version": SCHEMA_VERSION,
        "scenario": scenario_to_dict(sc),
        "variant": traj.variant,
        "assumptions": {
            "all_passed": report.all_passed,
            "checks": [dataclasses.asdict(c) for c in report.checks],
        },
        "terminal": {
            "time": float(traj.times[-1]),
            "interface": s_final,
            "error_norm": psi_final,
            "setpoint_offset": sc.setpoint - s_final,
        },
        "energy_balance_residual": energy_residual,
        "flux_equivalence_residual": flux_residual,
        "iss_envelope": {
            "decay_rate": envelope.decay_rate,
            "m1": envelope.m1,
            "m2": envelope.m2,
            "fit_residual": envelope.fit_residual,
        },
        "validity": {
            "valid": len(violations) == 0,
            "violations": [dataclasses.asdict(v) for v in violations],
        },
        "termination": {
            "status": traj.termination,
            "time": traj.termination_time,
        },
        "run": {
            "n_steps": traj.n_steps,
            "max_cfl": traj.max_cfl,
            "min_liquid_temp": traj.min_liquid_temp,
            "max_solid_temp": traj.max_solid_temp,
            "runtime_seconds": runtime_seconds,
        },
    }
    return doc


def _write_json(doc: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(doc, f, indent=2)
        f.write("\n")


def _apply_overrides(sc: Scenario, args: argparse.Namespace) -> Scenario:
    changes = {}
    if getattr(args, "tfinal", None) is not None:
        changes["t_final"] = args.tfinal
    if getattr(args, "grid", None) is not None:
        if sc.two_phase and sc.n_cells_solid is not None:
            ratio = args.grid / sc.n_cells
            changes["n_cells_solid"] = max(8, round(sc.n_cells_solid * ratio))
        changes["n_cells"] = args.grid
    if getattr(args, "gain", None) is not None:
        changes["gain"] = args.gain
    if getattr(args, "setpoint", None) is not None:
        changes["setpoint"] = args.setpoint
    if getattr(args, "snapshots", None) is not None:
        changes["n_snapshots"] = args.snapshots
    qf_bar = getattr(args, "qf_bar", None)
    if qf_bar is not None and not isinstance(qf_bar, list):
        changes["disturbance"] = _override_magnitude(sc.disturbance, qf_bar)
    if getattr(args, "qf_decay", None) is not None:
        d = changes.get("disturbance", sc.disturbance)
        if d.kind == "table":
            raise ScenarioError("cannot override the decay of a table disturbance")
        changes["disturbance"] = DisturbanceSpec.exponential(d.qf_bar, args.qf_decay)
    if changes:
        sc = dataclasses.replace(sc, **changes)
    if getattr(args, "two_phase", False) and not sc.two_phase:
        raise ScenarioError("--two-phase given but the scenario has no solid phase")
    return sc


def _override_magnitude(d: DisturbanceSpec, qf_bar: float) -> DisturbanceSpec:
    if d.kind == "table":
        raise ScenarioError("cannot override the magnitude of a table disturbance")
    if d.kind == "exponential":
        return DisturbanceSpec.exponential(qf_bar, d.decay)
    return DisturbanceSpec.constant(qf_bar)


def _run_scenario(sc: Scenario) -> Trajectory:
    if sc.two_phase:
        return solver_two_phase.run2(sc)
    return solver_one_phase.run(sc)


def _max_workers(n: int) -> int:
    env = os.environ.get("STEFAN_ISS_THREADS")
    cap = int(env) if env else (os.cpu_count() or 1)
    return max(1, min(n, cap))


def _load(path: str) -> Scenario:
    return load_scenario(path)


# ---------------------------------------------------------------------------
# Verbs
# ---------------------------------------------------------------------------

def cmd_run(args) -> int:
    try:
        sc = _apply_overrides(_load(args.scenario), args)
    except ScenarioError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    try:
        traj = _run_scenario(sc)
    except NumericalBlowup as e:
        print(f"solver failure: {e}", file=sys.stderr)
        return 3
    runtime = time.perf_counter() - start
    doc = build_report(traj, runtime)
    write_trajectory_csv(traj, out / "trajectory.csv")
    _write_json(doc, out / "report.json")
    ok = (doc["assumptions"]["all_passed"] and doc["validity"]["valid"]
          and traj.termination == "completed")
    print(f"run: s(t_f) = {traj.interface[-1]:.6g} m, "
          f"offset = {doc['terminal']['setpoint_offset']:.6g} m, "
          f"{'ok' if ok else 'FAILED GATE'} -> {out}")
    return 0 if ok else 1


def cmd_sweep(args) -> int:
    try:
        base = _apply_overrides(_load(args.scenario), args)
        magnitudes = args.qf_bar
        if not magnitudes:
            raise ScenarioError("sweep needs a non-empty --qf-bar list")
        scenarios = [dataclasses.replace(
            base, disturbance=_override_magnitude(base.disturbance, q))
            for q in magnitudes]
    except ScenarioError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    def member(i_sc):
        i, sc = i_sc
        sub = out / f"qf_{magnitudes[i]:g}"
        sub.mkdir(parents=True, exist_ok=True)
        start = time.perf_counter()
        traj = _run_scenario(sc)
        doc = build_report(traj, time.perf_counter() - start)
        write_trajectory_csv(traj, sub / "trajectory.csv")
        _write_json(doc, sub / "report.json")
        return doc

    try:
        with ThreadPoolExecutor(max_workers=_max_workers(len(scenarios))) as ex:
            docs = list(ex.map(member, enumerate(scenarios)))
    except NumericalBlowup as e:
        print(f"solver failure: {e}", file=sys.stderr)
        return 3

    offsets = [d["terminal"]["setpoint_offset"] for d in docs]
    by_mag = {}
    for q, off in zip(magnitudes, offsets):
        by_mag.setdefault(q, []).append(off)
    uniq = sorted(by_mag)
    uniq_offsets = [by_mag[q][0] for q in uniq]
    increasing = all(b > a for a, b in zip(uniq_offsets, uniq_offsets[1:]))
    deterministic = all(len(set(v)) == 1 for v in by_mag.values())
    members_ok = all(d["assumptions"]["all_passed"] and d["validity"]["valid"]
                     and d["termination"]["status"] == "completed" for d in docs)
    summary = {
        "schema_version": SCHEMA_VERSION,
        "qf_bars": list(magnitudes),
        "terminal_offsets": offsets,
        "strictly_increasing": increasing,
        "runs": [{"qf_bar": q, "dir": f"qf_{q:g}",
                  "offset": off} for q, off in zip(magnitudes, offsets)],
    }
    _write_json(summary, out / "sweep.json")
    for q, off in zip(magnitudes, offsets):
        print(f"sweep: qf_bar = {q:g} W/m^2 -> offset {off:.6g} m")
    print(f"sweep: offsets strictly increasing with qf_bar: {increasing}")
    return 0 if (increasing and deterministic and members_ok) else 1


def _observed_order(n1, n2, n3, f1, f2, f3):
    d12 = f1 - f2
    d23 = f2 - f3
    if d12 == 0.0 and d23 == 0.0:
        return None  # exactly resolved at every grid
    if d23 == 0.0 or d12 == 0.0 or (d12 / d23) <= 0.0:
        return float("nan")
    ratio = abs(d12 / d23)

    def shape(p):
        return (n1 ** -p - n2 ** -p) / (n2 ** -p - n3 ** -p)

    lo, hi = 1e-3, 16.0
    if not (shape(lo) <= ratio <= shape(hi)):
        return float("nan")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if shape(mid) < ratio:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def cmd_converge(args) -> int:
    grids = args.grids
    if len(grids) < 3:
        print("error: converge needs at least 3 grid sizes", file=sys.stderr)
        return 2
    if sorted(grids) != grids or len(set(grids)) != len(grids):
        print("error: grids must be strictly increasing", file=sys.stderr)
        return 2
    try:
        base = _apply_overrides(_load(args.scenario), args)
    except ScenarioError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    def member(n):
        changes = {"n_cells": n}
        if base.two_phase and base.n_cells_solid is not None:
            changes["n_cells_solid"] = max(8, round(base.n_cells_solid * n / base.n_cells))
        sc = dataclasses.replace(base, **changes)
        return float(_run_scenario(sc).interface[-1])

    try:
        with ThreadPoolExecutor(max_workers=_max_workers(len(grids))) as ex:
            finals = list(ex.map(member, grids))
    except NumericalBlowup as e:
        print(f"solver failure: {e}", file=sys.stderr)
        return 3

    orders = []
    for i in range(len(grids) - 2):
        orders.append(_observed_order(grids[i], grids[i + 1], grids[i + 2],
                                      finals[i], finals[i + 1], finals[i + 2]))
    doc = {
        "schema_version": SCHEMA_VERSION,
        "grids": grids,
        "interface_final": finals,
        "observed_orders": orders,
    }
    _write_json(doc, out / "converge.json")
    for n, f in zip(grids, finals):
        print(f"converge: N = {n:4d} -> s(t_f) = {f:.10g} m")
    print(f"converge: observed orders {orders}")
    return 0


def cmd_oracle(args) -> int:
    if not (args.stefan_number and args.stefan_number > 0):
        print("error: --stefan-number must be > 0", file=sys.stderr)
        return 2
    if not args.grids:
        print("error: --grids must be non-empty", file=sys.stderr)
        return 2
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    lam = oracle.neumann_lambda(args.stefan_number)
    results = []
    for n in args.grids:
        res = oracle.run_validation(ZINC, args.stefan_number, n,
                                    s0=args.s0, horizon_ratio=args.horizon_ratio)
        results.append(res)
        print(f"oracle: N = {n:4d} -> max rel error {res.max_rel_error:.3e} "
              f"({res.runtime_seconds:.2f} s)")
    errors = [r.max_rel_error for r in results]
    doc = {
        "schema_version": SCHEMA_VERSION,
        "stefan_number": args.stefan_number,
        "lambda": lam,
        "grids": args.grids,
        "max_rel_errors": errors,
        "runtimes_seconds": [r.runtime_seconds for r in results],
        "errors_decreasing": all(b < a for a, b in zip(errors, errors[1:])),
        "finest_below_1pct": errors[-1] < 0.01,
    }
    _write_json(doc, out / "oracle.json")
    return 0


def cmd_check(args) -> int:
    try:
        sc = _apply_overrides(_load(args.scenario), args)
    except ScenarioError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    report = check_assumptions(sc)
    for c in report.checks:
        status = "PASS" if c.passed else "FAIL"
        print(f"{status} {c.name}: {c.lhs:.6g} {c.comparison} {c.rhs:.6g}  ({c.note})")
    return 0 if report.all_passed else 1


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def _float_list(text: str):
    return [float(x) for x in text.split(",") if x]


def _int_list(text: str):
    return [int(x) for x in text.split(",") if x]


def _add_common(p: argparse.ArgumentParser, qf_bar_list: bool = False):
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--tfinal", type=float, default=None, help="override horizon [s]")
    p.add_argument("--grid", type=int, default=None, help="override liquid grid size N")
    p.add_argument("--gain", type=float, default=None, help="override control gain [1/s]")
    p.add_argument("--setpoint", type=float, default=None, help="override setpoint [m]")
    p.add_argument("--snapshots", type=int, default=None, help="override output cadence")
    p.add_argument("--qf-decay", type=float, default=None,
                   help="override heat-loss decay rate K [1/s]")
    p.add_argument("--two-phase", action="store_true",
                   help="require the scenario to be two-phase")
    if qf_bar_list:
        p.add_argument("--qf-bar", type=_float_list, required=True,
                       help="comma-separated heat-loss magnitudes [W/m^2]")
    else:
        p.add_argument("--qf-bar", type=float, default=None,
                       help="override heat-loss magnitude [W/m^2]")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="stefan-iss",
        description="Phase-change interface control simulator and verifier")
    sub = parser.add_subparsers(dest="verb", required=True)

    p_run = sub.add_parser("run", help="simulate one scenario")
    p_run.add_argument("scenario")
    _add_common(p_run)
    p_run.set_defaults(fn=cmd_run)

    p_sweep = sub.add_parser("sweep", help="disturbance-magnitude sweep")
    p_sweep.add_argument("scenario")
    _add_common(p_sweep, qf_bar_list=True)
    p_sweep.set_defaults(fn=cmd_sweep)

    p_conv = sub.add_parser("converge", help="grid self-convergence study")
    p_conv.add_argument("scenario")
    p_conv.add_argument("--grids", type=_int_list, required=True,
                        help="comma-separated grid sizes (>= 3)")
    _add_common(p_conv)
    p_conv.set_defaults(fn=cmd_converge)

    p_or = sub.add_parser("oracle", help="similarity-solution validation")
    p_or.add_argument("--stefan-number", type=float, required=True)
    p_or.add_argument("--grids", type=_int_list, required=True)
    p_or.add_argument("--s0", type=float, default=0.05)
    p_or.add_argument("--horizon-ratio", type=float, default=4.0)
    p_or.add_argument("--out", default="out")
    p_or.set_defaults(fn=cmd_oracle)

    p_check = sub.add_parser("check", help="assumption gate only")
    p_check.add_argument("scenario")
    _add_common(p_check)
    p_check.set_defaults(fn=cmd_check)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
