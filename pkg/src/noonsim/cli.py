"""Command-line entry point: ``noonsim run|verify|schedule CONFIG``.

Exit codes: 0 success, 2 configuration error, 3 physics-check failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .analysis import (
    build_report,
    guard_population,
    max_deviation,
    populations_table,
    swap_excitation_drift,
)
from .config import RunEntry, load_config
from .dynamics import run_schedule
from .errors import ConfigurationError, NoonSimError, NumericalFailure, TruncationError
from .hilbert import basis_label, initial_state
from .protocol import GUARD_LEVELS, check_truncation, compile_schedule

EXIT_OK, EXIT_CONFIG, EXIT_PHYSICS = 0, 2, 3

ORACLE_TOL = 1e-9
NORM_TOL = 1e-10
EXCITATION_TOL = 1e-10
GUARD_TOL = 1e-12

POPULATION_COLUMNS = ["time_s", "P_g", "P_e", "P_a", "mean_n1", "mean_n2", "fidelity_to_target"]
AMPLITUDE_COLUMNS = ["time_s", "basis_label", "re_amplitude", "im_amplitude"]


def _fmt(x) -> str:
    return f"{float(x):.12g}"


def trajectory_csv(trajectory, schedule, kind: str = "populations") -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if kind == "populations":
        w.writerow(POPULATION_COLUMNS)
        for row in populations_table(trajectory, schedule):
            w.writerow([_fmt(v) for v in row])
    else:
        w.writerow(AMPLITUDE_COLUMNS)
        labels = [str(basis_label(i, schedule.space)) for i in range(schedule.space.dim)]
        for t, psi in zip(trajectory.sample_times, trajectory.sample_states):
            for lab, amp in zip(labels, psi):
                w.writerow([_fmt(t), lab, _fmt(amp.real + 0.0), _fmt(amp.imag + 0.0)])
    return buf.getvalue()


def simulate(entry: RunEntry):
    """Compile, propagate and score one entry."""
    schedule = compile_schedule(entry.spec, entry.params, entry.space)
    trajectory = run_schedule(initial_state(schedule.space), schedule, entry.run, entry.params)
    report = build_report(trajectory, schedule, entry.params, entry.run)
    return schedule, trajectory, report


def _report_json(report, entry: RunEntry) -> str:
    body = report.to_dict()
    body["run_settings"]["detuning_over_g"] = entry.detuning_over_g
    return json.dumps(body, indent=2) + "\n"


def cmd_run(cfg, jobs: int = 1) -> int:
    entries = cfg.entries()
    try:
        with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
            results = list(pool.map(simulate, entries))
    except TruncationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalFailure as exc:
        print(f"physics check failed: {exc}", file=sys.stderr)
        return EXIT_PHYSICS

    out = cfg.output_dir
    single = len(entries) == 1
    rows = []
    for entry, (schedule, trajectory, report) in zip(entries, results):
        target = out if single else out / entry.tag
        target.mkdir(parents=True, exist_ok=True)
        (target / "report.json").write_text(_report_json(report, entry))
        (target / "trajectory.csv").write_text(trajectory_csv(trajectory, schedule, cfg.trajectory))
        (target / "schedule.json").write_text(schedule.to_json() + "\n")
        rows.append(
            [
                entry.tag,
                entry.spec.N,
                entry.spec.M,
                entry.run.mode.value,
                "" if entry.detuning_over_g is None else _fmt(entry.detuning_over_g),
                _fmt(report.final_fidelity),
                _fmt(report.field_fidelity),
                _fmt(report.timing.schedule_sum),
                _fmt(report.timing.closed_form_total),
            ]
        )
        print(f"{entry.tag}: final_fidelity={report.final_fidelity:.12g} -> {target}")
    if not single:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(
            ["entry", "N", "M", "mode", "detuning_over_g", "final_fidelity", "field_fidelity",
             "schedule_sum_s", "closed_form_total_s"]
        )
        w.writerows(rows)
        (out / "sweep_report.csv").write_text(buf.getvalue())
    return EXIT_OK


def verify_entry(entry: RunEntry, stream=None) -> bool:
    """Oracle-equivalence and conservation checks for one entry; prints a table."""
    stream = stream or sys.stdout
    ok = True
    N, M = entry.spec.N, entry.spec.M
    print(f"== verify {entry.tag} (mode={entry.run.mode.value})", file=stream)
    space = entry.space
    if space is not None:
        try:
            check_truncation(entry.spec, space, GUARD_LEVELS)
        except TruncationError as exc:
            print(f"FAIL truncation: {exc}", file=stream)
            ok = False
    try:
        schedule = compile_schedule(entry.spec, entry.params, space, require_guard=False)
        trajectory = run_schedule(initial_state(schedule.space), schedule, entry.run, entry.params)
    except NoonSimError as exc:
        print(f"FAIL propagation: {exc}", file=stream)
        return False

    devs = max_deviation(trajectory.boundary_states, schedule.expected_states)
    guards = [guard_population(s, N, M, schedule.space) for s in trajectory.boundary_states]
    print(f"{'k':>3}  {'segment':<34} {'max|dev|':>11} {'norm drift':>11} {'guard pop':>11}", file=stream)
    names = ["initial"] + [s.describe() for s in schedule.segments]
    for k, name in enumerate(names):
        print(f"{k:>3}  {name[:34]:<34} {devs[k]:11.3e} {trajectory.norm_drift[k]:11.3e} {guards[k]:11.3e}", file=stream)

    exc_drift = swap_excitation_drift(trajectory, schedule)
    checks = [
        ("oracle deviation", float(np.max(devs)), ORACLE_TOL),
        ("norm drift", float(np.max(trajectory.norm_drift)), NORM_TOL),
        ("swap excitation drift", exc_drift, EXCITATION_TOL),
        ("truncation guard population", float(max(guards)), GUARD_TOL),
    ]
    for name, value, tol in checks:
        passed = value < tol
        ok &= passed
        print(f"{'PASS' if passed else 'FAIL'} {name}: {value:.3e} (< {tol:.0e})", file=stream)
    print(f"{'PASS' if ok else 'FAIL'} {entry.tag}", file=stream)
    return ok


def cmd_verify(cfg) -> int:
    results = [verify_entry(e) for e in cfg.entries()]
    return EXIT_OK if all(results) else EXIT_PHYSICS


def cmd_schedule(cfg) -> int:
    for entry in cfg.entries():
        try:
            schedule = compile_schedule(entry.spec, entry.params, entry.space)
        except TruncationError as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        print(schedule.to_json())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="noonsim", description="NOON-state protocol simulator")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("run", "simulate and write report.json, trajectory.csv, schedule.json"),
        ("verify", "check dynamics against the analytic oracle and conservation laws"),
        ("schedule", "print the compiled schedule as JSON"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("config", help="YAML config file")
        p.add_argument("--N", type=int, dest="N", help="override protocol.N")
        p.add_argument("--M", type=int, dest="M", help="override protocol.M")
        p.add_argument("--mode", choices=["ideal", "finite_detuning"], help="override simulation.mode")
        p.add_argument("--detuning-over-g", type=float, dest="detuning_over_g", help="override Delta/g")
        p.add_argument("--out", dest="output_dir", help="override output.directory")
        if name == "run":
            p.add_argument("--jobs", type=int, default=1, help="concurrent sweep entries")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config).with_overrides(
            N=args.N, M=args.M, mode=args.mode, detuning_over_g=args.detuning_over_g, output_dir=args.output_dir
        )
    except ConfigurationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.command == "run":
        return cmd_run(cfg, args.jobs)
    if args.command == "verify":
        return cmd_verify(cfg)
    return cmd_schedule(cfg)


if __name__ == "__main__":
    sys.exit(main())
