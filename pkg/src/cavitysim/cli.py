"""Command-line driver: run schedules and protocols, sweep, tabulate.

Subcommands::

    cavitysim simulate FILE           execute a schedule file, JSON report
    cavitysim protocol NAME ...       run a named protocol, JSON report
    cavitysim sweep {pc,fidelity} ... CSV sweep data
    cavitysim truth-table cnot        CSV truth table

Exit codes: 0 success, 1 unreadable input file, 2 schema/validation error,
3 impossible post-selection.  Angles are radians unless ``--degrees`` is
given.  Reports are JSON (amplitudes as [re, im] pairs); sweeps and tables
are CSV with 15 significant digits.  The wall_clock_s field is the only
non-deterministic part of a report.
"""

from __future__ import annotations

import argparse
import json
import math
import re
import sys
import time
from pathlib import Path

import numpy as np

from . import protocols
from .dynamics import CouplingParams
from .errors import CavitySimError, ImpossiblePostSelectionError, ScheduleFormatError
from .hilbert import (
    extract_field_state,
    partial_trace,
    pure_to_density,
    state_to_pairs,
)
from .metrics import (
    BELL_NAMES,
    bell_state,
    concurrence,
    entanglement_entropy,
    fidelity_up_to_global_phase,
    two_qubit_field_block,
)
from .noise import DampingParams, run_schedule_damped
from .schedule import load_schedule, run_schedule, save_schedule

PROTOCOL_CLI_NAMES = {
    "bell-psi": "bell_psi",
    "bell-phi": "bell_phi",
    "cnot": "cnot",
    "hadamard": "hadamard",
    "swap": "swap",
}


def _parse_numbers(text: str, count: int, flag: str, cast=float):
    parts = text.split(",")
    if len(parts) != count:
        raise ScheduleFormatError(f"{flag} expects {count} comma-separated values, got {text!r}")
    try:
        return tuple(cast(p) for p in parts)
    except ValueError as exc:
        raise ScheduleFormatError(f"{flag}: {exc}") from exc


def _coupling_params(args) -> CouplingParams:
    physical = bool(getattr(args, "physical_units", False))
    if args.params is None:
        return CouplingParams(physical_units=physical)
    g1, g2, mu1, mu2 = _parse_numbers(args.params, 4, "--params")
    return CouplingParams(g1, g2, mu1, mu2, physical_units=physical)


def _damping_params(args) -> DampingParams | None:
    if args.damping is None:
        return None
    ka, kb = _parse_numbers(args.damping, 2, "--damping")
    if args.dt is None:
        raise ScheduleFormatError("--damping requires --dt")
    return DampingParams(ka, kb, args.dt)


def _angle(value: float, degrees: bool) -> float:
    return math.radians(value) if degrees else value


def _fock_dim(args, required_levels: int) -> int:
    if args.space is None:
        return 2
    a, da, db = _parse_numbers(args.space, 3, "--space", cast=int)
    if a != required_levels:
        raise ScheduleFormatError(
            f"this protocol runs on a {required_levels}-level atom, --space gives {a}"
        )
    if da != db:
        raise ScheduleFormatError("protocol builders use symmetric truncation (dim_a == dim_b)")
    return da


def _metrics_block(final_state, target) -> dict:
    rho_field = partial_trace(pure_to_density(final_state), keep=("mode_a", "mode_b"))
    bell_probs = {}
    for name in BELL_NAMES:
        vec = bell_state(name, rho_field.space).amplitudes
        bell_probs[name] = max(0.0, float(np.real(vec.conj() @ rho_field.matrix @ vec)))
    bell_probs["leakage"] = max(0.0, 1.0 - sum(bell_probs.values()))
    try:
        conc = concurrence(two_qubit_field_block(rho_field))
    except CavitySimError:
        conc = None
    try:
        field = extract_field_state(final_state)
        entropy = entanglement_entropy(field, keep=("mode_a",))
    except CavitySimError:
        field = None
        entropy = None
    fidelity = None
    if target is not None:
        if target.space.atom_levels == 1 and field is not None:
            fidelity = fidelity_up_to_global_phase(field, target)
        elif target.space == final_state.space:
            fidelity = fidelity_up_to_global_phase(final_state, target)
    return {
        "fidelity": fidelity,
        "concurrence": conc,
        "entropy_bits": entropy,
        "bell": bell_probs,
    }


def _damped_block(sched, params, damping, ideal_final, series_path) -> dict:
    damped = run_schedule_damped(
        sched, params, damping, target=ideal_final, record_series=series_path is not None
    )
    if series_path is not None:
        lines = ["t,fidelity,trace,min_eigenvalue"]
        for t, fid, tr, mineig in damped.time_series:
            lines.append(f"{t:.15g},{fid:.15g},{tr:.15g},{mineig:.15g}")
        Path(series_path).write_text("\n".join(lines) + "\n")
    return {
        "kappa_a": damping.kappa_a,
        "kappa_b": damping.kappa_b,
        "dt": damping.dt,
        "success_probability": damped.success_probability,
        "fidelity": damped.fidelity,
        "final_trace": damped.final_state.trace(),
        "min_eigenvalue": damped.final_state.min_eigenvalue(),
    }


_NUMBER_PAIR = re.compile(r"\[\s+(-?[0-9.eE+-]+),\s+(-?[0-9.eE+-]+)\s+\]")


def _dump_report(report: dict) -> str:
    # keep [re, im] amplitude pairs on one line each
    return _NUMBER_PAIR.sub(r"[\1, \2]", json.dumps(report, indent=2)) + "\n"


def _emit(args, text: str) -> None:
    if args.output is not None:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


def _report(args, identifier, sched, params, target=None) -> int:
    start = time.perf_counter()
    run = run_schedule(sched, params)
    report = {
        "identifier": identifier,
        "success_probability": run.success_probability,
        "output_state": {
            "space": {
                "atom_levels": sched.space.atom_levels,
                "dim_a": sched.space.dim_a,
                "dim_b": sched.space.dim_b,
            },
            "amplitudes": state_to_pairs(run.final_state),
        },
        "metrics": _metrics_block(run.final_state, target),
    }
    damping = _damping_params(args)
    if damping is not None:
        report["damped"] = _damped_block(
            sched, params, damping, run.final_state, args.damped_csv
        )
    report["wall_clock_s"] = time.perf_counter() - start
    _emit(args, _dump_report(report))
    return 0


def cmd_simulate(args) -> int:
    path = Path(args.schedule_file)
    sched, file_params = load_schedule(path)
    params = _coupling_params(args) if args.params is not None else file_params
    if getattr(args, "physical_units", False):
        params = CouplingParams(
            params.g1, params.g2, params.mu1, params.mu2, physical_units=True
        )
    return _report(args, path.name, sched, params)


def cmd_protocol(args) -> int:
    name = PROTOCOL_CLI_NAMES[args.name]
    params = _coupling_params(args)
    levels = 3 if name.startswith("bell") else 2
    fock_dim = _fock_dim(args, levels)
    options = {
        "theta": math.pi / 4 if args.theta is None else _angle(args.theta, args.degrees),
        "phi": 0.0 if args.phi is None else _angle(args.phi, args.degrees),
        "m": args.m,
        "n": args.n,
        "sign": args.sign,
        "control": args.control,
        "target": args.target,
        "direction": args.direction,
    }
    sched, target = protocols.build_protocol(name, params, fock_dim, **options)
    if args.emit_schedule is not None:
        save_schedule(args.emit_schedule, sched, params)
    return _report(args, args.name, sched, params, target=target)


def cmd_sweep(args) -> int:
    if args.steps < 2:
        raise ScheduleFormatError(f"--steps must be >= 2, got {args.steps}")
    if not (math.isfinite(args.start) and math.isfinite(args.stop) and args.stop > args.start):
        raise ScheduleFormatError(
            f"degenerate range [{args.start}, {args.stop}]; need finite stop > start"
        )
    values = np.linspace(args.start, args.stop, args.steps)
    params = _coupling_params(args)
    lines = []
    if args.quantity == "pc":
        from .schedule import detection_probability_pc

        theta = math.pi / 4 if args.theta is None else _angle(args.theta, args.degrees)
        lines.append("t,pc")
        for t in values:
            pc = detection_probability_pc(theta, params.g1, params.g2, float(t))
            lines.append(f"{t:.15g},{pc:.15g}")
    else:  # fidelity vs damping scale
        base = _damping_params(args)
        if base is None:
            raise ScheduleFormatError("sweep fidelity requires --damping and --dt")
        name = PROTOCOL_CLI_NAMES[args.protocol]
        fock_dim = _fock_dim(args, 3 if name.startswith("bell") else 2)
        sched, _ = protocols.build_protocol(name, params, fock_dim)
        ideal = run_schedule(sched, params).final_state
        lines.append("scale,kappa_a,kappa_b,fidelity")
        for s in values:
            damping = DampingParams(float(s) * base.kappa_a, float(s) * base.kappa_b, base.dt)
            damped = run_schedule_damped(sched, params, damping, target=ideal)
            lines.append(
                f"{s:.15g},{damping.kappa_a:.15g},{damping.kappa_b:.15g},{damped.fidelity:.15g}"
            )
    _emit(args, "\n".join(lines) + "\n")
    return 0


def cmd_truth_table(args) -> int:
    params = _coupling_params(args)
    damping = _damping_params(args)
    fock_dim = _fock_dim(args, 2)
    table = protocols.extract_truth_table(
        args.gate, params=params, damping=damping, fock_dim=fock_dim
    )
    _emit(args, table.to_csv())
    return 0


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--space", help="atom_levels,dim_a,dim_b (e.g. 3,2,2)")
    parser.add_argument("--params", help="g1,g2,mu1,mu2 couplings (default 1,1,1,1)")
    parser.add_argument(
        "--physical-units",
        dest="physical_units",
        action="store_true",
        help="couplings are rad/s, durations seconds, decay rates 1/s",
    )
    parser.add_argument("--damping", help="kappa_a,kappa_b cavity decay rates")
    parser.add_argument("--dt", type=float, help="damped integrator step")
    parser.add_argument("--degrees", action="store_true", help="angle flags are degrees")
    parser.add_argument("--output", help="write the report/CSV to this path instead of stdout")
    parser.add_argument(
        "--damped-csv",
        dest="damped_csv",
        help="write damped (t,fidelity,trace,min_eigenvalue) series to this path",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cavitysim",
        description="Simulate two-mode cavity QED Bell-state and logic-gate protocols.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="execute a schedule file")
    p_sim.add_argument("schedule_file")
    _add_common_flags(p_sim)
    p_sim.set_defaults(func=cmd_simulate)

    p_proto = sub.add_parser("protocol", help="run a named protocol")
    p_proto.add_argument("name", choices=sorted(PROTOCOL_CLI_NAMES))
    p_proto.add_argument("--theta", type=float, default=None, help="defaults to pi/4")
    p_proto.add_argument("--phi", type=float, default=None, help="defaults to 0")
    p_proto.add_argument("--m", type=int, default=1)
    p_proto.add_argument("--n", type=int, default=1)
    p_proto.add_argument("--sign", choices=["+", "-"], default="+")
    p_proto.add_argument("--control", choices=["g", "e"], default="g")
    p_proto.add_argument("--target", choices=["10", "01"], default="10")
    p_proto.add_argument("--direction", choices=["ab", "ba"], default="ab")
    p_proto.add_argument("--emit-schedule", dest="emit_schedule", help="write the built schedule file")
    _add_common_flags(p_proto)
    p_proto.set_defaults(func=cmd_protocol)

    p_sweep = sub.add_parser("sweep", help="emit CSV sweep data")
    p_sweep.add_argument("quantity", choices=["pc", "fidelity"])
    p_sweep.add_argument("--start", type=float, required=True)
    p_sweep.add_argument("--stop", type=float, required=True)
    p_sweep.add_argument("--steps", type=int, required=True)
    p_sweep.add_argument("--theta", type=float, default=None, help="defaults to pi/4")
    p_sweep.add_argument("--protocol", choices=sorted(PROTOCOL_CLI_NAMES), default="bell-psi")
    _add_common_flags(p_sweep)
    p_sweep.set_defaults(func=cmd_sweep)

    p_table = sub.add_parser("truth-table", help="emit a gate truth table as CSV")
    p_table.add_argument("gate", choices=["cnot"])
    _add_common_flags(p_table)
    p_table.set_defaults(func=cmd_truth_table)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ImpossiblePostSelectionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except CavitySimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
