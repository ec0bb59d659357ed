"""Prebuilt schedules for every protocol, plus gate truth-table extraction.

Bell-state recipes (three-level atom, both modes starting in vacuum):

* ``bell_psi``: prepare the upper-level superposition, expose the atom to
  mode A for mπ/2g1 and to mode B for nπ/2g2 (m, n odd), detect |c⟩.
  Output (|0_A,1_B⟩ ± |1_A,0_B⟩)/√2; the sign is + when m ≡ n (mod 4).
* ``bell_phi``: prepare |a⟩, quarter-cycle mode-A window mπ/4g1, π pulse on
  (b, c) between the cavities, half-cycle mode-B window nπ/2g2, Ramsey
  rotation R(π/4) on (a, c), detect |a⟩ or |c⟩.  Each branch occurs with
  probability 1/2 and yields (|0_A,0_B⟩ ± |1_A,1_B⟩)/√2.

Gate recipes (two-level atom; target qubit spanned by |1_A,0_B⟩, |0_A,1_B⟩):

* ``cnot``: with control |g⟩, consecutive half-Rabi windows
  (π/Ω, Ω = 2μ√1) swap the photon between the modes; with control |e⟩ a
  full-Rabi window (2π/Ω, Ω = 2μ√2) leaves the field unchanged.
* ``hadamard``: quarter-cycle mode-A window then half-cycle mode-B window
  turn |g,1_A,0_B⟩ into an equal-weight superposition of the two target
  basis vectors (relative phase fixed by the -i sin(Ωt/2) convention).
* ``swap``: the control-|g⟩ CNOT sequence run for its own sake.

The window timings depend on the couplings, so the builders take the
``CouplingParams`` the schedule will later run with (defaults: all 1).

Pinned conventions (overridable): the mode windows of ``bell_phi`` carry
the coupling phase -π/2, which turns the quarter-cycle output into
(|a,0_A⟩ + |c,1_A⟩)|0_B⟩/√2 with a plus sign, and the final Ramsey rotation
uses phase 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import CouplingParams, rabi_frequency
from .errors import CavitySimError, InvalidProtocolError, InvalidTimingError
from .hilbert import (
    StateVector,
    basis_index,
    basis_state,
    extract_field_state,
    make_space,
    partial_trace,
    pure_to_density,
)
from .metrics import (
    BellDecomposition,
    bell_decompose,
    bell_state,
    concurrence,
    entanglement_entropy,
    fidelity_up_to_global_phase,
    field_space,
    two_qubit_field_block,
)
from .schedule import (
    RunResult,
    Schedule,
    cavity_window,
    detect,
    laser_pi,
    prepare_atom,
    rotation,
    run_schedule,
    stark,
)

DIPOLE_PHASE = -math.pi / 2.0

PROTOCOL_NAMES = ("bell_psi", "bell_phi", "cnot", "hadamard", "swap")

TARGET_SECTORS = ("10", "01")


def _require_odd(value: int, name: str) -> None:
    if value < 1 or value % 2 == 0:
        raise InvalidTimingError(f"{name} must be a positive odd integer, got {value}")


def _require_coupling(value: float, name: str) -> None:
    if value <= 0.0:
        raise InvalidTimingError(f"window timing needs {name} > 0, got {value}")


def _half_cycle_sign(k: int) -> int:
    """sin(kπ/2) for odd k, computed exactly."""
    return 1 if k % 4 == 1 else -1


def build_bell_psi(
    theta: float,
    phi: float,
    m: int,
    n: int,
    params: CouplingParams | None = None,
    fock_dim: int = 2,
) -> Schedule:
    """Schedule generating (|0_A,1_B⟩ ± |1_A,0_B⟩)-type field entanglement."""
    _require_odd(m, "m")
    _require_odd(n, "n")
    params = params or CouplingParams()
    _require_coupling(params.g1, "g1")
    _require_coupling(params.g2, "g2")
    space = make_space(3, fock_dim, fock_dim)
    segments = (
        prepare_atom(theta, phi),
        cavity_window("vtype", "A", m * math.pi / (2.0 * params.g1)),
        cavity_window("vtype", "B", n * math.pi / (2.0 * params.g2)),
        detect("c", post_select=True),
    )
    return Schedule(space, segments)


def bell_psi_target(
    theta: float, phi: float, m: int, n: int, fock_dim: int = 2
) -> StateVector:
    """Ideal post-selected field state of ``build_bell_psi``."""
    _require_odd(m, "m")
    _require_odd(n, "n")
    space = field_space(fock_dim, fock_dim)
    amps = np.zeros(space.dim, dtype=np.complex128)
    amps[basis_index(space, 0, 1, 0)] = -1j * math.cos(theta) * _half_cycle_sign(m)
    amps[basis_index(space, 0, 0, 1)] = -1j * math.sin(theta) * _half_cycle_sign(n) * np.exp(1j * phi)
    return StateVector(space, amps).normalize()


def bell_phi_branch_level(sign: str, m: int, n: int) -> str:
    """Detection level whose branch carries the requested Φ sign."""
    if sign not in ("+", "-"):
        raise InvalidProtocolError(f"sign must be '+' or '-', got {sign!r}")
    quarter = math.cos(m * math.pi / 4.0) * math.sin(m * math.pi / 4.0)
    branch_a_sign = 1 if quarter * _half_cycle_sign(n) > 0 else -1
    wanted = 1 if sign == "+" else -1
    return "a" if branch_a_sign == wanted else "c"


def build_bell_phi(
    sign: str,
    m: int,
    n: int,
    params: CouplingParams | None = None,
    fock_dim: int = 2,
    dipole_phase: float = DIPOLE_PHASE,
    rotation_phase: float = 0.0,
) -> Schedule:
    """Schedule generating (|0_A,0_B⟩ ± |1_A,1_B⟩)/√2, branch probability 1/2."""
    _require_odd(m, "m")
    _require_odd(n, "n")
    params = params or CouplingParams()
    _require_coupling(params.g1, "g1")
    _require_coupling(params.g2, "g2")
    space = make_space(3, fock_dim, fock_dim)
    segments = (
        prepare_atom(0.0, 0.0),  # pure |a>
        cavity_window("vtype", "A", m * math.pi / (4.0 * params.g1), phase=dipole_phase),
        laser_pi(("b", "c"), math.pi),
        cavity_window("vtype", "B", n * math.pi / (2.0 * params.g2), phase=dipole_phase),
        rotation(("a", "c"), math.pi / 4.0, rotation_phase),
        detect(bell_phi_branch_level(sign, m, n), post_select=True),
    )
    return Schedule(space, segments)


def bell_phi_target(sign: str, fock_dim: int = 2) -> StateVector:
    """Ideal field state of ``build_bell_phi`` (up to global phase)."""
    if sign not in ("+", "-"):
        raise InvalidProtocolError(f"sign must be '+' or '-', got {sign!r}")
    name = "phi_plus" if sign == "+" else "phi_minus"
    return bell_state(name, field_space(fock_dim, fock_dim))


def _gate_space(fock_dim: int):
    return make_space(2, fock_dim, fock_dim)


def _field_labels(target: str) -> tuple[int, int]:
    if target not in TARGET_SECTORS:
        raise InvalidProtocolError(
            f"target must be one of {TARGET_SECTORS} (one photon shared by the modes), got {target!r}"
        )
    return (1, 0) if target == "10" else (0, 1)


def _prepare_gate_input(control: str, target: str):
    if control not in ("g", "e"):
        raise InvalidProtocolError(f"control must be 'g' or 'e', got {control!r}")
    n_a, n_b = _field_labels(target)
    theta = 0.0 if control == "g" else math.pi / 2.0
    return prepare_atom(theta, 0.0, n_a, n_b)


def build_cnot(
    control: str,
    target: str,
    params: CouplingParams | None = None,
    fock_dim: int = 2,
) -> Schedule:
    """Schedule realizing one row of the CNOT truth table.

    Control |g⟩ swaps the photon between the modes through the atom
    (half-Rabi absorption, Stark switch, half-Rabi emission); control |e⟩
    rides a full Rabi cycle in the occupied mode and changes nothing.
    """
    params = params or CouplingParams()
    _require_coupling(params.mu1, "mu1")
    _require_coupling(params.mu2, "mu2")
    space = _gate_space(fock_dim)
    prep = _prepare_gate_input(control, target)
    half_a = math.pi / rabi_frequency(params.mu1, 1, "ground_with_n")
    half_b = math.pi / rabi_frequency(params.mu2, 1, "ground_with_n")
    if control == "g" and target == "10":
        segments = (
            prep,
            cavity_window("jc", "A", half_a),
            stark(True),
            cavity_window("jc", "B", half_b),
        )
    elif control == "g" and target == "01":
        segments = (
            prep,
            stark(True),
            cavity_window("jc", "B", half_b),
            stark(False),
            cavity_window("jc", "A", half_a),
        )
    elif control == "e" and target == "10":
        full_a = 2.0 * math.pi / rabi_frequency(params.mu1, 1, "excited_with_n")
        segments = (prep, cavity_window("jc", "A", full_a))
    else:  # control == "e", target == "01"
        full_b = 2.0 * math.pi / rabi_frequency(params.mu2, 1, "excited_with_n")
        segments = (prep, stark(True), cavity_window("jc", "B", full_b))
    return Schedule(space, segments)


def cnot_output(control: str, target: str) -> tuple[str, str]:
    """Truth-table row: (control, target) -> (control, control==g ? flipped : target)."""
    _field_labels(target)
    if control == "g":
        return "g", ("01" if target == "10" else "10")
    if control == "e":
        return "e", target
    raise InvalidProtocolError(f"control must be 'g' or 'e', got {control!r}")


def gate_basis_state(control: str, target: str, fock_dim: int = 2) -> StateVector:
    """Full-space basis state |control, target⟩ of the gate register."""
    space = _gate_space(fock_dim)
    n_a, n_b = _field_labels(target)
    atom = 0 if control == "g" else 1
    return basis_state(space, atom, n_a, n_b)


def build_hadamard(
    target: str = "10",
    params: CouplingParams | None = None,
    fock_dim: int = 2,
) -> Schedule:
    """Quarter-cycle mode-A window then photon transfer to mode B.

    Only the |g⟩ ⊗ |1_A,0_B⟩ input of the construction is defined.
    """
    if target != "10":
        raise InvalidProtocolError(
            f"the Hadamard construction starts from target '10', got {target!r}"
        )
    params = params or CouplingParams()
    _require_coupling(params.mu1, "mu1")
    _require_coupling(params.mu2, "mu2")
    space = _gate_space(fock_dim)
    quarter_a = 0.5 * math.pi / rabi_frequency(params.mu1, 1, "ground_with_n")
    half_b = math.pi / rabi_frequency(params.mu2, 1, "ground_with_n")
    segments = (
        prepare_atom(0.0, 0.0, 1, 0),
        cavity_window("jc", "A", quarter_a),
        stark(True),
        cavity_window("jc", "B", half_b),
    )
    return Schedule(space, segments)


def hadamard_target(fock_dim: int = 2) -> StateVector:
    """Ideal Hadamard output |g⟩ ⊗ (|1_A,0_B⟩ - |0_A,1_B⟩)/√2.

    The relative minus sign is the accumulated (-i)² of the two windows;
    it is a convention of the exp(-iHt) evolution, not a stated result.
    """
    space = _gate_space(fock_dim)
    amps = np.zeros(space.dim, dtype=np.complex128)
    root = 1.0 / math.sqrt(2.0)
    amps[space.dim_b] = root  # |g,1,0>
    amps[1] = -root  # |g,0,1>
    return StateVector(space, amps)


def build_swap(
    direction: str = "ab",
    params: CouplingParams | None = None,
    fock_dim: int = 2,
) -> Schedule:
    """Field-swap schedule: move the photon A→B ("ab") or B→A ("ba")."""
    if direction not in ("ab", "ba"):
        raise InvalidProtocolError(f"direction must be 'ab' or 'ba', got {direction!r}")
    return build_cnot("g", "10" if direction == "ab" else "01", params, fock_dim)


@dataclass(frozen=True)
class TruthTableRow:
    control_in: str
    target_in: str
    control_out: str
    target_out: str
    fidelity: float


@dataclass(frozen=True)
class TruthTable:
    rows: tuple[TruthTableRow, ...]

    def to_csv(self) -> str:
        lines = ["control_in,target_in,control_out,target_out,fidelity"]
        for r in self.rows:
            lines.append(
                f"{r.control_in},{r.target_in},{r.control_out},{r.target_out},{r.fidelity:.15g}"
            )
        return "\n".join(lines) + "\n"


def extract_truth_table(
    gate: str = "cnot",
    params: CouplingParams | None = None,
    damping=None,
    fock_dim: int = 2,
) -> TruthTable:
    """Run all four (control, target) rows and record output fidelities.

    Fidelities are taken up to global phase against the tabulated outputs.
    With a ``DampingParams`` instance the rows run through the Lindblad
    executor instead and the fidelities drop below 1.
    """
    if gate != "cnot":
        raise InvalidProtocolError(f"truth tables are defined for 'cnot', got {gate!r}")
    params = params or CouplingParams()
    rows = []
    for control in ("g", "e"):
        for target in TARGET_SECTORS:
            sched = build_cnot(control, target, params, fock_dim)
            control_out, target_out = cnot_output(control, target)
            target_state = gate_basis_state(control_out, target_out, fock_dim)
            if damping is None:
                final = run_schedule(sched, params).final_state
                fid = fidelity_up_to_global_phase(final, target_state)
            else:
                from .noise import run_schedule_damped

                damped = run_schedule_damped(sched, params, damping, target=target_state)
                fid = damped.fidelity
            rows.append(TruthTableRow(control, target, control_out, target_out, fid))
    return TruthTable(tuple(rows))


@dataclass(frozen=True)
class ProtocolSpec:
    """Declarative form of a protocol invocation.

    Only the parameters relevant to ``name`` are used: bell_psi reads
    (theta, phi, m, n); bell_phi reads (sign, m, n); cnot reads (control,
    target); hadamard reads target; swap reads direction.
    """

    name: str
    theta: float = math.pi / 4.0
    phi: float = 0.0
    m: int = 1
    n: int = 1
    sign: str = "+"
    control: str = "g"
    target: str = "10"
    direction: str = "ab"

    def build(
        self, params: CouplingParams | None = None, fock_dim: int = 2
    ) -> tuple[Schedule, StateVector]:
        return build_protocol(
            self.name,
            params,
            fock_dim,
            theta=self.theta,
            phi=self.phi,
            m=self.m,
            n=self.n,
            sign=self.sign,
            control=self.control,
            target=self.target,
            direction=self.direction,
        )


@dataclass(frozen=True)
class ProtocolResult:
    """Outcome of one protocol run with its standard diagnostics."""

    name: str
    run: RunResult
    field_state: StateVector | None
    target: StateVector | None
    fidelity: float | None
    bell: BellDecomposition | None
    concurrence_value: float | None
    entropy_bits: float | None

    @property
    def success_probability(self) -> float:
        return self.run.success_probability


def build_protocol(
    name: str,
    params: CouplingParams | None = None,
    fock_dim: int = 2,
    *,
    theta: float = math.pi / 4.0,
    phi: float = 0.0,
    m: int = 1,
    n: int = 1,
    sign: str = "+",
    control: str = "g",
    target: str = "10",
    direction: str = "ab",
) -> tuple[Schedule, StateVector]:
    """Build a named protocol schedule and its ideal comparison target.

    Bell protocols return field-only targets; gate protocols return
    full-space targets (atom included).
    """
    if name == "bell_psi":
        return (
            build_bell_psi(theta, phi, m, n, params, fock_dim),
            bell_psi_target(theta, phi, m, n, fock_dim),
        )
    if name == "bell_phi":
        return (
            build_bell_phi(sign, m, n, params, fock_dim),
            bell_phi_target(sign, fock_dim),
        )
    if name == "cnot":
        control_out, target_out = cnot_output(control, target)
        return (
            build_cnot(control, target, params, fock_dim),
            gate_basis_state(control_out, target_out, fock_dim),
        )
    if name == "hadamard":
        return build_hadamard(target, params, fock_dim), hadamard_target(fock_dim)
    if name == "swap":
        out_target = "01" if direction == "ab" else "10"
        return build_swap(direction, params, fock_dim), gate_basis_state("g", out_target, fock_dim)
    raise InvalidProtocolError(f"unknown protocol {name!r}; choose from {PROTOCOL_NAMES}")


def run_protocol(
    name: str,
    params: CouplingParams | None = None,
    fock_dim: int = 2,
    **options,
) -> ProtocolResult:
    """Build, run, and analyze one protocol (see :func:`build_protocol`)."""
    params = params or CouplingParams()
    sched, target = build_protocol(name, params, fock_dim, **options)
    run = run_schedule(sched, params)
    final = run.final_state

    field = extract_field_state(final)
    if target.space == field.space:
        fid = fidelity_up_to_global_phase(field, target)
    else:
        fid = fidelity_up_to_global_phase(final, target)
    bell = bell_decompose(field)
    rho_field = partial_trace(pure_to_density(final), keep=("mode_a", "mode_b"))
    try:
        conc = concurrence(two_qubit_field_block(rho_field))
    except CavitySimError:
        conc = None
    entropy = entanglement_entropy(field, keep=("mode_a",))
    return ProtocolResult(
        name=name,
        run=run,
        field_state=field,
        target=target,
        fidelity=fid,
        bell=bell,
        concurrence_value=conc,
        entropy_bits=entropy,
    )
