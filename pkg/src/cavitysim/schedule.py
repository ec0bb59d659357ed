"""Pulse-sequence model and executor.

A :class:`Schedule` is an ordered list of timed experimental actions over one
composite space: atom preparation, cavity-interaction windows, Stark
resonance switching, classical laser pulses between cavities, Ramsey-type
rotations, and projective atomic detection with optional post-selection.

Durations are plain numbers in the same time unit as the inverse couplings
(dimensionless by default; seconds when ``CouplingParams.physical_units`` is
set).  All segment actions except detection are norm-preserving unitaries.

Schedule files are JSON documents::

    {"space": {"atom_levels": 3, "dim_a": 2, "dim_b": 2},
     "params": {"g1": 1.0, "g2": 1.0, "mu1": 1.0, "mu2": 1.0},
     "segments": [{"kind": "prepare_atom", "theta": 0.785, "phi": 0.0}, ...]}

Per-kind fields: prepare_atom(theta, phi[, n_a, n_b]); cavity_window(model,
mode, duration[, phase]); stark(on); laser_pi(transition, pulse_area);
rotation(transition, theta, phi); detect(level, post_select).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dynamics import (
    CouplingParams,
    OperatorMatrix,
    build_jc_hamiltonian,
    build_vtype_hamiltonian,
    evolve_numeric,
)
from .errors import (
    ImpossiblePostSelectionError,
    ModelMismatchError,
    ScheduleFormatError,
)
from .hilbert import (
    SpaceDescriptor,
    StateVector,
    basis_index,
    level_index,
    make_space,
)

POST_SELECTION_FLOOR = 1e-14

SEGMENT_KINDS = ("prepare_atom", "cavity_window", "stark", "laser_pi", "rotation", "detect")


@dataclass(frozen=True)
class PulseSegment:
    """One timed experimental action; build via the factory functions."""

    kind: str
    theta: float = 0.0
    phi: float = 0.0
    n_a: int = 0
    n_b: int = 0
    model: str | None = None
    mode: str | None = None
    duration: float = 0.0
    phase: float = 0.0
    on: bool = False
    transition: tuple[str, str] | None = None
    pulse_area: float = 0.0
    level: str | None = None
    post_select: bool = False


def prepare_atom(theta: float, phi: float, n_a: int = 0, n_b: int = 0) -> PulseSegment:
    """Ramsey preparation cosθ|upper0⟩ + sinθ e^{iφ}|upper1⟩ at Fock (n_a, n_b).

    For the 3-level atom the superposed pair is (|a⟩, |b⟩); for the 2-level
    atom it is (|g⟩, |e⟩).  θ = 0 prepares the first level purely.
    """
    return PulseSegment(kind="prepare_atom", theta=theta, phi=phi, n_a=n_a, n_b=n_b)


def cavity_window(model: str, mode: str | None, duration: float, phase: float = 0.0) -> PulseSegment:
    """Resonant interaction window.

    ``model`` is "vtype" or "jc"; ``mode`` is "A", "B", "both" (vtype only),
    or None for a jc window that follows the current Stark switch state.
    ``phase`` is the coupling (dipole) phase applied to the active coupling.
    """
    if model not in ("vtype", "jc"):
        raise ModelMismatchError(f"unknown window model {model!r}")
    if duration < 0:
        raise ScheduleFormatError(f"window duration must be >= 0, got {duration}")
    if model == "jc" and mode == "both":
        raise ModelMismatchError("jc windows couple one mode at a time")
    if mode not in ("A", "B", "both", None):
        raise ScheduleFormatError(f"unknown mode {mode!r}")
    return PulseSegment(kind="cavity_window", model=model, mode=mode, duration=duration, phase=phase)


def stark(on: bool) -> PulseSegment:
    """Stark switch: retargets mode-unspecified jc windows from A to B."""
    return PulseSegment(kind="stark", on=on)


def laser_pi(transition: tuple[str, str], pulse_area: float) -> PulseSegment:
    """Classical laser pulse on an atomic transition between the cavities.

    Acts on the atom alone with rotation angle pulse_area/2; the nominal
    duration pulse_area/Ω of the real pulse does not evolve the cavity.
    """
    if not (0.0 <= pulse_area <= 2.0 * math.pi):
        raise ScheduleFormatError(f"pulse_area must lie in [0, 2π], got {pulse_area}")
    return PulseSegment(kind="laser_pi", transition=tuple(transition), pulse_area=pulse_area)


def rotation(transition: tuple[str, str], theta: float, phi: float = 0.0) -> PulseSegment:
    """Ramsey-zone rotation R(θ, φ) on the named (upper, lower) levels.

    |upper⟩ → cosθ|upper⟩ - e^{iφ} sinθ|lower⟩,
    |lower⟩ → e^{-iφ} sinθ|upper⟩ + cosθ|lower⟩.
    """
    return PulseSegment(kind="rotation", transition=tuple(transition), theta=theta, phi=phi)


def detect(level: str, post_select: bool = True) -> PulseSegment:
    """Projective state-selective detection of the atom.

    With ``post_select`` the state collapses onto the level (renormalized)
    and the branch probability multiplies into the run's success
    probability; without it the probability is only recorded.
    """
    return PulseSegment(kind="detect", level=level, post_select=post_select)


@dataclass(frozen=True)
class Schedule:
    """Ordered pulse sequence over one composite space."""

    space: SpaceDescriptor
    segments: tuple[PulseSegment, ...]

    def __post_init__(self):
        segs = tuple(self.segments)
        object.__setattr__(self, "segments", segs)
        preps = [i for i, s in enumerate(segs) if s.kind == "prepare_atom"]
        if len(preps) > 1 or (preps and preps[0] != 0):
            raise ScheduleFormatError(
                "at most one prepare_atom segment is allowed and it must be first"
            )


@dataclass(frozen=True)
class TracePoint:
    segment_index: int
    state: StateVector
    branch_probability: float


@dataclass(frozen=True)
class RunResult:
    """Final state, post-selection success probability, and per-segment trace."""

    final_state: StateVector
    success_probability: float
    trace: tuple[TracePoint, ...] = field(default_factory=tuple)


def prepared_state(space: SpaceDescriptor, seg: PulseSegment) -> StateVector:
    amps = np.zeros(space.dim, dtype=np.complex128)
    amps[basis_index(space, 0, seg.n_a, seg.n_b)] = math.cos(seg.theta)
    amps[basis_index(space, 1, seg.n_a, seg.n_b)] = math.sin(seg.theta) * np.exp(1j * seg.phi)
    return StateVector(space, amps)


def window_hamiltonian(
    space: SpaceDescriptor, seg: PulseSegment, params: CouplingParams, stark_on: bool = False
) -> OperatorMatrix:
    """Hamiltonian active during a cavity_window segment."""
    if seg.model == "vtype":
        mode = seg.mode or "both"
        g1 = params.g1 if mode in ("A", "both") else 0.0
        g2 = params.g2 if mode in ("B", "both") else 0.0
        return build_vtype_hamiltonian(space, g1, g2, phase_1=seg.phase, phase_2=seg.phase)
    if seg.model == "jc":
        mode = seg.mode or ("B" if stark_on else "A")
        mu = params.mu1 if mode == "A" else params.mu2
        return build_jc_hamiltonian(space, mode, mu, phase=seg.phase)
    raise ModelMismatchError(f"unknown window model {seg.model!r}")


def atom_rotation_matrix(
    space: SpaceDescriptor, transition: tuple[str, str], theta: float, phi: float
) -> np.ndarray:
    upper = level_index(space, transition[0])
    lower = level_index(space, transition[1])
    r = np.eye(space.atom_levels, dtype=np.complex128)
    r[upper, upper] = math.cos(theta)
    r[lower, lower] = math.cos(theta)
    r[lower, upper] = -np.exp(1j * phi) * math.sin(theta)
    r[upper, lower] = np.exp(-1j * phi) * math.sin(theta)
    return np.kron(r, np.eye(space.dim_a * space.dim_b))


def atom_projector(space: SpaceDescriptor, level: str) -> np.ndarray:
    """Projector onto one atomic level (identity on the field)."""
    idx = level_index(space, level)
    p = np.zeros((space.atom_levels, space.atom_levels), dtype=np.complex128)
    p[idx, idx] = 1.0
    return np.kron(p, np.eye(space.dim_a * space.dim_b))


def apply_segment(
    state: StateVector,
    seg: PulseSegment,
    params: CouplingParams,
    stark_on: bool = False,
) -> tuple[StateVector, float]:
    """Apply one segment; returns (new state, branch probability).

    Branch probability is 1 for every non-detect segment.  ``stark_on`` is
    the executor's current resonance-switch state; it only matters for jc
    windows that do not name a mode.  Stark segments leave the state
    untouched here - the flag itself is tracked by :func:`run_schedule`.
    """
    space = state.space
    if seg.kind == "prepare_atom":
        return prepared_state(space, seg), 1.0
    if seg.kind == "cavity_window":
        h = window_hamiltonian(space, seg, params, stark_on)
        return evolve_numeric(state, h, seg.duration), 1.0
    if seg.kind == "stark":
        return state, 1.0
    if seg.kind == "laser_pi":
        u = atom_rotation_matrix(space, seg.transition, seg.pulse_area / 2.0, 0.0)
        return StateVector(space, u @ state.amplitudes), 1.0
    if seg.kind == "rotation":
        u = atom_rotation_matrix(space, seg.transition, seg.theta, seg.phi)
        return StateVector(space, u @ state.amplitudes), 1.0
    if seg.kind == "detect":
        proj = atom_projector(space, seg.level)
        projected = proj @ state.amplitudes
        prob = float(np.vdot(projected, projected).real)
        if not seg.post_select:
            return state, prob
        if prob < POST_SELECTION_FLOOR:
            raise ImpossiblePostSelectionError(
                f"detection of level {seg.level!r} has probability {prob:.3e}"
            )
        return StateVector(space, projected / math.sqrt(prob)), prob
    raise ScheduleFormatError(f"unknown segment kind {seg.kind!r}")


def run_schedule(sched: Schedule, params: CouplingParams) -> RunResult:
    """Fold the segments left to right from the prepared (or default) state.

    Without a prepare_atom segment the run starts in |level 0, 0, 0⟩.
    success_probability is the product of post-selected branch
    probabilities; the trace records every intermediate state.
    """
    space = sched.space
    amps = np.zeros(space.dim, dtype=np.complex128)
    amps[0] = 1.0
    state = StateVector(space, amps)
    success = 1.0
    stark_on = False
    trace: list[TracePoint] = []
    for i, seg in enumerate(sched.segments):
        state, prob = apply_segment(state, seg, params, stark_on)
        if seg.kind == "stark":
            stark_on = seg.on
        if seg.kind == "detect" and seg.post_select:
            success *= prob
        trace.append(TracePoint(i, state, prob))
    return RunResult(final_state=state, success_probability=success, trace=tuple(trace))


def detection_probability_pc(theta: float, g1: float, g2: float, t: float) -> float:
    """Probability of detecting the atom in the lower level |c⟩.

    General-θ form cos²θ sin²(g1 t) + sin²θ sin²(g2 t); at θ = π/4 this is
    (sin² g1 t + sin² g2 t)/2.  Equals the measured detect branch
    probability of the corresponding prepared-and-evolved schedule.
    """
    return (
        math.cos(theta) ** 2 * math.sin(g1 * t) ** 2
        + math.sin(theta) ** 2 * math.sin(g2 * t) ** 2
    )


# --- schedule file schema -------------------------------------------------

def segment_to_dict(seg: PulseSegment) -> dict:
    if seg.kind == "prepare_atom":
        d = {"kind": seg.kind, "theta": seg.theta, "phi": seg.phi}
        if seg.n_a or seg.n_b:
            d["n_a"] = seg.n_a
            d["n_b"] = seg.n_b
        return d
    if seg.kind == "cavity_window":
        d = {"kind": seg.kind, "model": seg.model, "mode": seg.mode, "duration": seg.duration}
        if seg.phase:
            d["phase"] = seg.phase
        return d
    if seg.kind == "stark":
        return {"kind": seg.kind, "on": seg.on}
    if seg.kind == "laser_pi":
        return {"kind": seg.kind, "transition": list(seg.transition), "pulse_area": seg.pulse_area}
    if seg.kind == "rotation":
        return {
            "kind": seg.kind,
            "transition": list(seg.transition),
            "theta": seg.theta,
            "phi": seg.phi,
        }
    if seg.kind == "detect":
        return {"kind": seg.kind, "level": seg.level, "post_select": seg.post_select}
    raise ScheduleFormatError(f"unknown segment kind {seg.kind!r}")


def _segment_from_dict(entry: dict, index: int) -> PulseSegment:
    if not isinstance(entry, dict) or "kind" not in entry:
        raise ScheduleFormatError(f"segment {index}: not an object with a 'kind' field")
    kind = entry["kind"]
    try:
        if kind == "prepare_atom":
            return prepare_atom(
                float(entry["theta"]),
                float(entry["phi"]),
                int(entry.get("n_a", 0)),
                int(entry.get("n_b", 0)),
            )
        if kind == "cavity_window":
            return cavity_window(
                entry["model"],
                entry.get("mode"),
                float(entry["duration"]),
                float(entry.get("phase", 0.0)),
            )
        if kind == "stark":
            return stark(bool(entry["on"]))
        if kind == "laser_pi":
            return laser_pi(tuple(entry["transition"]), float(entry["pulse_area"]))
        if kind == "rotation":
            return rotation(
                tuple(entry["transition"]), float(entry["theta"]), float(entry.get("phi", 0.0))
            )
        if kind == "detect":
            return detect(entry["level"], bool(entry.get("post_select", True)))
    except (KeyError, TypeError, ValueError) as exc:
        raise ScheduleFormatError(f"segment {index}: {exc}") from exc
    raise ScheduleFormatError(f"segment {index}: unknown kind {kind!r}")


def schedule_to_dict(sched: Schedule, params: CouplingParams) -> dict:
    doc = {
        "space": {
            "atom_levels": sched.space.atom_levels,
            "dim_a": sched.space.dim_a,
            "dim_b": sched.space.dim_b,
        },
        "params": {"g1": params.g1, "g2": params.g2, "mu1": params.mu1, "mu2": params.mu2},
        "segments": [segment_to_dict(s) for s in sched.segments],
    }
    if params.physical_units:
        doc["params"]["physical_units"] = True
    return doc


def schedule_from_dict(doc: dict) -> tuple[Schedule, CouplingParams]:
    if not isinstance(doc, dict):
        raise ScheduleFormatError("schedule document must be a JSON object")
    try:
        sp = doc["space"]
        space = make_space(int(sp["atom_levels"]), int(sp["dim_a"]), int(sp["dim_b"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ScheduleFormatError(f"bad 'space' block: {exc}") from exc
    pr = doc.get("params", {})
    try:
        params = CouplingParams(
            g1=float(pr.get("g1", 1.0)),
            g2=float(pr.get("g2", 1.0)),
            mu1=float(pr.get("mu1", 1.0)),
            mu2=float(pr.get("mu2", 1.0)),
            physical_units=bool(pr.get("physical_units", False)),
        )
    except (TypeError, ValueError) as exc:
        raise ScheduleFormatError(f"bad 'params' block: {exc}") from exc
    raw_segments = doc.get("segments")
    if not isinstance(raw_segments, list):
        raise ScheduleFormatError("'segments' must be a list")
    segments = tuple(_segment_from_dict(entry, i) for i, entry in enumerate(raw_segments))
    return Schedule(space, segments), params


def save_schedule(path: str | Path, sched: Schedule, params: CouplingParams) -> None:
    Path(path).write_text(json.dumps(schedule_to_dict(sched, params), indent=2) + "\n")


def load_schedule(path: str | Path) -> tuple[Schedule, CouplingParams]:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScheduleFormatError(f"invalid JSON: {exc}") from exc
    return schedule_from_dict(doc)
