"""Hamiltonians and time evolution for the two atom-field models.

Two interaction-picture models at exact resonance, ħ = 1:

* V-type three-level atom coupled to both modes,
  H = g1 (a |a⟩⟨c| + a† |c⟩⟨a|) + g2 (b |b⟩⟨c| + b† |c⟩⟨b|).
* Jaynes-Cummings two-level atom coupled to one mode,
  V = μ (a† σ + σ† a) with σ = |g⟩⟨e|.

Evolution uses exp(-iHt); this sign convention reproduces the -i factors of
the closed-form solutions below.  The three-level phase g·t equals the JC
phase Ωt/2 in the one-excitation sector via g = μ√(n+1).

Couplings may carry a phase δ (``phase_1``/``phase_2``/``phase``): the
photon-annihilating term is multiplied by exp(iδ).  δ = -π/2 turns the
quarter-cycle map |a,0,0⟩ → cos|a,0,0⟩ - i sin|c,1,0⟩ into
cos|a,0,0⟩ + sin|c,1,0⟩, the convention used by the Bell-Φ recipe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    IncompatibleSpaceError,
    InvalidDimensionError,
    InvalidHamiltonianError,
    ModelMismatchError,
    NoDynamicsError,
)
from .hilbert import SpaceDescriptor, StateVector, basis_index, make_space

HERMITICITY_TOL = 1e-10


@dataclass(frozen=True)
class OperatorMatrix:
    """Dense complex operator on a composite space."""

    space: SpaceDescriptor
    matrix: np.ndarray

    def __post_init__(self):
        arr = np.array(self.matrix, dtype=np.complex128)
        d = self.space.dim
        if arr.shape != (d, d):
            raise InvalidDimensionError(
                f"operator shape {arr.shape} does not match space dim {d}"
            )
        arr.setflags(write=False)
        object.__setattr__(self, "matrix", arr)

    def hermiticity_defect(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))


@dataclass(frozen=True)
class CouplingParams:
    """Coupling constants of both models, in rad per unit time.

    ``g1``/``g2`` drive the three-level scheme, ``mu1``/``mu2`` the
    Jaynes-Cummings scheme.  ``physical_units`` marks the values as rad/s
    with durations in seconds; damped runs require it so that decay rates
    in 1/s are commensurate.
    """

    g1: float = 1.0
    g2: float = 1.0
    mu1: float = 1.0
    mu2: float = 1.0
    physical_units: bool = False

    def __post_init__(self):
        for name in ("g1", "g2", "mu1", "mu2"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise InvalidDimensionError(f"coupling {name}={value} must be finite and >= 0")


def annihilation_a(space: SpaceDescriptor) -> np.ndarray:
    """Mode-A annihilation operator on the full composite space."""
    a = np.diag(np.sqrt(np.arange(1, space.dim_a, dtype=float)), k=1)
    return np.kron(np.eye(space.atom_levels), np.kron(a, np.eye(space.dim_b))).astype(
        np.complex128
    )


def annihilation_b(space: SpaceDescriptor) -> np.ndarray:
    """Mode-B annihilation operator on the full composite space."""
    b = np.diag(np.sqrt(np.arange(1, space.dim_b, dtype=float)), k=1)
    return np.kron(np.eye(space.atom_levels), np.kron(np.eye(space.dim_a), b)).astype(
        np.complex128
    )


def atom_transition(space: SpaceDescriptor, to_level: int, from_level: int) -> np.ndarray:
    """|to⟩⟨from| on the atom, identity on both modes."""
    op = np.zeros((space.atom_levels, space.atom_levels), dtype=np.complex128)
    op[to_level, from_level] = 1.0
    return np.kron(op, np.eye(space.dim_a * space.dim_b)).astype(np.complex128)


def build_vtype_hamiltonian(
    space: SpaceDescriptor,
    g1: float,
    g2: float,
    phase_1: float = 0.0,
    phase_2: float = 0.0,
) -> OperatorMatrix:
    """Three-level V-type Hamiltonian (levels a=0, b=1, c=2), ħ = 1."""
    if space.atom_levels != 3:
        raise ModelMismatchError(
            f"V-type model needs a 3-level atom, space has {space.atom_levels}"
        )
    a = annihilation_a(space)
    b = annihilation_b(space)
    t_ac = atom_transition(space, 0, 2)  # |a><c|
    t_bc = atom_transition(space, 1, 2)  # |b><c|
    term1 = g1 * np.exp(1j * phase_1) * (a @ t_ac)
    term2 = g2 * np.exp(1j * phase_2) * (b @ t_bc)
    h = term1 + term1.conj().T + term2 + term2.conj().T
    return OperatorMatrix(space, h)


def build_jc_hamiltonian(
    space: SpaceDescriptor, mode: str, mu: float, phase: float = 0.0
) -> OperatorMatrix:
    """Jaynes-Cummings Hamiltonian for one mode (levels g=0, e=1), ħ = 1."""
    if space.atom_levels != 2:
        raise ModelMismatchError(
            f"JC model needs a 2-level atom, space has {space.atom_levels}"
        )
    if mode == "A":
        op = annihilation_a(space)
    elif mode == "B":
        op = annihilation_b(space)
    else:
        raise ModelMismatchError(f"JC mode must be 'A' or 'B', got {mode!r}")
    sigma_dag = atom_transition(space, 1, 0)  # |e><g|
    term = mu * np.exp(1j * phase) * (sigma_dag @ op)  # σ†a: absorb photon
    h = term + term.conj().T
    return OperatorMatrix(space, h)


def evolve_numeric(psi: StateVector, hamiltonian: OperatorMatrix, t: float) -> StateVector:
    """exp(-iHt)|ψ⟩ via eigendecomposition of the Hermitian H."""
    if psi.space != hamiltonian.space:
        raise IncompatibleSpaceError(
            f"state space {psi.space} differs from operator space {hamiltonian.space}"
        )
    if not math.isfinite(t):
        raise InvalidHamiltonianError(f"evolution time must be finite, got {t}")
    defect = hamiltonian.hermiticity_defect()
    if defect > HERMITICITY_TOL:
        raise InvalidHamiltonianError(
            f"Hamiltonian is not Hermitian (max |H - H†| = {defect:.3e})"
        )
    eigvals, eigvecs = np.linalg.eigh(hamiltonian.matrix)
    phases = np.exp(-1j * eigvals * t)
    amps = eigvecs @ (phases * (eigvecs.conj().T @ psi.amplitudes))
    return StateVector(psi.space, amps)


def evolve_vtype_exact(
    theta: float,
    phi: float,
    g1: float,
    g2: float,
    t: float,
    space: SpaceDescriptor | None = None,
) -> StateVector:
    """Closed-form V-type evolution of (cosθ|a⟩ + sinθ e^{iφ}|b⟩)|0,0⟩.

    Returns cosθ cos(g1 t)|a,0,0⟩ - i cosθ sin(g1 t)|c,1,0⟩
    + e^{iφ} sinθ cos(g2 t)|b,0,0⟩ - i e^{iφ} sinθ sin(g2 t)|c,0,1⟩.
    """
    if space is None:
        space = make_space(3, 2, 2)
    if space.atom_levels != 3:
        raise ModelMismatchError("closed form defined for the 3-level space")
    amps = np.zeros(space.dim, dtype=np.complex128)
    ephi = np.exp(1j * phi)
    amps[basis_index(space, 0, 0, 0)] = math.cos(theta) * math.cos(g1 * t)
    amps[basis_index(space, 2, 1, 0)] = -1j * math.cos(theta) * math.sin(g1 * t)
    amps[basis_index(space, 1, 0, 0)] = ephi * math.sin(theta) * math.cos(g2 * t)
    amps[basis_index(space, 2, 0, 1)] = -1j * ephi * math.sin(theta) * math.sin(g2 * t)
    return StateVector(space, amps)


def operator_to_pairs(op: OperatorMatrix) -> list[list[list[float]]]:
    """JSON layout of an operator: row-major rows of [re, im] pairs."""
    return [[[float(z.real), float(z.imag)] for z in row] for row in op.matrix]


def operator_from_pairs(space: SpaceDescriptor, rows) -> OperatorMatrix:
    matrix = np.array(
        [[complex(re, im) for re, im in row] for row in rows], dtype=np.complex128
    )
    return OperatorMatrix(space, matrix)


def rabi_frequency(mu: float, n_photons: int, initial: str) -> float:
    """Rabi frequency of the JC doublet containing the given initial state.

    ``ground_with_n``: |g,n⟩ ↔ |e,n-1⟩ oscillates at Ω = 2μ√n.
    ``excited_with_n``: |e,n⟩ ↔ |g,n+1⟩ oscillates at Ω = 2μ√(n+1).
    """
    if initial == "ground_with_n":
        if n_photons < 1:
            raise NoDynamicsError(
                "|g, n=0⟩ is uncoupled; treat it as stationary"
            )
        return 2.0 * mu * math.sqrt(n_photons)
    if initial == "excited_with_n":
        if n_photons < 0:
            raise NoDynamicsError(f"photon number must be >= 0, got {n_photons}")
        return 2.0 * mu * math.sqrt(n_photons + 1)
    raise NoDynamicsError(f"unknown initial sector {initial!r}")


def jc_amplitudes(
    n_photons: int, mu: float, t: float, initial: str
) -> tuple[complex, complex]:
    """Closed-form JC amplitudes (on the initial state, on its partner).

    For ``initial="ground_with_n"`` the pair is (c_g, c_e) of
    |g,n⟩ ↔ |e,n-1⟩; for ``"excited_with_n"`` it is (c_e, c_g) of
    |e,n⟩ ↔ |g,n+1⟩.  In both sectors the surviving amplitude is
    cos(Ωt/2) and the transferred one -i sin(Ωt/2).
    """
    omega = rabi_frequency(mu, n_photons, initial)
    half = 0.5 * omega * t
    return complex(math.cos(half)), complex(-1j * math.sin(half))
