"""Entanglement and fidelity diagnostics on output field states.

Bell basis on the {0,1}⊗{0,1} field sector:
Φ± = (|0_A,0_B⟩ ± |1_A,1_B⟩)/√2,  Ψ± = (|0_A,1_B⟩ ± |1_A,0_B⟩)/√2.

Entropies are base 2 (a Bell state reads exactly 1 bit).  Field states are
StateVectors on reduced descriptors (1, dim_a, dim_b); see
`hilbert.extract_field_state`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import IncompatibleSpaceError, InvalidDimensionError, NormalizationError
from .hilbert import (
    DensityMatrix,
    SpaceDescriptor,
    StateVector,
    basis_index,
    inner_product,
    partial_trace,
    pure_to_density,
)

ENTROPY_EIGENVALUE_FLOOR = 1e-14
LEAKAGE_TOL = 1e-9

BELL_NAMES = ("phi_plus", "phi_minus", "psi_plus", "psi_minus")


@dataclass(frozen=True)
class BellDecomposition:
    """Complex overlaps with the four Bell vectors plus out-of-sector leakage."""

    phi_plus: complex
    phi_minus: complex
    psi_plus: complex
    psi_minus: complex
    leakage: float

    def probabilities(self) -> dict[str, float]:
        probs = {name: abs(getattr(self, name)) ** 2 for name in BELL_NAMES}
        probs["leakage"] = self.leakage
        return probs

    def total(self) -> float:
        return sum(abs(getattr(self, name)) ** 2 for name in BELL_NAMES) + self.leakage


def field_space(dim_a: int, dim_b: int) -> SpaceDescriptor:
    """Reduced descriptor for field-only states (atom traced out)."""
    return SpaceDescriptor(1, dim_a, dim_b)


def bell_state(name: str, space: SpaceDescriptor | None = None) -> StateVector:
    """One of the four Bell vectors as a field-only StateVector."""
    if space is None:
        space = field_space(2, 2)
    if space.atom_levels != 1 or space.dim_a < 2 or space.dim_b < 2:
        raise InvalidDimensionError(f"Bell states need a field space, got {space}")
    amps = np.zeros(space.dim, dtype=np.complex128)
    root = 1.0 / math.sqrt(2.0)
    if name == "phi_plus":
        pairs = (((0, 0), root), ((1, 1), root))
    elif name == "phi_minus":
        pairs = (((0, 0), root), ((1, 1), -root))
    elif name == "psi_plus":
        pairs = (((0, 1), root), ((1, 0), root))
    elif name == "psi_minus":
        pairs = (((0, 1), root), ((1, 0), -root))
    else:
        raise InvalidDimensionError(f"unknown Bell state {name!r}")
    for (n_a, n_b), amp in pairs:
        amps[basis_index(space, 0, n_a, n_b)] = amp
    return StateVector(space, amps)


def fidelity_up_to_global_phase(state: StateVector, target: StateVector) -> float:
    """|⟨target|state⟩|²; invariant under global phases of either argument."""
    return abs(inner_product(target, state)) ** 2


def bell_decompose(field_state: StateVector) -> BellDecomposition:
    """Overlaps of a field-only state with the Bell basis, plus leakage.

    Leakage is the probability outside the {0,1}⊗{0,1} photon sector, so
    the four |overlap|² values and the leakage sum to the state's norm².
    """
    space = field_state.space
    if space.atom_levels != 1:
        raise IncompatibleSpaceError(
            "bell_decompose expects a field-only state; extract or trace the atom first"
        )
    overlaps = {
        name: inner_product(bell_state(name, space), field_state) for name in BELL_NAMES
    }
    in_sector = sum(abs(z) ** 2 for z in overlaps.values())
    leakage = 0.0
    for n_a in range(space.dim_a):
        for n_b in range(space.dim_b):
            if n_a > 1 or n_b > 1:
                leakage += abs(field_state.amplitudes[basis_index(space, 0, n_a, n_b)]) ** 2
    # guard against rounding pushing the invariant off by more than float noise
    assert abs(in_sector + leakage - field_state.norm() ** 2) < 1e-12
    return BellDecomposition(leakage=leakage, **overlaps)


def two_qubit_field_block(rho: DensityMatrix, leak_tol: float = LEAKAGE_TOL) -> DensityMatrix:
    """Project a field density matrix into the {0,1}⊗{0,1} sector.

    Renormalizes when the out-of-sector probability is below ``leak_tol``;
    larger leakage raises, since the two-qubit measures below would be
    meaningless.
    """
    space = rho.space
    if space.atom_levels != 1:
        raise IncompatibleSpaceError("expected a field-only density matrix")
    idx = [basis_index(space, 0, n_a, n_b) for n_a in (0, 1) for n_b in (0, 1)]
    block = rho.matrix[np.ix_(idx, idx)]
    weight = float(np.trace(block).real)
    leakage = rho.trace() - weight
    if leakage > leak_tol:
        raise NormalizationError(
            f"field leakage {leakage:.3e} outside the two-qubit sector exceeds {leak_tol}"
        )
    if weight <= 0.0:
        raise NormalizationError("no probability left in the two-qubit sector")
    return DensityMatrix(field_space(2, 2), block / weight)


def concurrence(rho: DensityMatrix) -> float:
    """Wootters concurrence of a two-qubit density matrix.

    C(ρ) = max(0, λ1 - λ2 - λ3 - λ4) where λi are the decreasing square
    roots of the eigenvalues of ρ (σy⊗σy) ρ* (σy⊗σy).
    """
    if rho.space.dim != 4:
        raise InvalidDimensionError(
            f"concurrence is defined for 2x2 systems (dim 4), got dim {rho.space.dim}"
        )
    sigma_y = np.array([[0.0, -1j], [1j, 0.0]])
    yy = np.kron(sigma_y, sigma_y)
    # with rho = M M†, the λi equal the singular values of Mᵀ (σy⊗σy) M:
    # eig(ρ ρ̃) = eig(S†S) for S = Mᵀ YY M.  SVD of S avoids taking square
    # roots of rounding noise in near-zero eigenvalues of ρ ρ̃.
    w, v = np.linalg.eigh(rho.matrix)
    m = v * np.sqrt(np.clip(w, 0.0, None))
    lam = np.linalg.svd(m.T @ yy @ m, compute_uv=False)
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def entanglement_entropy(psi: StateVector, keep: Iterable[str]) -> float:
    """Von Neumann entropy (bits) of the reduced state on ``keep``.

    Eigenvalues below 1e-14 contribute zero.
    """
    reduced = partial_trace(pure_to_density(psi), keep)
    eigvals = np.linalg.eigvalsh(reduced.matrix)
    entropy = 0.0
    for p in eigvals:
        if p > ENTROPY_EIGENVALUE_FLOOR:
            entropy -= float(p) * math.log2(float(p))
    return entropy
