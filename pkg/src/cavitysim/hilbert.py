"""Composite Hilbert-space bookkeeping for one atom and two cavity modes.

The composite space is atom ⊗ mode A ⊗ mode B with a fixed row-major basis
ordering (atom index slowest):

    index = atom * (dim_a * dim_b) + n_a * dim_b + n_b

Two-level atoms use levels ("g", "e") = (0, 1); three-level atoms use
("a", "b", "c") = (0, 1, 2), where "c" is the shared lower level of the
V configuration.  All containers are immutable after construction and every
operation is a pure function.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import (
    IncompatibleSpaceError,
    InvalidBipartitionError,
    InvalidDimensionError,
    LabelOutOfRangeError,
    NormalizationError,
)

LEVEL_NAMES = {2: ("g", "e"), 3: ("a", "b", "c")}

SUBSYSTEMS = ("atom", "mode_a", "mode_b")


@dataclass(frozen=True)
class SpaceDescriptor:
    """Dimensions of the atom ⊗ mode A ⊗ mode B product space.

    Full spaces (built by :func:`make_space`) have ``atom_levels`` in {2, 3}
    and Fock truncations ≥ 2.  Reduced descriptors returned by
    :func:`partial_trace` or :func:`extract_field_state` mark traced-out
    subsystems with dimension 1.
    """

    atom_levels: int
    dim_a: int
    dim_b: int

    @property
    def dim(self) -> int:
        return self.atom_levels * self.dim_a * self.dim_b

    @property
    def level_names(self) -> tuple[str, ...]:
        if self.atom_levels in LEVEL_NAMES:
            return LEVEL_NAMES[self.atom_levels]
        return tuple(str(i) for i in range(self.atom_levels))


def _frozen_array(values, shape_check=None) -> np.ndarray:
    arr = np.array(values, dtype=np.complex128)
    if shape_check is not None and arr.shape != shape_check:
        raise InvalidDimensionError(
            f"expected array of shape {shape_check}, got {arr.shape}"
        )
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class StateVector:
    """Pure state: one complex amplitude per basis state of ``space``."""

    space: SpaceDescriptor
    amplitudes: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "amplitudes", _frozen_array(self.amplitudes, (self.space.dim,))
        )

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalize(self) -> "StateVector":
        n = self.norm()
        if n == 0.0:
            raise NormalizationError("cannot normalize the zero vector")
        return StateVector(self.space, self.amplitudes / n)

    def amplitude(self, atom: int, n_a: int, n_b: int) -> complex:
        return complex(self.amplitudes[basis_index(self.space, atom, n_a, n_b)])


@dataclass(frozen=True)
class DensityMatrix:
    """Mixed state: dense complex matrix over the basis of ``space``."""

    space: SpaceDescriptor
    matrix: np.ndarray

    def __post_init__(self):
        d = self.space.dim
        object.__setattr__(self, "matrix", _frozen_array(self.matrix, (d, d)))

    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def purity(self) -> float:
        return float(np.trace(self.matrix @ self.matrix).real)

    def hermiticity_defect(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.matrix)[0])


def make_space(atom_levels: int, dim_a: int, dim_b: int) -> SpaceDescriptor:
    """Create a full composite space descriptor.

    Parameters
    ----------
    atom_levels : int
        2 for the {g, e} atom, 3 for the {a, b, c} V-type atom.
    dim_a, dim_b : int
        Fock truncations; photon numbers run 0 .. dim-1.  Must be ≥ 2.
    """
    if atom_levels not in (2, 3):
        raise InvalidDimensionError(f"atom_levels must be 2 or 3, got {atom_levels}")
    if dim_a < 2 or dim_b < 2:
        raise InvalidDimensionError(
            f"Fock truncations must be >= 2, got dim_a={dim_a}, dim_b={dim_b}"
        )
    return SpaceDescriptor(atom_levels, dim_a, dim_b)


def level_index(space: SpaceDescriptor, name: str) -> int:
    """Map an atomic level name ("g", "e", "a", "b", "c") to its index."""
    names = space.level_names
    if name not in names:
        raise LabelOutOfRangeError(
            f"level {name!r} not in {names} for a {space.atom_levels}-level atom"
        )
    return names.index(name)


def basis_index(space: SpaceDescriptor, atom: int, n_a: int, n_b: int) -> int:
    """Row-major basis index of |atom, n_a, n_b⟩ (atom slowest)."""
    if not (0 <= atom < space.atom_levels):
        raise LabelOutOfRangeError(f"atom index {atom} outside 0..{space.atom_levels - 1}")
    if not (0 <= n_a < space.dim_a):
        raise LabelOutOfRangeError(f"n_a={n_a} outside 0..{space.dim_a - 1}")
    if not (0 <= n_b < space.dim_b):
        raise LabelOutOfRangeError(f"n_b={n_b} outside 0..{space.dim_b - 1}")
    return atom * (space.dim_a * space.dim_b) + n_a * space.dim_b + n_b


def basis_labels(space: SpaceDescriptor, index: int) -> tuple[int, int, int]:
    """Inverse of :func:`basis_index`: decode (atom, n_a, n_b)."""
    if not (0 <= index < space.dim):
        raise LabelOutOfRangeError(f"index {index} outside 0..{space.dim - 1}")
    atom, rest = divmod(index, space.dim_a * space.dim_b)
    n_a, n_b = divmod(rest, space.dim_b)
    return atom, n_a, n_b


def basis_state(space: SpaceDescriptor, atom: int, n_a: int, n_b: int) -> StateVector:
    """Unit vector |atom, n_a, n_b⟩."""
    amps = np.zeros(space.dim, dtype=np.complex128)
    amps[basis_index(space, atom, n_a, n_b)] = 1.0
    return StateVector(space, amps)


def inner_product(x: StateVector, y: StateVector) -> complex:
    """⟨x|y⟩ with conjugation on the first argument."""
    if x.space != y.space:
        raise IncompatibleSpaceError(f"spaces differ: {x.space} vs {y.space}")
    return complex(np.vdot(x.amplitudes, y.amplitudes))


def _keep_axes(keep: Iterable[str]) -> tuple[int, ...]:
    keep_set = set(keep)
    unknown = keep_set - set(SUBSYSTEMS)
    if unknown:
        raise InvalidBipartitionError(f"unknown subsystems {sorted(unknown)}")
    if not keep_set or keep_set == set(SUBSYSTEMS):
        raise InvalidBipartitionError(
            "keep-set must be a non-empty proper subset of "
            f"{SUBSYSTEMS}, got {sorted(keep_set)}"
        )
    return tuple(i for i, name in enumerate(SUBSYSTEMS) if name in keep_set)


def partial_trace(rho: DensityMatrix, keep: Iterable[str]) -> DensityMatrix:
    """Trace out the subsystems not named in ``keep``.

    The result keeps the composite basis ordering, with traced-out axes
    reduced to dimension 1 in the descriptor.
    """
    keep_axes = _keep_axes(keep)
    space = rho.space
    dims = (space.atom_levels, space.dim_a, space.dim_b)
    tensor = rho.matrix.reshape(dims + dims)
    for axis in range(3):
        if axis not in keep_axes:
            # contract row axis with the matching column axis; traced axes
            # collapse to size 1 so downstream axis numbering is stable
            tensor = np.trace(tensor, axis1=axis, axis2=axis + 3)
            tensor = np.expand_dims(np.expand_dims(tensor, axis), axis + 3)
    new_dims = tuple(d if i in keep_axes else 1 for i, d in enumerate(dims))
    reduced = SpaceDescriptor(*new_dims)
    return DensityMatrix(reduced, tensor.reshape(reduced.dim, reduced.dim))


def pure_to_density(psi: StateVector) -> DensityMatrix:
    """|ψ⟩⟨ψ| for a normalized ψ (norm within 1e-9 of 1)."""
    if abs(psi.norm() - 1.0) > 1e-9:
        raise NormalizationError(f"state norm {psi.norm()} deviates from 1 by > 1e-9")
    return DensityMatrix(psi.space, np.outer(psi.amplitudes, psi.amplitudes.conj()))


def extract_field_state(psi: StateVector, atol: float = 1e-12) -> StateVector:
    """Field factor of a state whose atom sits in one definite level.

    Applies after a projective atomic detection: exactly one atom level may
    carry amplitude.  The returned vector lives on the reduced descriptor
    (1, dim_a, dim_b) and keeps the global phase of the populated row.
    """
    space = psi.space
    rows = psi.amplitudes.reshape(space.atom_levels, space.dim_a * space.dim_b)
    weights = np.linalg.norm(rows, axis=1)
    populated = int(np.argmax(weights))
    others = np.delete(weights, populated)
    if others.size and float(np.max(others)) > atol:
        raise IncompatibleSpaceError(
            "atom is not in a definite level; detect or trace it out first"
        )
    field = SpaceDescriptor(1, space.dim_a, space.dim_b)
    return StateVector(field, rows[populated] / weights[populated])


def state_to_pairs(psi: StateVector) -> list[list[float]]:
    """JSON layout of a state: list of [re, im] pairs in basis order."""
    return [[float(z.real), float(z.imag)] for z in psi.amplitudes]


def state_from_pairs(space: SpaceDescriptor, pairs) -> StateVector:
    amps = np.array([complex(re, im) for re, im in pairs], dtype=np.complex128)
    return StateVector(space, amps)
