"""Desk-scale simulator for two-mode cavity QED protocols.

Bell-state engineering with a three-level V-type atom, and CNOT, Hadamard,
and field-swap gates with a two-level atom, over a truncated
atom ⊗ mode A ⊗ mode B Fock space, with an optional cavity-damping model.
"""

from .dynamics import (
    CouplingParams,
    OperatorMatrix,
    build_jc_hamiltonian,
    build_vtype_hamiltonian,
    evolve_numeric,
    evolve_vtype_exact,
    jc_amplitudes,
    operator_from_pairs,
    operator_to_pairs,
    rabi_frequency,
)
from .hilbert import (
    DensityMatrix,
    SpaceDescriptor,
    StateVector,
    basis_index,
    basis_labels,
    basis_state,
    extract_field_state,
    inner_product,
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
)
from .noise import DampingParams, lindblad_step, run_schedule_damped
from .protocols import (
    ProtocolResult,
    ProtocolSpec,
    TruthTable,
    build_bell_phi,
    build_bell_psi,
    build_cnot,
    build_hadamard,
    build_swap,
    extract_truth_table,
    run_protocol,
)
from .schedule import (
    PulseSegment,
    RunResult,
    Schedule,
    apply_segment,
    cavity_window,
    detect,
    detection_probability_pc,
    laser_pi,
    load_schedule,
    prepare_atom,
    rotation,
    run_schedule,
    save_schedule,
    stark,
)

__version__ = "0.1.0"
