import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from cavitysim.dynamics import (
    CouplingParams,
    OperatorMatrix,
    annihilation_a,
    atom_transition,
    build_jc_hamiltonian,
    build_vtype_hamiltonian,
    evolve_numeric,
    evolve_vtype_exact,
    jc_amplitudes,
    rabi_frequency,
)
from cavitysim.errors import (
    InvalidDimensionError,
    InvalidHamiltonianError,
    ModelMismatchError,
    NoDynamicsError,
)
from cavitysim.hilbert import StateVector, basis_index, basis_state, make_space


def random_state(space, seed):
    rng = np.random.default_rng(seed)
    amps = rng.normal(size=space.dim) + 1j * rng.normal(size=space.dim)
    return StateVector(space, amps / np.linalg.norm(amps))


def random_hermitian(space, seed):
    rng = np.random.default_rng(seed)
    m = rng.normal(size=(space.dim, space.dim)) + 1j * rng.normal(size=(space.dim, space.dim))
    return OperatorMatrix(space, (m + m.conj().T) / 2)


class TestCouplingParams:
    def test_defaults(self):
        p = CouplingParams()
        assert (p.g1, p.g2, p.mu1, p.mu2) == (1.0, 1.0, 1.0, 1.0)
        assert not p.physical_units

    def test_negative_coupling_rejected(self):
        with pytest.raises(InvalidDimensionError):
            CouplingParams(g1=-1.0)

    def test_nonfinite_rejected(self):
        with pytest.raises(InvalidDimensionError):
            CouplingParams(mu2=float("inf"))


class TestVTypeHamiltonian:
    def test_matrix_element_hand_derived(self):
        # expanding H on the 12-dim basis: <c,1,0| g1 a†|c><a| |a,0,0> = g1
        space = make_space(3, 2, 2)
        h = build_vtype_hamiltonian(space, 1.0, 0.0)
        row = basis_index(space, 2, 1, 0)
        col = basis_index(space, 0, 0, 0)
        assert h.matrix[row, col] == pytest.approx(1.0)

    def test_mode_b_element(self):
        space = make_space(3, 2, 2)
        h = build_vtype_hamiltonian(space, 0.0, 0.7)
        row = basis_index(space, 2, 0, 1)
        col = basis_index(space, 1, 0, 0)
        assert h.matrix[row, col] == pytest.approx(0.7)

    def test_zero_couplings_zero_matrix(self):
        h = build_vtype_hamiltonian(make_space(3, 2, 2), 0.0, 0.0)
        assert np.all(h.matrix == 0)

    @pytest.mark.parametrize("g1,g2", [(1.0, 1.0), (0.3, 1.7), (2.5, 0.0)])
    def test_hermitian(self, g1, g2):
        h = build_vtype_hamiltonian(make_space(3, 3, 3), g1, g2)
        assert h.hermiticity_defect() <= 1e-12

    def test_two_level_space_rejected(self):
        with pytest.raises(ModelMismatchError):
            build_vtype_hamiltonian(make_space(2, 2, 2), 1.0, 1.0)


class TestJCHamiltonian:
    def test_matrix_element_hand_derived(self):
        # <e,0,0| mu sigma†a |g,1,0> = mu
        space = make_space(2, 2, 2)
        v = build_jc_hamiltonian(space, "A", 1.0)
        row = basis_index(space, 1, 0, 0)
        col = basis_index(space, 0, 1, 0)
        assert v.matrix[row, col] == pytest.approx(1.0)

    def test_excitation_number_conserved(self):
        space = make_space(2, 3, 2)
        v = build_jc_hamiltonian(space, "A", 0.9)
        a = annihilation_a(space)
        n_exc = atom_transition(space, 1, 1) + a.conj().T @ a
        comm = v.matrix @ n_exc - n_exc @ v.matrix
        assert np.max(np.abs(comm)) <= 1e-12

    def test_zero_coupling(self):
        v = build_jc_hamiltonian(make_space(2, 2, 2), "B", 0.0)
        assert np.all(v.matrix == 0)

    def test_three_level_space_rejected(self):
        with pytest.raises(ModelMismatchError):
            build_jc_hamiltonian(make_space(3, 2, 2), "A", 1.0)


class TestEvolveNumeric:
    def test_zero_time_identity(self):
        space = make_space(3, 2, 2)
        psi = random_state(space, 2)
        out = evolve_numeric(psi, random_hermitian(space, 3), 0.0)
        np.testing.assert_allclose(out.amplitudes, psi.amplitudes, atol=1e-12)

    def test_semigroup_property(self):
        space = make_space(2, 2, 2)
        psi = random_state(space, 4)
        h = random_hermitian(space, 5)
        one = evolve_numeric(evolve_numeric(psi, h, 0.7), h, 0.9)
        two = evolve_numeric(psi, h, 1.6)
        np.testing.assert_allclose(one.amplitudes, two.amplitudes, atol=1e-10)

    @given(st.integers(0, 2**32 - 1), st.floats(0.0, 10.0))
    @settings(max_examples=30, deadline=None)
    def test_unitarity(self, seed, t):
        space = make_space(3, 2, 2)
        psi = random_state(space, seed)
        h = random_hermitian(space, seed + 17)
        assert evolve_numeric(psi, h, t).norm() == pytest.approx(1.0, abs=1e-12)

    def test_matches_series_expansion_oracle(self):
        space = make_space(3, 2, 2)
        psi = random_state(space, 6)
        h = random_hermitian(space, 7)
        mine = evolve_numeric(psi, h, 1.3)
        oracle = scipy.linalg.expm(-1j * h.matrix * 1.3) @ psi.amplitudes
        np.testing.assert_allclose(mine.amplitudes, oracle, atol=1e-12)

    def test_non_hermitian_rejected(self):
        space = make_space(2, 2, 2)
        m = np.zeros((8, 8), complex)
        m[0, 1] = 1.0
        with pytest.raises(InvalidHamiltonianError):
            evolve_numeric(basis_state(space, 0, 0, 0), OperatorMatrix(space, m), 1.0)


VTYPE_GRID = [
    (theta, phi, g1, g2, t)
    for theta in (0.0, math.pi / 8, math.pi / 4)
    for phi in (0.0, math.pi / 2)
    for g1, g2 in ((1.0, 1.0), (1.0, 0.7))
    for t in (0.3, 1.3, math.pi / 2)
]


class TestVTypeClosedForm:
    def test_zero_time_is_initial_superposition(self):
        psi = evolve_vtype_exact(0.6, 0.9, 1.0, 0.7, 0.0)
        assert psi.amplitude(0, 0, 0) == pytest.approx(math.cos(0.6), abs=1e-15)
        assert psi.amplitude(1, 0, 0) == pytest.approx(
            math.sin(0.6) * np.exp(0.9j), abs=1e-15
        )
        assert psi.amplitude(2, 1, 0) == 0.0

    def test_equal_couplings_quarter_superposition(self):
        # both lower amplitudes reach -i/sqrt(2) at g t = pi/2
        psi = evolve_vtype_exact(math.pi / 4, 0.0, 1.0, 1.0, math.pi / 2)
        assert psi.amplitude(2, 1, 0) == pytest.approx(-1j / math.sqrt(2), abs=1e-12)
        assert psi.amplitude(2, 0, 1) == pytest.approx(-1j / math.sqrt(2), abs=1e-12)
        assert psi.amplitude(0, 0, 0) == pytest.approx(0.0, abs=1e-12)
        assert psi.amplitude(1, 0, 0) == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("theta,phi,g1,g2,t", VTYPE_GRID)
    def test_matches_numeric_propagator(self, theta, phi, g1, g2, t):
        space = make_space(3, 2, 2)
        exact = evolve_vtype_exact(theta, phi, g1, g2, t, space)
        initial = evolve_vtype_exact(theta, phi, g1, g2, 0.0, space)
        h = build_vtype_hamiltonian(space, g1, g2)
        numeric = evolve_numeric(initial, h, t)
        np.testing.assert_allclose(exact.amplitudes, numeric.amplitudes, atol=1e-10)

    def test_arbitrary_parameters_match_numeric(self):
        space = make_space(3, 2, 2)
        exact = evolve_vtype_exact(0.6, 0.9, 1.0, 0.7, 1.3, space)
        initial = evolve_vtype_exact(0.6, 0.9, 1.0, 0.7, 0.0, space)
        numeric = evolve_numeric(initial, build_vtype_hamiltonian(space, 1.0, 0.7), 1.3)
        np.testing.assert_allclose(exact.amplitudes, numeric.amplitudes, atol=1e-10)

    def test_normalized(self):
        assert evolve_vtype_exact(0.4, 1.1, 0.8, 1.2, 2.3).norm() == pytest.approx(
            1.0, abs=1e-12
        )


class TestJCAmplitudes:
    def test_half_rabi_absorbs_photon(self):
        # Ωt/2 = pi/2: the atom absorbs the photon and is excited
        c_init, c_other = jc_amplitudes(1, 1.0, math.pi / 2, "ground_with_n")
        assert c_init == pytest.approx(0.0, abs=1e-15)
        assert c_other == pytest.approx(-1j, abs=1e-15)

    def test_full_rabi_cycle_is_population_noop(self):
        omega = rabi_frequency(1.3, 0, "excited_with_n")
        c_init, c_other = jc_amplitudes(0, 1.3, 2 * math.pi / omega, "excited_with_n")
        assert abs(c_init) == pytest.approx(1.0, abs=1e-12)
        assert abs(c_other) == pytest.approx(0.0, abs=1e-12)

    def test_eighth_cycle_amplitudes(self):
        c_init, c_other = jc_amplitudes(1, 1.0, math.pi / 4, "ground_with_n")
        assert c_init == pytest.approx(1 / math.sqrt(2), abs=1e-15)
        assert c_other == pytest.approx(-1j / math.sqrt(2), abs=1e-15)

    def test_normalization(self):
        for t in (0.0, 0.3, 1.7, 4.0):
            c_init, c_other = jc_amplitudes(2, 0.9, t, "excited_with_n")
            assert abs(c_init) ** 2 + abs(c_other) ** 2 == pytest.approx(1.0, abs=1e-15)

    def test_uncoupled_ground_sector_rejected(self):
        with pytest.raises(NoDynamicsError):
            jc_amplitudes(0, 1.0, 1.0, "ground_with_n")

    @pytest.mark.parametrize("sector", ["ground_with_n", "excited_with_n"])
    @pytest.mark.parametrize("n", [0, 1, 2])
    def test_matches_numeric_propagator(self, sector, n):
        if sector == "ground_with_n" and n == 0:
            pytest.skip("uncoupled sector")
        mu, t = 0.8, 1.1
        space = make_space(2, 4, 2)
        v = build_jc_hamiltonian(space, "A", mu)
        if sector == "ground_with_n":
            initial, partner = (0, n), (1, n - 1)
        else:
            initial, partner = (1, n), (0, n + 1)
        psi = basis_state(space, initial[0], initial[1], 0)
        out = evolve_numeric(psi, v, t)
        c_init, c_other = jc_amplitudes(n, mu, t, sector)
        assert out.amplitude(initial[0], initial[1], 0) == pytest.approx(c_init, abs=1e-12)
        assert out.amplitude(partner[0], partner[1], 0) == pytest.approx(c_other, abs=1e-12)

    def test_excitation_expectation_constant(self):
        space = make_space(2, 3, 2)
        v = build_jc_hamiltonian(space, "A", 1.1)
        a = annihilation_a(space)
        n_exc = atom_transition(space, 1, 1) + a.conj().T @ a
        psi = random_state(space, 13)
        expect0 = np.vdot(psi.amplitudes, n_exc @ psi.amplitudes).real
        for t in (0.5, 1.5, 3.0):
            out = evolve_numeric(psi, v, t)
            expect_t = np.vdot(out.amplitudes, n_exc @ out.amplitudes).real
            assert expect_t == pytest.approx(expect0, abs=1e-10)


class TestOperatorSerialization:
    def test_round_trip_bit_exact(self):
        space = make_space(3, 2, 2)
        h = build_vtype_hamiltonian(space, 1.0, 0.7)
        from cavitysim.dynamics import operator_from_pairs, operator_to_pairs

        back = operator_from_pairs(space, operator_to_pairs(h))
        assert np.array_equal(h.matrix, back.matrix)

    def test_golden_file(self):
        import json
        from pathlib import Path

        from cavitysim.dynamics import operator_to_pairs

        golden = json.loads(
            (Path(__file__).parent / "golden" / "vtype_hamiltonian_1_0.7.json").read_text()
        )
        h = build_vtype_hamiltonian(make_space(3, 2, 2), 1.0, 0.7)
        assert operator_to_pairs(h) == golden


class TestRabiConventionBridge:
    def test_vtype_phase_equals_jc_half_phase_in_one_excitation_sector(self):
        # g = mu sqrt(n+1) maps the three-level g·t phase onto the JC Ωt/2
        mu, t = 0.9, 1.3
        g = mu * math.sqrt(1)  # vacuum sector, one shared excitation
        psi3 = evolve_vtype_exact(0.0, 0.0, g, 0.0, t)
        c_init, c_other = jc_amplitudes(0, mu, t, "excited_with_n")
        assert psi3.amplitude(0, 0, 0) == pytest.approx(c_init, abs=1e-12)
        assert psi3.amplitude(2, 1, 0) == pytest.approx(c_other, abs=1e-12)


class TestTruncationLeakage:
    def test_vtype_vacuum_never_populates_two_photons(self):
        space = make_space(3, 3, 3)
        h = build_vtype_hamiltonian(space, 1.0, 0.7)
        initial = evolve_vtype_exact(math.pi / 4, 0.3, 1.0, 0.7, 0.0, space)
        for t in np.linspace(0.0, 4.0, 9):
            out = evolve_numeric(initial, h, float(t))
            leak = sum(
                abs(out.amplitude(atom, n_a, n_b)) ** 2
                for atom in range(3)
                for n_a in range(3)
                for n_b in range(3)
                if n_a > 1 or n_b > 1
            )
            assert leak < 1e-20
