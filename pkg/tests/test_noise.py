import math

import numpy as np
import pytest

from cavitysim.dynamics import CouplingParams, OperatorMatrix, build_vtype_hamiltonian
from cavitysim.errors import IntegratorConfigError, InvalidHamiltonianError
from cavitysim.hilbert import basis_state, make_space, pure_to_density
from cavitysim.noise import (
    DampingParams,
    evolve_damped,
    fidelity_to_pure_target,
    lindblad_step,
    run_schedule_damped,
)
from cavitysim.protocols import build_bell_psi, extract_truth_table
from cavitysim.schedule import run_schedule

# paper-cited cavity lifetimes, 1 ms and 0.9 ms, as decay rates in 1/s
KAPPA_A = 1.0 / 1.0e-3
KAPPA_B = 1.0 / 0.9e-3

SPACE2 = make_space(2, 2, 2)
ZERO_H2 = OperatorMatrix(SPACE2, np.zeros((8, 8)))


def physical_params(g=2 * math.pi * 25e3):
    return CouplingParams(g, g, g, g, physical_units=True)


class TestDampingParams:
    def test_negative_rate_rejected(self):
        with pytest.raises(IntegratorConfigError):
            DampingParams(-1.0, 0.0, 0.01)

    def test_zero_dt_rejected(self):
        with pytest.raises(IntegratorConfigError):
            DampingParams(1.0, 1.0, 0.0)


class TestLindbladStep:
    def test_single_photon_decay_matches_closed_form(self):
        # H = 0, one photon in mode A: population follows e^{-kappa t}
        rho = pure_to_density(basis_state(SPACE2, 0, 1, 0))
        damping = DampingParams(kappa_a=1.0, kappa_b=0.0, dt=0.02)
        t = 0.0
        while t < 1.0 - 1e-12:
            rho = lindblad_step(rho, ZERO_H2, damping)
            t += damping.dt
        idx = 2  # |g,1,0>
        assert rho.matrix[idx, idx].real == pytest.approx(math.exp(-t), abs=1e-6)
        assert rho.matrix[0, 0].real == pytest.approx(1 - math.exp(-t), abs=1e-6)

    def test_trace_preserved_per_step(self):
        space = make_space(3, 2, 2)
        h = build_vtype_hamiltonian(space, 1.0, 0.7)
        rho = pure_to_density(basis_state(space, 0, 0, 0))
        damping = DampingParams(0.3, 0.2, 0.02)
        for _ in range(10):
            rho = lindblad_step(rho, h, damping)
            assert rho.trace() == pytest.approx(1.0, abs=1e-10)
            assert rho.hermiticity_defect() <= 1e-14

    def test_thousand_steps_trace(self):
        rho = pure_to_density(basis_state(SPACE2, 0, 1, 1))
        damping = DampingParams(0.5, 0.4, 0.01)
        for _ in range(1000):
            rho = lindblad_step(rho, ZERO_H2, damping)
        assert rho.trace() == pytest.approx(1.0, abs=1e-8)

    def test_positivity_proxy(self):
        space = make_space(2, 2, 2)
        from cavitysim.dynamics import build_jc_hamiltonian

        h = build_jc_hamiltonian(space, "A", 1.0)
        rho = pure_to_density(basis_state(space, 0, 1, 0))
        damping = DampingParams(0.3, 0.0, 0.01)
        for _ in range(400):
            rho = lindblad_step(rho, h, damping)
            assert rho.min_eigenvalue() >= -1e-8

    def test_photon_number_monotone_without_drive(self):
        rho = pure_to_density(basis_state(SPACE2, 0, 1, 1))
        damping = DampingParams(0.7, 0.9, 0.01)
        space = SPACE2
        from cavitysim.dynamics import annihilation_a, annihilation_b

        number = (
            annihilation_a(space).conj().T @ annihilation_a(space)
            + annihilation_b(space).conj().T @ annihilation_b(space)
        )
        last = np.trace(number @ rho.matrix).real
        for _ in range(300):
            rho = lindblad_step(rho, ZERO_H2, damping)
            current = np.trace(number @ rho.matrix).real
            assert current <= last + 1e-12
            last = current

    def test_step_bound_enforced(self):
        rho = pure_to_density(basis_state(SPACE2, 0, 1, 0))
        with pytest.raises(IntegratorConfigError):
            lindblad_step(rho, ZERO_H2, DampingParams(kappa_a=10.0, kappa_b=0.0, dt=0.01))

    def test_non_hermitian_rejected(self):
        m = np.zeros((8, 8), complex)
        m[0, 1] = 1.0
        rho = pure_to_density(basis_state(SPACE2, 0, 0, 0))
        with pytest.raises(InvalidHamiltonianError):
            lindblad_step(rho, OperatorMatrix(SPACE2, m), DampingParams(0.0, 0.0, 0.01))


class TestClosedSystemLimit:
    def test_zero_damping_matches_unitary(self):
        from cavitysim.dynamics import evolve_numeric, evolve_vtype_exact

        space = make_space(3, 2, 2)
        h = build_vtype_hamiltonian(space, 1.0, 0.7)
        psi0 = evolve_vtype_exact(0.6, 0.9, 1.0, 0.7, 0.0, space)
        damped = evolve_damped(
            pure_to_density(psi0), h, DampingParams(0.0, 0.0, 0.005), math.pi
        )
        exact = pure_to_density(evolve_numeric(psi0, h, math.pi))
        assert np.max(np.abs(damped.matrix - exact.matrix)) <= 1e-8

    def test_step_halving_convergence(self):
        space = make_space(3, 2, 2)
        h = build_vtype_hamiltonian(space, 1.0, 0.7)
        rho0 = pure_to_density(basis_state(space, 0, 0, 0))
        target = basis_state(space, 0, 0, 0)
        results = []
        for dt in (0.02, 0.01):
            rho = evolve_damped(rho0, h, DampingParams(0.1, 0.1, dt), 2.0)
            results.append(fidelity_to_pure_target(rho, target))
        assert abs(results[0] - results[1]) < 1e-6


class TestDampedSchedules:
    def test_zero_kappa_reproduces_pure_run(self):
        params = CouplingParams()
        sched = build_bell_psi(math.pi / 4, 0.0, 1, 1, params)
        ideal = run_schedule(sched, params).final_state
        res = run_schedule_damped(sched, params, DampingParams(0.0, 0.0, 0.005), target=ideal)
        assert res.fidelity == pytest.approx(1.0, abs=1e-8)
        assert res.success_probability == pytest.approx(1.0, abs=1e-8)

    def test_dimensionless_mode_rejects_damping(self):
        params = CouplingParams()  # no physical units declared
        sched = build_bell_psi(math.pi / 4, 0.0, 1, 1, params)
        with pytest.raises(IntegratorConfigError):
            run_schedule_damped(sched, params, DampingParams(KAPPA_A, KAPPA_B, 1e-7))

    def test_fidelity_monotone_in_kappa(self):
        params = physical_params()
        sched = build_bell_psi(math.pi / 4, 0.0, 1, 1, params)
        ideal = run_schedule(sched, params).final_state
        dt = 1.0 / (50.0 * params.g1)
        fidelities = []
        for scale in np.linspace(0.0, 1.0, 5):
            damping = DampingParams(scale * KAPPA_A, scale * KAPPA_B, dt)
            res = run_schedule_damped(sched, params, damping, target=ideal)
            fidelities.append(res.fidelity)
        assert fidelities[0] == pytest.approx(1.0, abs=1e-8)
        for weak, strong in zip(fidelities, fidelities[1:]):
            assert strong <= weak + 1e-12
        assert 0.0 < fidelities[-1] < 1.0

    def test_doubling_kappa_never_helps(self):
        params = physical_params()
        sched = build_bell_psi(math.pi / 4, 0.0, 1, 1, params)
        ideal = run_schedule(sched, params).final_state
        dt = 1.0 / (50.0 * params.g1)
        for scale in (0.25, 0.5):
            f1 = run_schedule_damped(
                sched, params, DampingParams(scale * KAPPA_A, scale * KAPPA_B, dt), target=ideal
            ).fidelity
            f2 = run_schedule_damped(
                sched,
                params,
                DampingParams(2 * scale * KAPPA_A, 2 * scale * KAPPA_B, dt),
                target=ideal,
            ).fidelity
            assert f2 <= f1 + 1e-12

    def test_damped_truth_table_loses_fidelity(self):
        params = physical_params()
        dt = 1.0 / (50.0 * params.mu1)
        table = extract_truth_table(
            "cnot", params=params, damping=DampingParams(KAPPA_A, KAPPA_B, dt)
        )
        assert all(r.fidelity < 1.0 for r in table.rows)
        assert all(r.fidelity > 0.9 for r in table.rows)

    def test_time_series_recording(self):
        params = physical_params()
        sched = build_bell_psi(math.pi / 4, 0.0, 1, 1, params)
        ideal = run_schedule(sched, params).final_state
        dt = 1.0 / (100.0 * params.g1)
        res = run_schedule_damped(
            sched,
            params,
            DampingParams(KAPPA_A, KAPPA_B, dt),
            target=ideal,
            record_series=True,
        )
        assert len(res.time_series) > 100
        times = [row[0] for row in res.time_series]
        assert times == sorted(times)
        for _, fid, trace, min_eig in res.time_series:
            assert 0.0 <= fid <= 1.0 + 1e-9
            assert trace == pytest.approx(1.0, abs=1e-8)
            assert min_eig >= -1e-8
