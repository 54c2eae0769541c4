from __future__ import annotations

import numpy as np
import pytest
from scipy.linalg import expm

from molcontrol.fields import CosineComb
from molcontrol.oracle import (
    DimensionCapExceeded,
    exact_evolve,
    exact_propagator,
    exact_step,
    outcome_projectors,
    probability_deviation_check,
    spectral_norm,
    trotter_error,
)
from molcontrol.pauli import PauliSum
from molcontrol.problems import build_coupled_rotors, build_morse_hf, evaluate_objective
from molcontrol.statevector import StateVector, expectation
from molcontrol.trotter import DrivenHamiltonian, TrotterPlan, evolve, total_propagator


def random_hermitian(dim, rng):
    A = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (A + A.conj().T) / 2


def zero(t):
    return np.zeros_like(np.asarray(t, dtype=float))


@pytest.fixture(scope="module")
def rotors():
    return build_coupled_rotors()


def dc_field(P, amplitude=1.2e7):
    # a single component detuned to zero frequency
    K = P.base_frequencies.size
    a = np.zeros(K)
    a[0] = amplitude
    dets = np.zeros(K)
    dets[0] = -P.base_frequencies[0]
    return CosineComb(P.T, P.base_frequencies, 4.0, a, dets, np.zeros(K))


class TestExactStep:
    def test_zero(self):
        np.testing.assert_allclose(exact_step(np.zeros((4, 4)), 0.7), np.eye(4), atol=1e-15)

    def test_z_pi(self):
        np.testing.assert_allclose(exact_step(np.diag([1.0, -1.0]), np.pi), -np.eye(2), atol=1e-14)

    def test_random_8x8(self):
        rng = np.random.default_rng(0)
        H = random_hermitian(8, rng)
        np.testing.assert_allclose(exact_step(H, 0.9), expm(-0.9j * H), atol=1e-10)

    def test_fifty_random_up_to_64(self):
        rng = np.random.default_rng(1)
        for k in range(50):
            dim = 2 ** (1 + k % 6)
            H = random_hermitian(dim, rng)
            dt = rng.uniform(0.01, 2.0)
            U = exact_step(H, dt)
            np.testing.assert_allclose(U, expm(-1j * dt * H), atol=1e-10)
            np.testing.assert_allclose(U.conj().T @ U, np.eye(dim), atol=1e-10)

    def test_stack(self):
        rng = np.random.default_rng(2)
        Hs = np.stack([random_hermitian(4, rng) for _ in range(3)])
        Us = exact_step(Hs, 0.3)
        for H, U in zip(Hs, Us):
            np.testing.assert_allclose(U, expm(-0.3j * H), atol=1e-12)

    def test_non_hermitian(self):
        with pytest.raises(ValueError):
            exact_step(np.array([[0.0, 1.0], [0.0, 0.0]]), 0.1)


class TestExactEvolve:
    def test_commuting_matches_pf(self):
        H = DrivenHamiltonian(PauliSum(2, {"ZI": 0.4, "ZZ": -0.3}), PauliSum(2, {"IZ": 1.0}), lambda t: np.cos(t))
        s0 = StateVector(np.full(4, 0.5, dtype=complex))
        a = exact_evolve(s0, H, 0.1, 20)
        b = evolve(s0.copy(), H, TrotterPlan(1, 1, 0.1, 20))
        np.testing.assert_allclose(a.amplitudes, b.amplitudes, atol=1e-12)

    def test_hf_ground_state_stationary(self):
        P = build_morse_hf()
        evals, evecs = np.linalg.eigh(P.drift.to_matrix())
        g = StateVector(evecs[:, 0].astype(complex))
        r0 = expectation(g, P.objective.observable)
        plan = P.plan()
        out = exact_evolve(g, P.hamiltonian(zero), plan.dt, plan.n_steps)
        assert abs(expectation(out, P.objective.observable) - r0) < 1e-6

    def test_rotor_orientation_under_field(self, rotors):
        plan = rotors.plan()
        J = evaluate_objective(rotors, dc_field(rotors), plan, method="exact")
        assert J < 1.0 - 1e-3


class TestTrotterError:
    def test_norm_routine(self):
        assert spectral_norm(np.diag([1.0, -1.0]) - np.eye(2)) == pytest.approx(2.0)

    def test_power_iteration_agrees(self):
        rng = np.random.default_rng(3)
        u, v = rng.normal(size=(2, 1100))
        A = 3 * np.outer(u, v) / (np.linalg.norm(u) * np.linalg.norm(v)) + rng.normal(size=(1100, 1100)) / 200
        ref = np.linalg.svd(A, compute_uv=False)[0]
        assert spectral_norm(A) == pytest.approx(ref, rel=1e-8)

    def test_single_term_zero(self):
        H = DrivenHamiltonian(PauliSum(1, {"X": 0.3}), PauliSum(1, {"X": 1.0}), lambda t: np.sin(t))
        assert trotter_error(H, TrotterPlan(1, 1, 0.2, 10)) < 1e-12

    def test_exact_propagator_unitary(self):
        H = DrivenHamiltonian(PauliSum(2, {"XY": 0.3, "ZZ": 0.5}), PauliSum(2, {"XI": 1.0}), lambda t: t)
        U = exact_propagator(H, TrotterPlan(1, 1, 0.1, 5))
        np.testing.assert_allclose(U.conj().T @ U, np.eye(4), atol=1e-10)

    def test_hf_pf1_monotone_in_n(self):
        P = build_morse_hf()
        H = P.hamiltonian(zero)
        plan = TrotterPlan(1, 1, P.plan().dt, 200)
        ex = exact_propagator(H, plan)
        errs = [trotter_error(H, plan.with_n(n), exact=ex) for n in (1, 2, 4, 8)]
        assert all(b < a for a, b in zip(errs, errs[1:]))

    def test_dimension_cap(self):
        H = DrivenHamiltonian(PauliSum(3, {"XXX": 1.0}), PauliSum(3, {}))
        with pytest.raises(DimensionCapExceeded):
            trotter_error(H, TrotterPlan(1, 1, 0.1, 1), dim_cap=4)


class TestProbabilityDeviation:
    def test_identical(self):
        s = StateVector(np.array([0.6, 0.8j]))
        r = probability_deviation_check(s, s, PauliSum(1, {"Z": 1.0}), 0.0)
        assert r.max_deviation == 0.0 and r.ok

    def test_orthogonal_vacuous(self):
        r = probability_deviation_check(StateVector.basis(1, 0), StateVector.basis(1, 1), PauliSum(1, {"Z": 1.0}), 1.0)
        assert r.max_deviation == pytest.approx(1.0)
        assert r.ok and r.margin == pytest.approx(1.0)

    def test_degenerate_outcomes_grouped(self):
        Ps = outcome_projectors(PauliSum(2, {"ZI": 1.0}))
        assert [V.shape[1] for V in Ps] == [2, 2]

    def test_rotor_pf1_n4(self, rotors):
        H = rotors.hamiltonian(dc_field(rotors))
        plan = rotors.plan(order=1, n=4)
        U_pf = total_propagator(H, plan)
        U_ex = exact_propagator(H, plan)
        eps = spectral_norm(U_pf - U_ex)
        psi0 = rotors.initial_states()[:, 0]
        r = probability_deviation_check(U_ex @ psi0, U_pf @ psi0, rotors.objective.observable, eps)
        assert r.ok
        assert r.margin > 0
