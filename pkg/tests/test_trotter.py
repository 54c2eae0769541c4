from __future__ import annotations

import numpy as np
import pytest
from scipy.linalg import expm

from molcontrol.pauli import PauliSum
from molcontrol.problems import build_morse_hf
from molcontrol.statevector import StateVector
from molcontrol.trotter import (
    DrivenHamiltonian,
    TrotterPlan,
    bound_pf1,
    bound_pf2p,
    depth_pf1,
    depth_pf2p,
    evolve,
    lambda_max,
    plan_for_duration,
    schedule_depth,
    schedule_for,
    step_pf1,
    step_suzuki,
    suzuki_gamma,
    total_propagator,
)


def static(terms: dict[str, float]) -> DrivenHamiltonian:
    width = len(next(iter(terms)))
    return DrivenHamiltonian(PauliSum(width, terms), PauliSum(width, {}))


def pf_step_matrix(H: DrivenHamiltonian, dt: float, n: int, order: int) -> np.ndarray:
    """Columns of one product-formula step applied to each basis state."""
    cols = []
    for k in range(H.dim):
        s = StateVector.basis(H.width, k)
        if order == 1:
            step_pf1(s, H, 0.0, dt, n)
        else:
            step_suzuki(s, H, 0.0, dt, n, order // 2)
        cols.append(s.amplitudes)
    return np.array(cols).T


def err(H, dt, n, order):
    exact = expm(-1j * dt * H.dense())
    return np.linalg.norm(pf_step_matrix(H, dt, n, order) - exact, 2)


class TestPlan:
    def test_validation(self):
        with pytest.raises(ValueError):
            TrotterPlan(3, 1, 0.1, 1)
        with pytest.raises(ValueError):
            TrotterPlan(1, 0, 0.1, 1)
        with pytest.raises(ValueError):
            TrotterPlan(1, 1, 0.0, 1)
        with pytest.raises(ValueError):
            TrotterPlan(1, 1, 0.1, -1)

    def test_hf_grid(self):
        P = build_morse_hf()
        plan = P.plan()
        assert plan.n_steps == 12083
        assert plan.total_time == pytest.approx(P.T)

    def test_midpoint(self):
        assert TrotterPlan(1, 1, 2.0, 3, midpoint=True).sample_times().tolist() == [1.0, 3.0, 5.0]
        assert TrotterPlan(1, 1, 2.0, 3).sample_times().tolist() == [0.0, 2.0, 4.0]

    def test_plan_for_duration(self):
        p = plan_for_duration(2, 4, 10.0, 3.0)
        assert p.n_steps == 3 and p.dt == pytest.approx(10 / 3)


class TestSteps:
    def test_single_term_exact(self):
        H = static({"Z": 0.7})
        assert err(H, 0.9, 1, 1) < 1e-14

    def test_commuting_exact(self):
        H = static({"ZI": 0.3, "IZ": -1.1, "ZZ": 0.4})
        assert err(H, 0.5, 1, 1) < 1e-14
        assert err(H, 0.5, 1, 2) < 1e-14

    @pytest.mark.parametrize("order,slope", [(1, -1), (2, -2), (4, -4)])
    def test_order_of_convergence(self, order, slope):
        H = static({"X": 1.0, "Z": 1.0})
        ns = [2, 4, 8, 16, 32]
        errs = [err(H, 0.5, n, order) for n in ns]
        fitted = np.polyfit(np.log(ns), np.log(errs), 1)[0]
        assert fitted == pytest.approx(slope, abs=0.2)

    def test_gamma(self):
        assert suzuki_gamma(2) == pytest.approx(1 / (4 - 4 ** (1 / 3)))
        assert suzuki_gamma(2) == pytest.approx(0.41449, abs=1e-5)

    def test_pf2_is_pf1_then_reversed(self):
        H = static({"XI": 0.4, "ZY": -0.7, "IZ": 1.3})
        dt = 0.37
        mats = {l: expm(-1j * c * dt / 2 * PauliSum(2, {l: 1.0}).to_matrix())
                for l, c in zip(H.labels, H.c0)}
        fwd = np.eye(4)
        for l in H.labels:
            fwd = mats[l] @ fwd
        rev = np.eye(4)
        for l in reversed(H.labels):
            rev = mats[l] @ rev
        np.testing.assert_allclose(pf_step_matrix(H, dt, 1, 2), rev @ fwd, atol=1e-12)

    def test_schedule_weights(self):
        for order in (1, 2, 4, 6):
            sched = schedule_for(order, 5)
            total = np.zeros(5)
            for t, w in sched:
                total[t] += w
            np.testing.assert_allclose(total, 1.0, atol=1e-12)

    def test_schedule_depth(self):
        assert schedule_depth(1, 10, 3) == 30
        assert schedule_depth(2, 10, 1) == 19


class TestEvolve:
    def test_zero_field_phases(self):
        w, dt, N = 0.8, 0.05, 40
        H = static({"Z": w})
        s = evolve(StateVector(np.array([1, 1]) / np.sqrt(2)), H, TrotterPlan(1, 1, dt, N))
        T = dt * N
        np.testing.assert_allclose(s.amplitudes, np.array([np.exp(-1j * w * T), np.exp(1j * w * T)]) / np.sqrt(2),
                                   atol=1e-13)

    def test_unitarity(self):
        rng = np.random.default_rng(0)
        g0 = PauliSum(3, {"XYZ": 0.3, "ZZI": -0.5, "IXX": 0.2, "III": 1.0})
        gc = PauliSum(3, {"XII": 1.0, "IYI": 0.5})
        H = DrivenHamiltonian(g0, gc, lambda t: np.sin(3 * t))
        v = rng.normal(size=8) + 1j * rng.normal(size=8)
        s = evolve(StateVector(v / np.linalg.norm(v)), H, TrotterPlan(4, 3, 0.05, 200))
        assert abs(s.norm - 1) < 1e-10

    def test_total_propagator_matches_steps(self):
        g0 = PauliSum(2, {"XY": 0.3, "ZZ": -0.5})
        gc = PauliSum(2, {"XI": 1.0})
        H = DrivenHamiltonian(g0, gc, lambda t: 1 + t)
        plan = TrotterPlan(2, 2, 0.1, 3)
        U = np.eye(4, dtype=complex)
        for k in range(3):
            cols = []
            for j in range(4):
                s = StateVector.basis(2, j)
                step_suzuki(s, H, k * 0.1, 0.1, 2, 1)
                cols.append(s.amplitudes)
            U = np.array(cols).T @ U
        np.testing.assert_allclose(total_propagator(H, plan), U, atol=1e-13)

    def test_identity_term_is_global_phase(self):
        H = DrivenHamiltonian(PauliSum(1, {"I": 0.5, "X": 0.2}), PauliSum(1, {"I": 0.1}), lambda t: 2.0 + 0 * t)
        U = total_propagator(H, TrotterPlan(1, 1, 0.3, 1))
        ref = expm(-1j * 0.3 * H.dense(2.0))
        np.testing.assert_allclose(U, ref, atol=1e-14)

    def test_non_finite_field(self):
        H = DrivenHamiltonian(PauliSum(1, {"X": 1.0}), PauliSum(1, {"Z": 1.0}), lambda t: np.full_like(t, np.nan))
        with pytest.raises(FloatingPointError):
            evolve(StateVector.basis(1), H, TrotterPlan(1, 1, 0.1, 2))

    def test_lambda_excludes_identity(self):
        H = DrivenHamiltonian(PauliSum(1, {"I": 100.0, "X": 0.2}), PauliSum(1, {"Z": 1.0}), lambda t: 0.5 + 0 * t)
        assert lambda_max(H, TrotterPlan(1, 1, 0.1, 2)) == pytest.approx(0.5)
        assert H.num_terms == 2


class TestBounds:
    def test_pf1_example(self):
        assert bound_pf1(2, 1.0, 0.1, 1, 1) == pytest.approx(0.04)

    def test_pf1_halves(self):
        assert bound_pf1(5, 0.3, 0.2, 8, 10) == pytest.approx(bound_pf1(5, 0.3, 0.2, 4, 10) / 2)

    def test_pf2_example(self):
        assert bound_pf2p(1, 1.0, 0.1, 1, 1, 1) == pytest.approx(0.008)

    def test_pf2_quadruple_n(self):
        assert bound_pf2p(3, 0.5, 0.1, 4, 7, 1) == pytest.approx(bound_pf2p(3, 0.5, 0.1, 1, 7, 1) / 16)

    def test_pf4_over_pf2_at_example_point(self):
        assert bound_pf2p(1, 1.0, 0.1, 1, 1, 2) / bound_pf2p(1, 1.0, 0.1, 1, 1, 1) == pytest.approx(125.0)

    def test_depths(self):
        assert depth_pf1(10, 0.1, 1.0, 0.01, 2) == pytest.approx(2 * 1000 * 0.01 / 0.01)
        ref = 5**4 * 3 * 10 * (10 * 0.1 * 1.0) ** 1.25 / 0.01**0.25
        assert depth_pf2p(10, 0.1, 1.0, 0.01, 2, 3) == pytest.approx(ref)

    @pytest.mark.parametrize("args", [(0, 1.0, 0.1, 1, 1), (1, -1.0, 0.1, 1, 1), (1, 1.0, 0.1, 0, 1)])
    def test_positive_arguments(self, args):
        with pytest.raises(ValueError):
            bound_pf1(*args)
