from __future__ import annotations

import itertools

import numpy as np
import pytest
from scipy.linalg import expm

from molcontrol.pauli import DimensionError, PauliString, PauliSum, decompose
from molcontrol.statevector import StateVector, apply_pauli_exponential, expectation, sample_shots


def random_state(width: int, rng) -> StateVector:
    v = rng.normal(size=2**width) + 1j * rng.normal(size=2**width)
    return StateVector(v / np.linalg.norm(v))


class TestStateVector:
    def test_basis(self):
        s = StateVector.basis(3, 5)
        assert s.width == 3
        assert s.amplitudes[5] == 1
        assert StateVector.from_bits("101").amplitudes[5] == 1

    def test_rejects_non_power_of_two(self):
        with pytest.raises(DimensionError):
            StateVector(np.ones(3) / np.sqrt(3))

    def test_dump(self, tmp_path):
        p = tmp_path / "psi.txt"
        StateVector.basis(1, 1).dump(p)
        rows = [l.split() for l in p.read_text().splitlines() if not l.startswith("#")]
        assert [(int(k), float(re), float(im)) for k, re, im in rows] == [(1, 1.0, 0.0)]


class TestExponential:
    def test_z_on_zero(self):
        s = apply_pauli_exponential(StateVector.basis(1), "Z", np.pi / 2)
        np.testing.assert_allclose(s.amplitudes, [-1j, 0], atol=1e-15)

    def test_x_on_zero(self):
        s = apply_pauli_exponential(StateVector.basis(1), "X", np.pi / 2)
        np.testing.assert_allclose(s.amplitudes, [0, -1j], atol=1e-15)

    def test_xx(self):
        s = apply_pauli_exponential(StateVector.basis(2), "XX", 0.3)
        np.testing.assert_allclose(s.amplitudes, [np.cos(0.3), 0, 0, -1j * np.sin(0.3)], atol=1e-15)

    def test_width_mismatch(self):
        with pytest.raises(DimensionError):
            apply_pauli_exponential(StateVector.basis(2), "X", 0.1)

    @pytest.mark.parametrize("N", [2, 3])
    def test_matches_expm_all_strings(self, N):
        rng = np.random.default_rng(N)
        for ops in itertools.product("IXYZ", repeat=N):
            B = PauliString("".join(ops))
            for tau in rng.uniform(-np.pi, np.pi, 20):
                psi = random_state(N, rng)
                ref = expm(-1j * tau * B.matrix()) @ psi.amplitudes
                got = apply_pauli_exponential(psi.copy(), B, tau).amplitudes
                np.testing.assert_allclose(got, ref, atol=1e-12)

    def test_composition(self):
        rng = np.random.default_rng(1)
        psi = random_state(3, rng)
        a = apply_pauli_exponential(apply_pauli_exponential(psi.copy(), "XYZ", 0.2), "XYZ", 0.5)
        b = apply_pauli_exponential(psi.copy(), "XYZ", 0.7)
        np.testing.assert_allclose(a.amplitudes, b.amplitudes, atol=1e-12)

    def test_norm_drift_million_ops(self):
        rng = np.random.default_rng(7)
        strings = [PauliString("".join(p)) for p in itertools.product("IXYZ", repeat=6)]
        picks = rng.integers(0, len(strings), 10**6)
        taus = rng.uniform(-np.pi, np.pi, 10**6)
        psi = random_state(6, rng)
        for k, tau in zip(picks, taus):
            apply_pauli_exponential(psi, strings[k], tau)
        assert abs(psi.norm - 1.0) < 1e-8


class TestExpectation:
    def test_z_on_zero(self):
        assert expectation(StateVector.basis(1), PauliSum(1, {"Z": 1.0})) == 1.0

    def test_x_on_plus(self):
        plus = StateVector(np.array([1, 1]) / np.sqrt(2))
        assert expectation(plus, PauliSum(1, {"X": 1.0})) == pytest.approx(1.0, abs=1e-15)

    def test_matches_dense(self):
        rng = np.random.default_rng(2)
        A = rng.normal(size=(8, 8))
        A = A + A.T
        psi = random_state(3, rng)
        ref = np.vdot(psi.amplitudes, A @ psi.amplitudes).real
        assert expectation(psi, decompose(A)) == pytest.approx(ref, abs=1e-12)

    def test_non_hermitian_rejected(self):
        plus = StateVector(np.array([1, 1]) / np.sqrt(2))
        with pytest.raises(ValueError):
            expectation(plus, PauliSum(1, {"X": 1j}))


class TestSampling:
    def test_deterministic_outcome(self):
        assert sample_shots(StateVector.basis(1), "Z", 17, seed=0) == 1.0

    def test_plus_in_z(self):
        plus = StateVector(np.array([1, 1]) / np.sqrt(2))
        assert abs(sample_shots(plus, "Z", 10**4, seed=1)) < 0.05

    def test_zero_in_x(self):
        assert abs(sample_shots(StateVector.basis(1), "X", 10**4, seed=2)) < 0.05

    def test_seed_determinism(self):
        psi = random_state(3, np.random.default_rng(0))
        assert sample_shots(psi, "XYZ", 1000, 5) == sample_shots(psi, "XYZ", 1000, 5)

    def test_zero_shots(self):
        with pytest.raises(ValueError):
            sample_shots(StateVector.basis(1), "Z", 0, 0)

    def test_convergence_rate(self):
        rng = np.random.default_rng(11)
        shots_list = [100, 1000, 10000]
        hits = total = 0
        for _ in range(10):
            psi = random_state(3, rng)
            B = PauliString("".join(rng.choice(list("IXYZ"), 3)))
            exact = expectation(psi, PauliSum(3, {B.ops: 1.0}))
            for shots in shots_list:
                for trial in range(10):
                    est = sample_shots(psi, B, shots, seed=int(rng.integers(2**31)))
                    hits += abs(est - exact) < 5 / np.sqrt(shots)
                    total += 1
        assert hits / total >= 0.99

    def test_error_shrinks_like_inverse_sqrt(self):
        psi = random_state(2, np.random.default_rng(4))
        exact = expectation(psi, PauliSum(2, {"XY": 1.0}))
        rms = []
        for shots in (100, 10000):
            errs = [sample_shots(psi, "XY", shots, seed=s) - exact for s in range(200)]
            rms.append(np.sqrt(np.mean(np.square(errs))))
        # 100x more shots -> 10x smaller error, within sampling noise
        assert 6 < rms[0] / rms[1] < 16
