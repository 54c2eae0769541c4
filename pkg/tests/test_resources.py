from __future__ import annotations

import itertools

import numpy as np
import pytest
from scipy.linalg import expm

from molcontrol.pauli import PauliString
from molcontrol.resources import (
    compile_pauli_exponential,
    depth_upper_bound_pf1,
    depth_upper_bound_pf4,
    fmo_qubit_count,
    fmo_term_count,
    gate_counts,
    resource_sweep,
)

C_GRID = range(1, 8)
M_GRID = range(0, 4)


class TestCompile:
    def test_z(self):
        seq = compile_pauli_exponential("Z", 0.3)
        assert seq.cnot_count == 0 and seq.rotation_count == 1 and seq.basis_change_count == 0

    def test_zz(self):
        seq = compile_pauli_exponential("ZZ", 0.3)
        assert (seq.cnot_count, seq.rotation_count) == (2, 1)

    def test_xxyy(self):
        seq = compile_pauli_exponential("XXYY", 0.41)
        assert (seq.cnot_count, seq.rotation_count, seq.basis_change_count) == (6, 1, 8)
        ref = expm(-0.41j * PauliString("XXYY").matrix())
        np.testing.assert_allclose(seq.matrix(), ref, atol=1e-12)

    def test_identity_is_phase_only(self):
        seq = compile_pauli_exponential("III", 0.7)
        assert seq.phase_only and len(seq) == 0
        np.testing.assert_allclose(seq.matrix(), np.exp(-0.7j) * np.eye(8), atol=1e-15)

    @pytest.mark.parametrize("N", [1, 2, 3, 4, 5])
    def test_all_strings_match_exponential(self, N):
        rng = np.random.default_rng(N)
        for ops in itertools.product("IXYZ", repeat=N):
            s = "".join(ops)
            if set(s) == {"I"}:
                continue
            B = PauliString(s).matrix()
            for tau in rng.uniform(-np.pi, np.pi, 10):
                seq = compile_pauli_exponential(s, tau)
                np.testing.assert_allclose(seq.matrix(), expm(-1j * tau * B), atol=1e-12)
                counts = gate_counts(s)
                assert seq.cnot_count == counts["cnot"] == 2 * (PauliString(s).weight - 1)
                assert seq.basis_change_count == counts["basis"]


class TestCounts:
    @pytest.mark.parametrize("C,M,d,N", [(7, 2, 8, 49), (1, 0, 8, 1), (2, 1, 8, 8), (3, 2, 4, 15)])
    def test_qubits(self, C, M, d, N):
        assert fmo_qubit_count(C, M, d) == N

    @pytest.mark.parametrize("d", [3, 6, 0])
    def test_qubits_bad_d(self, d):
        with pytest.raises(ValueError):
            fmo_qubit_count(2, 1, d)

    @pytest.mark.parametrize("C,M,L", [(1, 0, 2), (7, 2, 336), (2, 3, 126)])
    def test_terms(self, C, M, L):
        assert fmo_term_count(C, M) == L

    def test_terms_bad(self):
        with pytest.raises(ValueError):
            fmo_term_count(0, 1)


class TestDepth:
    def test_formula(self):
        L = fmo_term_count(7, 2)
        ref = 5**4 * L * (L * 0.01 * 10.0) ** 1.25 / 1e-5**0.25
        assert depth_upper_bound_pf4(7, 2, 8, 0.01, 10.0, 1e-5) == pytest.approx(ref, rel=1e-12)

    def test_pinned_reference_point(self):
        # first computed value, kept as a regression pin
        assert depth_upper_bound_pf4(7, 2, 8, 0.01, 10.0, 1e-5) == pytest.approx(3.0209e8, rel=1e-4)

    def test_epsilon_doubling(self):
        a = depth_upper_bound_pf4(3, 1, 8, 0.01, 10.0, 1e-5)
        b = depth_upper_bound_pf4(3, 1, 8, 0.01, 10.0, 2e-5)
        assert a / b == pytest.approx(2**0.25)

    def test_pf1_larger_at_small_epsilon(self):
        assert depth_upper_bound_pf1(7, 2, 8, 0.01, 10.0, 1e-5) > depth_upper_bound_pf4(7, 2, 8, 0.01, 10.0, 1e-5)

    def test_monotone_over_grid(self):
        rows = resource_sweep(C_GRID, M_GRID, [8])
        table = {(r.C, r.M): r for r in rows}
        for C in C_GRID:
            for M in M_GRID:
                if C + 1 in C_GRID:
                    assert table[C + 1, M].depth > table[C, M].depth
                    assert table[C + 1, M].L > table[C, M].L
                if M + 1 in M_GRID:
                    assert table[C, M + 1].depth > table[C, M].depth
                    assert table[C, M + 1].L > table[C, M].L
        assert min(rows, key=lambda r: r.depth) is table[1, 0]

    def test_monotone_in_inverse_epsilon(self):
        eps = [1e-3, 1e-4, 1e-5, 1e-6]
        d = [depth_upper_bound_pf4(2, 1, 8, 0.01, 10.0, e) for e in eps]
        assert all(b > a for a, b in zip(d, d[1:]))

    def test_sweep_error_rows(self):
        rows = resource_sweep([1, 2], [1], [6, 8])
        bad = [r for r in rows if r.error]
        assert len(bad) == 2 and all(r.d == 6 and r.N is None for r in bad)
        assert len(resource_sweep([7], [2], [8])) == 1
