from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.special import comb

from molcontrol.encoding import (
    SIGMA_MINUS,
    SIGMA_PLUS,
    SIGMA_Z,
    BasisSpec,
    LocalTerm,
    RegisterLayout,
    encode_hamiltonian,
    encode_operator,
    ho_ladder_matrices,
    ho_position_matrix,
    locality,
    operator_function_of_position,
    qubit_count,
    rotor_operators,
    term_count_bound,
)
from molcontrol.pauli import PauliSum, decompose, hs_table_convention
from molcontrol.problems import build_coupled_rotors, build_fmo_dimer, build_morse_hf


class TestCounts:
    @pytest.mark.parametrize("M,d,N", [(1, 16, 4), (2, 7, 6), (1, 2, 1), (3, 5, 9)])
    def test_qubit_count(self, M, d, N):
        assert qubit_count(M, d) == N

    @pytest.mark.parametrize("M,k,d,L", [(2, 2, 7, 4096), (1, 1, 2, 4), (3, 2, 2, 48)])
    def test_term_bound(self, M, k, d, L):
        assert term_count_bound(M, k, d) == L
        assert L == comb(M, k, exact=True) * 4 ** (k * math.ceil(math.log2(d)))

    def test_locality_out_of_range(self):
        with pytest.raises(ValueError):
            term_count_bound(2, 3, 4)


class TestBasisSpec:
    def test_widths(self):
        assert BasisSpec("planar_rotor", 7, cutoff=3).width == 3
        assert BasisSpec("two_level", 2).width == 1
        layout = RegisterLayout((BasisSpec("two_level", 2), BasisSpec("harmonic_oscillator", 8)))
        assert layout.width == 4 and layout.offset(1) == 1

    @pytest.mark.parametrize("kind,d,kw", [("harmonic_oscillator", 1, {}), ("planar_rotor", 6, {"cutoff": 3}),
                                           ("two_level", 3, {}), ("morse", 4, {})])
    def test_invalid(self, kind, d, kw):
        with pytest.raises(ValueError):
            BasisSpec(kind, d, **kw)


class TestOscillator:
    def test_ladder_d2(self):
        a, ad = ho_ladder_matrices(2)
        np.testing.assert_array_equal(a, [[0, 1], [0, 0]])
        np.testing.assert_array_equal(ad, a.T)

    def test_ladder_d3(self):
        a, _ = ho_ladder_matrices(3)
        assert a[0, 1] == 1 and a[1, 2] == pytest.approx(math.sqrt(2))

    def test_number_operator_pattern(self):
        a, ad = ho_ladder_matrices(8)
        n = ad @ a
        np.testing.assert_allclose(np.diag(n), np.arange(8))
        s = decompose(n)
        # binary weights 4:2:1 on the three Z strings
        assert s["ZII"] == pytest.approx(-2.0)
        assert s["IZI"] == pytest.approx(-1.0)
        assert s["IIZ"] == pytest.approx(-0.5)

    def test_position(self):
        m, D, alpha = 1732.0, 0.2101, 1.22
        w = alpha * math.sqrt(2 * D / m)
        x = ho_position_matrix(16, m, w)
        assert w == pytest.approx(0.019003, rel=1e-4)
        assert x[0, 1] == pytest.approx(1 / math.sqrt(2 * m * w))
        assert x[0, 1] == pytest.approx(0.12323, abs=5e-5)
        assert not np.diag(x).any()
        np.testing.assert_array_equal(ho_position_matrix(2, 1, 1), ho_position_matrix(2, 1, 1).T)

    def test_function_identity(self):
        x = ho_position_matrix(8, 2.0, 0.5)
        y = operator_function_of_position(lambda r: r, 8, 2.0, 0.5)
        np.testing.assert_allclose(y, x, atol=1e-8)

    def test_function_constant(self):
        y = operator_function_of_position(lambda r: np.full_like(r, 3.0), 8, 2.0, 0.5)
        np.testing.assert_allclose(y, 3 * np.eye(8), atol=1e-12)

    def test_morse_minimum(self):
        D, alpha, m = 0.2101, 1.22, 1732.0
        w = alpha * math.sqrt(2 * D / m)
        V = operator_function_of_position(lambda r: D * (1 - np.exp(-alpha * r)) ** 2 - D, 16, m, w)
        # spectral image of V has its minimum near r = 0, where V = -D
        ev = np.linalg.eigvalsh(V)
        assert ev.min() >= -D - 1e-12
        assert ev.min() == pytest.approx(-D, abs=0.02)

    def test_function_rejects_small_intermediate(self):
        with pytest.raises(ValueError):
            operator_function_of_position(np.sin, 8, 1.0, 1.0, d_intermediate=16)

    def test_function_rejects_non_finite(self):
        with pytest.raises(ValueError):
            with np.errstate(divide="ignore"):
                operator_function_of_position(lambda r: 1 / np.zeros_like(r), 4, 1.0, 1.0)


class TestRotor:
    def test_m1(self):
        L2, cos, sin = rotor_operators(1)
        np.testing.assert_array_equal(np.diag(L2), [1, 0, 1])
        assert cos[0, 1] == 0.5
        np.testing.assert_allclose(sin, sin.conj().T)

    def test_cos_sin_identity(self):
        # cos^2 + sin^2 = I away from the truncation edge
        _, cos, sin = rotor_operators(4)
        S = cos @ cos + sin @ sin
        np.testing.assert_allclose(S[1:-1, 1:-1], np.eye(7), atol=1e-14)

    def test_objective_integers(self):
        _, cos, _ = rotor_operators(3)
        layout = RegisterLayout((BasisSpec("planar_rotor", 7, cutoff=3),) * 2)
        obs = hs_table_convention(encode_operator([LocalTerm(cos, (0,)), LocalTerm(cos, (1,))], layout))
        assert obs["IIIIIX"] == pytest.approx(3.0)
        assert obs["IIIXXX"] == pytest.approx(1.0)
        vals = np.array(list(obs.terms.values()))
        np.testing.assert_allclose(vals, np.round(vals), atol=1e-12)


class TestEncodeHamiltonian:
    def test_two_level(self):
        eps = 0.3
        layout = RegisterLayout((BasisSpec("two_level", 2),))
        g0, gc = encode_hamiltonian([LocalTerm(-eps / 2 * SIGMA_Z, (0,))], [], layout)
        assert g0.terms == {"Z": pytest.approx(-eps / 2)}
        assert len(gc) == 0

    def test_hopping_map(self):
        layout = RegisterLayout((BasisSpec("two_level", 2),) * 2)
        hop = np.kron(SIGMA_PLUS, SIGMA_MINUS) + np.kron(SIGMA_MINUS, SIGMA_PLUS)
        s = encode_operator([LocalTerm(hop, (0, 1))], layout)
        assert s.terms == {"XX": pytest.approx(0.5), "YY": pytest.approx(0.5)}

    def test_number_map(self):
        layout = RegisterLayout((BasisSpec("two_level", 2),))
        n = np.diag([0.0, 1.0])
        s = encode_operator([LocalTerm(n, (0,))], layout)
        assert s["Z"] == pytest.approx(-0.5)

    def test_rotor_control_pattern(self):
        P = build_coupled_rotors()
        gc = P.control
        assert all(set(k[:3]) == {"I"} or set(k[3:]) == {"I"} for k in gc.terms)
        # a real symmetric operator has only even numbers of Y
        assert all(k.count("Y") % 2 == 0 for k in gc.terms)


@pytest.fixture(scope="module")
def models():
    return [build_morse_hf(), build_coupled_rotors(), build_fmo_dimer()]


class TestModelInvariants:
    def test_hermitian(self, models):
        for P in models:
            for s in (P.drift, P.control, P.objective.observable):
                M = s.to_matrix()
                np.testing.assert_allclose(M, M.conj().T, atol=1e-12)

    def test_term_count_bound(self, models):
        for P in models:
            dims = P.layout.dims
            M = len(dims)
            k = max(locality(P.drift, P.layout), 1)
            bound = sum(term_count_bound(M, j, max(dims)) for j in range(1, k + 1)) + 1
            assert len(P.drift) <= bound

    def test_rotor_locality(self, models):
        P = models[1]
        assert locality(P.drift, P.layout) <= 2

    def test_morse_spectrum(self, models):
        P = models[0]
        w, D = P.params["omega"], P.params["D"]
        ev = np.linalg.eigvalsh(P.drift.to_matrix())[:3]
        for v in range(3):
            ref = w * (v + 0.5) - (w * (v + 0.5)) ** 2 / (4 * D) - D
            assert ev[v] == pytest.approx(ref, rel=0.02)

    def test_hf_table_string(self, models):
        assert 4 * models[0].drift["XXXX"] == pytest.approx(-0.038560085, rel=1e-5)

    def test_widths(self, models):
        assert [P.width for P in models] == [4, 6, 5]
