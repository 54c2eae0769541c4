"""Truncated-basis operators for molecular degrees of freedom and their qubit encoding.

Each degree of freedom is a register of ``ceil(log2 d)`` qubits holding the
binary label of its basis state.  Local operators are padded with zeros up
to a power of two, expanded in Pauli strings and lifted to the full layout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .pauli import PauliSum, decompose, embed_local, num_qubits_for, pad_registers

KINDS = ("harmonic_oscillator", "planar_rotor", "two_level")


@dataclass(frozen=True)
class BasisSpec:
    """One degree of freedom and its truncated basis.

    Attributes:
        kind: ``harmonic_oscillator``, ``planar_rotor`` or ``two_level``.
        d: basis size.
        mass: oscillator mass in electron masses.
        frequency: oscillator frequency in hartree.
        cutoff: rotor angular-momentum cutoff M, so that d = 2M + 1.
    """

    kind: str
    d: int
    mass: float | None = None
    frequency: float | None = None
    cutoff: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown basis kind {self.kind!r}")
        if self.kind == "harmonic_oscillator" and self.d < 2:
            raise ValueError("oscillator basis needs d >= 2")
        if self.kind == "planar_rotor":
            if self.cutoff is None or self.d != 2 * self.cutoff + 1:
                raise ValueError("rotor basis needs d = 2M + 1")
        if self.kind == "two_level" and self.d != 2:
            raise ValueError("two-level basis needs d = 2")

    @property
    def width(self) -> int:
        return num_qubits_for(self.d)


@dataclass(frozen=True)
class RegisterLayout:
    registers: tuple[BasisSpec, ...]

    @property
    def widths(self) -> tuple[int, ...]:
        return tuple(r.width for r in self.registers)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(r.d for r in self.registers)

    @property
    def width(self) -> int:
        return sum(self.widths)

    def offset(self, register: int) -> int:
        return sum(self.widths[:register])


@dataclass
class LocalTerm:
    """Dense operator on the registers listed in ``placement`` (kron order)."""

    matrix: np.ndarray
    placement: tuple[int, ...]
    label: str = ""


def qubit_count(M: int, d: int) -> int:
    """Qubits needed for M degrees of freedom with d levels each."""
    if M < 1 or d < 1:
        raise ValueError("M and d must be >= 1")
    return M * num_qubits_for(d)


def term_count_bound(M: int, k: int, d: int) -> int:
    """Upper bound on Pauli strings for a k-local operator on M registers."""
    if not 1 <= k <= M:
        raise ValueError(f"locality k={k} must lie in [1, M={M}]")
    return math.comb(M, k) * 2 ** (2 * k * num_qubits_for(d))


# -- harmonic oscillator ------------------------------------------------------


def ho_ladder_matrices(d: int) -> tuple[np.ndarray, np.ndarray]:
    """Lowering and raising operators truncated to d levels."""
    if d < 2:
        raise ValueError("d must be >= 2")
    a = np.diag(np.sqrt(np.arange(1, d, dtype=float)), 1)
    return a, a.T.copy()


def ho_position_matrix(d: int, mass: float, omega: float) -> np.ndarray:
    """Displacement ``(a + a^dagger) / sqrt(2 m omega)`` in a d-level basis."""
    if mass <= 0 or omega <= 0:
        raise ValueError("mass and omega must be positive")
    a, ad = ho_ladder_matrices(d)
    return (a + ad) / math.sqrt(2.0 * mass * omega)


def ho_momentum_matrix(d: int, mass: float, omega: float) -> np.ndarray:
    """Momentum ``i sqrt(m omega / 2) (a^dagger - a)``; complex Hermitian."""
    a, ad = ho_ladder_matrices(d)
    return 1j * math.sqrt(mass * omega / 2.0) * (ad - a)


def operator_function_of_position(
    f: Callable[[np.ndarray], np.ndarray],
    d_target: int,
    mass: float,
    omega: float,
    d_intermediate: int | None = None,
) -> np.ndarray:
    """Matrix of ``f(x)`` for the oscillator displacement x, via spectral calculus.

    The displacement is diagonalised in a larger basis so that truncation
    artefacts stay away from the low levels that are kept.

    Raises:
        ValueError: if the intermediate basis is too small or f is not
            finite on the spectrum.
    """
    if d_intermediate is None:
        d_intermediate = 8 * d_target
    if d_intermediate < 4 * d_target:
        raise ValueError("intermediate basis must be at least 4x the target size")
    x = ho_position_matrix(d_intermediate, mass, omega)
    evals, evecs = np.linalg.eigh(x)
    fx = np.asarray(f(evals), dtype=float) * np.ones_like(evals)
    if not np.all(np.isfinite(fx)):
        raise ValueError("f is not finite on the displacement spectrum")
    full = (evecs * fx) @ evecs.T
    return full[:d_target, :d_target]


def kinetic_matrix(d_target: int, mass: float, omega: float, d_intermediate: int | None = None) -> np.ndarray:
    """``p^2 / 2m`` squared in the intermediate basis, then truncated.

    Squaring after truncation loses the top-level matrix element, which
    shifts the highest kept level noticeably.
    """
    if d_intermediate is None:
        d_intermediate = 8 * d_target
    p = ho_momentum_matrix(d_intermediate, mass, omega)
    return ((p @ p).real / (2.0 * mass))[:d_target, :d_target]


# -- planar rotor -------------------------------------------------------------


def rotor_operators(M: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``L^2``, ``cos(phi)`` and ``sin(phi)`` in the basis m = -M..M."""
    if M < 1:
        raise ValueError("rotor cutoff must be >= 1")
    m = np.arange(-M, M + 1)
    L2 = np.diag((m**2).astype(float))
    diff = m[:, None] - m[None, :]
    cos = 0.5 * (np.abs(diff) == 1).astype(complex)
    sin = ((diff == 1).astype(complex) - (diff == -1).astype(complex)) / 2j
    return L2, cos, sin


# -- two-level ----------------------------------------------------------------

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.diag([1.0, -1.0]).astype(complex)
SIGMA_PLUS = np.array([[0, 1], [0, 0]], dtype=complex)
SIGMA_MINUS = SIGMA_PLUS.T.copy()


# -- assembly -----------------------------------------------------------------


def encode_term(term: LocalTerm, layout: RegisterLayout, threshold: float = 1e-12) -> PauliSum:
    """Pad, decompose and embed a single local operator.

    ``threshold`` is relative to the largest matrix entry, so operators in
    small units (hartree per V/m) are not wiped out.
    """
    dims = [layout.dims[p] for p in term.placement]
    padded = pad_registers(np.asarray(term.matrix), dims)
    scale = float(np.abs(padded).max()) if padded.size else 0.0
    local = decompose(padded, threshold=threshold * scale)
    return embed_local(local, term.placement, layout.widths)


def encode_operator(terms: Sequence[LocalTerm], layout: RegisterLayout, threshold: float = 1e-12) -> PauliSum:
    total = PauliSum(layout.width, {})
    for t in terms:
        total = total + encode_term(t, layout, threshold)
    biggest = max((abs(c) for c in total.terms.values()), default=0.0)
    return total.pruned(threshold * biggest)


def encode_hamiltonian(
    drift: Sequence[LocalTerm],
    control: Sequence[LocalTerm],
    layout: RegisterLayout,
    threshold: float = 1e-12,
) -> tuple[PauliSum, PauliSum]:
    """Encode drift and control parts separately.

    Returns:
        ``(g0, gc)`` so that the encoded Hamiltonian is ``g0 + f(t) * gc``.
    """
    return encode_operator(drift, layout, threshold), encode_operator(control, layout, threshold)


def locality(s: PauliSum, layout: RegisterLayout) -> int:
    """Largest number of registers any string of ``s`` acts on."""
    worst = 0
    for label in s.strings():
        touched = 0
        for i, w in enumerate(layout.widths):
            o = layout.offset(i)
            if any(c != "I" for c in label[o : o + w]):
                touched += 1
        worst = max(worst, touched)
    return worst

