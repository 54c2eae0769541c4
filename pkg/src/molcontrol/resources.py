"""Gate lowering of Pauli exponentials and resource counts for scaled-up models."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .pauli import PauliString
from .trotter import depth_pf1, depth_pf2p

_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
_SDG = np.diag([1, -1j])
# one-qubit basis changes that map X or Y onto Z, and their inverses
BASIS_GATES = {
    "x_to_z": _H,
    "z_to_x": _H,
    "y_to_z": _H @ _SDG,
    "z_to_y": (_H @ _SDG).conj().T,
}


@dataclass(frozen=True)
class Gate:
    """``cnot`` (qubits = control, target), ``rz`` (angle) or a basis change (name)."""

    kind: str
    qubits: tuple[int, ...]
    angle: float = 0.0
    name: str = ""

    def matrix(self) -> np.ndarray:
        if self.kind == "rz":
            return np.diag([np.exp(-0.5j * self.angle), np.exp(0.5j * self.angle)])
        if self.kind == "basis":
            return BASIS_GATES[self.name]
        raise ValueError(f"{self.kind} is not a one-qubit gate")


@dataclass
class GateSequence:
    width: int
    gates: list[Gate] = field(default_factory=list)
    global_phase: float = 0.0
    phase_only: bool = False

    @property
    def cnot_count(self) -> int:
        return sum(g.kind == "cnot" for g in self.gates)

    @property
    def rotation_count(self) -> int:
        return sum(g.kind == "rz" for g in self.gates)

    @property
    def basis_change_count(self) -> int:
        return sum(g.kind == "basis" for g in self.gates)

    def __len__(self) -> int:
        return len(self.gates)

    def matrix(self) -> np.ndarray:
        """Dense unitary, gates applied in list order."""
        dim = 1 << self.width
        U = np.eye(dim, dtype=complex).reshape((2,) * self.width + (dim,))
        for g in self.gates:
            if g.kind == "cnot":
                c, t = g.qubits
                idx = [slice(None)] * self.width
                idx[c] = 1
                sub = U[tuple(idx)]
                t_ax = t if t < c else t - 1
                U[tuple(idx)] = np.flip(sub, axis=t_ax).copy()
            else:
                q = g.qubits[0]
                U = np.moveaxis(np.tensordot(g.matrix(), U, axes=([1], [q])), 0, q)
        return np.exp(1j * self.global_phase) * U.reshape(dim, dim)


def compile_pauli_exponential(B: PauliString | str, tau: float) -> GateSequence:
    """Lower ``exp(-i tau B)`` to basis changes, a CNOT ladder and one Rz.

    An identity string has no circuit; the result is flagged ``phase_only``
    and carries the phase ``-tau``.
    """
    B = PauliString(B) if isinstance(B, str) else B
    support = [q for q, c in enumerate(B.ops) if c != "I"]
    if not support:
        return GateSequence(B.width, [], -tau, phase_only=True)
    pre, post = [], []
    for q in support:
        c = B.ops[q]
        if c == "X":
            pre.append(Gate("basis", (q,), name="x_to_z"))
            post.append(Gate("basis", (q,), name="z_to_x"))
        elif c == "Y":
            pre.append(Gate("basis", (q,), name="y_to_z"))
            post.append(Gate("basis", (q,), name="z_to_y"))
    ladder = [Gate("cnot", (a, b)) for a, b in zip(support[:-1], support[1:])]
    gates = pre + ladder + [Gate("rz", (support[-1],), angle=2 * tau)] + ladder[::-1] + post
    return GateSequence(B.width, gates)


def gate_counts(B: PauliString | str) -> dict[str, int]:
    """Closed-form counts for a non-identity string."""
    B = PauliString(B) if isinstance(B, str) else B
    w = B.weight
    xy = sum(c in "XY" for c in B.ops)
    return {"cnot": 2 * (w - 1), "rotation": 1, "basis": 2 * xy}


# -- FMO scaling --------------------------------------------------------------


def fmo_qubit_count(C: int, M: int, d: int) -> int:
    """Qubits for C chromophores each coupled to M modes of d levels."""
    if d < 1 or d & (d - 1):
        raise ValueError(f"d={d} is not a power of two")
    if C < 1 or M < 0:
        raise ValueError("need C >= 1 and M >= 0")
    return (int(math.log2(d)) * M + 1) * C


def fmo_term_count(C: int, M: int) -> int:
    if C < 1 or M < 0:
        raise ValueError("need C >= 1 and M >= 0")
    return (1 + C + 20 * M) * C


def depth_upper_bound_pf4(C: int, M: int, d: int, Lambda_max: float, dt: float, epsilon: float) -> float:
    """Fourth-order depth estimate for a single time step."""
    fmo_qubit_count(C, M, d)  # validates d
    return depth_pf2p(fmo_term_count(C, M), Lambda_max, dt, epsilon, p=2, n_steps=1)


def depth_upper_bound_pf1(C: int, M: int, d: int, Lambda: float, dt: float, epsilon: float) -> float:
    fmo_qubit_count(C, M, d)
    return depth_pf1(fmo_term_count(C, M), Lambda, dt, epsilon, n_steps=1)


@dataclass
class ResourceRow:
    C: int
    M: int
    d: int
    N: int | None
    L: int | None
    depth: float | None
    error: str = ""


def resource_sweep(C_values: Iterable[int], M_values: Iterable[int], d_values: Iterable[int],
                   Lambda_max: float = 0.01, dt: float = 10.0, epsilon: float = 1e-5) -> list[ResourceRow]:
    """Grid of qubit counts, term counts and depth bounds; bad cells carry an error string."""
    rows = []
    for d in d_values:
        for M in M_values:
            for C in C_values:
                try:
                    N = fmo_qubit_count(C, M, d)
                    L = fmo_term_count(C, M)
                    D = depth_upper_bound_pf4(C, M, d, Lambda_max, dt, epsilon)
                    rows.append(ResourceRow(C, M, d, N, L, D))
                except ValueError as exc:
                    rows.append(ResourceRow(C, M, d, None, None, None, str(exc)))
    return rows
