"""Dense statevector simulation of Pauli-string exponentials."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._kernels import apply_exponentials
from .pauli import DimensionError, PauliString, PauliSum, _popcount

IMAG_TOL = 1e-10


@dataclass
class StateVector:
    """Amplitudes over the ``2**width`` computational basis states."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amp = np.array(self.amplitudes, dtype=complex).reshape(-1)
        dim = amp.shape[0]
        if dim < 1 or dim & (dim - 1):
            raise DimensionError(f"amplitude length {dim} is not a power of two")
        self.amplitudes = amp

    @classmethod
    def basis(cls, width: int, index: int = 0) -> StateVector:
        amp = np.zeros(1 << width, dtype=complex)
        amp[index] = 1.0
        return cls(amp)

    @classmethod
    def from_bits(cls, bits: str) -> StateVector:
        return cls.basis(len(bits), int(bits, 2))

    @property
    def width(self) -> int:
        return self.amplitudes.shape[0].bit_length() - 1

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def copy(self) -> StateVector:
        return StateVector(self.amplitudes.copy())

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def dump(self, path: str | Path, threshold: float = 0.0) -> None:
        """Write ``index re im`` lines for debugging."""
        lines = [f"# width: {self.width}"]
        for k, a in enumerate(self.amplitudes):
            if abs(a) > threshold:
                lines.append(f"{k} {float(a.real)!r} {float(a.imag)!r}")
        Path(path).write_text("\n".join(lines) + "\n")


def _check_width(state: StateVector, width: int) -> None:
    if state.width != width:
        raise DimensionError(f"operator width {width} does not match state width {state.width}")


def apply_pauli_exponential(state: StateVector, B: PauliString | str, tau: float) -> StateVector:
    """Apply ``exp(-i tau B)`` in place and return the state.

    Uses ``cos(tau) I - i sin(tau) B``, valid because every Pauli string
    squares to the identity.
    """
    B = PauliString(B) if isinstance(B, str) else B
    _check_width(state, B.width)
    perm, phase = B.action
    x, _ = B.masks
    stack = state.amplitudes.reshape(1, -1, 1)
    apply_exponentials(stack, x, phase, np.array([tau]))
    return state


def expectation(state: StateVector, S: PauliSum) -> float:
    """Exact ``<psi|S|psi>`` for a Hermitian Pauli sum."""
    _check_width(state, S.width)
    psi = state.amplitudes
    total = 0.0 + 0.0j
    for label, c in S.terms.items():
        total += c * np.vdot(psi, PauliString(label).apply(psi))
    if abs(total.imag) > IMAG_TOL * max(1.0, abs(total.real)):
        raise ValueError(f"expectation has imaginary part {total.imag:.3e}; is S Hermitian?")
    return float(total.real)


def _rotate_to_z(psi: np.ndarray, B: PauliString) -> np.ndarray:
    """Map X and Y sites of ``B`` onto Z with one-qubit basis changes."""
    n = B.width
    t = psi.reshape((2,) * n) if n else psi
    h = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
    hs = h @ np.diag([1, -1j])  # H S^dagger takes Y to Z
    for q, c in enumerate(B.ops):
        if c == "X":
            t = np.moveaxis(np.tensordot(h, t, axes=([1], [q])), 0, q)
        elif c == "Y":
            t = np.moveaxis(np.tensordot(hs, t, axes=([1], [q])), 0, q)
    return t.reshape(-1)


def sample_shots(state: StateVector, B: PauliString | str, shots: int, seed: int) -> float:
    """Shot-noise estimate of ``<B>`` from computational-basis samples.

    Raises:
        ValueError: if ``shots`` is not positive.
    """
    B = PauliString(B) if isinstance(B, str) else B
    _check_width(state, B.width)
    if shots <= 0:
        raise ValueError("shots must be positive")
    probs = np.abs(_rotate_to_z(state.amplitudes, B)) ** 2
    probs /= probs.sum()
    rng = np.random.default_rng(seed)
    outcomes = rng.choice(probs.shape[0], size=shots, p=probs)
    # eigenvalue of the rotated string is the parity over its support
    support = 0
    for q, c in enumerate(B.ops):
        if c != "I":
            support |= 1 << (B.width - 1 - q)
    eigen = 1 - 2 * (_popcount(np.arange(probs.shape[0]) & support) & 1)
    return float(np.mean(eigen[outcomes]))
