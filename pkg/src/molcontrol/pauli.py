"""Pauli strings, weighted Pauli sums and dense-operator decomposition.

Conventions
-----------
* A Pauli string is written left to right, qubit 0 first.  Qubit 0 is the
  most significant bit of a computational-basis index, so the string
  ``"ZI"`` acts as ``diag(1, 1, -1, -1)``.
* ``decompose`` uses the normalised Hilbert-Schmidt inner product
  ``g = Tr(B A) / 2**N`` so that ``sum(g * B)`` reproduces ``A`` exactly.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

PAULI_LABELS = "IXYZ"
DROP_THRESHOLD = 1e-12

_SINGLE = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
_VALID = re.compile(r"^[IXYZ]*$")


class DimensionError(ValueError):
    """Operator dimension is not compatible with a qubit register."""


class PlacementError(ValueError):
    """Invalid register placement when embedding a local operator."""


def num_qubits_for(d: int) -> int:
    """Smallest w with 2**w >= d."""
    if d < 1:
        raise DimensionError(f"dimension must be >= 1, got {d}")
    return (d - 1).bit_length()


def is_power_of_two(d: int) -> bool:
    return d >= 1 and d & (d - 1) == 0


@dataclass(frozen=True)
class PauliString:
    """Tensor product of single-qubit Paulis, e.g. ``PauliString("XXYZ")``."""

    ops: str

    def __post_init__(self):
        if not _VALID.match(self.ops):
            raise ValueError(f"invalid Pauli string {self.ops!r}")

    def __str__(self) -> str:
        return self.ops

    @property
    def width(self) -> int:
        return len(self.ops)

    @property
    def weight(self) -> int:
        return sum(c != "I" for c in self.ops)

    @property
    def is_identity(self) -> bool:
        return self.weight == 0

    @cached_property
    def masks(self) -> tuple[int, int]:
        """(x_mask, z_mask) bit masks; Y sets both."""
        x = z = 0
        n = self.width
        for q, c in enumerate(self.ops):
            bit = 1 << (n - 1 - q)
            if c in "XY":
                x |= bit
            if c in "ZY":
                z |= bit
        return x, z

    @cached_property
    def action(self) -> tuple[np.ndarray, np.ndarray]:
        """Index map and phases so that ``(B @ v)[k] == phase[k] * v[perm[k]]``."""
        x, z = self.masks
        k = np.arange(1 << self.width, dtype=np.int64)
        perm = k ^ x
        parity = _popcount(perm & z) & 1
        n_y = self.ops.count("Y")
        phase = (1j**n_y) * np.where(parity, -1.0, 1.0)
        return perm, phase.astype(complex)

    def apply(self, vec: np.ndarray) -> np.ndarray:
        """Return B @ vec along axis 0 without building the matrix."""
        perm, phase = self.action
        shape = (-1,) + (1,) * (vec.ndim - 1)
        return phase.reshape(shape) * vec[perm]

    def matrix(self) -> np.ndarray:
        out = np.ones((1, 1), dtype=complex)
        for c in self.ops:
            out = np.kron(out, _SINGLE[c])
        return out


def _popcount(a: np.ndarray) -> np.ndarray:
    a = a.astype(np.int64)
    count = np.zeros_like(a)
    while np.any(a):
        count += a & 1
        a = a >> 1
    return count


def _label(x: int, z: int, n: int) -> str:
    chars = []
    for q in range(n):
        bit = 1 << (n - 1 - q)
        xb, zb = bool(x & bit), bool(z & bit)
        chars.append("Y" if xb and zb else "X" if xb else "Z" if zb else "I")
    return "".join(chars)


@dataclass
class PauliSum:
    """Weighted sum of Pauli strings on ``width`` qubits.

    Coefficients are stored per canonical string text; iteration is in
    lexicographic order so output files and product-formula orderings are
    reproducible.
    """

    width: int
    terms: dict[str, complex] = field(default_factory=dict)

    def __post_init__(self):
        merged: dict[str, complex] = {}
        for key, val in self.terms.items():
            key = str(key)
            if len(key) != self.width or not _VALID.match(key):
                raise DimensionError(f"string {key!r} does not fit width {self.width}")
            merged[key] = merged.get(key, 0.0) + val
        self.terms = {k: _simplify(merged[k]) for k in sorted(merged)}

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, complex]], width: int | None = None) -> PauliSum:
        pairs = list(pairs)
        if width is None:
            if not pairs:
                raise ValueError("width required for an empty sum")
            width = len(pairs[0][0])
        acc: dict[str, complex] = {}
        for s, c in pairs:
            acc[str(s)] = acc.get(str(s), 0.0) + c
        return cls(width, acc)

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms.items())

    def __getitem__(self, key: str) -> complex:
        return self.terms.get(key, 0.0)

    def strings(self) -> list[str]:
        return list(self.terms)

    def coefficients(self) -> np.ndarray:
        return np.array(list(self.terms.values()))

    @property
    def is_real(self) -> bool:
        return all(np.isrealobj(c) or abs(np.imag(c)) <= DROP_THRESHOLD for c in self.terms.values())

    def __add__(self, other: PauliSum) -> PauliSum:
        if other.width != self.width:
            raise DimensionError("cannot add sums of different width")
        acc = dict(self.terms)
        for k, v in other.terms.items():
            acc[k] = acc.get(k, 0.0) + v
        # exact cancellations leave no entry
        return PauliSum(self.width, {k: v for k, v in acc.items() if v != 0})

    def __mul__(self, scalar: complex) -> PauliSum:
        return PauliSum(self.width, {k: v * scalar for k, v in self.terms.items()})

    __rmul__ = __mul__

    def __neg__(self) -> PauliSum:
        return self * -1.0

    def pruned(self, threshold: float = DROP_THRESHOLD) -> PauliSum:
        return PauliSum(self.width, {k: v for k, v in self.terms.items() if abs(v) > threshold})

    def without_identity(self) -> PauliSum:
        ident = "I" * self.width
        return PauliSum(self.width, {k: v for k, v in self.terms.items() if k != ident})

    def identity_coefficient(self) -> complex:
        return self.terms.get("I" * self.width, 0.0)

    def to_matrix(self) -> np.ndarray:
        return reconstruct(self)

    def apply(self, vec: np.ndarray) -> np.ndarray:
        out = np.zeros_like(vec, dtype=complex)
        for s, c in self.terms.items():
            out += c * PauliString(s).apply(vec)
        return out

    def to_text(self, header: Sequence[str] = ()) -> str:
        lines = [f"# {h}" for h in header]
        for s, c in self.terms.items():
            lines.append(f"{s} {_fmt(c)}")
        return "\n".join(lines) + "\n"


def _simplify(c: complex) -> complex:
    c = complex(c)
    if abs(c.imag) <= DROP_THRESHOLD * max(1.0, abs(c.real)):
        return c.real
    return c


def _fmt(c: complex) -> str:
    if isinstance(c, complex):
        return f"{c.real!r}{c.imag:+.17g}j"
    return repr(float(c))


def pad_to_power_of_two(a: np.ndarray) -> np.ndarray:
    """Embed a d x d operator in the top-left block of a 2**ceil(log2 d) square."""
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise DimensionError(f"expected a non-empty square matrix, got shape {a.shape}")
    d = a.shape[0]
    size = 1 << num_qubits_for(d)
    out = np.zeros((size, size), dtype=np.result_type(a, float))
    out[:d, :d] = a
    return out


def pad_registers(a: np.ndarray, dims: Sequence[int]) -> np.ndarray:
    """Pad each tensor factor of ``a`` (over registers of sizes ``dims``) separately.

    For one register this is ``pad_to_power_of_two``.  For several, register
    basis states keep their binary labels inside each register.
    """
    a = np.asarray(a)
    total = int(np.prod(dims))
    if a.shape != (total, total):
        raise DimensionError(f"operator shape {a.shape} does not match registers {tuple(dims)}")
    padded = [1 << num_qubits_for(d) for d in dims]
    t = a.reshape(tuple(dims) * 2)
    out = np.zeros(tuple(padded) * 2, dtype=np.result_type(a, float))
    out[tuple(slice(0, d) for d in dims) * 2] = t
    size = int(np.prod(padded))
    return out.reshape(size, size)


def _walsh_hadamard(v: np.ndarray, n: int) -> np.ndarray:
    """Unnormalised Walsh-Hadamard transform along the last axis (length 2**n)."""
    lead = v.shape[:-1]
    t = v.reshape(lead + (2,) * n)
    for ax in range(len(lead), len(lead) + n):
        a = np.take(t, 0, axis=ax)
        b = np.take(t, 1, axis=ax)
        t = np.stack([a + b, a - b], axis=ax)
    return t.reshape(lead + (1 << n,))


def decompose(a: np.ndarray, threshold: float = DROP_THRESHOLD) -> PauliSum:
    """Expand a 2**N square operator in the Pauli basis.

    Uses a Walsh-Hadamard transform over each off-diagonal "x-mask" stripe,
    so the cost is O(N 4**N) rather than O(16**N).

    Raises:
        DimensionError: if the dimension is not a power of two.
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    dim = a.shape[0]
    if not is_power_of_two(dim):
        raise DimensionError(f"dimension {dim} is not a power of two; pad first")
    n = dim.bit_length() - 1
    j = np.arange(dim)
    stripes = a[j[None, :], j[None, :] ^ j[:, None]]  # stripes[x, j] = A[j, j ^ x]
    w = _walsh_hadamard(stripes, n) / dim
    x_idx, z_idx = np.nonzero(np.abs(w) > threshold)
    terms = {}
    for x, z in zip(x_idx.tolist(), z_idx.tolist()):
        n_y = bin(x & z).count("1")
        terms[_label(x, z, n)] = (1j**n_y) * w[x, z]
    return PauliSum(n, terms)


def reconstruct(s: PauliSum) -> np.ndarray:
    """Dense matrix of a Pauli sum."""
    dim = 1 << s.width
    out = np.zeros((dim, dim), dtype=complex)
    rows = np.arange(dim)
    for label, c in s.terms.items():
        perm, phase = PauliString(label).action
        out[rows, perm] += c * phase
    return out


def embed_local(
    term: PauliSum, placement: Sequence[int], layout: Sequence[int]
) -> PauliSum:
    """Lift a sum on a few registers to the full register layout.

    Args:
        term: operator on the placed registers, concatenated in ``placement`` order.
        placement: register indices the term acts on.
        layout: qubit width of every register, register 0 leftmost.
    """
    placement = list(placement)
    if len(set(placement)) != len(placement):
        raise PlacementError(f"overlapping placement {placement}")
    if any(p < 0 or p >= len(layout) for p in placement):
        raise PlacementError(f"placement {placement} out of range for {len(layout)} registers")
    if term.width != sum(layout[p] for p in placement):
        raise PlacementError("term width does not match the placed registers")
    offsets = [sum(layout[:i]) for i in range(len(layout))]
    total = sum(layout)
    out: dict[str, complex] = {}
    for label, c in term.terms.items():
        chars = ["I"] * total
        pos = 0
        for p in placement:
            w = layout[p]
            chars[offsets[p] : offsets[p] + w] = label[pos : pos + w]
            pos += w
        key = "".join(chars)
        out[key] = out.get(key, 0.0) + c
    return PauliSum(total, out)


def hs_table_convention(s: PauliSum) -> PauliSum:
    """Rescale to the orthonormal-basis convention ``Tr(B A) / sqrt(2**N)``.

    The appendix coefficient tables are printed in this convention.
    """
    return s * math.sqrt(2.0**s.width)


# -- text format -------------------------------------------------------------


@dataclass
class PauliTable:
    """Parsed coefficient table: one or more named coefficient columns."""

    columns: dict[str, PauliSum]
    meta: dict[str, str]

    def __getitem__(self, name: str) -> PauliSum:
        return self.columns[name]


def parse_pauli_table(text: str) -> PauliTable:
    """Parse ``<STRING> <coef> [<coef> ...]`` lines.

    ``# key: value`` comment lines are collected as metadata.  Recognised
    keys: ``columns`` (column names, default ``coef``) and ``scale``
    (per-column multipliers applied on load).
    """
    meta: dict[str, str] = {}
    rows: list[tuple[str, list[float]]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if ":" in body:
                k, v = body.split(":", 1)
                meta[k.strip().lower()] = v.strip()
            continue
        parts = line.split()
        label = parts[0]
        if not _VALID.match(label):
            raise ValueError(f"line {lineno}: invalid Pauli string {label!r}")
        try:
            vals = [complex(p) if "j" in p else float(p) for p in parts[1:]]
        except ValueError as exc:
            raise ValueError(f"line {lineno}: bad coefficient in {raw!r}") from exc
        if not vals:
            raise ValueError(f"line {lineno}: missing coefficient")
        rows.append((label, vals))
    if not rows:
        raise ValueError("empty Pauli table")
    names = meta.get("columns", "coef").split()
    scales = [float(x) for x in meta.get("scale", " ".join(["1"] * len(names))).split()]
    if len(scales) != len(names):
        raise ValueError("scale header does not match columns header")
    width = len(rows[0][0])
    cols: dict[str, dict[str, complex]] = {n: {} for n in names}
    for label, vals in rows:
        if len(label) != width:
            raise ValueError(f"inconsistent string width for {label!r}")
        if len(vals) != len(names):
            raise ValueError(f"{label}: expected {len(names)} coefficients, got {len(vals)}")
        for name, scale, v in zip(names, scales, vals):
            if v != 0:
                cols[name][label] = v * scale
    return PauliTable({n: PauliSum(width, t) for n, t in cols.items()}, meta)


def read_pauli_table(path: str | Path) -> PauliTable:
    return parse_pauli_table(Path(path).read_text())


def read_pauli_sum(path: str | Path, column: str | None = None) -> PauliSum:
    table = read_pauli_table(path)
    if column is None:
        column = next(iter(table.columns))
    return table[column]


def write_pauli_sum(path: str | Path, s: PauliSum, header: Sequence[str] = ()) -> None:
    Path(path).write_text(s.to_text(header))


def as_sum(terms: Mapping[str, complex]) -> PauliSum:
    """Shorthand: ``as_sum({"XZ": 0.5})``."""
    terms = dict(terms)
    width = len(next(iter(terms)))
    return PauliSum(width, terms)
