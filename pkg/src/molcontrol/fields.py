"""Parameterised control-field waveforms.

Both waveforms share the envelope ``sin(pi t / T) ** (1 / p)``, which
vanishes at both ends of the control window.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np


def envelope(t: np.ndarray, T: float, p: float) -> np.ndarray:
    """``sin(pi t / T) ** (1/p)`` with tiny negative round-off clipped."""
    s = np.sin(np.pi * np.asarray(t, dtype=float) / T)
    return np.clip(s, 0.0, None) ** (1.0 / p)


def _check_window(t: np.ndarray, T: float) -> None:
    t = np.asarray(t)
    eps = 1e-12 * T
    if t.size and (t.min() < -eps or t.max() > T + eps):
        raise ValueError(f"field evaluated outside the control window [0, {T}]")


@dataclass
class CosineComb:
    """Envelope times a sum of detuned cosines.

    ``theta`` layout: ``[p, a_1..a_K, detuning_1..detuning_K, phase_1..phase_K]``;
    the base frequencies ``omega`` are fixed and not optimised.
    """

    T: float
    omega: np.ndarray
    p: float = 1.0
    amplitudes: np.ndarray | None = None
    detunings: np.ndarray | None = None
    phases: np.ndarray | None = None

    def __post_init__(self):
        self.omega = np.atleast_1d(np.asarray(self.omega, dtype=float))
        K = self.omega.size
        self.amplitudes = _vec(self.amplitudes, K)
        self.detunings = _vec(self.detunings, K)
        self.phases = _vec(self.phases, K)
        if self.p <= 0:
            raise ValueError("envelope exponent p must be positive")

    @property
    def n_components(self) -> int:
        return self.omega.size

    @property
    def theta(self) -> np.ndarray:
        return np.concatenate([[self.p], self.amplitudes, self.detunings, self.phases])

    def with_theta(self, theta) -> CosineComb:
        theta = np.asarray(theta, dtype=float)
        K = self.n_components
        if theta.size != 1 + 3 * K:
            raise ValueError(f"expected {1 + 3 * K} parameters, got {theta.size}")
        return CosineComb(self.T, self.omega, float(theta[0]), theta[1 : 1 + K],
                          theta[1 + K : 1 + 2 * K], theta[1 + 2 * K :])

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        _check_window(t, self.T)
        arg = (self.omega + self.detunings)[None, :] * t.reshape(-1, 1) - self.phases[None, :]
        comb = (self.amplitudes[None, :] * np.cos(arg)).sum(axis=1)
        return (envelope(t, self.T, self.p).reshape(-1) * comb).reshape(t.shape)

    def param_names(self) -> list[str]:
        K = self.n_components
        return ["p"] + [f"a{i}" for i in range(K)] + [f"delta{i}" for i in range(K)] + [f"phi{i}" for i in range(K)]

    def to_params(self) -> dict[str, float]:
        out = {"kind": "cosine", "T": self.T}
        out.update({f"omega{i}": w for i, w in enumerate(self.omega)})
        out.update(dict(zip(self.param_names(), self.theta)))
        return out


@dataclass
class GaussianComb:
    """Envelope times a sum of Gaussians (dimensionless rotating-frame profile).

    ``theta`` layout: ``[a_1..a_K, b_1..b_K, c_1..c_K]`` with centres
    ``b_j T`` and widths ``c_j T``.
    """

    T: float
    amplitudes: np.ndarray
    centers: np.ndarray
    widths: np.ndarray
    p: float = 2.0

    def __post_init__(self):
        self.amplitudes = np.atleast_1d(np.asarray(self.amplitudes, dtype=float))
        K = self.amplitudes.size
        self.centers = _vec(self.centers, K)
        self.widths = _vec(self.widths, K)

    @property
    def n_components(self) -> int:
        return self.amplitudes.size

    @property
    def theta(self) -> np.ndarray:
        return np.concatenate([self.amplitudes, self.centers, self.widths])

    def with_theta(self, theta) -> GaussianComb:
        theta = np.asarray(theta, dtype=float)
        K = self.n_components
        if theta.size != 3 * K:
            raise ValueError(f"expected {3 * K} parameters, got {theta.size}")
        return GaussianComb(self.T, theta[:K], theta[K : 2 * K], theta[2 * K :], self.p)

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        _check_window(t, self.T)
        tt = t.reshape(-1, 1)
        width = np.maximum(np.abs(self.widths), 1e-9) * self.T
        g = self.amplitudes[None, :] * np.exp(-((tt - self.centers[None, :] * self.T) ** 2) / width[None, :] ** 2)
        return (envelope(t, self.T, self.p).reshape(-1) * g.sum(axis=1)).reshape(t.shape)

    def param_names(self) -> list[str]:
        K = self.n_components
        return [f"a{i}" for i in range(K)] + [f"b{i}" for i in range(K)] + [f"c{i}" for i in range(K)]

    def to_params(self) -> dict[str, float]:
        out = {"kind": "gaussian", "T": self.T, "p": self.p}
        out.update(dict(zip(self.param_names(), self.theta)))
        return out


FieldParam = CosineComb | GaussianComb


def _vec(x, K: int) -> np.ndarray:
    if x is None:
        return np.zeros(K)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.size != K:
        raise ValueError(f"expected {K} values, got {x.size}")
    return x


def field_value(params: FieldParam, t: float, T: float | None = None) -> float:
    """Scalar field value; ``T`` if given must match the waveform's window."""
    if T is not None and not np.isclose(T, params.T):
        raise ValueError("window length does not match the field parameters")
    return float(params(np.array([t]))[0])


# -- name=value fixture files -------------------------------------------------


def save_field(path: str | Path, params: FieldParam, comments: dict[str, object] | None = None) -> None:
    lines = [f"# {k}: {v}" for k, v in (comments or {}).items()]
    for k, v in params.to_params().items():
        lines.append(f"{k}={v}" if isinstance(v, str) else f"{k}={float(v)!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def parse_field(text: str) -> FieldParam:
    vals: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected name=value, got {raw!r}")
        k, v = line.split("=", 1)
        vals[k.strip()] = v.strip()
    kind = vals.pop("kind", None)
    if "T" not in vals:
        raise ValueError("field file has no T entry")
    T = float(vals.pop("T"))

    def series(prefix: str) -> np.ndarray:
        keys = sorted((k for k in vals if k.startswith(prefix) and k[len(prefix):].isdigit()),
                      key=lambda k: int(k[len(prefix):]))
        return np.array([float(vals[k]) for k in keys])

    if kind == "cosine":
        return CosineComb(T, series("omega"), float(vals["p"]), series("a"), series("delta"), series("phi"))
    if kind == "gaussian":
        return GaussianComb(T, series("a"), series("b"), series("c"), float(vals.get("p", 2.0)))
    raise ValueError(f"unknown field kind {kind!r}")


def load_field(path: str | Path) -> FieldParam:
    return parse_field(Path(path).read_text())
