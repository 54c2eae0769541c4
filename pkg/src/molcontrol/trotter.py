"""Trotter-Suzuki propagation of a field-driven Pauli Hamiltonian.

The Hamiltonian is ``H(t) = sum_l (g0_l + gc_l f(t)) B_l`` with the field held
constant over each of ``n_steps`` intervals of length ``dt``.  Within a step
the product formula is applied ``n`` times with step ``dt / n``.

A formula is represented as a *schedule*: a list of ``(term, weight)`` pairs
applied left to right, each meaning ``exp(-i g_term B_term weight dt / n)``.
Per-step propagators are assembled for all steps at once by running the
schedule on a stack of identity matrices.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ._kernels import apply_exponentials, run_schedule
from .pauli import PauliString, PauliSum
from .statevector import StateVector

Field = Callable[[np.ndarray], np.ndarray]
# max complex entries per propagator chunk (about 64 MB)
CHUNK_ENTRIES = 1 << 22


def _zero_field(t):
    return np.zeros_like(np.asarray(t, dtype=float))


def is_valid_order(order: int) -> bool:
    return order == 1 or (order >= 2 and order % 2 == 0)


@dataclass(frozen=True)
class TrotterPlan:
    """Product-formula settings.

    Attributes:
        order: 1, or an even order 2p.
        n: Trotter number per time step.
        dt: step length in atomic time units.
        n_steps: number of piecewise-constant steps; 0 means no evolution.
        midpoint: sample the field at step midpoints instead of left ends.
    """

    order: int
    n: int
    dt: float
    n_steps: int
    midpoint: bool = False

    def __post_init__(self):
        if not is_valid_order(self.order):
            raise ValueError(f"order must be 1 or even, got {self.order}")
        if self.n < 1:
            raise ValueError("Trotter number n must be >= 1")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.n_steps < 0:
            raise ValueError("n_steps must be >= 0")

    @property
    def total_time(self) -> float:
        return self.dt * self.n_steps

    def sample_times(self) -> np.ndarray:
        k = np.arange(self.n_steps, dtype=float)
        return (k + 0.5 if self.midpoint else k) * self.dt

    def with_n(self, n: int) -> TrotterPlan:
        return TrotterPlan(self.order, n, self.dt, self.n_steps, self.midpoint)

    def with_order(self, order: int) -> TrotterPlan:
        return TrotterPlan(order, self.n, self.dt, self.n_steps, self.midpoint)


def plan_for_duration(order: int, n: int, T: float, dt_target: float, midpoint: bool = False) -> TrotterPlan:
    """Plan with ``round(T / dt_target)`` steps of exactly ``T / n_steps``."""
    n_steps = max(1, int(round(T / dt_target)))
    return TrotterPlan(order, n, T / n_steps, n_steps, midpoint)


@dataclass
class DrivenHamiltonian:
    """Drift and control Pauli sums with a scalar field ``f(t)``.

    The identity string is split off as a global phase; it is excluded from
    the product-formula term list and from ``L`` and ``Lambda``.
    """

    g0: PauliSum
    gc: PauliSum
    field: Field = field(default=_zero_field)

    def __post_init__(self):
        if self.g0.width != self.gc.width:
            raise ValueError("drift and control sums must share a width")
        if not (self.g0.is_real and self.gc.is_real):
            raise ValueError("Hamiltonian coefficients must be real")
        ident = "I" * self.width
        labels = sorted((set(self.g0.terms) | set(self.gc.terms)) - {ident})
        self.labels: list[str] = labels
        self.c0 = np.array([float(np.real(self.g0[s])) for s in labels])
        self.cc = np.array([float(np.real(self.gc[s])) for s in labels])
        self.id0 = float(np.real(self.g0[ident]))
        self.idc = float(np.real(self.gc[ident]))
        self._actions = []
        for s in labels:
            ps = PauliString(s)
            self._actions.append((ps.masks[0], ps.action[1]))
        # packed copies for the fused column kernel
        self._xmasks = np.array([a[0] for a in self._actions], dtype=np.int64)
        self._phases = np.ascontiguousarray([a[1] for a in self._actions], dtype=complex).reshape(-1, self.dim)

    @property
    def width(self) -> int:
        return self.g0.width

    @property
    def dim(self) -> int:
        return 1 << self.width

    @property
    def num_terms(self) -> int:
        return len(self.labels)

    def with_field(self, f: Field) -> DrivenHamiltonian:
        """Shallow copy sharing the term tables, with a new field."""
        out = copy.copy(self)
        out.field = f
        return out

    def field_samples(self, plan: TrotterPlan) -> np.ndarray:
        t = plan.sample_times()
        if t.size == 0:
            return t
        vals = np.asarray(self.field(t), dtype=float) * np.ones_like(t)
        if not np.all(np.isfinite(vals)):
            raise FloatingPointError("field returned non-finite samples")
        return vals

    def coefficients(self, f: np.ndarray) -> np.ndarray:
        """``g_l`` for each field sample, shape (len(f), L)."""
        return self.c0[None, :] + np.asarray(f)[:, None] * self.cc[None, :]

    def dense(self, f: float = 0.0) -> np.ndarray:
        return (self.g0 + self.gc * f).to_matrix()

    def dense_parts(self) -> tuple[np.ndarray, np.ndarray]:
        return self.g0.to_matrix(), self.gc.to_matrix()

    def lambda_values(self, plan: TrotterPlan) -> np.ndarray:
        """``Lambda(t_k) = max_l |g_l(t_k)|`` at each sampled step."""
        f = self.field_samples(plan)
        if f.size == 0 or self.num_terms == 0:
            return np.zeros(f.size)
        return np.abs(self.coefficients(f)).max(axis=1)


def lambda_max(H: DrivenHamiltonian, plan: TrotterPlan) -> float:
    lam = H.lambda_values(plan)
    return float(lam.max()) if lam.size else 0.0


# -- schedules ----------------------------------------------------------------


def suzuki_gamma(p: int) -> float:
    """Recursion weight for order 2p."""
    return 1.0 / (4.0 - 4.0 ** (1.0 / (2 * p - 1)))


def _merge(schedule: list[tuple[int, float]]) -> list[tuple[int, float]]:
    out: list[tuple[int, float]] = []
    for term, w in schedule:
        if out and out[-1][0] == term:
            out[-1] = (term, out[-1][1] + w)
        else:
            out.append((term, w))
    return out


def schedule_pf1(L: int) -> list[tuple[int, float]]:
    return [(l, 1.0) for l in range(L)]


def schedule_suzuki(L: int, p: int) -> list[tuple[int, float]]:
    """``(term, weight)`` pairs of ``S_2p`` for a unit step; each term's weights sum to 1."""
    if p < 1:
        raise ValueError("p must be >= 1")
    if L == 0:
        return []
    if p == 1:
        half = [(l, 0.5) for l in range(L)]
        return _merge(half + half[::-1])
    inner = schedule_suzuki(L, p - 1)
    g = suzuki_gamma(p)
    outer = [(t, w * g) for t, w in inner]
    middle = [(t, w * (1.0 - 4.0 * g)) for t, w in inner]
    return _merge(outer + outer + middle + outer + outer)


def schedule_for(order: int, L: int) -> list[tuple[int, float]]:
    if order == 1:
        return schedule_pf1(L)
    return schedule_suzuki(L, order // 2)


def schedule_depth(order: int, L: int, n: int = 1) -> int:
    """Pauli exponentials per time step (adjacent repeats merged)."""
    return n * len(schedule_for(order, L))


# -- propagation --------------------------------------------------------------


def _apply_schedule(stack: np.ndarray, H: DrivenHamiltonian, coeffs: np.ndarray,
                    schedule: list[tuple[int, float]], tau_unit: float) -> None:
    for term, w in schedule:
        xmask, phase = H._actions[term]
        apply_exponentials(stack, xmask, phase, coeffs[:, term] * (w * tau_unit))


def step_propagators(H: DrivenHamiltonian, plan: TrotterPlan, f: np.ndarray | None = None,
                     start: int = 0, stop: int | None = None) -> np.ndarray:
    """Product-formula propagators for steps ``start..stop``, shape (k, dim, dim)."""
    if f is None:
        f = H.field_samples(plan)
    stop = plan.n_steps if stop is None else stop
    fk = f[start:stop]
    dim = H.dim
    stack = np.broadcast_to(np.eye(dim, dtype=complex), (fk.size, dim, dim)).copy()
    coeffs = H.coefficients(fk)
    _apply_schedule(stack, H, coeffs, schedule_for(plan.order, H.num_terms), plan.dt / plan.n)
    if plan.n > 1:
        stack = np.linalg.matrix_power(stack, plan.n)
    phase = np.exp(-1j * (H.id0 + H.idc * fk) * plan.dt)
    stack *= phase[:, None, None]
    return stack


def _chunks(plan: TrotterPlan, dim: int):
    size = max(1, CHUNK_ENTRIES // (dim * dim))
    for s in range(0, plan.n_steps, size):
        yield s, min(plan.n_steps, s + size)


def evolve_many(states: np.ndarray, H: DrivenHamiltonian, plan: TrotterPlan,
                step_builder=None) -> np.ndarray:
    """Propagate columns of ``states`` (dim, k) through all steps."""
    psi = np.array(states, dtype=complex)
    f = H.field_samples(plan)
    if step_builder is None and psi.shape[1] * plan.n < H.dim:
        return _run_columns(psi, H, plan, f)
    builder = step_builder or step_propagators
    for s, e in _chunks(plan, H.dim):
        for U in builder(H, plan, f, s, e):
            psi = U @ psi
    return psi


def _run_columns(psi: np.ndarray, H: DrivenHamiltonian, plan: TrotterPlan, f: np.ndarray) -> np.ndarray:
    """Apply the formula straight to a few columns; cheaper than building propagators."""
    if H.num_terms == 0 or f.size == 0:
        return psi * np.exp(-1j * (H.id0 + H.idc * f.sum()) * plan.dt)
    schedule = schedule_for(plan.order, H.num_terms)
    terms = np.array([t for t, _ in schedule], dtype=np.int64)
    weights = np.array([w for _, w in schedule])
    glob = np.exp(-1j * (H.id0 + H.idc * f) * plan.dt)
    run_schedule(psi, H._xmasks, H._phases, terms, weights, H.coefficients(f), plan.dt / plan.n, plan.n, glob)
    return psi


def evolve(state0: StateVector, H: DrivenHamiltonian, plan: TrotterPlan) -> StateVector:
    """Product-formula evolution of a single state over the whole plan."""
    if state0.width != H.width:
        raise ValueError("state and Hamiltonian widths differ")
    psi = evolve_many(state0.amplitudes[:, None], H, plan)
    return StateVector(psi[:, 0])


def total_propagator(H: DrivenHamiltonian, plan: TrotterPlan, step_builder=None) -> np.ndarray:
    """Ordered product of all step propagators (latest step leftmost)."""
    return evolve_many(np.eye(H.dim, dtype=complex), H, plan, step_builder)


def step_pf1(state: StateVector, H: DrivenHamiltonian, t: float, dt: float, n: int) -> StateVector:
    """One first-order step with the field frozen at ``t``; updates ``state`` in place."""
    return _single_step(state, H, t, dt, n, schedule_pf1(H.num_terms))


def step_suzuki(state: StateVector, H: DrivenHamiltonian, t: float, dt: float, n: int, p: int) -> StateVector:
    """One order-2p Suzuki step with the field frozen at ``t``; updates ``state`` in place."""
    return _single_step(state, H, t, dt, n, schedule_suzuki(H.num_terms, p))


def _single_step(state, H, t, dt, n, schedule):
    if state.width != H.width:
        raise ValueError("state and Hamiltonian widths differ")
    f = float(np.asarray(H.field(np.array([t])), dtype=float).reshape(-1)[0])
    coeffs = H.coefficients(np.array([f]))
    stack = state.amplitudes.reshape(1, -1, 1)
    for _ in range(n):
        _apply_schedule(stack, H, coeffs, schedule, dt / n)
    state.amplitudes *= np.exp(-1j * (H.id0 + H.idc * f) * dt)
    return state


# -- analytic bounds ----------------------------------------------------------


def bound_pf1(L: int, Lambda_max: float, dt: float, n: int, n_steps: int) -> float:
    """First-order total error estimate with unit prefactor."""
    _positive(L=L, Lambda_max=Lambda_max, dt=dt, n=n, n_steps=n_steps)
    return n_steps * L**2 * Lambda_max**2 * dt**2 / n


def bound_pf2p(L: int, Lambda_max: float, dt: float, n: int, n_steps: int, p: int) -> float:
    """Order-2p total error estimate with unit prefactor."""
    _positive(L=L, Lambda_max=Lambda_max, dt=dt, n=n, n_steps=n_steps, p=p)
    return n_steps * (2 * L * 5 ** (p - 1) * Lambda_max * dt) ** (2 * p + 1) / n ** (2 * p)


def error_bound(order: int, L: int, Lambda_max: float, dt: float, n: int, n_steps: int) -> float:
    if order == 1:
        return bound_pf1(L, Lambda_max, dt, n, n_steps)
    return bound_pf2p(L, Lambda_max, dt, n, n_steps, order // 2)


def depth_pf1(L: int, Lambda: float, dt: float, epsilon: float, n_steps: int = 1) -> float:
    _positive(L=L, Lambda=Lambda, dt=dt, epsilon=epsilon, n_steps=n_steps)
    return n_steps * L**3 * Lambda**2 * dt**2 / epsilon


def depth_pf2p(L: int, Lambda_max: float, dt: float, epsilon: float, p: int, n_steps: int = 1) -> float:
    _positive(L=L, Lambda_max=Lambda_max, dt=dt, epsilon=epsilon, p=p, n_steps=n_steps)
    return 5 ** (2 * p) * n_steps * L * (L * Lambda_max * dt) ** (1 + 1 / (2 * p)) / epsilon ** (1 / (2 * p))


def _positive(**kw):
    for k, v in kw.items():
        if not (v > 0 and math.isfinite(v)):
            raise ValueError(f"{k} must be positive and finite, got {v}")
