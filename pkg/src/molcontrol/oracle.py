"""Exact piecewise-constant propagation and Trotter-error measurement.

"Exact" here means exact per time step: each step uses the matrix
exponential of the frozen Hamiltonian, so the only remaining approximation
is the piecewise-constant field itself, which is part of the problem.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .pauli import PauliSum
from .statevector import StateVector
from .trotter import DrivenHamiltonian, TrotterPlan, evolve_many, total_propagator

HERMITIAN_TOL = 1e-10
DEFAULT_DIM_CAP = 1 << 10
SVD_CAP = 1024


class DimensionCapExceeded(ValueError):
    """Dense propagators would exceed the configured dimension cap."""


def _check_hermitian(H: np.ndarray) -> None:
    asym = np.abs(H - np.swapaxes(H, -1, -2).conj()).max() if H.size else 0.0
    if asym > HERMITIAN_TOL:
        raise ValueError(f"Hamiltonian is not Hermitian (asymmetry {asym:.2e})")


def exact_step(H_t: np.ndarray, dt: float) -> np.ndarray:
    """``exp(-i H dt)`` by eigendecomposition; accepts a stack of Hamiltonians."""
    H_t = np.asarray(H_t)
    _check_hermitian(H_t)
    if np.iscomplexobj(H_t) and not np.any(H_t.imag):
        H_t = H_t.real  # real symmetric eigh is about twice as fast
    evals, evecs = np.linalg.eigh(H_t)
    phases = np.exp(-1j * evals * dt)
    return (evecs * phases[..., None, :]) @ np.swapaxes(evecs, -1, -2).conj()


def exact_step_propagators(H: DrivenHamiltonian, plan: TrotterPlan, f: np.ndarray | None = None,
                           start: int = 0, stop: int | None = None) -> np.ndarray:
    """Exact step propagators, with the same signature as the product-formula builder."""
    if f is None:
        f = H.field_samples(plan)
    stop = plan.n_steps if stop is None else stop
    fk = f[start:stop]
    h0, hc = _dense_parts(H)
    stack = h0[None, :, :] + fk[:, None, None] * hc[None, :, :]
    return exact_step(stack, plan.dt)


def _dense_parts(H: DrivenHamiltonian) -> tuple[np.ndarray, np.ndarray]:
    cache = getattr(H, "_dense_cache", None)
    if cache is None:
        cache = tuple(m.real if not np.any(m.imag) else m for m in H.dense_parts())
        H._dense_cache = cache
    return cache


def exact_evolve(state0: StateVector, H: DrivenHamiltonian, dt: float, n_steps: int,
                 midpoint: bool = False) -> StateVector:
    plan = TrotterPlan(1, 1, dt, n_steps, midpoint)
    psi = evolve_many(state0.amplitudes[:, None], H, plan, exact_step_propagators)
    return StateVector(psi[:, 0])


def exact_evolve_many(states: np.ndarray, H: DrivenHamiltonian, plan: TrotterPlan) -> np.ndarray:
    return evolve_many(states, H, plan, exact_step_propagators)


def exact_propagator(H: DrivenHamiltonian, plan: TrotterPlan) -> np.ndarray:
    return total_propagator(H, plan, exact_step_propagators)


def spectral_norm(A: np.ndarray, iters: int = 500, seed: int = 0) -> float:
    """Largest singular value; full SVD up to 1024, power iteration above."""
    A = np.asarray(A)
    if max(A.shape) <= SVD_CAP:
        return float(np.linalg.svd(A, compute_uv=False)[0]) if A.size else 0.0
    rng = np.random.default_rng(seed)
    v = rng.normal(size=A.shape[1]) + 1j * rng.normal(size=A.shape[1])
    v /= np.linalg.norm(v)
    sigma = 0.0
    for _ in range(iters):
        w = A.conj().T @ (A @ v)
        nrm = np.linalg.norm(w)
        if nrm == 0:
            return 0.0
        v = w / nrm
        new = float(np.sqrt(nrm))
        if abs(new - sigma) <= 1e-12 * new:
            return new
        sigma = new
    return sigma


def trotter_error(H: DrivenHamiltonian, plan: TrotterPlan, dim_cap: int = DEFAULT_DIM_CAP,
                  exact: np.ndarray | None = None) -> float:
    """Spectral-norm distance between the product-formula and exact propagators.

    Args:
        exact: precomputed exact propagator, reused across sweeps.
    """
    if H.dim > dim_cap:
        raise DimensionCapExceeded(f"dimension {H.dim} exceeds cap {dim_cap}")
    U_pf = total_propagator(H, plan)
    U_ex = exact_propagator(H, plan) if exact is None else exact
    return spectral_norm(U_pf - U_ex)


@dataclass(frozen=True)
class DeviationReport:
    max_deviation: float
    bound: float
    epsilon: float

    @property
    def margin(self) -> float:
        return self.bound - self.max_deviation

    @property
    def ok(self) -> bool:
        return self.max_deviation <= self.bound


def outcome_projectors(observable: PauliSum | np.ndarray, tol: float = 1e-9) -> list[np.ndarray]:
    """Eigenprojectors of a Hermitian observable, grouping degenerate eigenvalues."""
    M = observable.to_matrix() if isinstance(observable, PauliSum) else np.asarray(observable)
    evals, evecs = np.linalg.eigh(M)
    scale = max(1.0, float(np.abs(evals).max()))
    groups: list[list[int]] = []
    for k, e in enumerate(evals):
        if groups and abs(e - evals[groups[-1][0]]) <= tol * scale:
            groups[-1].append(k)
        else:
            groups.append([k])
    return [evecs[:, g] for g in groups]


def probability_deviation_check(psi_exact: StateVector | np.ndarray, psi_pf: StateVector | np.ndarray,
                                observable: PauliSum | np.ndarray, epsilon: float) -> DeviationReport:
    """Compare outcome probabilities of ``observable`` between two states against ``2 epsilon``."""
    a = psi_exact.amplitudes if isinstance(psi_exact, StateVector) else np.asarray(psi_exact)
    b = psi_pf.amplitudes if isinstance(psi_pf, StateVector) else np.asarray(psi_pf)
    worst = 0.0
    for V in outcome_projectors(observable):
        pa = float(np.sum(np.abs(V.conj().T @ a) ** 2))
        pb = float(np.sum(np.abs(V.conj().T @ b) ** 2))
        worst = max(worst, abs(pa - pb))
    return DeviationReport(worst, 2.0 * epsilon, epsilon)
