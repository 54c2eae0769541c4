"""Trotter-number sweeps: measured error, objective error, analytic bound, readout deviation."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .oracle import DEFAULT_DIM_CAP, DimensionCapExceeded, exact_propagator, probability_deviation_check, spectral_norm
from .problems import ControlProblem
from .trotter import error_bound, lambda_max, total_propagator


@dataclass(frozen=True)
class SweepPoint:
    order: int
    n: int
    trotter_error: float
    objective_exact: float
    objective_pf: float
    bound: float
    probability_deviation: float

    @property
    def objective_error(self) -> float:
        return abs(self.objective_pf - self.objective_exact)


def _objective_from_states(problem: ControlProblem, psi: np.ndarray) -> float:
    return float(problem.weights @ problem.objective_values(psi))


def trotter_sweep(problem: ControlProblem, field, orders: Sequence[int], ns: Sequence[int],
                  workers: int = 1, dim_cap: int = DEFAULT_DIM_CAP) -> list[SweepPoint]:
    """Evaluate every (order, n) pair against one exact piecewise propagator.

    The exact propagator and the time grid do not depend on ``n``, so they are
    built once.  Rows come back ordered by (order, n) whatever ``workers`` is.
    """
    if not orders or not ns:
        raise ValueError("orders and n values must be nonempty")
    H = problem.hamiltonian(field)
    if H.dim > dim_cap:
        raise DimensionCapExceeded(f"dimension {H.dim} exceeds cap {dim_cap}")
    base_plan = problem.plan(1, 1)
    U_ex = exact_propagator(H, base_plan)
    psi0 = problem.initial_states()
    psi_ex = U_ex @ psi0
    J_ex = _objective_from_states(problem, psi_ex)
    L = len(H.labels)
    lam = lambda_max(H, base_plan)
    obs = problem.objective.observable

    def point(key: tuple[int, int]) -> SweepPoint:
        order, n = key
        plan = base_plan.with_order(order).with_n(n)
        U = total_propagator(H, plan)
        err = spectral_norm(U - U_ex)
        psi = U @ psi0
        dev = max(probability_deviation_check(psi_ex[:, k], psi[:, k], obs, err).max_deviation
                  for k in range(psi.shape[1]))
        bound = error_bound(order, L, lam, plan.dt, n, plan.n_steps)
        return SweepPoint(order, n, err, J_ex, _objective_from_states(problem, psi), bound, dev)

    keys = [(o, n) for o in sorted(set(orders)) for n in sorted(set(ns))]
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(point, keys))
    return [point(k) for k in keys]


def fit_slope(ns: Sequence[float], errors: Sequence[float]) -> float:
    """Least-squares slope of log(error) against log(n)."""
    x = np.log(np.asarray(ns, dtype=float))
    y = np.log(np.asarray(errors, dtype=float))
    if x.size < 2:
        raise ValueError("need at least two points to fit a slope")
    return float(np.polyfit(x, y, 1)[0])


def slopes_by_order(points: Sequence[SweepPoint]) -> dict[int, float]:
    out = {}
    for order in sorted({p.order for p in points}):
        pts = [p for p in points if p.order == order]
        if len(pts) >= 2:
            out[order] = fit_slope([p.n for p in pts], [p.trotter_error for p in pts])
    return out
