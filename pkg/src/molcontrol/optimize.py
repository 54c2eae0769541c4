"""Classical outer loop: simplex and finite-difference optimisation of field parameters.

Every objective call is counted, and each call is charged ``m`` modelled
measurement batches (one per Pauli term of the measured observable), so a
trace reports the readout cost a device would pay for the same run.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

Objective = Callable[[np.ndarray], float]


class OptimizationAborted(RuntimeError):
    """Objective returned a non-finite value; the partial trace is attached."""

    def __init__(self, message: str, trace: OptimizationTrace):
        super().__init__(message)
        self.trace = trace


@dataclass
class OptimizerConfig:
    """Settings shared by both optimisers.

    Attributes:
        method: ``nelder_mead`` or ``fd_gradient_descent``.
        max_iterations: iteration budget.
        max_evaluations: objective-call budget (``None`` for unlimited).
        tolerance: stop once the best objective is at or below this value.
        lower, upper: optional box bounds (scaled coordinates).
        fd_step: finite-difference step.
        central: use central differences (2K calls instead of K).
        step_size: initial gradient-descent step.
        step_decay: step size at iteration k is ``step_size / (1 + step_decay k)``.
        simplex_scale: initial simplex edge length.
        xatol, fatol: simplex convergence thresholds on spread of vertices and values.
        penalty: weight of the squared out-of-bounds distance.
        seed: seeds the orientation of the initial simplex.
        workers: thread pool size for independent probe evaluations.
    """

    method: str = "nelder_mead"
    max_iterations: int = 1000
    max_evaluations: int | None = None
    tolerance: float = 1e-8
    lower: Sequence[float] | None = None
    upper: Sequence[float] | None = None
    fd_step: float = 1e-4
    central: bool = False
    step_size: float = 0.1
    step_decay: float = 0.0
    simplex_scale: float = 0.1
    xatol: float = 1e-10
    fatol: float = 1e-12
    penalty: float = 1e3
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.method not in ("nelder_mead", "fd_gradient_descent"):
            raise ValueError(f"unknown optimiser {self.method!r}")
        if self.lower is not None and self.upper is not None:
            if np.any(np.asarray(self.lower) > np.asarray(self.upper)):
                raise ValueError("lower bounds exceed upper bounds")
        if not self.fd_step > 0:
            raise ValueError("finite-difference step must be positive")


@dataclass
class TraceEntry:
    iteration: int
    params: np.ndarray
    value: float
    evaluations: int
    measurements: int


@dataclass
class OptimizationTrace:
    """Best-so-far record, one entry per iteration."""

    entries: list[TraceEntry] = field(default_factory=list)
    measurements_per_eval: int = 1

    def record(self, iteration: int, params: np.ndarray, value: float, evaluations: int) -> None:
        if self.entries and value > self.entries[-1].value:
            prev = self.entries[-1]
            params, value = prev.params, prev.value
        self.entries.append(TraceEntry(iteration, np.array(params, dtype=float), float(value),
                                       evaluations, evaluations * self.measurements_per_eval))

    @property
    def values(self) -> np.ndarray:
        return np.array([e.value for e in self.entries])

    @property
    def best(self) -> TraceEntry:
        return self.entries[-1]

    def __len__(self) -> int:
        return len(self.entries)

    def to_rows(self) -> list[list[float]]:
        return [[e.iteration, e.value, e.evaluations, e.measurements, *e.params] for e in self.entries]


class _Counted:
    """Wraps the objective with bounds handling and call accounting."""

    def __init__(self, fn: Objective, config: OptimizerConfig, trace: OptimizationTrace):
        self.fn = fn
        self.config = config
        self.trace = trace
        self.calls = 0
        self.lower = None if config.lower is None else np.asarray(config.lower, dtype=float)
        self.upper = None if config.upper is None else np.asarray(config.upper, dtype=float)

    def clamp(self, x: np.ndarray) -> tuple[np.ndarray, float]:
        y = x
        if self.lower is not None:
            y = np.maximum(y, self.lower)
        if self.upper is not None:
            y = np.minimum(y, self.upper)
        return y, float(np.sum((x - y) ** 2))

    def __call__(self, x: np.ndarray) -> float:
        y, excess = self.clamp(np.asarray(x, dtype=float))
        self.calls += 1
        value = float(self.fn(y))
        if not math.isfinite(value):
            raise OptimizationAborted(f"objective returned {value} at call {self.calls}", self.trace)
        return value + self.config.penalty * excess

    def many(self, xs: Sequence[np.ndarray]) -> list[float]:
        if self.config.workers > 1 and len(xs) > 1:
            with ThreadPoolExecutor(self.config.workers) as pool:
                return list(pool.map(self, xs))
        return [self(x) for x in xs]

    def exhausted(self) -> bool:
        cap = self.config.max_evaluations
        return cap is not None and self.calls >= cap


def _initial_simplex(x0: np.ndarray, scale: float, seed: int) -> np.ndarray:
    K = x0.size
    rng = np.random.default_rng(seed)
    # random orthonormal directions so the seed controls the first moves
    q, r = np.linalg.qr(rng.normal(size=(K, K)))
    q *= np.sign(np.diag(r))
    return np.vstack([x0, x0[None, :] + scale * q.T])


def nelder_mead(objective: Objective, theta0: Sequence[float], config: OptimizerConfig | None = None,
                measurements_per_eval: int = 1) -> tuple[np.ndarray, OptimizationTrace]:
    """Minimise with the reflect/expand/contract/shrink simplex.

    Uses the dimension-adapted coefficients, which keep the simplex from
    collapsing in a dozen or more parameters.

    Raises:
        OptimizationAborted: on a non-finite objective value.
    """
    config = config or OptimizerConfig()
    trace = OptimizationTrace(measurements_per_eval=measurements_per_eval)
    f = _Counted(objective, config, trace)
    x0 = np.asarray(theta0, dtype=float).copy()
    f0 = f(x0)
    trace.record(0, f.clamp(x0)[0], f0, f.calls)
    if f0 <= config.tolerance:
        return f.clamp(x0)[0], trace

    K = x0.size
    alpha, gamma = 1.0, 1.0 + 2.0 / K
    rho, sigma = 0.75 - 1.0 / (2 * K), 1.0 - 1.0 / K
    simplex = _initial_simplex(x0, config.simplex_scale, config.seed)
    values = np.array([f0] + f.many(list(simplex[1:])))

    for it in range(1, config.max_iterations + 1):
        order = np.argsort(values, kind="stable")
        simplex, values = simplex[order], values[order]
        trace.record(it, f.clamp(simplex[0])[0], values[0], f.calls)
        if values[0] <= config.tolerance or f.exhausted():
            break
        if (np.max(np.abs(simplex[1:] - simplex[0])) <= config.xatol
                and np.max(np.abs(values[1:] - values[0])) <= config.fatol):
            break
        centroid = simplex[:-1].mean(axis=0)
        worst = simplex[-1]
        xr = centroid + alpha * (centroid - worst)
        fr = f(xr)
        if fr < values[0]:
            xe = centroid + gamma * (xr - centroid)
            fe = f(xe)
            if fe < fr:
                simplex[-1], values[-1] = xe, fe
            else:
                simplex[-1], values[-1] = xr, fr
            continue
        if fr < values[-2]:
            simplex[-1], values[-1] = xr, fr
            continue
        if fr < values[-1]:
            xc = centroid + rho * (xr - centroid)
            fc = f(xc)
            if fc <= fr:
                simplex[-1], values[-1] = xc, fc
                continue
        else:
            xc = centroid - rho * (centroid - worst)
            fc = f(xc)
            if fc < values[-1]:
                simplex[-1], values[-1] = xc, fc
                continue
        simplex[1:] = simplex[0] + sigma * (simplex[1:] - simplex[0])
        values[1:] = f.many(list(simplex[1:]))

    order = np.argsort(values, kind="stable")
    best = f.clamp(simplex[order[0]])[0]
    if values[order[0]] < trace.best.value:
        trace.record(trace.best.iteration + 1, best, values[order[0]], f.calls)
    return trace.best.params.copy(), trace


@dataclass(frozen=True)
class GradientCost:
    evaluations: int
    measurements: int


def fd_gradient(objective: Objective, theta: Sequence[float], h: float, central: bool = False,
                measurements_per_eval: int = 1, f0: float | None = None,
                workers: int = 1) -> tuple[np.ndarray, GradientCost]:
    """Finite-difference gradient and its modelled readout cost.

    Forward differences cost K + 1 objective calls, including ``f0`` when
    the caller supplies it since a device must measure it too. Central
    differences cost 2K.
    """
    if not h > 0:
        raise ValueError("h must be positive")
    x = np.asarray(theta, dtype=float)
    K = x.size
    eye = np.eye(K) * h
    if central:
        probes = [x + e for e in eye] + [x - e for e in eye]
    else:
        probes = [x + e for e in eye]
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            vals = np.array(list(pool.map(objective, probes)), dtype=float)
    else:
        vals = np.array([objective(p) for p in probes], dtype=float)
    if central:
        grad = (vals[:K] - vals[K:]) / (2 * h)
        evals = 2 * K
    else:
        base = objective(x) if f0 is None else f0
        vals = np.append(vals, base)
        grad = (vals[:K] - base) / h
        evals = K + 1
    if not np.all(np.isfinite(vals)):
        raise FloatingPointError("non-finite objective during finite differences")
    return grad, GradientCost(evals, evals * measurements_per_eval)


def fd_gradient_descent(objective: Objective, theta0: Sequence[float], config: OptimizerConfig | None = None,
                        measurements_per_eval: int = 1) -> tuple[np.ndarray, OptimizationTrace]:
    """Steepest descent on forward-difference gradients with step halving."""
    config = config or OptimizerConfig(method="fd_gradient_descent")
    trace = OptimizationTrace(measurements_per_eval=measurements_per_eval)
    f = _Counted(objective, config, trace)
    x = f.clamp(np.asarray(theta0, dtype=float))[0]
    fx = f(x)
    trace.record(0, x, fx, f.calls)
    for it in range(1, config.max_iterations + 1):
        if fx <= config.tolerance or f.exhausted():
            break
        grad, _ = fd_gradient(f, x, config.fd_step, config.central, f0=None, workers=config.workers)
        step = config.step_size / (1.0 + config.step_decay * it)
        improved = False
        for _ in range(20):
            cand = f.clamp(x - step * grad)[0]
            fc = f(cand)
            if fc < fx:
                x, fx, improved = cand, fc, True
                break
            step *= 0.5
        trace.record(it, x, fx, f.calls)
        if not improved:
            break
    return trace.best.params.copy(), trace


OPTIMIZERS = {"nelder_mead": nelder_mead, "fd_gradient_descent": fd_gradient_descent}


def run_optimizer(objective: Objective, theta0: Sequence[float], config: OptimizerConfig,
                  measurements_per_eval: int = 1) -> tuple[np.ndarray, OptimizationTrace]:
    return OPTIMIZERS[config.method](objective, theta0, config, measurements_per_eval)


# -- hybrid loop --------------------------------------------------------------


def parameter_scales(problem, params) -> np.ndarray:
    """Typical magnitude of each field parameter; the optimiser works in units of these."""
    from .fields import CosineComb

    K = params.n_components
    amp = float(problem.params.get("field_scale", 1.0))
    if isinstance(params, CosineComb):
        det = 0.05 * float(np.mean(np.abs(params.omega))) or 1.0
        return np.concatenate([[1.0], np.full(K, amp), np.full(K, det), np.ones(K)])
    return np.concatenate([np.full(K, amp), np.full(K, 0.1), np.full(K, 0.1)])


def parameter_bounds(params, scales: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Scaled box keeping envelope exponents and Gaussian geometry physical."""
    from .fields import CosineComb

    K = params.n_components
    lo = np.full(scales.size, -np.inf)
    hi = np.full(scales.size, np.inf)
    if isinstance(params, CosineComb):
        lo[0], hi[0] = 0.25, 10.0
    else:
        lo[K:2 * K], hi[K:2 * K] = 0.0, 10.0
        lo[2 * K:], hi[2 * K:] = 0.05, 10.0
    return lo, hi


def hybrid_loop(problem, params0, plan, config: OptimizerConfig | None = None, method: str = "trotter",
                scales: Sequence[float] | None = None):
    """Alternate objective evaluation and classical updates until ``config`` stops.

    The optimiser sees ``theta / scales``; bounds in ``config`` are in those
    scaled units and default to :func:`parameter_bounds`.  Each evaluation is
    charged one measurement batch per non-identity term of the observable.

    Returns:
        (best field parameters, trace with parameters in physical units).
    """
    from .problems import evaluate_objective

    config = config or OptimizerConfig()
    s = parameter_scales(problem, params0) if scales is None else np.asarray(scales, dtype=float)
    if config.lower is None and config.upper is None:
        lo, hi = parameter_bounds(params0, s)
        config = replace(config, lower=lo, upper=hi)
    m = max(1, len(problem.objective.observable.without_identity().terms))

    def J(z: np.ndarray) -> float:
        return evaluate_objective(problem, params0.with_theta(z * s), plan, method)

    z0 = np.asarray(params0.theta, dtype=float) / s
    try:
        z_best, trace = run_optimizer(J, z0, config, m)
    except OptimizationAborted as exc:
        _rescale(exc.trace, s)
        raise
    _rescale(trace, s)
    return params0.with_theta(z_best * s), trace


def _rescale(trace: OptimizationTrace, s: np.ndarray) -> None:
    for e in trace.entries:
        e.params = e.params * s
