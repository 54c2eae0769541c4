"""Deterministic regeneration of the shipped optimised-field fixtures.

Each recipe is a cheap structured search for a starting point followed by
simplex refinement through :func:`hybrid_loop`.  Optimisation uses exact
per-step propagation; the fixture header records a product-formula Trotter
number at which the objective error is below ``OBJECTIVE_ERROR_TOL``.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .fields import save_field
from .optimize import OptimizerConfig, hybrid_loop
from .problems import ControlProblem, build_problem, evaluate_objective
from .trotter import TrotterPlan

OBJECTIVE_ERROR_TOL = 1e-3
TARGETS = {"morse_hf": 0.05, "rotors": 0.3, "fmo": 0.5}


@dataclass
class FixtureResult:
    model: str
    params: object
    objective_exact: float
    objective_pf: float
    order: int
    n: int
    evaluations: int
    seconds: float


def _best_of(problem, plan, candidates):
    vals = [evaluate_objective(problem, c, plan, "exact") for c in candidates]
    k = int(np.argmin(vals))
    return candidates[k], vals[k]


def _hf(problem: ControlProblem, seed: int):
    f0 = problem.default_field()
    K = f0.n_components
    # a tenth of the step count keeps the carriers resolved and makes the search cheap
    coarse = TrotterPlan(1, 1, problem.T / 1200, 1200)
    rng = np.random.default_rng(seed)
    starts = [f0.with_theta(np.concatenate([[rng.uniform(0.5, 3)], rng.uniform(0, 0.02, K),
                                            np.zeros(K), rng.uniform(0, 2 * np.pi, K)]))
              for _ in range(30)]
    start, _ = _best_of(problem, coarse, starts)
    best, t1 = hybrid_loop(problem, start, coarse, OptimizerConfig(max_evaluations=3000, seed=seed), "exact")
    best, t2 = hybrid_loop(problem, best, problem.plan(), OptimizerConfig(max_evaluations=150, simplex_scale=0.02,
                                                                          seed=seed), "exact")
    return best, len(starts) + t1.best.evaluations + t2.best.evaluations


def _rotors(problem: ControlProblem, seed: int):
    f0 = problem.default_field()
    K = f0.n_components
    plan = problem.plan()
    B = problem.params["B"]
    # near-static first component: omega_0 = B, so delta_0 = -B cancels the carrier
    starts = []
    for p in (0.5, 1, 2, 4, 8):
        for amp in np.logspace(6.5, 8, 24):
            th = f0.theta.copy()
            th[0], th[1], th[1 + K] = p, amp, -B
            starts.append(f0.with_theta(th))
    start, _ = _best_of(problem, plan, starts)
    best, tr = hybrid_loop(problem, start, plan, OptimizerConfig(max_evaluations=700, simplex_scale=0.3,
                                                                 seed=seed), "exact")
    return best, len(starts) + tr.best.evaluations


def _fmo(problem: ControlProblem, seed: int):
    f0 = problem.default_field()
    K = f0.n_components
    rng = np.random.default_rng(seed + 1)
    th = f0.theta.copy()
    th[:K] = rng.normal(0, problem.params["field_scale"], K)
    best, tr = hybrid_loop(problem, f0.with_theta(th), problem.plan(),
                           OptimizerConfig(max_evaluations=1500, simplex_scale=0.5, seed=seed), "exact")
    return best, tr.best.evaluations


RECIPES = {"morse_hf": _hf, "rotors": _rotors, "fmo": _fmo}


def choose_trotter_number(problem: ControlProblem, params, order: int = 2,
                          n_max: int = 256) -> tuple[int, float, float]:
    """Smallest power-of-two n with ``|J_PF - J_exact| < OBJECTIVE_ERROR_TOL``."""
    J_ex = evaluate_objective(problem, params, problem.plan(), "exact")
    n = 1
    while n <= n_max:
        J_pf = evaluate_objective(problem, params, problem.plan(order, n), "trotter")
        if abs(J_pf - J_ex) < OBJECTIVE_ERROR_TOL:
            return n, J_pf, J_ex
        n *= 2
    raise RuntimeError(f"objective error stays above {OBJECTIVE_ERROR_TOL} up to n={n_max}")


def regenerate(model: str, out_dir: str | Path, seed: int = 0, order: int = 2) -> FixtureResult:
    t0 = time.perf_counter()
    problem = build_problem(model)
    params, evals = RECIPES[model](problem, seed)
    n, J_pf, J_ex = choose_trotter_number(problem, params, order)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    save_field(out / f"{model}_field.txt", params, {
        "model": model, "objective_exact": repr(J_ex), "objective_pf": repr(J_pf),
        "order": order, "n": n, "seed": seed, "evaluations": evals,
    })
    return FixtureResult(model, params, J_ex, J_pf, order, n, evals, time.perf_counter() - t0)


def read_header(path: str | Path) -> dict[str, str]:
    """``# key: value`` comment lines of a fixture file."""
    out = {}
    for line in Path(path).read_text().splitlines():
        if line.startswith("#") and ":" in line:
            k, v = line[1:].split(":", 1)
            out[k.strip()] = v.strip()
    return out


if __name__ == "__main__":
    import argparse

    ap = argparse.ArgumentParser(description="regenerate optimised-field fixtures")
    ap.add_argument("models", nargs="*", default=list(RECIPES))
    ap.add_argument("--out", type=Path, default=Path(__file__).parent / "data" / "fixtures")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    for m in args.models:
        r = regenerate(m, args.out, args.seed)
        print(f"{m}: J_exact={r.objective_exact:.6g} J_pf={r.objective_pf:.6g} order={r.order} n={r.n} "
              f"evals={r.evaluations} {r.seconds:.0f}s")
