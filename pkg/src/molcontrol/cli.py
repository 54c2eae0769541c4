"""Command-line front end.

Verbs: ``trotter-sweep``, ``validate-appendix``, ``optimize``, ``resources``,
``field-eval``.  Exit codes: 0 success, 2 validation error, 3 tolerance not
met, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
from dataclasses import fields as dc_fields
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .config import ConfigError, ExperimentConfig, load_config
from .fields import load_field, parse_field, save_field
from .optimize import OptimizationAborted, OptimizerConfig, hybrid_loop
from .oracle import DimensionCapExceeded
from .problems import ControlProblem, build_problem, evaluate_objective

log = logging.getLogger("molcontrol")

EXIT_OK, EXIT_INVALID, EXIT_TOLERANCE, EXIT_NUMERICAL = 0, 2, 3, 4


def fixture_path(model: str) -> Path:
    from importlib import resources

    return Path(str(resources.files("molcontrol") / "data" / "fixtures" / f"{model}_field.txt"))


def resolve_problem(selector: str) -> ControlProblem:
    if selector.startswith("appendix_data:"):
        from .appendix import problem_from_table

        return problem_from_table(selector.split(":", 1)[1])
    return build_problem(selector)


def _base_model(problem: ControlProblem, selector: str) -> str:
    if selector.startswith("appendix_data:"):
        from .appendix import MODEL_OF_TABLE

        return MODEL_OF_TABLE[Path(selector.split(":", 1)[1]).stem]
    return problem.name


def resolve_field(cfg: ExperimentConfig, problem: ControlProblem, selector: str):
    f = cfg.field
    if f.source == "inline":
        # configparser lower-cases keys; the window length is the only upper-case name
        items = {("T" if k == "t" else k): v for k, v in f.inline.items()}
        items.setdefault("T", repr(problem.T))
        params = parse_field("\n".join(f"{k}={v}" for k, v in items.items()))
    elif f.source == "fixture":
        path = f.file or fixture_path(_base_model(problem, selector))
        if not path.exists():
            raise ConfigError(f"{cfg.source}: field fixture {path} not found")
        params = load_field(path)
    else:
        return problem.default_field()
    if not np.isclose(params.T, problem.T):
        raise ConfigError(f"{cfg.source}: field window {params.T} does not match the model window {problem.T}")
    return params


def _plan(problem: ControlProblem, cfg: ExperimentConfig, order: int, n: int):
    from .trotter import TrotterPlan

    p = cfg.plan
    if p.n_steps is None and p.dt is None:
        return problem.plan(order, n, p.midpoint)
    if p.n_steps is not None and p.dt is not None:
        return TrotterPlan(order, n, p.dt, p.n_steps, p.midpoint)
    if p.n_steps is not None:
        return TrotterPlan(order, n, problem.T / p.n_steps if p.n_steps else problem.T, p.n_steps, p.midpoint)
    from .trotter import plan_for_duration

    return plan_for_duration(order, n, problem.T, p.dt, p.midpoint)


# -- CSV ----------------------------------------------------------------------


def _timestamp() -> str:
    return f"# generated {datetime.now(timezone.utc).isoformat(timespec='seconds')}"


def write_csv(path: Path, header: list[str], rows: list[list], footer: list[str] | None = None,
              comments: list[str] | None = None) -> None:
    """First line is a timestamp comment; everything after it is deterministic."""
    buf = io.StringIO()
    buf.write(_timestamp() + "\n")
    for c in comments or []:
        buf.write(f"# {c}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    for line in footer or []:
        buf.write(f"# {line}\n")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(buf.getvalue())


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if v is None:
        return ""
    return str(v)


# -- verbs ----------------------------------------------------------------------


def cmd_trotter_sweep(cfg: ExperimentConfig) -> int:
    from .sweep import slopes_by_order, trotter_sweep

    for sel in cfg.models:
        problem = resolve_problem(sel)
        params = resolve_field(cfg, problem, sel)
        pts = trotter_sweep(problem, params, cfg.plan.orders, cfg.plan.n, cfg.workers, cfg.plan.dim_cap)
        header = ["order [1]", "n [1]", "trotter_error [spectral norm]", "objective_exact [1]",
                  "objective_pf [1]", "objective_error [1]", "bound [spectral norm]",
                  "probability_deviation [1]"]
        rows = [[p.order, p.n, p.trotter_error, p.objective_exact, p.objective_pf, p.objective_error,
                 p.bound, p.probability_deviation] for p in pts]
        footer = [f"slope order={o}: {s:.6f}" for o, s in slopes_by_order(pts).items()]
        name = sel.replace(":", "_").replace("/", "_")
        write_csv(cfg.out / f"trotter_sweep_{name}.csv", header, rows, footer,
                  [f"model: {sel}", f"qubits: {problem.width}"])
        log.info("wrote sweep for %s (%d rows)", sel, len(rows))
    return EXIT_OK


def cmd_validate_appendix(cfg: ExperimentConfig) -> int:
    from .appendix import validate_all

    reports = validate_all(cfg.tables, cfg.data_dir)
    cfg.out.mkdir(parents=True, exist_ok=True)
    text = _timestamp() + "\n" + "\n".join(r.render() for r in reports.values())
    (cfg.out / "appendix_report.txt").write_text(text)
    for name, r in reports.items():
        log.info("%s: %d/%d", name, r.matched, r.entries)
    return EXIT_OK


def optimizer_config(raw: dict[str, str], seed: int, workers: int, source: str) -> OptimizerConfig:
    kinds = {f.name: f.type for f in dc_fields(OptimizerConfig)}
    kw: dict[str, object] = {"seed": seed, "workers": workers}
    for k, v in raw.items():
        if k not in kinds:
            raise ConfigError(f"{source}: [optimizer] unknown key {k!r}")
        t = str(kinds[k])
        try:
            if k in ("lower", "upper"):
                kw[k] = [float(x) for x in v.split(",")]
            elif t.startswith("bool"):
                kw[k] = v.strip().lower() in ("1", "true", "yes", "on")
            elif t.startswith("int"):
                kw[k] = None if v.strip().lower() == "none" else int(v)
            elif t.startswith("float"):
                kw[k] = float(v)
            else:
                kw[k] = v.strip()
        except ValueError:
            raise ConfigError(f"{source}: [optimizer] {k}: cannot parse {v!r}") from None
    try:
        return OptimizerConfig(**kw)
    except ValueError as exc:
        raise ConfigError(f"{source}: [optimizer] {exc}") from None


def cmd_optimize(cfg: ExperimentConfig) -> int:
    oc = optimizer_config(cfg.optimizer, cfg.seed, cfg.workers, cfg.source)
    cfg.out.mkdir(parents=True, exist_ok=True)
    status = EXIT_OK
    for sel in cfg.models:
        problem = resolve_problem(sel)
        params0 = resolve_field(cfg, problem, sel)
        plan = _plan(problem, cfg, cfg.plan.orders[0], cfg.plan.n[0])
        best, trace = hybrid_loop(problem, params0, plan, oc, method=cfg.plan.method)
        name = sel.replace(":", "_").replace("/", "_")
        final = trace.best.value
        save_field(cfg.out / f"{name}_field.txt", best, {
            "model": sel, "objective": repr(final), "method": cfg.plan.method,
            "order": plan.order, "n": plan.n, "n_steps": plan.n_steps, "seed": oc.seed,
        })
        header = ["iteration [1]", "J [1]", "evaluations [1]", "modeled_measurements [batches]",
                  *[f"{p} [{_unit(p, problem)}]" for p in best.param_names()]]
        write_csv(cfg.out / f"{name}_trace.csv", header, trace.to_rows(),
                  comments=[f"model: {sel}", f"measurements per evaluation: {trace.measurements_per_eval}"])
        res = evaluate_objective(problem, best, plan, cfg.plan.method, detail=True)
        if len(res.members) > 1:
            write_csv(cfg.out / f"{name}_members.csv", ["member [1]", "weight [1]", "J_member [1]"],
                      [[k, w, v] for k, (w, v) in enumerate(zip(res.weights, res.members))],
                      comments=[f"model: {sel}", f"J: {res.value!r}"])
        log.info("%s: best J = %.6g after %d evaluations", sel, final, trace.best.evaluations)
        if final > oc.tolerance:
            status = EXIT_TOLERANCE
    return status


def _unit(name: str, problem: ControlProblem) -> str:
    if name.startswith("a"):
        return problem.field_unit
    if name.startswith(("omega", "delta")):
        return "hartree"
    if name.startswith("phi"):
        return "rad"
    if name.startswith(("b", "c")):
        return "fraction of T"
    return "1"


def cmd_resources(cfg: ExperimentConfig) -> int:
    from .resources import resource_sweep

    rc = cfg.resources
    rows = resource_sweep(rc.C, rc.M, rc.d, rc.lambda_max, rc.dt, rc.epsilon)
    write_csv(cfg.out / "resources.csv",
              ["C [chromophores]", "M [modes]", "d [levels]", "N [qubits]", "L [terms]",
               "depth_bound [exponentials]", "error [text]"],
              [[r.C, r.M, r.d, r.N, r.L, r.depth, r.error] for r in rows],
              comments=[f"lambda_max: {rc.lambda_max!r} hartree", f"dt: {rc.dt!r} au", f"epsilon: {rc.epsilon!r}"])
    return EXIT_OK


def cmd_field_eval(cfg: ExperimentConfig) -> int:
    for sel in cfg.models:
        problem = resolve_problem(sel)
        params = resolve_field(cfg, problem, sel)
        rows = []
        for order in cfg.plan.orders:
            for n in cfg.plan.n:
                plan = _plan(problem, cfg, order, n)
                res = evaluate_objective(problem, params, plan, cfg.plan.method, detail=True)
                rows.append([order, n, plan.n_steps, cfg.plan.method, res.value, *res.members])
        K = len(problem.initial_ensemble)
        header = ["order [1]", "n [1]", "n_steps [1]", "method [text]", "J [1]",
                  *[f"J_member{k} [1]" for k in range(K)]]
        name = sel.replace(":", "_").replace("/", "_")
        write_csv(cfg.out / f"field_eval_{name}.csv", header, rows, comments=[f"model: {sel}"])
    return EXIT_OK


COMMANDS = {
    "trotter-sweep": cmd_trotter_sweep,
    "validate-appendix": cmd_validate_appendix,
    "optimize": cmd_optimize,
    "resources": cmd_resources,
    "field-eval": cmd_field_eval,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="molcontrol", description=__doc__.splitlines()[0])
    ap.add_argument("verb", choices=sorted(COMMANDS))
    ap.add_argument("--config", type=Path, help="INI experiment file")
    ap.add_argument("--out", type=Path, help="output directory")
    ap.add_argument("--seed", type=int, help="overrides [experiment] seed")
    ap.add_argument("--workers", type=int, help="overrides [experiment] workers")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config) if args.config else ExperimentConfig()
        if args.out is not None:
            cfg.out = args.out
        if args.seed is not None:
            cfg.seed = args.seed
        if args.workers is not None:
            if args.workers < 1:
                raise ConfigError("--workers must be at least 1")
            cfg.workers = args.workers
        return COMMANDS[args.verb](cfg)
    except (ConfigError, DimensionCapExceeded, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (FloatingPointError, OptimizationAborted, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
