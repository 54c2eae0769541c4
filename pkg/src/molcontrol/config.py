"""INI experiment configuration with line-numbered validation errors.

Example::

    [experiment]
    model = rotors
    seed = 0
    workers = 1

    [plan]
    orders = 1, 2, 4
    n = 2, 4, 8, 16, 32

    [field]
    source = fixture
"""

from __future__ import annotations

import configparser
import re
from dataclasses import dataclass
from dataclasses import field as _default
from pathlib import Path

MODELS = ("morse_hf", "rotors", "fmo")


class ConfigError(ValueError):
    """Invalid configuration; the message names the file and line when known."""


def _split(value: str) -> list[str]:
    return [v.strip() for v in value.split(",") if v.strip()]


@dataclass
class PlanConfig:
    orders: list[int] = _default(default_factory=lambda: [1])
    n: list[int] = _default(default_factory=lambda: [1])
    n_steps: int | None = None
    dt: float | None = None
    midpoint: bool = False
    method: str = "trotter"
    dim_cap: int = 1 << 10


@dataclass
class FieldConfig:
    source: str = "default"
    file: Path | None = None
    inline: dict[str, str] = _default(default_factory=dict)


@dataclass
class ResourceConfig:
    C: list[int] = _default(default_factory=lambda: list(range(1, 8)))
    M: list[int] = _default(default_factory=lambda: [0, 1, 2, 3])
    d: list[int] = _default(default_factory=lambda: [2, 4, 8, 16])
    lambda_max: float = 0.01
    dt: float = 10.0
    epsilon: float = 1e-5


@dataclass
class ExperimentConfig:
    """Everything a CLI verb needs.

    ``models`` holds one or more selectors: a built-in model name or
    ``appendix_data:<file>``.  ``optimizer`` keeps raw strings; the optimize
    verb converts them.
    """

    models: list[str] = _default(default_factory=lambda: ["rotors"])
    seed: int = 0
    workers: int = 1
    out: Path = Path("out")
    plan: PlanConfig = _default(default_factory=PlanConfig)
    field: FieldConfig = _default(default_factory=FieldConfig)
    optimizer: dict[str, str] = _default(default_factory=dict)
    resources: ResourceConfig = _default(default_factory=ResourceConfig)
    tables: list[str] | None = None
    data_dir: Path | None = None
    source: str = "<defaults>"


class _Reader:
    def __init__(self, text: str, source: str):
        self.text = text
        self.source = source
        self.cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";",))
        try:
            self.cp.read_string(text, source=source)
        except configparser.Error as exc:
            raise ConfigError(f"{source}: {exc}") from None

    def line_of(self, section: str, key: str) -> int | None:
        current = None
        for i, raw in enumerate(self.text.splitlines(), start=1):
            line = raw.strip()
            m = re.match(r"\[(.+)\]$", line)
            if m:
                current = m.group(1).strip()
            elif current == section and re.match(rf"{re.escape(key)}\s*[=:]", line, re.IGNORECASE):
                return i
        return None

    def fail(self, section: str, key: str, msg: str):
        line = self.line_of(section, key)
        where = f"{self.source}:{line}" if line else self.source
        raise ConfigError(f"{where}: [{section}] {key}: {msg}")

    def get(self, section: str, key: str, default=None):
        if self.cp.has_option(section, key):
            return self.cp.get(section, key)
        return default

    def int(self, section, key, default):
        v = self.get(section, key)
        if v is None:
            return default
        try:
            return int(v)
        except ValueError:
            self.fail(section, key, f"expected an integer, got {v!r}")

    def float(self, section, key, default):
        v = self.get(section, key)
        if v is None:
            return default
        try:
            return float(v)
        except ValueError:
            self.fail(section, key, f"expected a number, got {v!r}")

    def bool(self, section, key, default):
        if not self.cp.has_option(section, key):
            return default
        try:
            return self.cp.getboolean(section, key)
        except ValueError:
            self.fail(section, key, "expected true or false")

    def int_list(self, section, key, default):
        v = self.get(section, key)
        if v is None:
            return default
        out = []
        for item in _split(v):
            if ".." in item:
                a, _, b = item.partition("..")
                try:
                    out.extend(range(int(a), int(b) + 1))
                except ValueError:
                    self.fail(section, key, f"bad range {item!r}")
                continue
            try:
                out.append(int(item))
            except ValueError:
                self.fail(section, key, f"expected integers, got {item!r}")
        if not out:
            self.fail(section, key, "list is empty")
        return out


def _resolve(path: str, base: Path) -> Path:
    p = Path(path)
    return p if p.is_absolute() else base / p


def parse_config(text: str, source: str = "<string>", base: Path | None = None) -> ExperimentConfig:
    """Parse and validate INI text.  Relative file paths resolve against ``base``."""
    r = _Reader(text, source)
    base = base or Path.cwd()
    known = {"experiment", "plan", "field", "optimizer", "resources", "appendix"}
    for sec in r.cp.sections():
        if sec not in known:
            line = next((i for i, l in enumerate(text.splitlines(), 1) if l.strip() == f"[{sec}]"), None)
            raise ConfigError(f"{source}:{line}: unknown section [{sec}]")

    cfg = ExperimentConfig(source=source)
    raw_models = r.get("experiment", "model") or r.get("experiment", "models")
    if raw_models is not None:
        key = "model" if r.cp.has_option("experiment", "model") else "models"
        cfg.models = _split(raw_models)
        if not cfg.models:
            r.fail("experiment", key, "no model given")
        for m in cfg.models:
            if m.startswith("appendix_data:"):
                fname = m.split(":", 1)[1]
                from .appendix import data_path

                if not (_resolve(fname, base).exists() or data_path(fname).exists()):
                    r.fail("experiment", key, f"appendix data file {fname!r} not found")
            elif m not in MODELS:
                choices = ", ".join(MODELS)
                r.fail("experiment", key, f"unknown model {m!r}; choose from {choices} or appendix_data:<file>")
    cfg.seed = r.int("experiment", "seed", 0)
    cfg.workers = r.int("experiment", "workers", 1)
    if cfg.workers < 1:
        r.fail("experiment", "workers", "must be at least 1")
    if r.get("experiment", "out"):
        cfg.out = _resolve(r.get("experiment", "out"), base)

    p = cfg.plan
    p.orders = r.int_list("plan", "orders", p.orders)
    for o in p.orders:
        if o != 1 and (o < 2 or o % 2):
            r.fail("plan", "orders", f"order {o} is not 1 or an even number")
    p.n = r.int_list("plan", "n", p.n)
    if any(n < 1 for n in p.n):
        r.fail("plan", "n", "Trotter numbers must be positive")
    p.n_steps = r.int("plan", "n_steps", None)
    if p.n_steps is not None and p.n_steps < 0:
        r.fail("plan", "n_steps", "must be nonnegative")
    p.dt = r.float("plan", "dt", None)
    if p.dt is not None and not p.dt > 0:
        r.fail("plan", "dt", "must be positive")
    p.midpoint = r.bool("plan", "midpoint", False)
    p.dim_cap = r.int("plan", "dim_cap", p.dim_cap)
    if p.dim_cap < 1:
        r.fail("plan", "dim_cap", "must be positive")
    p.method = r.get("plan", "method", "trotter")
    if p.method not in ("trotter", "exact"):
        r.fail("plan", "method", "must be trotter or exact")

    f = cfg.field
    f.source = r.get("field", "source", "default")
    if f.source not in ("default", "fixture", "inline"):
        r.fail("field", "source", "must be default, fixture or inline")
    if r.get("field", "file"):
        f.file = _resolve(r.get("field", "file"), base)
        if not f.file.exists():
            r.fail("field", "file", f"{f.file} does not exist")
    if f.source == "inline":
        f.inline = {k: v for k, v in r.cp.items("field") if k not in ("source", "file")}
        if "kind" not in f.inline:
            r.fail("field", "source", "inline fields need a kind key")

    if r.cp.has_section("optimizer"):
        cfg.optimizer = dict(r.cp.items("optimizer"))

    rc = cfg.resources
    rc.C = r.int_list("resources", "C", rc.C)
    rc.M = r.int_list("resources", "M", rc.M)
    rc.d = r.int_list("resources", "d", rc.d)
    rc.lambda_max = r.float("resources", "lambda_max", rc.lambda_max)
    rc.dt = r.float("resources", "dt", rc.dt)
    rc.epsilon = r.float("resources", "epsilon", rc.epsilon)

    if r.get("appendix", "tables"):
        from .appendix import VALIDATORS

        cfg.tables = _split(r.get("appendix", "tables"))
        for t in cfg.tables:
            if t not in VALIDATORS:
                r.fail("appendix", "tables", f"unknown table {t!r}; choose from {', '.join(VALIDATORS)}")
    if r.get("appendix", "data_dir"):
        cfg.data_dir = _resolve(r.get("appendix", "data_dir"), base)
        if not cfg.data_dir.is_dir():
            r.fail("appendix", "data_dir", f"{cfg.data_dir} is not a directory")
    return cfg


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"{path}: config file not found")
    return parse_config(path.read_text(), str(path), path.parent)
