"""Flat ``key = value`` run configuration.

Example::

    # Test 1 on the finest benchmark mesh
    problem = test1
    h = 1/128
    g0 = 0.3
    beta_rule = prp
    out_dir = runs/test1

Blank lines and lines starting with ``#`` are ignored. Unknown keys are
rejected. Relative paths (``mesh``, ``g0`` field files, ``out_dir``) are
resolved against the directory of the config file.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .export import FORMATS
from .optimizer import ArmijoParams, OptimizerConfig


class ConfigError(ValueError):
    def __init__(self, key, message, line=None):
        self.key = key
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{key}: {message}" if key else f"{where}{message}")


KEYS = {
    "problem", "f", "exact_u", "mesh", "h", "g0", "beta_rule", "metric",
    "armijo.s", "armijo.rho", "armijo.mu", "armijo.max_backtracks",
    "stop_J", "stop_grad", "max_iters", "restart_on_nondescent",
    "project_nonnegative", "out_dir", "export_formats",
}


@dataclass
class RunConfig:
    problem: str = "test1"
    f: str | None = None
    exact_u: str | None = None
    mesh: Path | None = None
    h: float | None = None
    g0: float | Path = 0.0
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    out_dir: Path = Path("out")
    export_formats: tuple = ("csv-points", "vtk-like-text")


def _number(key, text, line):
    try:
        return float(Fraction(text)) if "/" in text else float(text)
    except (ValueError, ZeroDivisionError):
        raise ConfigError(key, f"expected a number, got {text!r}", line) from None


def _integer(key, text, line):
    try:
        return int(text)
    except ValueError:
        raise ConfigError(key, f"expected an integer, got {text!r}", line) from None


def _boolean(key, text, line):
    low = text.lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ConfigError(key, f"expected true/false, got {text!r}", line)


def parse_config(text: str, base_dir=".") -> RunConfig:
    base_dir = Path(base_dir)
    raw = {}
    lines = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(None, f"expected 'key = value', got {line!r}", lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in KEYS:
            raise ConfigError(key, "unknown key", lineno)
        if key in raw:
            raise ConfigError(key, "given twice", lineno)
        raw[key], lines[key] = value, lineno

    cfg = RunConfig()
    opt, armijo = {}, {}
    for key, value in raw.items():
        ln = lines[key]
        if key == "problem":
            cfg.problem = value.lower()
            if cfg.problem not in ("test1", "test2", "test3", "custom"):
                raise ConfigError(key, f"expected test1, test2, test3 or custom, got {value!r}", ln)
        elif key in ("f", "exact_u"):
            setattr(cfg, key, value)
        elif key == "mesh":
            cfg.mesh = base_dir / value
        elif key == "h":
            cfg.h = _number(key, value, ln)
            if not 0 < cfg.h < 1:
                raise ConfigError(key, f"must lie in (0, 1), got {value}", ln)
        elif key == "g0":
            try:
                cfg.g0 = _number(key, value, ln)
            except ConfigError:
                cfg.g0 = base_dir / value
        elif key == "beta_rule":
            if value.lower() not in ("prp", "fr"):
                raise ConfigError(key, f"expected prp or fr, got {value!r}", ln)
            opt[key] = value.lower()
        elif key == "metric":
            if value.lower() not in ("l2", "euclidean"):
                raise ConfigError(key, f"expected l2 or euclidean, got {value!r}", ln)
            opt[key] = value.lower()
        elif key == "armijo.max_backtracks":
            armijo["max_backtracks"] = _integer(key, value, ln)
        elif key.startswith("armijo."):
            armijo[key.split(".", 1)[1]] = _number(key, value, ln)
        elif key in ("stop_J", "stop_grad"):
            opt[key] = _number(key, value, ln)
        elif key == "max_iters":
            opt[key] = _integer(key, value, ln)
        elif key in ("restart_on_nondescent", "project_nonnegative"):
            opt[key] = _boolean(key, value, ln)
        elif key == "out_dir":
            cfg.out_dir = base_dir / value
        elif key == "export_formats":
            formats = tuple(v.strip() for v in value.split(",") if v.strip())
            bad = [v for v in formats if v not in FORMATS]
            if bad:
                raise ConfigError(key, f"unknown format(s) {bad}; expected {', '.join(FORMATS)}", ln)
            cfg.export_formats = formats

    try:
        opt["armijo"] = ArmijoParams(**armijo)
    except ValueError as exc:
        key = next((f"armijo.{k}" for k in armijo if f"armijo.{k}" in str(exc)), "armijo")
        raise ConfigError(key, str(exc)) from None
    try:
        cfg.optimizer = OptimizerConfig(**opt)
    except ValueError as exc:
        key = next((k for k in opt if k in str(exc)), None)
        raise ConfigError(key, str(exc)) from None

    if cfg.problem == "custom" and not cfg.f:
        raise ConfigError("f", "required when problem = custom")
    if cfg.problem != "custom" and (cfg.f or cfg.exact_u):
        raise ConfigError("f" if cfg.f else "exact_u", "only allowed with problem = custom")
    if cfg.mesh is None and cfg.h is None:
        raise ConfigError("h", "required unless a mesh file is given")
    if cfg.optimizer.project_nonnegative and isinstance(cfg.g0, float) and cfg.g0 < 0:
        raise ConfigError("g0", "must be >= 0 when project_nonnegative is on")
    return cfg


def load_config(path) -> RunConfig:
    path = Path(path)
    return parse_config(path.read_text(), base_dir=path.parent)
