"""Suite configuration files.

Line-oriented ``key = value`` pairs grouped in blocks::

    # global settings, all optional
    [suite]
    routes = simplicial, analytic
    t_grid = 0.2, 0.1, 0.05, 0.025
    report = report.json
    csv = summary.csv

    [scenario my-disk]
    base = disk-reflection        # start from a built-in scenario
    c = 0.25
    profile.inner_slope = 0.4

A scenario block named after a built-in scenario, with no ``model`` key,
starts from that built-in.  Suite-level ``routes``, ``tolerance``,
``analytic_tolerance``, ``heat_tolerance``, ``t_grid``, ``cutoff`` and
``seed_grid`` are defaults for every scenario.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple

from .harness import BUILTIN_SCENARIOS, ROUTES, Scenario, ScenarioError

SCENARIO_KEYS = {"base", "model", "c", "B", "collar", "resolution", "scale", "routes", "tolerance",
                 "analytic_tolerance", "heat_tolerance", "t_grid", "cutoff", "seed_grid", "label"}
SHARED_KEYS = {"routes", "tolerance", "analytic_tolerance", "heat_tolerance", "t_grid", "cutoff", "seed_grid"}
SUITE_KEYS = SHARED_KEYS | {"report", "csv", "jobs"}


class ConfigError(ValueError):
    """Configuration problem, located by line and column when known."""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None,
                 source: str = "<config>"):
        self.message, self.line, self.column, self.source = message, line, column, source
        where = source if line is None else f"{source}:{line}:{column or 1}"
        super().__init__(f"{where}: {message}")


@dataclass
class SuiteConfig:
    scenarios: List[Scenario] = field(default_factory=list)
    report: Optional[str] = None
    csv: Optional[str] = None
    jobs: Optional[int] = None
    defaults: Dict[str, object] = field(default_factory=dict)
    lines: Dict[str, int] = field(default_factory=dict)

    def validate(self) -> None:
        for s in self.scenarios:
            s.validate()


def _float(text: str) -> float:
    v = float(text)
    if not math.isfinite(v):
        raise ValueError("not finite")
    return v


def _floats(text: str) -> Tuple[float, ...]:
    return tuple(_float(x) for x in text.split(",") if x.strip())


def _routes(text: str) -> Tuple[str, ...]:
    routes = tuple(r.strip() for r in text.split(",") if r.strip())
    bad = [r for r in routes if r not in ROUTES]
    if bad or not routes:
        raise ValueError(f"routes must be drawn from {', '.join(ROUTES)}")
    return routes


_CONVERT = {
    "c": _float, "collar": _float, "scale": _float, "resolution": int, "tolerance": _float,
    "analytic_tolerance": _float, "heat_tolerance": _float, "t_grid": _floats, "cutoff": _float,
    "seed_grid": int, "routes": _routes, "jobs": int, "model": str, "B": str, "base": str, "label": str,
    "report": str, "csv": str,
}


def _profile_value(text: str):
    text = text.strip()
    if "," in text:
        return tuple(_float(x) for x in text.split(","))
    try:
        return int(text)
    except ValueError:
        return _float(text)


def parse_config(text: str, source: str = "<config>") -> SuiteConfig:
    """Parse configuration text; raises ConfigError with line and column."""
    cfg = SuiteConfig()
    blocks: List[Tuple[str, int, Dict[str, Tuple[object, int]]]] = []
    current: Optional[Dict[str, Tuple[object, int]]] = None
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        stripped = line.strip()
        if not stripped:
            continue
        col = len(line) - len(line.lstrip()) + 1
        if stripped.startswith("["):
            if not stripped.endswith("]"):
                raise ConfigError("unterminated section header", lineno, col + len(stripped), source)
            head = stripped[1:-1].strip()
            if head == "suite":
                section, current = "suite", {}
                blocks.append(("suite", lineno, current))
            elif head.startswith("scenario"):
                name = head[len("scenario"):].strip()
                if not name:
                    raise ConfigError("scenario block needs a name", lineno, col, source)
                section, current = name, {}
                blocks.append((f"scenario:{name}", lineno, current))
            else:
                raise ConfigError(f"unknown section [{head}]", lineno, col + 1, source)
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", lineno, col, source)
        key, value = line.split("=", 1)
        key = key.strip()
        eq = line.index("=")
        vcol = eq + 1 + len(line[eq + 1:]) - len(line[eq + 1:].lstrip()) + 1
        if current is None:
            raise ConfigError("setting outside a [suite] or [scenario ...] block", lineno, col, source)
        allowed = SUITE_KEYS if section == "suite" else SCENARIO_KEYS
        if not key.startswith("profile.") or section == "suite":
            if key not in allowed:
                raise ConfigError(f"unknown key {key!r}", lineno, col, source)
        if key in current:
            raise ConfigError(f"duplicate key {key!r}", lineno, col, source)
        value = value.strip()
        try:
            conv = _profile_value(value) if key.startswith("profile.") else _CONVERT[key](value)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"bad value for {key!r}: {value!r} ({exc})", lineno, vcol, source) from None
        current[key] = (conv, lineno)

    names = set()
    for kind, lineno, entries in blocks:
        values = {k: v for k, (v, _) in entries.items()}
        if kind == "suite":
            cfg.report = values.pop("report", cfg.report)
            cfg.csv = values.pop("csv", cfg.csv)
            cfg.jobs = values.pop("jobs", cfg.jobs)
            cfg.defaults.update(values)
            continue
        name = kind.split(":", 1)[1]
        if name in names:
            raise ConfigError(f"duplicate scenario {name!r}", lineno, 1, source)
        names.add(name)
        cfg.lines[name] = lineno
        cfg.scenarios.append(_scenario(name, values, cfg.defaults, lineno, source))
    return cfg


def _scenario(name: str, values: dict, defaults: dict, lineno: int, source: str) -> Scenario:
    base_name = values.pop("base", None)
    if base_name is None and "model" not in values and name in BUILTIN_SCENARIOS:
        base_name = name
    if base_name is not None:
        if base_name not in BUILTIN_SCENARIOS:
            raise ConfigError(f"unknown base scenario {base_name!r}", lineno, 1, source)
        base = BUILTIN_SCENARIOS[base_name]
    else:
        missing = [k for k in ("model", "c", "B") if k not in values]
        if missing:
            raise ConfigError(f"scenario {name!r} is missing {', '.join(missing)}", lineno, 1, source)
        base = Scenario(name, values["model"], values["c"], values["B"])
    profile = dict(base.profile)
    for k in [k for k in values if k.startswith("profile.")]:
        profile[k[len("profile."):]] = values.pop(k)
    merged = {k: v for k, v in defaults.items() if k in SHARED_KEYS}
    merged.update(values)
    try:
        return replace(base, name=name, profile=tuple(sorted(profile.items())), **merged)
    except TypeError as exc:
        raise ConfigError(str(exc), lineno, 1, source) from None


def load_config(path: str, validate: bool = True) -> SuiteConfig:
    """Read, parse and (by default) validate every scenario before returning."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", source=path) from None
    cfg = parse_config(text, path)
    if validate:
        for s in cfg.scenarios:
            try:
                s.validate()
            except ScenarioError as exc:
                raise ConfigError(str(exc), cfg.lines.get(s.name), 1, path) from None
    return cfg
