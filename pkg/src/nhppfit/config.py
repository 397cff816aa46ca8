"""Run configuration: built-in defaults, a flat key-value file, CLI overrides."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any

from .ingest import Weekday


class ConfigError(ValueError):
    pass


def _float_list(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in str(text).split(",") if v.strip())


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in str(text).split(",") if v.strip())


@dataclass(frozen=True)
class RunConfig:
    weekday: str = "tue"
    weeks: int = 13
    alpha: float = 0.05
    ell_hours: float = 1.0
    weight: float = 1.0
    grid: int = 24
    max_intervals: int = 24
    cells: int = 96
    budget: int = 5000
    seed: int = 0
    restarts: int = 1
    penalty_eps: float = 1.0
    penalty_shrink: float = 0.1
    memory: int = 4
    initial_step: int = 2
    output_dir: str = ""
    format: str = "text"
    weights: tuple[float, ...] = field(default=())
    weeks_list: tuple[int, ...] = field(default=())

    def __post_init__(self) -> None:
        problems = []
        try:
            Weekday.parse(self.weekday)
        except ValueError as exc:
            problems.append(str(exc))
        if self.weeks < 2:
            problems.append(f"weeks={self.weeks}: at least 2 weeks are needed for the dispersion test")
        if not 0 < self.alpha < 1:
            problems.append(f"alpha={self.alpha}: must lie strictly between 0 and 1")
        if self.ell_hours < 0.25:
            problems.append(f"ell_hours={self.ell_hours}: minimum interval length must be at least 0.25 h")
        if not math.isfinite(self.weight) or self.weight < 0:
            problems.append(f"weight={self.weight}: must be a finite non-negative number")
        if not self.grid >= self.max_intervals >= 2:
            problems.append(
                f"grid={self.grid}, max_intervals={self.max_intervals}: need grid >= max_intervals >= 2"
            )
        if self.cells < 1 or self.cells % self.grid:
            problems.append(f"cells={self.cells}: must be a positive multiple of grid={self.grid}")
        units = self.ell_hours * self.grid / 24
        if abs(units - round(units)) > 1e-9:
            problems.append(f"ell_hours={self.ell_hours}: not a whole number of {24 / self.grid} h grid units")
        if self.budget < 1:
            problems.append(f"budget={self.budget}: must be at least 1")
        if self.restarts < 1:
            problems.append(f"restarts={self.restarts}: must be at least 1")
        if self.penalty_eps <= 0:
            problems.append(f"penalty_eps={self.penalty_eps}: must be positive")
        if not 0 < self.penalty_shrink < 1:
            problems.append(f"penalty_shrink={self.penalty_shrink}: must lie in (0, 1)")
        if self.memory < 1:
            problems.append(f"memory={self.memory}: must be at least 1")
        if self.initial_step < 1:
            problems.append(f"initial_step={self.initial_step}: must be at least 1")
        if self.format not in ("json", "csv", "text"):
            problems.append(f"format={self.format!r}: use json, csv or text")
        if any(w < 0 or not math.isfinite(w) for w in self.weights):
            problems.append(f"weights={self.weights}: must be finite and non-negative")
        if any(m < 2 for m in self.weeks_list):
            problems.append(f"weeks list {self.weeks_list}: every entry must be at least 2")
        if problems:
            raise ConfigError("; ".join(problems))


_PARSERS: dict[str, Any] = {
    "weights": _float_list,
    "weeks_list": _int_list,
}


def field_names() -> list[str]:
    return [f.name for f in fields(RunConfig)]


def _coerce(name: str, value: Any) -> Any:
    if name in _PARSERS:
        return value if isinstance(value, tuple) else _PARSERS[name](value)
    kind = {f.name: f.type for f in fields(RunConfig)}[name]
    try:
        if kind == "int":
            if isinstance(value, str) and not value.strip().lstrip("-").isdigit():
                raise ValueError
            return int(value)
        if kind == "float":
            return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name}: cannot interpret {value!r} as {kind}") from None
    return str(value)


def read_config_file(path: str | Path) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment; dashes in keys are allowed."""
    values: dict[str, str] = {}
    known = set(field_names())
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in known:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            values[key] = value
    return values


def resolve(cli: dict[str, Any], file_values: dict[str, str] | None = None) -> RunConfig:
    """CLI value if given, else the config file value, else the built-in default."""
    merged: dict[str, Any] = {}
    file_values = file_values or {}
    for name in field_names():
        if cli.get(name) is not None:
            merged[name] = _coerce(name, cli[name])
        elif name in file_values:
            merged[name] = _coerce(name, file_values[name])
    return dataclasses.replace(RunConfig(), **merged) if merged else RunConfig()
