"""Run configuration: YAML parsing with strict key checking."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Mapping

import numpy as np
import yaml

from .errors import ConfigParseError, ParameterError
from .model import ModelParams
from .steady import SolverOptions

MAX_SWEEP_POINTS = 10**6


@dataclass(frozen=True)
class SweepRange:
    """Inclusive linear range; ``count == 1`` means the single value ``start``."""

    start: float
    stop: float
    count: int = 1

    def __post_init__(self) -> None:
        if self.count < 1:
            raise ConfigParseError(f"range count must be >= 1, got {self.count}")
        if self.start > self.stop:
            raise ConfigParseError(f"range start {self.start} exceeds stop {self.stop}")
        if self.count == 1 and self.start != self.stop:
            raise ConfigParseError("a single-point range needs start == stop")

    def values(self) -> np.ndarray:
        if self.count == 1:
            return np.array([self.start])
        return np.linspace(self.start, self.stop, self.count)


@dataclass(frozen=True)
class ModelBlock:
    h: SweepRange
    F: SweepRange
    g: float = 0.5
    beta: float = 0.1
    n_max: int = 40

    def points(self) -> list[ModelParams]:
        """All ``(h, F)`` combinations, h-major and F-minor."""
        return [
            ModelParams(h=float(h), g=self.g, beta=self.beta, F=float(F), n_max=self.n_max)
            for h, F in itertools.product(self.h.values(), self.F.values())
        ]


@dataclass(frozen=True)
class WignerBlock:
    enabled: bool = False
    extent: float | None = None
    points: int = 161


@dataclass(frozen=True)
class OutputBlock:
    directory: str = "qopo_out"
    emit_csv: bool = True
    emit_plots: bool = True
    # wall-clock timings make CSV output run-dependent; off by default
    record_timing: bool = False


@dataclass(frozen=True)
class RunConfig:
    model: ModelBlock
    solver: SolverOptions = field(default_factory=SolverOptions)
    wigner: WignerBlock = field(default_factory=WignerBlock)
    outputs: OutputBlock = field(default_factory=OutputBlock)
    workers: int = 1

    @property
    def n_points(self) -> int:
        return self.model.h.count * self.model.F.count

    def with_overrides(
        self, n_max: int | None = None, out: str | None = None, workers: int | None = None
    ) -> "RunConfig":
        cfg = self
        if n_max is not None:
            try:
                ModelParams(h=0.0, g=cfg.model.g, beta=cfg.model.beta, n_max=n_max)
            except ParameterError as exc:
                raise ConfigParseError(str(exc)) from exc
            cfg = replace(cfg, model=replace(cfg.model, n_max=int(n_max)))
        if out is not None:
            cfg = replace(cfg, outputs=replace(cfg.outputs, directory=str(out)))
        if workers is not None:
            if workers < 0:
                raise ConfigParseError(f"workers must be >= 0, got {workers}")
            cfg = replace(cfg, workers=int(workers))
        return cfg


def _check_keys(block: Mapping[str, Any], allowed: set[str], where: str) -> None:
    if not isinstance(block, Mapping):
        raise ConfigParseError(f"'{where}' must be a mapping, got {type(block).__name__}")
    unknown = set(block) - allowed
    if unknown:
        raise ConfigParseError(f"unknown key(s) in '{where}': {sorted(map(str, unknown))}")


def _float(value: Any, name: str) -> float:
    # YAML 1.1 reads ``1e-10`` (no dot) as a string
    if isinstance(value, bool):
        raise ConfigParseError(f"'{name}' must be a number, got {value!r}")
    try:
        out = float(value)
    except (TypeError, ValueError):
        raise ConfigParseError(f"'{name}' must be a number, got {value!r}") from None
    if not math.isfinite(out):
        raise ConfigParseError(f"'{name}' must be finite, got {value!r}")
    return out


def _int(value: Any, name: str) -> int:
    if isinstance(value, bool):
        raise ConfigParseError(f"'{name}' must be an integer, got {value!r}")
    if isinstance(value, float) and value.is_integer():
        return int(value)
    if not isinstance(value, int):
        raise ConfigParseError(f"'{name}' must be an integer, got {value!r}")
    return value


def _bool(value: Any, name: str) -> bool:
    if not isinstance(value, bool):
        raise ConfigParseError(f"'{name}' must be true or false, got {value!r}")
    return value


def _range(value: Any, name: str) -> SweepRange:
    if isinstance(value, Mapping):
        _check_keys(value, {"start", "stop", "count"}, name)
        missing = {"start", "stop", "count"} - set(value)
        if missing:
            raise ConfigParseError(f"range '{name}' is missing {sorted(missing)}")
        return SweepRange(
            _float(value["start"], f"{name}.start"),
            _float(value["stop"], f"{name}.stop"),
            _int(value["count"], f"{name}.count"),
        )
    v = _float(value, name)
    return SweepRange(v, v, 1)


def parse_config(data: Mapping[str, Any] | None) -> RunConfig:
    """Build a :class:`RunConfig` from parsed YAML; unknown keys are errors."""
    data = {} if data is None else data
    _check_keys(data, {"model", "solver", "wigner", "outputs", "parallelism"}, "<root>")

    m = data.get("model") or {}
    _check_keys(m, {"h", "F", "g", "beta", "n_max"}, "model")
    model = ModelBlock(
        h=_range(m.get("h", 1.0), "model.h"),
        F=_range(m.get("F", 0.0), "model.F"),
        g=_float(m.get("g", 0.5), "model.g"),
        beta=_float(m.get("beta", 0.1), "model.beta"),
        n_max=_int(m.get("n_max", 40), "model.n_max"),
    )
    if model.h.count * model.F.count > MAX_SWEEP_POINTS:
        raise ConfigParseError(f"sweep has more than {MAX_SWEEP_POINTS} points")
    try:
        # validates rates and truncation once, independent of the sweep values
        ModelParams(h=model.h.start, g=model.g, beta=model.beta, F=model.F.start, n_max=model.n_max)
    except ParameterError as exc:
        raise ConfigParseError(str(exc)) from exc

    s = data.get("solver") or {}
    known = {f.name for f in fields(SolverOptions)}
    _check_keys(s, known, "solver")
    solver_kwargs: dict[str, Any] = {}
    for key, val in s.items():
        if key == "method":
            solver_kwargs[key] = str(val)
        elif key == "tail_band":
            solver_kwargs[key] = _int(val, f"solver.{key}")
        else:
            solver_kwargs[key] = _float(val, f"solver.{key}")
    try:
        solver = SolverOptions(**solver_kwargs)
    except ValueError as exc:
        raise ConfigParseError(str(exc)) from exc

    w = data.get("wigner") or {}
    _check_keys(w, {"enabled", "extent", "points"}, "wigner")
    extent = w.get("extent")
    wig = WignerBlock(
        enabled=_bool(w.get("enabled", False), "wigner.enabled"),
        extent=None if extent is None else _float(extent, "wigner.extent"),
        points=_int(w.get("points", 161), "wigner.points"),
    )
    if wig.extent is not None and wig.extent <= 0:
        raise ConfigParseError("wigner.extent must be > 0")
    if wig.points < 16:
        raise ConfigParseError("wigner.points must be >= 16")

    o = data.get("outputs") or {}
    _check_keys(o, {"directory", "emit_csv", "emit_plots", "record_timing"}, "outputs")
    outputs = OutputBlock(
        directory=str(o.get("directory", OutputBlock.directory)),
        emit_csv=_bool(o.get("emit_csv", True), "outputs.emit_csv"),
        emit_plots=_bool(o.get("emit_plots", True), "outputs.emit_plots"),
        record_timing=_bool(o.get("record_timing", False), "outputs.record_timing"),
    )

    p = data.get("parallelism") or {}
    _check_keys(p, {"workers"}, "parallelism")
    workers = _int(p.get("workers", 1), "parallelism.workers")
    if workers < 0:
        raise ConfigParseError("parallelism.workers must be >= 0")

    return RunConfig(model=model, solver=solver, wigner=wig, outputs=outputs, workers=workers)


def load_config(path: str | Path | None) -> RunConfig:
    """Read and parse a YAML config file; ``None`` gives the defaults."""
    if path is None:
        return parse_config({})
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigParseError(f"cannot read config {path}: {exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigParseError(f"malformed YAML in {path}: {exc}") from exc
    if data is not None and not isinstance(data, Mapping):
        raise ConfigParseError(f"config root must be a mapping, got {type(data).__name__}")
    return parse_config(data)
