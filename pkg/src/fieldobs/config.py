"""Flat key-value experiment configuration.

Files are plain text, one `section.key = value` per line, with `#` comments
and blank lines ignored. Example:

    grid.n_points = 42
    grid.length = 6.283185307179586
    plant.tau1 = 1.0
    plant.activation = tanh
    inputs.kind = sinusoidal-product
    snapshots.times = 0, 100, 300
    output.dir = runs/demo

Unknown keys, duplicates, and malformed values are reported with the file
name and line number; semantic violations are reported with the key path.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

import math

from .errors import ConfigError

__all__ = [
    "GridConfig",
    "PlantConfig",
    "InputConfig",
    "GainConfig",
    "IntegrationConfig",
    "PeConfig",
    "ExperimentConfig",
    "parse_config",
    "load_config",
    "config_items",
]

_ACTIVATIONS = ("tanh", "logistic")
_INPUT_KINDS = ("sinusoidal-product", "zero")


@dataclass(frozen=True)
class GridConfig:
    n_points: int
    length: float


@dataclass(frozen=True)
class PlantConfig:
    tau1: float
    tau2: float
    omega11: float
    omega12: float
    omega21: float
    omega22: float
    sigma: float
    activation: str


@dataclass(frozen=True)
class InputConfig:
    amplitude: float
    lambda1: float
    lambda2: float
    kind: str


@dataclass(frozen=True)
class GainConfig:
    beta: float
    gamma1: float
    gamma2: float


@dataclass(frozen=True)
class IntegrationConfig:
    t_final: float
    sample_stride: float
    rtol: float
    atol: float


@dataclass(frozen=True)
class PeConfig:
    """Settings for the excitation diagnostic: the stored signal lattice
    (stride over [0, horizon]) and the Gram-window scan run on it."""

    stride: float = 0.05
    horizon: float = 200.0
    window: float = math.tau
    kappa: float = math.pi
    scan_stride: float = 1.0


@dataclass(frozen=True)
class ExperimentConfig:
    grid: GridConfig
    plant: PlantConfig
    inputs: InputConfig
    gains: GainConfig
    integration: IntegrationConfig
    snapshots: tuple[float, ...]
    output_dir: str
    pe: PeConfig

    def with_t_final(self, t_final: float) -> "ExperimentConfig":
        """Override the horizon, dropping snapshot times it no longer covers."""
        kept = tuple(t for t in self.snapshots if t <= t_final)
        return replace(
            self,
            integration=replace(self.integration, t_final=t_final),
            snapshots=kept,
        )


def _parse_float(text: str) -> float:
    value = float(text)
    if not math.isfinite(value):
        raise ValueError("not finite")
    return value


def _parse_int(text: str) -> int:
    return int(text)


def _parse_str(text: str) -> str:
    if not text:
        raise ValueError("empty")
    return text


def _parse_float_list(text: str) -> tuple[float, ...]:
    if not text.strip():
        return ()
    return tuple(_parse_float(part) for part in text.split(","))


_SCHEMA = {
    "grid.n_points": _parse_int,
    "grid.length": _parse_float,
    "plant.tau1": _parse_float,
    "plant.tau2": _parse_float,
    "plant.omega11": _parse_float,
    "plant.omega12": _parse_float,
    "plant.omega21": _parse_float,
    "plant.omega22": _parse_float,
    "plant.sigma": _parse_float,
    "plant.activation": _parse_str,
    "inputs.amplitude": _parse_float,
    "inputs.lambda1": _parse_float,
    "inputs.lambda2": _parse_float,
    "inputs.kind": _parse_str,
    "gains.beta": _parse_float,
    "gains.gamma1": _parse_float,
    "gains.gamma2": _parse_float,
    "integration.t_final": _parse_float,
    "integration.sample_stride": _parse_float,
    "integration.rtol": _parse_float,
    "integration.atol": _parse_float,
    "snapshots.times": _parse_float_list,
    "output.dir": _parse_str,
    "pe.stride": _parse_float,
    "pe.horizon": _parse_float,
    "pe.window": _parse_float,
    "pe.kappa": _parse_float,
    "pe.scan_stride": _parse_float,
}

_OPTIONAL = {
    "snapshots.times": (),
    "pe.stride": PeConfig.stride,
    "pe.horizon": PeConfig.horizon,
    "pe.window": PeConfig.window,
    "pe.kappa": PeConfig.kappa,
    "pe.scan_stride": PeConfig.scan_stride,
}


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ConfigError(message)


def parse_config(text: str, source: str = "<config>") -> ExperimentConfig:
    values: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        if not sep or not key:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        if key not in _SCHEMA:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        try:
            values[key] = _SCHEMA[key](val)
        except ValueError:
            raise ConfigError(f"{source}:{lineno}: bad value for {key}: {val!r}") from None

    missing = sorted(k for k in _SCHEMA if k not in values and k not in _OPTIONAL)
    if missing:
        raise ConfigError(f"{source}: missing required keys: {', '.join(missing)}")
    for key, default in _OPTIONAL.items():
        values.setdefault(key, default)

    grid = GridConfig(values["grid.n_points"], values["grid.length"])
    plant = PlantConfig(
        values["plant.tau1"],
        values["plant.tau2"],
        values["plant.omega11"],
        values["plant.omega12"],
        values["plant.omega21"],
        values["plant.omega22"],
        values["plant.sigma"],
        values["plant.activation"],
    )
    inputs = InputConfig(
        values["inputs.amplitude"],
        values["inputs.lambda1"],
        values["inputs.lambda2"],
        values["inputs.kind"],
    )
    gains = GainConfig(values["gains.beta"], values["gains.gamma1"], values["gains.gamma2"])
    integration = IntegrationConfig(
        values["integration.t_final"],
        values["integration.sample_stride"],
        values["integration.rtol"],
        values["integration.atol"],
    )
    pe = PeConfig(
        values["pe.stride"],
        values["pe.horizon"],
        values["pe.window"],
        values["pe.kappa"],
        values["pe.scan_stride"],
    )
    cfg = ExperimentConfig(
        grid=grid,
        plant=plant,
        inputs=inputs,
        gains=gains,
        integration=integration,
        snapshots=values["snapshots.times"],
        output_dir=values["output.dir"],
        pe=pe,
    )
    validate_config(cfg)
    return cfg


def validate_config(cfg: ExperimentConfig) -> None:
    _require(cfg.grid.n_points >= 2, f"grid.n_points must be >= 2, got {cfg.grid.n_points}")
    _require(cfg.grid.length > 0, f"grid.length must be > 0, got {cfg.grid.length}")
    for name in ("tau1", "tau2", "sigma"):
        val = getattr(cfg.plant, name)
        _require(val > 0, f"plant.{name} must be > 0, got {val}")
    _require(
        cfg.plant.activation in _ACTIVATIONS,
        f"plant.activation must be one of {_ACTIVATIONS}, got {cfg.plant.activation!r}",
    )
    _require(
        cfg.inputs.kind in _INPUT_KINDS,
        f"inputs.kind must be one of {_INPUT_KINDS}, got {cfg.inputs.kind!r}",
    )
    for name in ("beta", "gamma1", "gamma2"):
        val = getattr(cfg.gains, name)
        _require(val > 0, f"gains.{name} must be > 0, got {val}")
    _require(
        cfg.integration.t_final >= 0,
        f"integration.t_final must be >= 0, got {cfg.integration.t_final}",
    )
    for name in ("sample_stride", "rtol", "atol"):
        val = getattr(cfg.integration, name)
        _require(val > 0, f"integration.{name} must be > 0, got {val}")
    for t in cfg.snapshots:
        _require(
            0.0 <= t <= cfg.integration.t_final,
            f"snapshots.times: {t:g} lies outside [0, t_final = {cfg.integration.t_final:g}]",
        )
    _require(bool(cfg.output_dir), "output.dir must be a nonempty path")
    for name in ("stride", "window", "kappa", "scan_stride"):
        val = getattr(cfg.pe, name)
        _require(val > 0, f"pe.{name} must be > 0, got {val}")
    _require(cfg.pe.horizon >= 0, f"pe.horizon must be >= 0, got {cfg.pe.horizon}")


def load_config(path) -> ExperimentConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc}") from None
    return parse_config(text, source=str(p))


def config_items(cfg: ExperimentConfig) -> list[tuple[str, object]]:
    """The config flattened back to (dotted key, value) pairs, in schema order."""
    flat = {
        "grid.n_points": cfg.grid.n_points,
        "grid.length": cfg.grid.length,
        "plant.tau1": cfg.plant.tau1,
        "plant.tau2": cfg.plant.tau2,
        "plant.omega11": cfg.plant.omega11,
        "plant.omega12": cfg.plant.omega12,
        "plant.omega21": cfg.plant.omega21,
        "plant.omega22": cfg.plant.omega22,
        "plant.sigma": cfg.plant.sigma,
        "plant.activation": cfg.plant.activation,
        "inputs.amplitude": cfg.inputs.amplitude,
        "inputs.lambda1": cfg.inputs.lambda1,
        "inputs.lambda2": cfg.inputs.lambda2,
        "inputs.kind": cfg.inputs.kind,
        "gains.beta": cfg.gains.beta,
        "gains.gamma1": cfg.gains.gamma1,
        "gains.gamma2": cfg.gains.gamma2,
        "integration.t_final": cfg.integration.t_final,
        "integration.sample_stride": cfg.integration.sample_stride,
        "integration.rtol": cfg.integration.rtol,
        "integration.atol": cfg.integration.atol,
        "snapshots.times": cfg.snapshots,
        "output.dir": cfg.output_dir,
        "pe.stride": cfg.pe.stride,
        "pe.horizon": cfg.pe.horizon,
        "pe.window": cfg.pe.window,
        "pe.kappa": cfg.pe.kappa,
        "pe.scan_stride": cfg.pe.scan_stride,
    }
    return [(key, flat[key]) for key in _SCHEMA]
