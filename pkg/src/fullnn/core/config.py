from __future__ import annotations

import os
from pathlib import Path
from typing import Literal

import yaml  # type: ignore[import-untyped]
from pydantic import BaseModel, Field, ValidationError, field_validator

TOL_ENV_VAR = "FULLNN_TOL"
CONFIG_DIR = ".fullnn"

LP_BACKENDS: tuple[str, ...] = ("auto", "simplex", "highs")


class ConfigError(ValueError):
    """Raised when the workspace config or an override cannot be parsed."""


class ToleranceConfig(BaseModel):
    feasibility: float = 1e-8
    negative: float = 1e-12
    normalization: float = 1e-10
    no_signaling: float = 1e-10
    certificate_dual: float = 1e-7     # relative to max|y| * max|A|
    certificate_margin: float = 1e-9   # relative to sum|y| * max|b|

    @field_validator("*")
    @classmethod
    def _positive(cls, value: float) -> float:
        if not value > 0:
            raise ValueError("tolerances must be positive")
        return value


class LPConfig(BaseModel):
    backend: Literal["auto", "simplex", "highs"] = Field(
        default="auto",
        description=(
            "LP backend. 'simplex' is the embedded dense two-phase simplex, "
            "'highs' goes through scipy's HiGHS bindings, 'auto' uses the "
            "simplex up to dense_limit tableau entries and HiGHS beyond."
        ),
    )
    dense_limit: int = 400_000
    max_iterations: int = 200_000


class ScanConfig(BaseModel):
    jobs: int = 1
    bisection_tol: float = 1e-4
    monotonicity_points: int = 11


class FullNNConfig(BaseModel):
    tolerance: ToleranceConfig = Field(default_factory=ToleranceConfig)
    lp: LPConfig = Field(default_factory=LPConfig)
    scan: ScanConfig = Field(default_factory=ScanConfig)

    def to_yaml_dict(self) -> dict[str, object]:
        return self.model_dump(mode="python")


def _apply_env(config: FullNNConfig) -> FullNNConfig:
    raw = os.environ.get(TOL_ENV_VAR)
    if raw is None or not raw.strip():
        return config
    try:
        value = float(raw)
    except ValueError as exc:
        raise ConfigError(f"{TOL_ENV_VAR}={raw!r} is not a number") from exc
    if not value > 0:
        raise ConfigError(f"{TOL_ENV_VAR} must be positive, got {value}")
    config.tolerance.feasibility = value
    return config


def default_config() -> FullNNConfig:
    return _apply_env(FullNNConfig())


def load_config(workspace: Path) -> FullNNConfig:
    config_path = workspace / CONFIG_DIR / "config.yaml"
    if not config_path.exists():
        return default_config()
    raw = yaml.safe_load(config_path.read_text(encoding="utf-8")) or {}
    try:
        config = FullNNConfig.model_validate(raw)
    except ValidationError as exc:
        raise ConfigError(f"invalid config at {config_path}: {exc}") from exc
    return _apply_env(config)


def ensure_default_config(workspace: Path) -> FullNNConfig:
    workspace.mkdir(parents=True, exist_ok=True)
    config = load_config(workspace)
    config_path = workspace / CONFIG_DIR / "config.yaml"
    config_path.parent.mkdir(parents=True, exist_ok=True)
    if not config_path.exists():
        with config_path.open("w", encoding="utf-8") as handle:
            yaml.safe_dump(FullNNConfig().to_yaml_dict(), handle, sort_keys=False)
    return config
