"""Application configuration: environment settings and run files."""

from __future__ import annotations

import json
import logging
import sys
import warnings
from pathlib import Path
from typing import Any, Literal

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - Python 3.10 fallback, same API
    import tomli as tomllib

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from confnodal.shared.errors import ConfigError, GridRefinementWarning

logger = logging.getLogger(__name__)

DEFAULT_LAMBDA_CAP = 500.0


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_prefix="CONFNODAL_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    # Canonical t-grid size (CONFNODAL_GRID)
    grid: int = Field(4001, ge=5)

    # Forward stepper
    scheme: Literal["magnus4", "rk4"] = "magnus4"
    lambda_cap: float = Field(DEFAULT_LAMBDA_CAP, gt=0)

    log_level: str = "INFO"
    out_dir: str = "./out"

    @property
    def out_path(self) -> Path:
        return Path(self.out_dir).resolve()


_settings: Settings | None = None


def get_settings() -> Settings:
    global _settings
    if _settings is None:
        _settings = Settings()
    return _settings


def reset_settings() -> None:
    global _settings
    _settings = None


# --- Run configuration ---

class PotentialSpec(BaseModel):
    """A trigonometric preset in u = pi^(1-alpha) x^alpha, or a samples CSV."""

    model_config = ConfigDict(extra="forbid")

    kind: Literal["preset", "samples"] = "preset"
    constant: float = 0.0
    cos: list[float] = Field(default_factory=list)
    sin: list[float] = Field(default_factory=list)
    center_sines: bool = False
    path: Path | None = None

    @model_validator(mode="after")
    def _samples_need_path(self) -> PotentialSpec:
        if self.kind == "samples" and self.path is None:
            raise ValueError("samples potentials need a path")
        return self


class Thresholds(BaseModel):
    model_config = ConfigDict(extra="forbid")

    p: float = 0.10
    q: float = 0.15
    mean_q: float = 0.15


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    alpha: float = Field(1.0, gt=0, le=1)
    preset: str | None = "roundtrip"
    p: PotentialSpec | None = None
    q: PotentialSpec | None = None
    allow_constant_p: bool = False

    grid_size: int | None = Field(None, ge=5)
    refine: int = Field(0, ge=0)
    scheme: Literal["magnus4", "rk4"] | None = None
    lambda_cap: float | None = Field(None, gt=0)

    n_min: int = 1
    n_max: int = 20
    cross_check: bool = False
    write_shots: bool = False

    n_use: int = Field(100, ge=8)
    n_use2: int | None = None
    n_use_sweep: list[int] = Field(default_factory=lambda: [50, 100, 200])
    richardson: bool = True
    richardson_levels: int = Field(3, ge=2, le=6)
    smoothing: Literal["moving_average", "savgol", "none"] = "moving_average"
    smoothing_window: int = Field(5, ge=3)
    step4_threshold: float = Field(0.1, gt=0, lt=1)
    step4_endpoint_term: bool = False
    second_pass: bool = True
    asymptotic_compare: bool = False
    interior_fraction: float = Field(0.9, gt=0, le=1)
    thresholds: Thresholds = Field(default_factory=Thresholds)

    out_dir: Path | None = None

    @field_validator("n_min", "n_max")
    @classmethod
    def _nonzero(cls, v: int) -> int:
        if v == 0:
            raise ValueError("eigenvalue indices are nonzero integers")
        return v

    @field_validator("n_use_sweep")
    @classmethod
    def _sweep_ok(cls, v: list[int]) -> list[int]:
        if any(n < 8 for n in v):
            raise ValueError("every n_use in the sweep must be >= 8")
        return sorted(v)

    @model_validator(mode="after")
    def _ranges(self) -> RunConfig:
        if self.n_min > self.n_max:
            raise ValueError("n_min must not exceed n_max")
        if self.n_use2 is not None and self.n_use2 <= self.n_use:
            raise ValueError("n_use2 must exceed n_use")
        if self.preset is None and (self.p is None or self.q is None):
            raise ValueError("without a preset both p and q specs are required")
        return self

    def resolved_grid(self) -> int:
        size = self.grid_size or get_settings().grid
        for _ in range(self.refine):
            size = 2 * (size - 1) + 1
        return size

    def resolved_out_dir(self) -> Path:
        return Path(self.out_dir) if self.out_dir is not None else get_settings().out_path

    def resolved_scheme(self) -> str:
        return self.scheme or get_settings().scheme

    def resolved_lambda_cap(self) -> float:
        cap = self.lambda_cap or get_settings().lambda_cap
        if cap > DEFAULT_LAMBDA_CAP:
            warnings.warn(
                f"lambda cap {cap:g} exceeds {DEFAULT_LAMBDA_CAP:g}; refine the grid accordingly",
                GridRefinementWarning,
                stacklevel=2,
            )
            logger.warning("Lambda cap raised to %g; fixed-grid resolution degrades beyond %g",
                           cap, DEFAULT_LAMBDA_CAP)
        return cap

    def second_index(self, n_use: int | None = None) -> int:
        n = n_use or self.n_use
        return self.n_use2 if (self.n_use2 and n == self.n_use) else 2 * n

    def echo(self) -> dict[str, Any]:
        """Fully resolved configuration, as written next to the outputs."""
        data = self.model_dump(mode="json")
        data["grid_size"] = self.resolved_grid()
        data["scheme"] = self.resolved_scheme()
        data["lambda_cap"] = self.lambda_cap or get_settings().lambda_cap
        data["out_dir"] = str(self.resolved_out_dir())
        return data


def _format_validation(err: ValidationError) -> str:
    lines = []
    for item in err.errors():
        loc = ".".join(str(part) for part in item["loc"]) or "<root>"
        lines.append(f"{loc}: {item['msg']}")
    return "; ".join(lines)


def load_run_config(path: Path | None, overrides: dict[str, Any] | None = None) -> RunConfig:
    """Read a TOML or JSON run file and apply CLI overrides on top."""
    data: dict[str, Any] = {}
    if path is not None:
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        text = path.read_text(encoding="utf-8")
        try:
            if path.suffix.lower() == ".json":
                data = json.loads(text)
            else:
                data = tomllib.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}: line {e.lineno}, column {e.colno}: {e.msg}") from e
        except tomllib.TOMLDecodeError as e:
            # tomllib reports "(at line L, column C)" in the message
            raise ConfigError(f"{path}: {e}") from e
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top level must be a table")

    for key, value in (overrides or {}).items():
        if value is not None:
            data[key] = value

    try:
        cfg = RunConfig.model_validate(data)
    except ValidationError as e:
        where = f"{path}: " if path else ""
        raise ConfigError(f"{where}{_format_validation(e)}") from e
    logger.info("Loaded run config (alpha=%g, preset=%s)", cfg.alpha, cfg.preset)
    return cfg
