"""Run configuration."""

import hashlib
import json
import math
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple, Type, Union

from pydantic import BaseModel, Field, ValidationError, field_validator
from pydantic_settings import (
    BaseSettings,
    PydanticBaseSettingsSource,
    SettingsConfigDict,
    TomlConfigSettingsSource,
)

from phasefield.exceptions import ConfigValidationError
from phasefield.io.artifacts import ArtifactStore
from phasefield.solver.minmax import MinMaxOptions
from phasefield.solver.newton import NewtonOptions


class PotentialSettings(BaseModel):
    """Double-well potential."""

    name: str = "quartic"
    coefficients: Optional[List[float]] = Field(
        None, description="Polynomial coefficients in ascending powers; overrides name"
    )
    alpha: Optional[float] = None
    kappa: Optional[float] = None


class HeteroclinicSettings(BaseModel):
    """Profile integration grid."""

    half_width: float = Field(12.0, ge=5.0)
    step: float = Field(0.005, gt=0.0, le=0.01)


class SurfaceSettings(BaseModel):
    """Surface mesh."""

    kind: Literal["sphere", "ellipsoid", "torus_of_revolution", "flat_torus", "planar_box"] = (
        "sphere"
    )
    resolution: int = Field(4, ge=1)
    params: Dict[str, float] = Field(default_factory=dict)


class MinMaxSettings(BaseModel):
    """Mountain pass and Newton controls."""

    nodes: int = Field(17, ge=9)
    max_iters: int = Field(200, ge=1)
    step_factor: float = Field(0.5, gt=0.0, description="Descent step in units of epsilon")
    reparam_every: int = Field(10, ge=1)
    concentration: float = Field(1.0, ge=0.0)
    residual_tol: float = Field(1e-8, gt=0.0)
    newton_max_iters: int = Field(50, ge=1)
    damping: float = Field(1.0, gt=0.0, le=1.0)
    perturbation: float = Field(1e-3, ge=0.0)

    def to_options(self) -> MinMaxOptions:
        return MinMaxOptions(
            nodes=self.nodes,
            max_iters=self.max_iters,
            step=self.step_factor,
            reparam_every=self.reparam_every,
            concentration=self.concentration,
            residual_tol=self.residual_tol,
            perturbation=self.perturbation,
            newton=NewtonOptions(
                tol=self.residual_tol, max_iters=self.newton_max_iters, damping=self.damping
            ),
        )


class SpectrumSettings(BaseModel):
    """Eigenvalue computation."""

    q: int = Field(6, ge=3)
    tol: Optional[float] = Field(None, gt=0.0, description="Zero threshold; default relative")
    critical_tol: float = Field(1e-6, gt=0.0)
    dense_limit: int = Field(3000, ge=1)
    eigenfields: bool = False


class VarifoldSettings(BaseModel):
    """Level-set, density and curvature diagnostics."""

    level: float = Field(0.0, gt=-1.0, lt=1.0)
    probe_center: Optional[List[float]] = Field(
        None, description="Density probe point; default the vertex of largest diffuse density"
    )
    probe_radii: List[float] = Field(default_factory=lambda: [0.25, 0.5, 1.0])
    monotonicity_m: float = 0.0
    junction_threshold: float = Field(0.15, gt=0.0)
    sff_threshold_factor: float = Field(1e-3, gt=0.0)

    @field_validator("probe_radii")
    @classmethod
    def sorted_positive(cls, v: List[float]) -> List[float]:
        if not v or any(r <= 0 for r in v) or v != sorted(v):
            raise ValueError("probe_radii must be a non-empty sorted list of positive radii")
        return v


class EntireSettings(BaseModel):
    """2k-ended construction on a planar box."""

    angles: List[float] = Field(
        default_factory=lambda: [0.0, 0.5 * math.pi, math.pi, 1.5 * math.pi]
    )
    offsets: Optional[List[float]] = None
    box: float = Field(12.0, gt=0.0, description="Box half width L")
    h: float = Field(0.25, gt=0.0, description="Target grid spacing")
    R: Optional[float] = Field(None, gt=0.0, description="Gluing radius; default minimal")
    nested: List[float] = Field(default_factory=list, description="Nested sub-box half widths")
    direction_angle: float = Field(0.37, description="Angle of the Jacobi-field direction")
    density_radii: List[float] = Field(default_factory=lambda: [5.0, 6.0, 7.0, 8.0, 9.0, 10.0])
    junction_probe: float = Field(3.0, gt=0.0)
    symmetry: Optional[Tuple[str, int]] = ("reflect_x", -1)

    @property
    def resolution(self) -> int:
        """Even cell count so the box is reflection- and swap-symmetric."""
        cells = max(2, int(round(2.0 * self.box / self.h)))
        return cells + cells % 2


class AcceptanceSettings(BaseModel):
    """Thresholds evaluated by the report command."""

    residual_max: float = 1e-8
    index_allowed: List[int] = Field(default_factory=lambda: [0, 1])
    energy_rel_tol: float = 0.10
    hausdorff_factor: float = 5.0
    density_range: Tuple[float, float] = (1.85, 2.15)
    core_deficit_max: float = Field(
        6.0, gt=0, description="Largest c in ratio(r) ~ 2 - c / r at a crossing, in units of length"
    )


class RunConfig(BaseSettings):
    """One experiment.

    Sources by priority: keyword overrides, PHASEFIELD_* environment variables (nested with
    ``__``), the TOML run file.
    """

    model_config = SettingsConfigDict(
        env_prefix="PHASEFIELD_", env_nested_delimiter="__", extra="forbid"
    )

    experiment: Literal["minmax", "entire"] = "minmax"
    seed: int = 0
    output_dir: str = "runs/default"

    # Model
    potential: PotentialSettings = Field(default_factory=PotentialSettings)
    heteroclinic: HeteroclinicSettings = Field(default_factory=HeteroclinicSettings)

    # Discretization and continuation
    surface: SurfaceSettings = Field(default_factory=SurfaceSettings)
    epsilon_schedule: List[float] = Field(default_factory=lambda: [0.2, 0.1, 0.05])

    # Solvers
    minmax: MinMaxSettings = Field(default_factory=MinMaxSettings)
    spectrum: SpectrumSettings = Field(default_factory=SpectrumSettings)

    # Diagnostics
    varifold: VarifoldSettings = Field(default_factory=VarifoldSettings)
    entire: EntireSettings = Field(default_factory=EntireSettings)
    acceptance: AcceptanceSettings = Field(default_factory=AcceptanceSettings)

    @field_validator("epsilon_schedule")
    @classmethod
    def decreasing_schedule(cls, v: List[float]) -> List[float]:
        if not v:
            raise ValueError("epsilon_schedule must not be empty")
        if any(e <= 0 for e in v):
            raise ValueError("epsilon_schedule entries must be positive")
        if any(b >= a for a, b in zip(v, v[1:])):
            raise ValueError("epsilon_schedule must be strictly decreasing")
        return v

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: Type[BaseSettings],
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> Tuple[PydanticBaseSettingsSource, ...]:
        return (init_settings, env_settings, TomlConfigSettingsSource(settings_cls))


def load_run_config(path: Optional[Union[str, Path]] = None, **overrides: Any) -> RunConfig:
    """Load a run configuration.

    Args:
        path: TOML run file; omitted means defaults plus environment
        **overrides: Top-level fields taking precedence over every other source

    Returns:
        Validated RunConfig
    """
    if path is not None and not Path(path).exists():
        raise ConfigValidationError([{"loc": ["path"], "msg": f"{path} does not exist"}])

    class FileRunConfig(RunConfig):
        model_config = SettingsConfigDict(toml_file=str(path) if path is not None else None)

    try:
        return FileRunConfig(**overrides)
    except ValidationError as exc:
        raise ConfigValidationError(exc.errors(include_url=False)) from exc


def config_hash(cfg: RunConfig) -> str:
    """SHA-256 of the canonical JSON form of the configuration."""
    canonical = json.dumps(cfg.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def stored_config(store: ArtifactStore) -> RunConfig:
    """Configuration saved by a run, adopting its hash for further artifacts."""
    stored = store.read_json("config")
    store.config_hash = stored.get("config_hash")
    payload = {k: v for k, v in stored.items() if k not in ("schema_version", "config_hash")}
    try:
        return RunConfig.model_validate(payload)
    except ValidationError as exc:
        raise ConfigValidationError(exc.errors(include_url=False)) from exc
