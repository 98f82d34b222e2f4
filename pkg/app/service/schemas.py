from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field, field_validator
from pydantic_settings import (
    BaseSettings,
    JsonConfigSettingsSource,
    PydanticBaseSettingsSource,
    SettingsConfigDict,
)

from app.core.fdstencil import SchemeTag
from app.core.presets import PRESETS
from app.core.problem import Method, PlaneWaveConvention
from app.core.verify import DEFAULT_SWEEP_METHODS, FD_METHODS, FEM_METHODS
from config.config import settings


class Subcommand(str, Enum):
    SOLVE = "solve"
    SWEEP = "sweep"
    COEFFS = "coeffs"
    TABLE = "table"
    MESH = "mesh"


class SweepKind(str, Enum):
    POLLUTION = "pollution"
    THETA = "theta"


class C2Form(str, Enum):
    NORMALIZED = "normalized"
    PRINTED = "printed"


class RunConfig(BaseSettings):
    """
    One experiment run. Built from keyword arguments (command-line flags)
    layered over an optional JSON manifest; the environment is ignored.
    """

    model_config = SettingsConfigDict(
        extra="forbid",
        json_schema_extra={
            "example": {
                "subcommand": "sweep",
                "methods": ["galerkin", "ab"],
                "c_list": [25, 50, 100, 200],
                "ch": 0.625,
                "theta": 0.0,
                "output_dir": "results/pollution",
            }
        },
    )

    subcommand: Subcommand = Field(..., description="What to run")

    preset: str = Field("dirichlet-planewave", description="Benchmark problem")
    method: Method = Field(Method.AB, description="Global method for solve")
    methods: List[str] = Field(list(DEFAULT_SWEEP_METHODS), description="Sweep columns")
    c: Optional[float] = Field(None, gt=0, description="Wave number")
    c_list: List[float] = Field([25.0, 50.0, 100.0, 200.0], min_length=1)
    ch: Optional[float] = Field(None, gt=0, description="Wave number times mesh size")
    cells: Optional[int] = Field(None, ge=1, description="Cells per unit length of a structured preset")
    theta: Optional[float] = Field(None, description="Plane-wave direction (radians)")
    thetas: Optional[List[float]] = Field(None, description="Angles of a theta sweep")
    sweep_kind: SweepKind = SweepKind.POLLUTION
    convention: PlaneWaveConvention = PlaneWaveConvention.DIRICHLET
    robin_coefficient: Optional[complex] = None

    n_s: Optional[int] = Field(None, ge=3, description="Override of the sub-mesh resolution")
    mu_table: Optional[str] = Field(None, description="Alternative mu table file")
    clamp_mu: bool = False

    scheme: SchemeTag = Field(SchemeTag.GALERKIN, description="Stencil for coeffs")
    mu: float = Field(6.8, gt=0, description="mu of the pseudo-ab stencil")
    ch_grid: Optional[List[float]] = None
    ch_min: float = Field(0.05, gt=0)
    ch_max: float = Field(3.5, gt=0)
    ch_steps: int = Field(70, ge=1)
    c2_form: C2Form = C2Form.NORMALIZED
    h: Optional[float] = Field(None, gt=0, description="Mesh size for the printed C2 form")

    kind: str = Field("tri", description="Table kind (tri or quad)")
    key: Optional[float] = Field(None, gt=0, description="Key to look up")

    input: Optional[str] = Field(None, description="Mesh file to validate")
    output_dir: str = "results"
    output: Optional[str] = Field(None, description="Explicit output file")
    vtk: bool = True
    reference: bool = False
    timings: bool = False
    threads: int = Field(0, ge=0)
    log_level: str = settings.log_level

    @field_validator("preset")
    @classmethod
    def known_preset(cls, value: str) -> str:
        if value not in PRESETS:
            raise ValueError(f"unknown preset {value!r}; choose from {sorted(PRESETS)}")
        return value

    @field_validator("methods")
    @classmethod
    def known_methods(cls, value: List[str]) -> List[str]:
        unknown = [m for m in value if m not in FEM_METHODS | FD_METHODS]
        if unknown:
            raise ValueError(f"unknown method(s) {unknown}")
        return value

    @field_validator("kind")
    @classmethod
    def known_kind(cls, value: str) -> str:
        if value not in ("tri", "quad"):
            raise ValueError("kind must be 'tri' or 'quad'")
        return value

    @field_validator("log_level")
    @classmethod
    def known_level(cls, value: str) -> str:
        value = value.upper()
        if value not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            raise ValueError(f"unknown log level {value!r}")
        return value

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: type[BaseSettings],
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> tuple[PydanticBaseSettingsSource, ...]:
        return (init_settings,)

    @classmethod
    def load(cls, path: Optional[str | Path] = None, **overrides: Any) -> "RunConfig":
        """JSON manifest values, with ``overrides`` (flags) taking precedence"""
        values: Dict[str, Any] = {}
        if path is not None:
            if not Path(path).is_file():
                raise FileNotFoundError(f"config file {path} not found")
            values = JsonConfigSettingsSource(cls, json_file=path)()
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


class SolveSummary(BaseModel):
    """JSON summary written next to the VTK field of a solve"""

    preset: str
    method: str
    c: float
    ch: float
    theta: float
    n_nodes: int
    n_elements: int
    n_unknowns: int
    u_max: float = Field(..., description="Maximum of Re(u_h)")
    u_min: float = Field(..., description="Minimum of Re(u_h)")
    exact_max: Optional[float] = Field(None, description="Maximum of the exact solution at the nodes")
    exact_min: Optional[float] = None
    inf_error: Optional[float] = Field(None, description="Max error over nodes and centroids")
    rel_error: Optional[float] = None
    reference_error: Optional[float] = Field(None, description="Max deviation from the fine-mesh reference")
    assembly_ms: float
    solve_ms: float
    vtk_path: Optional[str] = None

    model_config = {
        "json_schema_extra": {
            "example": {
                "preset": "dirichlet-planewave",
                "method": "ab",
                "c": 157.08,
                "ch": 0.7,
                "theta": 0.0,
                "n_nodes": 25200,
                "n_elements": 49729,
                "n_unknowns": 24531,
                "u_max": 1.0,
                "u_min": -1.0,
                "inf_error": 0.02,
                "assembly_ms": 900.0,
                "solve_ms": 300.0,
            }
        }
    }
