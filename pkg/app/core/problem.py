from enum import Enum
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from app.core.elements import SourceFn


class Method(str, Enum):
    GALERKIN = "galerkin"
    RFB = "rfb"
    AB = "ab"


class SourceKind(str, Enum):
    ZERO = "zero"
    CONSTANT = "constant"
    SIN_X = "sin_x"


class DirichletKind(str, Enum):
    PLANE_WAVE = "plane_wave"
    AXIS_WAVE = "axis_wave"
    CONSTANT = "constant"


class PlaneWaveConvention(str, Enum):
    # sin(c x sin(theta) + c y cos(theta))
    DIRICHLET = "dirichlet"
    # sin(c x cos(theta) + c y sin(theta))
    TRUNCATION = "truncation"


def plane_wave(
    x: np.ndarray,
    y: np.ndarray,
    c: float,
    theta: float,
    convention: PlaneWaveConvention = PlaneWaveConvention.DIRICHLET,
) -> np.ndarray:
    if PlaneWaveConvention(convention) is PlaneWaveConvention.DIRICHLET:
        return np.sin(c * x * np.sin(theta) + c * y * np.cos(theta))
    return np.sin(c * x * np.cos(theta) + c * y * np.sin(theta))


class SourceSpec(BaseModel):
    """Right-hand side f of -lap(u) - c^2 u = f"""

    model_config = ConfigDict(frozen=True)

    kind: SourceKind = Field(SourceKind.ZERO, description="Source preset")
    value: complex = Field(0.0, description="Value of a constant source")

    @property
    def translation_invariant(self) -> bool:
        return self.kind in (SourceKind.ZERO, SourceKind.CONSTANT)

    def function(self) -> Optional[SourceFn]:
        """Vectorized f(x, y), or None for the zero source"""
        if self.kind is SourceKind.ZERO:
            return None
        if self.kind is SourceKind.CONSTANT:
            value = self.value.real if self.value.imag == 0 else self.value
            return lambda x, y: np.full(np.shape(x), value)
        return lambda x, y: np.sin(x)


class DirichletSpec(BaseModel):
    """Boundary data prescribed on Dirichlet edges"""

    model_config = ConfigDict(frozen=True)

    kind: DirichletKind = Field(DirichletKind.PLANE_WAVE, description="Boundary data preset")
    theta: float = Field(0.0, description="Plane-wave direction in radians")
    convention: PlaneWaveConvention = Field(
        PlaneWaveConvention.DIRICHLET, description="Placement of sin/cos in the plane wave"
    )
    value: complex = Field(0.0, description="Value of constant boundary data")

    def evaluate(self, points: np.ndarray, c: float) -> np.ndarray:
        points = np.asarray(points, dtype=np.float64).reshape(-1, 2)
        x, y = points[:, 0], points[:, 1]
        if self.kind is DirichletKind.PLANE_WAVE:
            return plane_wave(x, y, c, self.theta, self.convention).astype(np.complex128)
        if self.kind is DirichletKind.AXIS_WAVE:
            return np.sin(c * x).astype(np.complex128)
        return np.full(x.shape, self.value, dtype=np.complex128)


class ProblemSpec(BaseModel):
    """-lap(u) - c^2 u = f with Dirichlet, Neumann and Robin edges"""

    model_config = ConfigDict(
        frozen=True,
        json_schema_extra={
            "example": {
                "c": 50.0,
                "source": {"kind": "zero"},
                "dirichlet": {"kind": "plane_wave", "theta": 0.0},
                "robin_coefficient": "1j",
                "method": "ab",
            }
        },
    )

    c: float = Field(..., gt=0, description="Wave number")
    source: SourceSpec = Field(default_factory=SourceSpec)
    dirichlet: DirichletSpec = Field(default_factory=DirichletSpec)
    robin_coefficient: complex = Field(1j, description="beta in du/dn = beta*u on Robin edges")
    method: Method = Field(Method.GALERKIN, description="Global discretization")
    n_s: Optional[int] = Field(None, ge=3, description="Sub-mesh nodes per edge (overrides the table policy)")
    clamp_mu: bool = Field(False, description="Clamp mu lookups above the calibrated range")
    mu_table_path: Optional[str] = Field(None, description="Alternative mu table file")

    def with_method(self, method: Method) -> "ProblemSpec":
        return self.model_copy(update={"method": Method(method)})
