"""
Named benchmark problems: a mesh builder plus the matching ProblemSpec.

Structured presets (``fixed_h``) are meshed at a given number of cells per
unit length and derive whichever of c and c*h is missing from it; the others
mesh the domain for the requested c and c*h.
"""

from dataclasses import dataclass
from typing import Callable, Dict, Optional, Tuple
import logging
import math

import numpy as np

from app.core.mesh import (
    BoundaryMarker,
    Mesh,
    equilateral_triangle_mesh,
    gen_equilateral_triangle_domain,
    gen_lattice_parallelogram,
    gen_lshape_quad_mesh,
    gen_unstructured_polygon,
)
from app.core.problem import (
    DirichletKind,
    DirichletSpec,
    Method,
    ProblemSpec,
    SourceKind,
    SourceSpec,
)

logger = logging.getLogger(__name__)

D, N, R = BoundaryMarker.DIRICHLET, BoundaryMarker.NEUMANN, BoundaryMarker.ROBIN

LSHAPE_OUTLINE = [(-1.0, -1.0), (0.0, -1.0), (0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (-1.0, 1.0)]
STRIP_CELLS = 20
LSHAPE_QUAD_CELLS = 7
SCATTERER_INNER_HALF_WIDTH = 0.1


@dataclass(frozen=True)
class Preset:
    name: str
    description: str
    default_c: float
    default_ch: float
    default_theta: float
    build_mesh: Callable[[float, float], Mesh]
    base_spec: Callable[[float, float], ProblemSpec]
    fixed_h: Optional[float] = None
    reference_ch: Optional[float] = None

    def resolve(
        self, c: Optional[float], ch: Optional[float], cells: Optional[int] = None
    ) -> Tuple[float, float]:
        """Fill in (c, ch) from the request and the preset defaults"""
        h = self.fixed_h
        if cells is not None:
            if h is None:
                raise ValueError(
                    f"preset {self.name} is meshed from c and ch; cells applies to structured presets only"
                )
            if cells < 1:
                raise ValueError("cells must be positive")
            h = 1.0 / cells
        if h is not None:
            if ch is None:
                ch = c * h if c is not None else self.default_ch
            elif c is not None and not math.isclose(c * h, ch, rel_tol=1e-9):
                logger.warning(
                    f"Preset {self.name} has a fixed mesh (h={h:.6g}); "
                    f"using c={ch / h:.6g} from ch={ch:g} instead of c={c:g}"
                )
            return ch / h, ch
        return (c if c is not None else self.default_c), (ch if ch is not None else self.default_ch)

    def spec(self, c: float, theta: Optional[float] = None, method: Method = Method.GALERKIN, **overrides) -> ProblemSpec:
        theta = self.default_theta if theta is None else theta
        return self.base_spec(c, theta).model_copy(update={"method": Method(method), **overrides})


def _plane_wave_spec(c: float, theta: float) -> ProblemSpec:
    return ProblemSpec(c=c, dirichlet=DirichletSpec(kind=DirichletKind.PLANE_WAVE, theta=theta))


def _axis_wave_spec(c: float, theta: float) -> ProblemSpec:
    return ProblemSpec(c=c, dirichlet=DirichletSpec(kind=DirichletKind.AXIS_WAVE))


def _robin_source_spec(c: float, theta: float) -> ProblemSpec:
    return ProblemSpec(
        c=c,
        source=SourceSpec(kind=SourceKind.SIN_X),
        dirichlet=DirichletSpec(kind=DirichletKind.CONSTANT, value=0.1),
        robin_coefficient=1j,
    )


def _scatterer_spec(c: float, theta: float) -> ProblemSpec:
    return ProblemSpec(c=c, dirichlet=DirichletSpec(kind=DirichletKind.CONSTANT, value=0.1))


def _cells(c: float, ch: float) -> int:
    return int(round(c / ch))


def _robin_triangle(c: float, ch: float) -> Mesh:
    return equilateral_triangle_mesh(_cells(c, ch), 1.0, {"bottom": D, "left": R, "right": R})


def _strip(c: float, ch: float) -> Mesh:
    # width 1, height sqrt(3)/4: twice as many cells along x as rows
    nx = _cells(c, ch)
    if nx < 2 or nx % 2:
        raise ValueError(f"neumann-strip needs an even number of cells per unit length, got {nx}")
    return gen_lattice_parallelogram(
        nx, nx // 2, 1.0 / nx, {"left": D, "right": D, "bottom": N, "top": N}
    )


def _lshape(c: float, ch: float) -> Mesh:
    return gen_unstructured_polygon(LSHAPE_OUTLINE, ch / c)


def _lshape_quad(c: float, ch: float) -> Mesh:
    return gen_lshape_quad_mesh(1.0 / _cells(c, ch), {"left": D, "right": D, "bottom": N, "top": N})


def scatterer_outline(h: float) -> Tuple[list, list]:
    """Polygonal unit circle (outer) and a small centred square (inner)"""
    k = max(32, int(math.ceil(2.0 * math.pi / h)))
    angles = 2.0 * math.pi * np.arange(k) / k
    outer = list(zip(np.cos(angles), np.sin(angles)))
    a = SCATTERER_INNER_HALF_WIDTH
    inner = [(-a, -a), (-a, a), (a, a), (a, -a)]
    return outer, inner


def _scatterer(c: float, ch: float) -> Mesh:
    h = ch / c
    outer, inner = scatterer_outline(h)
    return gen_unstructured_polygon(outer, h, holes=[inner], outer_marker=N, hole_marker=D)


PRESETS: Dict[str, Preset] = {
    p.name: p
    for p in (
        Preset(
            "dirichlet-planewave",
            "Plane wave with Dirichlet data on the equilateral triangle",
            default_c=50.0,
            default_ch=0.625,
            default_theta=0.0,
            build_mesh=lambda c, ch: gen_equilateral_triangle_domain(1.0, ch, c),
            base_spec=_plane_wave_spec,
        ),
        Preset(
            "neumann-strip",
            "sin(cx) on an equilateral parallelogram (400 elements by default), Neumann on the horizontal sides",
            default_c=70.0,
            default_ch=3.5,
            default_theta=0.0,
            build_mesh=_strip,
            base_spec=_axis_wave_spec,
            fixed_h=1.0 / STRIP_CELLS,
        ),
        Preset(
            "robin-source",
            "f = sin(x), u = 0.1 on the bottom side, du/dn = iu on the others",
            default_c=20.0,
            default_ch=0.5,
            default_theta=0.0,
            build_mesh=_robin_triangle,
            base_spec=_robin_source_spec,
            reference_ch=0.1,
        ),
        Preset(
            "lshape",
            "Plane wave on an unstructured L-shaped domain",
            default_c=20.0,
            default_ch=0.625,
            default_theta=math.pi / 3.0,
            build_mesh=_lshape,
            base_spec=_plane_wave_spec,
        ),
        Preset(
            "lshape-quad",
            "sin(cx) on squares of an L-shaped domain (147 by default)",
            default_c=10.5,
            default_ch=1.5,
            default_theta=0.0,
            build_mesh=_lshape_quad,
            base_spec=_axis_wave_spec,
            fixed_h=1.0 / LSHAPE_QUAD_CELLS,
        ),
        Preset(
            "scatterer",
            "Annulus between a polygonal unit circle (Neumann) and a square (u = 0.1)",
            default_c=11.0,
            default_ch=0.625,
            default_theta=0.0,
            build_mesh=_scatterer,
            base_spec=_scatterer_spec,
            reference_ch=0.09,
        ),
    )
}


def get_preset(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
