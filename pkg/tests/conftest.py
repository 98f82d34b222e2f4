import math

import numpy as np
import pytest

from app.core.mesh import BoundaryMarker, ElementKind, equilateral_triangle_mesh
from app.core.mu_table import get_mu_table
from app.core.problem import DirichletKind, DirichletSpec, Method, ProblemSpec

SQRT3 = math.sqrt(3.0)


@pytest.fixture
def small_tri_mesh():
    """Equilateral triangle, 6 subdivisions per side, Dirichlet everywhere"""
    return equilateral_triangle_mesh(6)


@pytest.fixture
def robin_mesh():
    return equilateral_triangle_mesh(
        8,
        markers={
            "bottom": BoundaryMarker.DIRICHLET,
            "left": BoundaryMarker.ROBIN,
            "right": BoundaryMarker.ROBIN,
        },
    )


@pytest.fixture
def tri_table():
    return get_mu_table(ElementKind.TRIANGLE)


@pytest.fixture
def quad_table():
    return get_mu_table(ElementKind.QUAD)


@pytest.fixture
def plane_wave_spec():
    def make(c: float, theta: float = 0.0, method: Method = Method.GALERKIN) -> ProblemSpec:
        return ProblemSpec(
            c=c,
            dirichlet=DirichletSpec(kind=DirichletKind.PLANE_WAVE, theta=theta),
            method=method,
        )

    return make


@pytest.fixture
def equilateral_vertices():
    def make(h: float, origin=(0.0, 0.0)) -> np.ndarray:
        x0, y0 = origin
        return np.array([[x0, y0], [x0 + h, y0], [x0 + 0.5 * h, y0 + SQRT3 / 2 * h]])

    return make
