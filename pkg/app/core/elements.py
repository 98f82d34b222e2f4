"""
Vectorized P1 / Q1 element kernels.

Every function takes stacked vertex coordinates of shape (E, k, 2) and
returns per-element arrays, so the same code serves the parent elements
of the global mesh and the sub-elements of a bubble sub-mesh.
"""

from typing import Callable, Optional, Tuple

import numpy as np

from app.core.mesh import ElementKind
from app.core.quadrature import p1_shape, q1_shape, q1_shape_grad, square_rule, triangle_rule

SourceFn = Callable[[np.ndarray, np.ndarray], np.ndarray]

P1_MASS_PATTERN = (np.ones((3, 3)) + np.eye(3)) / 12.0


def p1_matrices(coords: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Closed-form linear-triangle stiffness and consistent mass, each (E, 3, 3)"""
    x = coords[..., 0]
    y = coords[..., 1]
    b = np.roll(y, -1, axis=1) - np.roll(y, -2, axis=1)
    c = np.roll(x, -2, axis=1) - np.roll(x, -1, axis=1)
    area = 0.5 * (b[:, 0] * c[:, 1] - b[:, 1] * c[:, 0])

    stiffness = (b[:, :, None] * b[:, None, :] + c[:, :, None] * c[:, None, :]) / (
        4.0 * area[:, None, None]
    )
    mass = area[:, None, None] * P1_MASS_PATTERN[None]
    return stiffness, mass


def _q1_jacobian(coords: np.ndarray, points: np.ndarray):
    grads = q1_shape_grad(points)
    # jac[e, q, a, b] = d x_b / d xi_a
    jac = np.einsum("qka,ekb->eqab", grads, coords)
    det = jac[..., 0, 0] * jac[..., 1, 1] - jac[..., 0, 1] * jac[..., 1, 0]
    return grads, jac, det


def q1_matrices(coords: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Bilinear stiffness and mass by 2x2 Gauss, each (E, 4, 4)"""
    points, weights = square_rule(2)
    grads, jac, det = _q1_jacobian(coords, points)
    inv = np.linalg.inv(jac)
    phys = np.einsum("eqba,qka->eqkb", inv, grads)

    stiffness = np.einsum("q,eq,eqkb,eqlb->ekl", weights, det, phys, phys)
    shape = q1_shape(points)
    mass = np.einsum("q,eq,qk,ql->ekl", weights, det, shape, shape)
    return stiffness, mass


def element_matrices(coords: np.ndarray, kind: ElementKind) -> Tuple[np.ndarray, np.ndarray]:
    coords = np.asarray(coords, dtype=np.float64)
    if kind is ElementKind.TRIANGLE:
        return p1_matrices(coords)
    return q1_matrices(coords)


def load_vectors(
    coords: np.ndarray, kind: ElementKind, source: Optional[SourceFn]
) -> np.ndarray:
    """(f, psi_j) per element by quadrature, shape (E, k); zeros when source is None"""
    coords = np.asarray(coords, dtype=np.float64)
    n_elem, k = coords.shape[:2]
    if source is None:
        return np.zeros((n_elem, k))

    if kind is ElementKind.TRIANGLE:
        points, weights = triangle_rule(5)
        shape = p1_shape(points)
        x = coords[..., 0]
        y = coords[..., 1]
        det = (x[:, 1] - x[:, 0]) * (y[:, 2] - y[:, 0]) - (x[:, 2] - x[:, 0]) * (y[:, 1] - y[:, 0])
        det = np.repeat(det[:, None], points.shape[0], axis=1)
    else:
        points, weights = square_rule(3)
        shape = q1_shape(points)
        _, _, det = _q1_jacobian(coords, points)

    phys = np.einsum("qk,ekd->eqd", shape, coords)
    values = np.asarray(source(phys[..., 0], phys[..., 1]))
    values = np.broadcast_to(values, phys.shape[:2])
    return np.einsum("q,eq,eq,qk->ek", weights, det, values, shape)


def edge_mass(length: np.ndarray) -> np.ndarray:
    """Consistent 1D mass of linear edge functions, shape (B, 2, 2)"""
    pattern = np.array([[2.0, 1.0], [1.0, 2.0]]) / 6.0
    return np.asarray(length, dtype=np.float64)[:, None, None] * pattern[None]


def scatter_dense(
    size: int, connectivity: np.ndarray, local: np.ndarray, dtype=np.float64
) -> np.ndarray:
    """Sum (E, k, k) element blocks into a dense size x size matrix"""
    out = np.zeros((size, size), dtype=dtype)
    k = connectivity.shape[1]
    rows = np.repeat(connectivity, k, axis=1).ravel()
    cols = np.tile(connectivity, (1, k)).ravel()
    np.add.at(out, (rows, cols), local.reshape(-1))
    return out
