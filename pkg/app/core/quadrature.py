from functools import lru_cache
from typing import Tuple

import numpy as np


@lru_cache(maxsize=None)
def triangle_rule(order: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Quadrature on the reference triangle (0,0), (1,0), (0,1).

    Returns (points, weights) with points as (xi, eta) and weights summing
    to the reference area 1/2. Orders 2 (edge midpoints) and 5 (7-point
    symmetric rule) are provided.
    """
    if order == 2:
        points = np.array([[0.5, 0.0], [0.5, 0.5], [0.0, 0.5]])
        weights = np.full(3, 1.0 / 6.0)
    elif order == 5:
        a1, b1, w1 = 0.059715871789770, 0.470142064105115, 0.132394152788506
        a2, b2, w2 = 0.797426985353087, 0.101286507323456, 0.125939180544827
        points = np.array(
            [
                [1.0 / 3.0, 1.0 / 3.0],
                [b1, b1], [a1, b1], [b1, a1],
                [b2, b2], [a2, b2], [b2, a2],
            ]
        )
        weights = 0.5 * np.array([0.225, w1, w1, w1, w2, w2, w2])
    else:
        raise ValueError(f"Triangular quadrature of order {order} not supported")
    points.setflags(write=False)
    weights.setflags(write=False)
    return points, weights


@lru_cache(maxsize=None)
def square_rule(n: int) -> Tuple[np.ndarray, np.ndarray]:
    """n x n tensor Gauss-Legendre rule on the unit square [0,1]^2"""
    x, w = np.polynomial.legendre.leggauss(n)
    x = 0.5 * (x + 1.0)
    w = 0.5 * w
    xi, eta = np.meshgrid(x, x, indexing="ij")
    points = np.stack([xi.ravel(), eta.ravel()], axis=1)
    weights = np.outer(w, w).ravel()
    points.setflags(write=False)
    weights.setflags(write=False)
    return points, weights


def p1_shape(points: np.ndarray) -> np.ndarray:
    """Linear triangle shape functions at reference points, shape (q, 3)"""
    xi, eta = points[:, 0], points[:, 1]
    return np.stack([1.0 - xi - eta, xi, eta], axis=1)


def q1_shape(points: np.ndarray) -> np.ndarray:
    """Bilinear shape functions (counter-clockwise corners) on [0,1]^2, shape (q, 4)"""
    xi, eta = points[:, 0], points[:, 1]
    return np.stack(
        [(1 - xi) * (1 - eta), xi * (1 - eta), xi * eta, (1 - xi) * eta], axis=1
    )


def q1_shape_grad(points: np.ndarray) -> np.ndarray:
    """Reference gradients of the bilinear shape functions, shape (q, 4, 2)"""
    xi, eta = points[:, 0], points[:, 1]
    d_xi = np.stack([-(1 - eta), 1 - eta, eta, -eta], axis=1)
    d_eta = np.stack([-(1 - xi), -xi, xi, 1 - xi], axis=1)
    return np.stack([d_xi, d_eta], axis=2)
