import math

import numpy as np
import pytest

from app.core.elements import edge_mass, element_matrices, load_vectors, p1_matrices, q1_matrices, scatter_dense
from app.core.mesh import ElementKind
from app.core.quadrature import p1_shape, q1_shape, q1_shape_grad, square_rule, triangle_rule

SQRT3 = math.sqrt(3.0)
UNIT_SQUARE = np.array([[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]])


class TestQuadrature:
    @pytest.mark.parametrize("order", [2, 5])
    def test_weights_sum_to_reference_area(self, order):
        _, weights = triangle_rule(order)
        assert weights.sum() == pytest.approx(0.5, abs=1e-14)

    @pytest.mark.parametrize(
        "order, a, b",
        [(2, 2, 0), (2, 1, 1), (5, 4, 0), (5, 2, 2), (5, 3, 2)],
    )
    def test_triangle_monomials(self, order, a, b):
        points, weights = triangle_rule(order)
        value = np.sum(weights * points[:, 0] ** a * points[:, 1] ** b)
        exact = math.factorial(a) * math.factorial(b) / math.factorial(a + b + 2)
        assert value == pytest.approx(exact, rel=1e-12)

    def test_unsupported_order(self):
        with pytest.raises(ValueError):
            triangle_rule(3)

    def test_square_rule_exactness(self):
        points, weights = square_rule(3)
        value = np.sum(weights * points[:, 0] ** 5 * points[:, 1] ** 4)
        assert value == pytest.approx(1.0 / 30.0, rel=1e-13)

    def test_shape_functions_partition_unity(self):
        points, _ = square_rule(3)
        assert np.allclose(q1_shape(points).sum(axis=1), 1.0)
        assert np.allclose(q1_shape_grad(points).sum(axis=1), 0.0)
        tri_points, _ = triangle_rule(5)
        assert np.allclose(p1_shape(tri_points).sum(axis=1), 1.0)


class TestElementMatrices:
    def test_equilateral_p1(self, equilateral_vertices):
        stiffness, mass = p1_matrices(equilateral_vertices(0.3)[None])
        off = -1.0 / (2.0 * SQRT3)
        assert np.allclose(stiffness[0], [[1 / SQRT3, off, off], [off, 1 / SQRT3, off], [off, off, 1 / SQRT3]])
        area = SQRT3 / 4 * 0.09
        assert mass[0].sum() == pytest.approx(area, rel=1e-14)
        assert mass[0, 0, 0] == pytest.approx(area / 6.0, rel=1e-14)

    def test_p1_rows_sum_to_zero(self):
        coords = np.array([[[0.0, 0.0], [2.0, 0.3], [0.4, 1.1]]])
        stiffness, _ = p1_matrices(coords)
        assert np.allclose(stiffness[0].sum(axis=1), 0.0, atol=1e-14)
        assert np.allclose(stiffness[0], stiffness[0].T, atol=1e-14)

    def test_unit_square_q1(self):
        stiffness, mass = q1_matrices(UNIT_SQUARE)
        assert stiffness[0, 0, 0] == pytest.approx(2.0 / 3.0)
        assert stiffness[0, 0, 1] == pytest.approx(-1.0 / 6.0)
        assert stiffness[0, 0, 2] == pytest.approx(-1.0 / 3.0)
        assert mass[0, 0, 0] == pytest.approx(1.0 / 9.0)
        assert mass[0, 0, 2] == pytest.approx(1.0 / 36.0)
        assert mass[0].sum() == pytest.approx(1.0)

    def test_q1_scaling(self):
        stiffness, mass = element_matrices(0.25 * UNIT_SQUARE, ElementKind.QUAD)
        ref_k, ref_m = q1_matrices(UNIT_SQUARE)
        assert np.allclose(stiffness, ref_k)
        assert np.allclose(mass, ref_m / 16.0)

    def test_constant_load(self, equilateral_vertices):
        one = lambda x, y: np.ones_like(x)
        tri = load_vectors(equilateral_vertices(0.2)[None], ElementKind.TRIANGLE, one)
        assert np.allclose(tri, SQRT3 / 4 * 0.04 / 3.0)
        quad = load_vectors(UNIT_SQUARE, ElementKind.QUAD, one)
        assert np.allclose(quad, 0.25)

    def test_linear_load_on_triangle(self):
        coords = np.array([[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]])
        load = load_vectors(coords, ElementKind.TRIANGLE, lambda x, y: x)
        # int x * psi_j over the reference triangle
        assert np.allclose(load[0], [1.0 / 24.0, 1.0 / 12.0, 1.0 / 24.0])

    def test_zero_source(self):
        assert np.array_equal(load_vectors(UNIT_SQUARE, ElementKind.QUAD, None), np.zeros((1, 4)))

    def test_edge_mass(self):
        local = edge_mass(np.array([0.5, 2.0]))
        assert local.shape == (2, 2, 2)
        assert local[1].sum() == pytest.approx(2.0)
        assert local[0, 0, 0] == pytest.approx(0.5 / 3.0)

    def test_scatter_dense_sums_shared_entries(self):
        conn = np.array([[0, 1, 2], [1, 3, 2]])
        local = np.ones((2, 3, 3))
        out = scatter_dense(4, conn, local)
        assert out[1, 2] == 2.0
        assert out[0, 3] == 0.0
        assert out.sum() == 18.0
