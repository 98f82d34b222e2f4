import numpy as np
import pytest

from app.core import bubble
from app.core.bubble import (
    SOURCE,
    build_submesh,
    condense_element,
    quad_interior_count,
    solve_bubble,
    solve_bubbles,
    triangle_interior_count,
)
from app.core.errors import BubbleResonanceError, SingularSystemError
from app.core.mesh import ElementKind, geometry_of

UNIT_SQUARE = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])


@pytest.fixture
def equilateral_geom(equilateral_vertices):
    def make(h: float, origin=(0.0, 0.0)):
        return geometry_of(equilateral_vertices(h, origin), ElementKind.TRIANGLE, index=0)

    return make


class TestSubMesh:
    @pytest.mark.parametrize(
        "kind, n_s, interior",
        [
            (ElementKind.TRIANGLE, 10, 28),
            (ElementKind.TRIANGLE, 15, 78),
            (ElementKind.QUAD, 8, 36),
            (ElementKind.QUAD, 10, 64),
        ],
    )
    def test_interior_unknowns(self, kind, n_s, interior, equilateral_vertices):
        vertices = equilateral_vertices(0.1) if kind is ElementKind.TRIANGLE else UNIT_SQUARE
        sub = build_submesh(geometry_of(vertices, kind), n_s)
        assert sub.n_interior == interior

    @pytest.mark.parametrize("n_s", range(3, 21))
    def test_counts_match_closed_forms(self, n_s, equilateral_geom):
        tri = build_submesh(equilateral_geom(1.0), n_s)
        assert tri.n_nodes == n_s * (n_s + 1) // 2
        assert tri.elements.shape[0] == (n_s - 1) ** 2
        assert tri.n_interior == triangle_interior_count(n_s)
        quad = build_submesh(geometry_of(UNIT_SQUARE, ElementKind.QUAD), n_s)
        assert quad.n_nodes == n_s * n_s
        assert quad.n_interior == quad_interior_count(n_s)

    def test_midpoint_subdivision(self, equilateral_geom):
        sub = build_submesh(equilateral_geom(1.0), 3)
        assert (sub.n_nodes, sub.elements.shape[0], sub.n_interior) == (6, 4, 1)

    def test_n_s_10(self, equilateral_geom):
        sub = build_submesh(equilateral_geom(0.01), 10)
        assert (sub.n_nodes, sub.elements.shape[0], sub.n_interior) == (55, 81, 28)

    def test_unit_square_n_s_8(self):
        sub = build_submesh(geometry_of(UNIT_SQUARE, ElementKind.QUAD), 8)
        assert (sub.n_nodes, sub.elements.shape[0], sub.n_interior) == (64, 49, 36)

    def test_sub_elements_tile_parent(self, equilateral_geom):
        geom = equilateral_geom(0.5, origin=(2.0, -1.0))
        sub = build_submesh(geom, 7)
        assert sub.mass.sum() == pytest.approx(geom.area, rel=1e-12)
        # parent basis interpolated on the sub-nodes sums to one
        assert np.allclose(sub.basis.sum(axis=1), 1.0)
        assert np.allclose(sub.basis @ geom.vertices, sub.nodes)

    def test_rejects_small_n_s(self, equilateral_geom):
        with pytest.raises(ValueError):
            build_submesh(equilateral_geom(1.0), 2)


class TestSolveBubble:
    def test_vanishes_as_c_goes_to_zero(self, equilateral_geom):
        sub = build_submesh(equilateral_geom(0.01), 10)
        field = solve_bubble(sub, 1e-6, 1.0, 0)
        assert np.max(np.abs(field.values)) <= 1e-10

    def test_boundary_values_are_zero(self, equilateral_geom):
        sub = build_submesh(equilateral_geom(0.01), 10)
        field = solve_bubble(sub, 60.0, 5.4, 1)
        boundary = sub.interior_index < 0
        assert np.all(field.values[boundary] == 0.0)
        assert np.max(np.abs(field.values)) > 0
        assert field.mu == 5.4 and field.which == 1

    def test_real_below_resonance(self, equilateral_geom):
        sub = build_submesh(equilateral_geom(0.01), 10)
        field = solve_bubble(sub, 60.0, 1.0, 0)
        assert not np.iscomplexobj(field.values)

    def test_linear_in_mu(self, equilateral_geom):
        sub = build_submesh(equilateral_geom(0.02), 10)
        one = solve_bubble(sub, 40.0, 1.0, 2)
        scaled = solve_bubble(sub, 40.0, 6.8, 2)
        scale = np.max(np.abs(scaled.values))
        assert np.allclose(scaled.values, 6.8 * one.values, rtol=1e-12, atol=1e-13 * scale)

    def test_source_bubble_without_source(self, equilateral_geom):
        sub = build_submesh(equilateral_geom(0.01), 10)
        assert np.array_equal(solve_bubble(sub, 30.0, 5.0, SOURCE).values, np.zeros(sub.n_nodes))
        zero = solve_bubble(sub, 30.0, 5.0, SOURCE, lambda x, y: np.zeros_like(x))
        assert np.array_equal(zero.values, np.zeros(sub.n_nodes))

    def test_batch_matches_single_solves(self, equilateral_geom):
        sub = build_submesh(equilateral_geom(0.05), 10)
        f = lambda x, y: np.sin(x) + y
        fields, source = solve_bubbles(sub, 20.0, (5.4, 5.5, 5.6), f)
        for i, field in enumerate(fields):
            single = solve_bubble(sub, 20.0, field.mu, i)
            assert np.allclose(field.values, single.values, rtol=1e-12, atol=1e-18)
        assert np.allclose(source.values, solve_bubble(sub, 20.0, 1.0, SOURCE, f).values)

    def test_invalid_index(self, equilateral_geom):
        sub = build_submesh(equilateral_geom(0.01), 5)
        with pytest.raises(ValueError):
            solve_bubble(sub, 10.0, 1.0, 3)

    def test_singular_sub_problem_names_element(self, equilateral_geom, monkeypatch):
        def singular(*args, **kwargs):
            raise SingularSystemError("pivot 0", kwargs.get("context", ""))

        monkeypatch.setattr(bubble, "dense_solve", singular)
        with pytest.raises(BubbleResonanceError, match="element 0") as info:
            condense_element(equilateral_geom(0.1), 30.0, 1.0, 10)
        assert info.value.ch == pytest.approx(3.0)

    def test_coarse_sub_mesh_warns(self, equilateral_geom, caplog):
        sub = build_submesh(equilateral_geom(0.1), 4)
        solve_bubble(sub, 25.0, 1.0, 0)
        assert "under-resolved" in caplog.text


class TestCondensation:
    def test_reduces_to_galerkin_as_c_goes_to_zero(self, equilateral_geom):
        cond = condense_element(equilateral_geom(0.01), 1e-6, 1.0, 10)
        assert np.max(np.abs(cond.bubble_mass)) < 1e-15
        assert np.max(np.abs(cond.source_terms)) == 0.0
        assert np.allclose(cond.element_matrix(1e-6), cond.linear_stiffness)

    def test_linear_matrices_symmetric(self, equilateral_geom):
        cond = condense_element(equilateral_geom(0.01), 50.0, 5.4, 10)
        assert np.max(np.abs(cond.linear_stiffness - cond.linear_stiffness.T)) <= 1e-14
        assert np.max(np.abs(cond.linear_mass - cond.linear_mass.T)) <= 1e-14 * cond.linear_mass.max()

    def test_rotation_equivariance(self, equilateral_vertices):
        vertices = equilateral_vertices(0.01, origin=(0.3, 0.2))
        c = 57.0 / 0.866025
        base = condense_element(geometry_of(vertices, ElementKind.TRIANGLE), c, 5.4, 10)
        rotated = condense_element(
            geometry_of(np.roll(vertices, -1, axis=0), ElementKind.TRIANGLE), c, 5.4, 10
        )
        perm = [1, 2, 0]
        expected = base.bubble_mass[np.ix_(perm, perm)]
        scale = np.max(np.abs(base.bubble_mass))
        assert np.max(np.abs(rotated.bubble_mass - expected)) <= 1e-10 * scale
        # an equilateral element is symmetric under every relabelling
        assert np.ptp(np.diag(base.bubble_mass)) <= 1e-10 * scale

    def test_constant_source_terms_equal_by_symmetry(self, equilateral_geom):
        cond = condense_element(equilateral_geom(0.05), 20.0, 1.0, 10, f=lambda x, y: np.ones_like(x))
        assert np.ptp(cond.source_terms) <= 1e-12 * np.max(np.abs(cond.source_terms))
        assert np.allclose(cond.element_rhs(20.0), cond.load + 400.0 * cond.source_terms)

    def test_quad_shares_one_mu(self):
        geom = geometry_of(0.1 * UNIT_SQUARE, ElementKind.QUAD)
        cond = condense_element(geom, 10.0, 2.5, 8)
        assert cond.mus == (2.5,) * 4
        assert cond.bubble_mass.shape == (4, 4)
        with pytest.raises(ValueError):
            condense_element(geom, 10.0, (2.5, 2.5, 2.5), 8)

    @pytest.mark.parametrize("ch", [0.5, 1.0])
    def test_sub_mesh_refinement_is_second_order(self, equilateral_geom, ch):
        h = 0.01
        geom = equilateral_geom(h)
        masses = {n_s: condense_element(geom, ch / h, 5.6, n_s).bubble_mass for n_s in (5, 9, 17, 33)}
        # each step halves the sub-mesh size
        gaps = [
            np.max(np.abs(masses[n] - masses[2 * n - 1])) / np.max(np.abs(masses[2 * n - 1]))
            for n in (5, 9, 17)
        ]
        assert gaps[0] / gaps[1] >= 3.0
        assert gaps[1] / gaps[2] >= 3.0
        assert gaps[2] < 1e-2
