import math

import numpy as np
import pytest

from app.core.mesh import BoundaryMarker, ElementKind, dirichlet_nodes
from app.core.presets import PRESETS, get_preset
from app.core.problem import Method


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_every_preset_builds(name):
    preset = get_preset(name)
    c, ch = preset.resolve(None, None)
    mesh = preset.build_mesh(c, ch)
    spec = preset.spec(c)
    assert mesh.n_elements > 0
    assert spec.c == c
    assert spec.method is Method.GALERKIN
    assert dirichlet_nodes(mesh).size > 0


def test_fixed_meshes():
    strip = get_preset("neumann-strip")
    mesh = strip.build_mesh(*strip.resolve(None, None))
    assert mesh.n_elements == 400
    assert mesh.kind is ElementKind.TRIANGLE

    lshape = get_preset("lshape-quad")
    mesh = lshape.build_mesh(*lshape.resolve(None, None))
    assert mesh.n_elements == 147
    assert mesh.kind is ElementKind.QUAD


@pytest.mark.parametrize("cells, count", [(20, 400), (14, 196), (8, 64)])
def test_strip_keeps_c_across_meshes(cells, count):
    strip = get_preset("neumann-strip")
    c, ch = strip.resolve(49.0, None, cells)
    assert c == pytest.approx(49.0)
    assert ch == pytest.approx(49.0 / cells)
    mesh = strip.build_mesh(c, ch)
    assert mesh.n_elements == count
    assert mesh.nodes[:, 1].max() == pytest.approx(math.sqrt(3.0) / 4.0)
    assert mesh.nodes[:, 0].min() == pytest.approx(0.0)


def test_strip_rejects_odd_cells():
    strip = get_preset("neumann-strip")
    with pytest.raises(ValueError, match="even"):
        strip.build_mesh(*strip.resolve(30.0, None, 15))


def test_lshape_quad_cells():
    lshape = get_preset("lshape-quad")
    mesh = lshape.build_mesh(*lshape.resolve(20.0, None, 14))
    assert mesh.n_elements == 3 * 14**2


def test_cells_need_structured_preset():
    with pytest.raises(ValueError, match="structured"):
        get_preset("lshape").resolve(20.0, 0.625, 10)


def test_fixed_mesh_derives_wave_number():
    strip = get_preset("neumann-strip")
    assert strip.resolve(None, 3.5) == pytest.approx((70.0, 3.5))
    assert strip.resolve(10.0, None) == pytest.approx((10.0, 0.5))


def test_fixed_mesh_conflict_prefers_ch(caplog):
    strip = get_preset("neumann-strip")
    assert strip.resolve(10.0, 3.5) == pytest.approx((70.0, 3.5))
    assert "fixed mesh" in caplog.text


def test_free_mesh_defaults():
    preset = get_preset("dirichlet-planewave")
    assert preset.resolve(None, None) == (50.0, 0.625)
    assert preset.resolve(20.0, None) == (20.0, 0.625)


def test_unknown_preset():
    with pytest.raises(ValueError, match="unknown preset"):
        get_preset("cube")


def test_spec_overrides():
    preset = get_preset("robin-source")
    spec = preset.spec(20.0, theta=0.2, method="ab", n_s=12)
    assert spec.method is Method.AB
    assert spec.n_s == 12
    assert spec.robin_coefficient == 1j
    assert preset.spec(20.0).dirichlet.theta == 0.0


def test_robin_markers():
    preset = get_preset("robin-source")
    mesh = preset.build_mesh(20.0, 2.0)
    for a, b, marker in mesh.boundary:
        on_bottom = abs(mesh.nodes[a, 1]) < 1e-12 and abs(mesh.nodes[b, 1]) < 1e-12
        assert marker is (BoundaryMarker.DIRICHLET if on_bottom else BoundaryMarker.ROBIN)


def test_scatterer_markers():
    preset = get_preset("scatterer")
    mesh = preset.build_mesh(11.0, 1.5)
    assert set(mesh.markers) == {BoundaryMarker.NEUMANN, BoundaryMarker.DIRICHLET}
    inner = mesh.nodes[dirichlet_nodes(mesh)]
    assert np.allclose(np.max(np.abs(inner), axis=1), 0.1)
    outer = mesh.nodes[np.unique(mesh.edges_with(BoundaryMarker.NEUMANN).ravel())]
    radius = np.hypot(outer[:, 0], outer[:, 1])
    assert np.all(radius > 0.99) and np.all(radius <= 1.0 + 1e-12)


def test_lshape_area():
    preset = get_preset("lshape")
    mesh = preset.build_mesh(20.0, 1.0)
    corners = mesh.nodes[mesh.elements]
    v1, v2 = corners[:, 1] - corners[:, 0], corners[:, 2] - corners[:, 0]
    area = 0.5 * np.sum(v1[:, 0] * v2[:, 1] - v1[:, 1] * v2[:, 0])
    assert area == pytest.approx(3.0, rel=1e-9)
    assert preset.default_theta == pytest.approx(math.pi / 3.0)
