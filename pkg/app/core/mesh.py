"""
2D meshes: generation, ingestion, validation and per-element geometry.

A ``Mesh`` is immutable once built. Every constructor path (generators,
``load_mesh``) ends in ``validate_mesh`` so downstream code can rely on
counter-clockwise, positive-area elements and consistent boundary edges.
"""

from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple
import logging
import math

import meshio
import numpy as np
import shapely
from scipy.spatial import Delaunay, cKDTree

from app.core.errors import MeshFormatError, MeshValidationError
from utils.helper import format_float, iter_data_lines

logger = logging.getLogger(__name__)

SQRT3 = math.sqrt(3.0)
DUPLICATE_TOLERANCE = 1e-12


class ElementKind(str, Enum):
    TRIANGLE = "tri"
    QUAD = "quad"

    @property
    def n_vertices(self) -> int:
        return 3 if self is ElementKind.TRIANGLE else 4


class BoundaryMarker(str, Enum):
    DIRICHLET = "dirichlet"
    NEUMANN = "neumann"
    ROBIN = "robin"


SideMarkers = Mapping[str, BoundaryMarker]


@dataclass(frozen=True, eq=False)
class Mesh:
    nodes: np.ndarray
    elements: np.ndarray
    boundary_edges: np.ndarray
    markers: Tuple[BoundaryMarker, ...]
    kind: ElementKind

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=np.float64).reshape(-1, 2)
        elements = np.array(self.elements, dtype=np.int64)
        if elements.ndim == 1:
            elements = elements.reshape(-1, ElementKind(self.kind).n_vertices)
        edges = np.array(self.boundary_edges, dtype=np.int64).reshape(-1, 2)
        for arr in (nodes, elements, edges):
            arr.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "elements", elements)
        object.__setattr__(self, "boundary_edges", edges)
        object.__setattr__(self, "markers", tuple(BoundaryMarker(m) for m in self.markers))
        object.__setattr__(self, "kind", ElementKind(self.kind))
        validate_mesh(self)

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_elements(self) -> int:
        return self.elements.shape[0]

    @property
    def boundary(self) -> Iterator[Tuple[int, int, BoundaryMarker]]:
        for (a, b), marker in zip(self.boundary_edges, self.markers):
            yield int(a), int(b), marker

    def edges_with(self, marker: BoundaryMarker) -> np.ndarray:
        mask = np.array([m is marker for m in self.markers], dtype=bool)
        return self.boundary_edges[mask] if mask.size else self.boundary_edges[:0]


@dataclass(frozen=True, eq=False)
class ElementGeometry:
    vertices: np.ndarray
    kind: ElementKind
    medians: Tuple[float, ...]
    edge_lengths: Tuple[float, ...]
    h_char: float
    area: float
    index: Optional[int] = field(default=None)


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------


class _ElementProblem(MeshValidationError):
    """Validation failure tied to one record, so file loaders can name the line."""

    def __init__(self, message: str, section: str, index: int):
        self.section = section
        self.index = index
        super().__init__(message)


def signed_areas(nodes: np.ndarray, elements: np.ndarray) -> np.ndarray:
    """Shoelace signed area per element (positive for counter-clockwise)"""
    x = nodes[elements, 0]
    y = nodes[elements, 1]
    return 0.5 * np.sum(x * np.roll(y, -1, axis=1) - np.roll(x, -1, axis=1) * y, axis=1)


def _edge_keys(a: np.ndarray, b: np.ndarray, n_nodes: int) -> np.ndarray:
    lo = np.minimum(a, b)
    hi = np.maximum(a, b)
    return lo * n_nodes + hi


def validate_mesh(mesh: Mesh) -> None:
    nodes, elements, edges = mesh.nodes, mesh.elements, mesh.boundary_edges
    n_nodes = nodes.shape[0]

    if n_nodes == 0:
        raise MeshValidationError("mesh has no nodes")
    if not np.all(np.isfinite(nodes)):
        raise MeshValidationError("node coordinates must be finite")
    if elements.shape[0] == 0:
        raise MeshValidationError("mesh has no elements")
    if elements.shape[1] != mesh.kind.n_vertices:
        raise MeshValidationError(
            f"{mesh.kind.value} elements need {mesh.kind.n_vertices} vertices, "
            f"got {elements.shape[1]}"
        )

    bad = np.flatnonzero(np.any((elements < 0) | (elements >= n_nodes), axis=1))
    if bad.size:
        k = int(bad[0])
        raise _ElementProblem(
            f"dangling index in element {k}: {elements[k].tolist()} with {n_nodes} nodes",
            "elements",
            k,
        )

    span = float(np.max(np.ptp(nodes, axis=0))) if n_nodes > 1 else 1.0
    span = span if span > 0 else 1.0

    areas = signed_areas(nodes, elements)
    bad = np.flatnonzero(areas <= 1e-14 * span * span)
    if bad.size:
        k = int(bad[0])
        raise _ElementProblem(
            f"element {k} has non-positive area {areas[k]:.3e} "
            "(zero-area or clockwise)",
            "elements",
            k,
        )

    if mesh.kind is ElementKind.QUAD:
        # every corner must turn left
        p = nodes[elements]
        d1 = np.roll(p, -1, axis=1) - p
        d2 = np.roll(p, -2, axis=1) - np.roll(p, -1, axis=1)
        turn = d1[..., 0] * d2[..., 1] - d1[..., 1] * d2[..., 0]
        bad = np.flatnonzero(np.any(turn <= 0, axis=1))
        if bad.size:
            k = int(bad[0])
            raise _ElementProblem(f"quad element {k} is not convex", "elements", k)

    pairs = cKDTree(nodes).query_pairs(r=DUPLICATE_TOLERANCE * span)
    if pairs:
        a, b = sorted(min(pairs))
        raise _ElementProblem(f"nodes {a} and {b} coincide", "nodes", b)

    if edges.shape[0] != len(mesh.markers):
        raise MeshValidationError(
            f"{edges.shape[0]} boundary edges but {len(mesh.markers)} markers"
        )
    if edges.shape[0] == 0:
        return

    bad = np.flatnonzero(np.any((edges < 0) | (edges >= n_nodes), axis=1))
    if bad.size:
        k = int(bad[0])
        raise _ElementProblem(
            f"dangling index in boundary edge {k}: {edges[k].tolist()}", "boundary", k
        )

    elem_a = elements.ravel()
    elem_b = np.roll(elements, -1, axis=1).ravel()
    elem_keys, counts = np.unique(_edge_keys(elem_a, elem_b, n_nodes), return_counts=True)

    keys = _edge_keys(edges[:, 0], edges[:, 1], n_nodes)
    pos = np.searchsorted(elem_keys, keys)
    pos = np.minimum(pos, elem_keys.size - 1)
    found = elem_keys[pos] == keys
    bad = np.flatnonzero(~found | (counts[pos] != 1))
    if bad.size:
        k = int(bad[0])
        raise _ElementProblem(
            f"boundary edge {k} {edges[k].tolist()} does not belong to exactly one element",
            "boundary",
            k,
        )

    order = np.argsort(keys, kind="stable")
    dup = np.flatnonzero(keys[order][1:] == keys[order][:-1])
    if dup.size:
        first, second = int(order[dup[0]]), int(order[dup[0] + 1])
        if mesh.markers[first] is not mesh.markers[second]:
            raise _ElementProblem(
                f"inconsistent boundary markers on edge {edges[second].tolist()}",
                "boundary",
                second,
            )
        raise _ElementProblem(
            f"boundary edge {edges[second].tolist()} listed twice", "boundary", second
        )


# ---------------------------------------------------------------------------
# geometry
# ---------------------------------------------------------------------------


def element_geometry(mesh: Mesh, elem: int) -> ElementGeometry:
    if not 0 <= elem < mesh.n_elements:
        raise IndexError(f"element index {elem} out of range [0, {mesh.n_elements})")
    return geometry_of(mesh.nodes[mesh.elements[elem]], mesh.kind, index=elem)


def geometry_of(
    vertices: np.ndarray, kind: ElementKind, index: Optional[int] = None
) -> ElementGeometry:
    vertices = np.asarray(vertices, dtype=np.float64)
    nxt = np.roll(vertices, -1, axis=0)
    edge_lengths = tuple(float(v) for v in np.linalg.norm(nxt - vertices, axis=1))
    area = float(signed_areas(vertices, np.arange(len(vertices))[None, :])[0])

    if kind is ElementKind.TRIANGLE:
        opposite_mid = 0.5 * (np.roll(vertices, -1, axis=0) + np.roll(vertices, -2, axis=0))
        medians = tuple(float(v) for v in np.linalg.norm(vertices - opposite_mid, axis=1))
    else:
        medians = ()

    return ElementGeometry(
        vertices=vertices,
        kind=kind,
        medians=medians,
        edge_lengths=edge_lengths,
        h_char=float(np.mean(edge_lengths)),
        area=area,
        index=index,
    )


def element_areas(mesh: Mesh) -> np.ndarray:
    return signed_areas(mesh.nodes, mesh.elements)


def centroids(mesh: Mesh) -> np.ndarray:
    return mesh.nodes[mesh.elements].mean(axis=1)


def boundary_nodes(mesh: Mesh, marker: Optional[BoundaryMarker] = None) -> np.ndarray:
    edges = mesh.boundary_edges if marker is None else mesh.edges_with(marker)
    return np.unique(edges.ravel())


def dirichlet_nodes(mesh: Mesh) -> np.ndarray:
    """Nodes touching any Dirichlet edge; Dirichlet wins at mixed junctions"""
    return boundary_nodes(mesh, BoundaryMarker.DIRICHLET)


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------


def _oriented_boundary(elements: np.ndarray, n_nodes: int) -> np.ndarray:
    """Edges used by exactly one element, in that element's counter-clockwise direction"""
    a = elements.ravel()
    b = np.roll(elements, -1, axis=1).ravel()
    keys = _edge_keys(a, b, n_nodes)
    _, first, counts = np.unique(keys, return_index=True, return_counts=True)
    once = first[counts == 1]
    return np.stack([a[once], b[once]], axis=1)


def _mark_by_normal(
    nodes: np.ndarray,
    edges: np.ndarray,
    side_normals: Mapping[str, Tuple[float, float]],
    markers: Optional[SideMarkers],
) -> Tuple[BoundaryMarker, ...]:
    markers = dict(markers or {})
    unknown = set(markers) - set(side_normals)
    if unknown:
        raise MeshValidationError(
            f"unknown boundary side(s) {sorted(unknown)}; expected {sorted(side_normals)}"
        )
    names = list(side_normals)
    normals = np.array([side_normals[n] for n in names], dtype=np.float64)

    tangent = nodes[edges[:, 1]] - nodes[edges[:, 0]]
    outward = np.stack([tangent[:, 1], -tangent[:, 0]], axis=1)
    outward /= np.linalg.norm(outward, axis=1)[:, None]
    side = np.argmax(outward @ normals.T, axis=1)
    return tuple(
        BoundaryMarker(markers.get(names[s], BoundaryMarker.DIRICHLET)) for s in side
    )


def _subdivisions(length: float, h: float, what: str) -> int:
    ratio = length / h
    n = int(round(ratio))
    if abs(ratio - n) > 1e-9 * max(1.0, abs(ratio)):
        raise MeshValidationError(
            f"{what} {length:g} is not an integral multiple of h={h:g} ({ratio:.12g})"
        )
    if n < 1:
        raise MeshValidationError(f"{what} {length:g} shorter than h={h:g}")
    return n


TRIANGLE_SIDES = {
    "bottom": (0.0, -1.0),
    "right": (SQRT3 / 2, 0.5),
    "left": (-SQRT3 / 2, 0.5),
}

PARALLELOGRAM_SIDES = {
    "bottom": (0.0, -1.0),
    "top": (0.0, 1.0),
    "right": (SQRT3 / 2, -0.5),
    "left": (-SQRT3 / 2, 0.5),
}

AXIS_SIDES = {
    "left": (-1.0, 0.0),
    "right": (1.0, 0.0),
    "bottom": (0.0, -1.0),
    "top": (0.0, 1.0),
}


def equilateral_triangle_mesh(
    n: int, side: float = 1.0, markers: Optional[SideMarkers] = None
) -> Mesh:
    """Uniform triangulation of the equilateral triangle (0,0), (side,0), (side/2, side*sqrt(3)/2)"""
    if n < 2:
        raise MeshValidationError(
            f"degenerate mesh: {n} subdivision(s) per side, at least 2 required"
        )
    h = side / n
    offsets = np.concatenate([[0], np.cumsum(np.arange(n + 1, 0, -1))])

    xs, ys = [], []
    for j in range(n + 1):
        i = np.arange(n - j + 1)
        xs.append((i + 0.5 * j) * h)
        ys.append(np.full(i.size, j * (SQRT3 / 2) * h))
    nodes = np.stack([np.concatenate(xs), np.concatenate(ys)], axis=1)

    elems = []
    for j in range(n):
        i = np.arange(n - j)
        row, above = offsets[j] + i, offsets[j + 1] + i
        elems.append(np.stack([row, row + 1, above], axis=1))
        if n - j - 1 > 0:
            i = np.arange(n - j - 1)
            row, above = offsets[j] + i, offsets[j + 1] + i
            elems.append(np.stack([row + 1, above + 1, above], axis=1))
    elements = np.concatenate(elems)

    edges = _oriented_boundary(elements, nodes.shape[0])
    return Mesh(
        nodes,
        elements,
        edges,
        _mark_by_normal(nodes, edges, TRIANGLE_SIDES, markers),
        ElementKind.TRIANGLE,
    )


def gen_equilateral_triangle_domain(
    side: float,
    ch_target: float,
    c: float,
    markers: Optional[SideMarkers] = None,
) -> Mesh:
    """Equilateral triangle domain meshed so that c*h is as close to ch_target as an integer split allows"""
    if c <= 0 or ch_target <= 0 or side <= 0:
        raise MeshValidationError("side, c and ch_target must be positive")
    n = int(round(side * c / ch_target))
    mesh = equilateral_triangle_mesh(n, side, markers)
    logger.info(
        f"Equilateral domain: {n} subdivisions, h={side / n:.6g}, "
        f"ch={c * side / n:.6g}, {mesh.n_elements} elements"
    )
    return mesh


def gen_lattice_parallelogram(
    nx: int,
    ny: int,
    h: float,
    markers: Optional[SideMarkers] = None,
    origin: Tuple[float, float] = (0.0, 0.0),
) -> Mesh:
    """Equilateral triangulation of a lattice parallelogram with horizontal bottom and top"""
    if nx < 1 or ny < 1:
        raise MeshValidationError("parallelogram needs at least one cell per direction")
    i, j = np.meshgrid(np.arange(nx + 1), np.arange(ny + 1))
    i, j = i.ravel(), j.ravel()
    nodes = np.stack(
        [origin[0] + (i + 0.5 * j) * h, origin[1] + j * (SQRT3 / 2) * h], axis=1
    )

    ci, cj = np.meshgrid(np.arange(nx), np.arange(ny))
    ci, cj = ci.ravel(), cj.ravel()
    p = cj * (nx + 1) + ci
    q = p + nx + 1
    up = np.stack([p, p + 1, q], axis=1)
    down = np.stack([p + 1, q + 1, q], axis=1)
    elements = np.stack([up, down], axis=1).reshape(-1, 3)

    edges = _oriented_boundary(elements, nodes.shape[0])
    return Mesh(
        nodes,
        elements,
        edges,
        _mark_by_normal(nodes, edges, PARALLELOGRAM_SIDES, markers),
        ElementKind.TRIANGLE,
    )


def _grid_quads(
    x0: float, y0: float, nx: int, ny: int, h: float, keep=None
) -> Tuple[np.ndarray, np.ndarray]:
    i, j = np.meshgrid(np.arange(nx + 1), np.arange(ny + 1))
    nodes = np.stack([x0 + i.ravel() * h, y0 + j.ravel() * h], axis=1)

    ci, cj = np.meshgrid(np.arange(nx), np.arange(ny))
    ci, cj = ci.ravel(), cj.ravel()
    if keep is not None:
        mask = keep(x0 + (ci + 0.5) * h, y0 + (cj + 0.5) * h)
        ci, cj = ci[mask], cj[mask]
    p = cj * (nx + 1) + ci
    elements = np.stack([p, p + 1, p + nx + 2, p + nx + 1], axis=1)

    used = np.unique(elements)
    renumber = np.full(nodes.shape[0], -1, dtype=np.int64)
    renumber[used] = np.arange(used.size)
    return nodes[used], renumber[elements]


def gen_structured_quad_mesh(
    width: float,
    height: float,
    h: float,
    bc_markers: Optional[SideMarkers] = None,
    origin: Tuple[float, float] = (0.0, 0.0),
) -> Mesh:
    nx = _subdivisions(width, h, "width")
    ny = _subdivisions(height, h, "height")
    nodes, elements = _grid_quads(origin[0], origin[1], nx, ny, h)
    edges = _oriented_boundary(elements, nodes.shape[0])
    return Mesh(
        nodes,
        elements,
        edges,
        _mark_by_normal(nodes, edges, AXIS_SIDES, bc_markers),
        ElementKind.QUAD,
    )


def gen_lshape_quad_mesh(h: float, bc_markers: Optional[SideMarkers] = None) -> Mesh:
    """Uniform squares on [-1,1]^2 minus the quadrant (0,1)x(-1,0)"""
    n = _subdivisions(2.0, h, "L-shape width")
    nodes, elements = _grid_quads(
        -1.0, -1.0, n, n, h, keep=lambda cx, cy: ~((cx > 0) & (cy < 0))
    )
    edges = _oriented_boundary(elements, nodes.shape[0])
    return Mesh(
        nodes,
        elements,
        edges,
        _mark_by_normal(nodes, edges, AXIS_SIDES, bc_markers),
        ElementKind.QUAD,
    )


def _sample_ring(ring: Sequence[Tuple[float, float]], h: float) -> np.ndarray:
    pts = np.asarray(ring, dtype=np.float64)
    samples = []
    for p, q in zip(pts, np.roll(pts, -1, axis=0)):
        k = max(1, int(math.ceil(np.linalg.norm(q - p) / h - 1e-9)))
        t = np.arange(k)[:, None] / k
        samples.append(p + t * (q - p))
    return np.concatenate(samples)


def gen_unstructured_polygon(
    outer: Sequence[Tuple[float, float]],
    h: float,
    holes: Sequence[Sequence[Tuple[float, float]]] = (),
    outer_marker: BoundaryMarker = BoundaryMarker.DIRICHLET,
    hole_marker: BoundaryMarker = BoundaryMarker.DIRICHLET,
) -> Mesh:
    """
    Unstructured triangulation of a polygon (optionally with polygonal holes).

    Boundary rings are sampled at spacing <= h, the interior is seeded with a
    hexagonal point lattice of spacing h kept h/2 away from the boundary, and
    the Delaunay triangulation of all points is clipped to the polygon.
    """
    if h <= 0:
        raise MeshValidationError("mesh size must be positive")
    polygon = shapely.Polygon(outer, holes=[list(r) for r in holes])
    if not polygon.is_valid or polygon.area <= 0:
        raise MeshValidationError("polygon is invalid or has zero area")

    rings = [_sample_ring(outer, h)] + [_sample_ring(r, h) for r in holes]
    boundary_pts = np.concatenate(rings)

    minx, miny, maxx, maxy = polygon.bounds
    dy = SQRT3 / 2 * h
    rows = np.arange(miny, maxy + dy, dy)
    seeds = []
    for r, y in enumerate(rows):
        xs = np.arange(minx + (0.5 * h if r % 2 else 0.0), maxx + h, h)
        seeds.append(np.stack([xs, np.full(xs.size, y)], axis=1))
    seeds = np.concatenate(seeds)
    inside = shapely.contains_xy(polygon, seeds[:, 0], seeds[:, 1])
    seeds = seeds[inside]
    far = shapely.distance(shapely.points(seeds), polygon.boundary) > 0.5 * h
    points = np.concatenate([boundary_pts, seeds[far]])

    tri = Delaunay(points)
    simplices = tri.simplices.astype(np.int64)
    cent = points[simplices].mean(axis=1)
    keep = shapely.contains_xy(polygon, cent[:, 0], cent[:, 1])
    simplices = simplices[keep]
    areas = signed_areas(points, simplices)
    simplices[areas < 0] = simplices[areas < 0][:, [0, 2, 1]]
    simplices = simplices[np.abs(areas) > 1e-10 * h * h]

    used = np.unique(simplices)
    renumber = np.full(points.shape[0], -1, dtype=np.int64)
    renumber[used] = np.arange(used.size)
    nodes, elements = points[used], renumber[simplices]

    edges = _oriented_boundary(elements, nodes.shape[0])
    mid = 0.5 * (nodes[edges[:, 0]] + nodes[edges[:, 1]])
    ring_geoms = [polygon.exterior] + list(polygon.interiors)
    dist = np.stack(
        [shapely.distance(shapely.points(mid), ring) for ring in ring_geoms], axis=1
    )
    nearest = np.argmin(dist, axis=1)
    markers = tuple(outer_marker if k == 0 else hole_marker for k in nearest)

    mesh = Mesh(nodes, elements, edges, markers, ElementKind.TRIANGLE)
    logger.info(
        f"Unstructured mesh: {mesh.n_nodes} nodes, {mesh.n_elements} triangles (h={h:.4g})"
    )
    return mesh


# ---------------------------------------------------------------------------
# text format and export
# ---------------------------------------------------------------------------


def save_mesh(mesh: Mesh, path: str | Path) -> None:
    lines: List[str] = ["# 2D mesh: nodes, elements, boundary edges", f"nodes {mesh.n_nodes}"]
    lines += [f"{format_float(x)} {format_float(y)}" for x, y in mesh.nodes]
    lines.append(f"elements {mesh.n_elements} {mesh.kind.value}")
    lines += [" ".join(str(int(v)) for v in elem) for elem in mesh.elements]
    lines.append(f"boundary {mesh.boundary_edges.shape[0]}")
    lines += [f"{a} {b} {marker.value}" for a, b, marker in mesh.boundary]
    Path(path).write_text("\n".join(lines) + "\n")


def _header(entry, keyword: str, n_extra: int = 0) -> Tuple[int, List[str]]:
    if entry is None:
        raise MeshFormatError(f"missing '{keyword}' section")
    lineno, tokens = entry
    if tokens[0] != keyword or len(tokens) != 2 + n_extra:
        raise MeshFormatError(f"expected '{keyword} <count>'", lineno)
    try:
        count = int(tokens[1])
    except ValueError:
        raise MeshFormatError(f"malformed count {tokens[1]!r}", lineno) from None
    if count < 0:
        raise MeshFormatError(f"negative count {count}", lineno)
    return count, tokens[2:]


def _records(lines, count: int, width: int, what: str, header_line: int):
    out = []
    for _ in range(count):
        entry = next(lines, None)
        if entry is None:
            raise MeshFormatError(
                f"{what} section declares {count} records but the file ends early",
                header_line,
            )
        lineno, tokens = entry
        if len(tokens) != width:
            raise MeshFormatError(
                f"{what} record needs {width} fields, got {len(tokens)}", lineno
            )
        out.append((lineno, tokens))
    return out


def load_mesh(path: str | Path) -> Mesh:
    """Parse and validate a mesh text file; problems are reported with line numbers"""
    lines = iter_data_lines(path)

    entry = next(lines, None)
    n_nodes, _ = _header(entry, "nodes")
    node_rows = _records(lines, n_nodes, 2, "node", entry[0])
    try:
        nodes = np.array([[float(t) for t in tok] for _, tok in node_rows]).reshape(-1, 2)
    except ValueError:
        bad = next(ln for ln, tok in node_rows if not _all_float(tok))
        raise MeshFormatError("node coordinates must be decimal numbers", bad) from None

    entry = next(lines, None)
    n_elems, extra = _header(entry, "elements", n_extra=1)
    try:
        kind = ElementKind(extra[0])
    except ValueError:
        raise MeshFormatError(f"unknown element kind {extra[0]!r}", entry[0]) from None
    elem_rows = _records(lines, n_elems, kind.n_vertices, "element", entry[0])
    try:
        elements = np.array([[int(t) for t in tok] for _, tok in elem_rows], dtype=np.int64)
    except ValueError:
        bad = next(ln for ln, tok in elem_rows if not _all_int(tok))
        raise MeshFormatError("element indices must be integers", bad) from None

    entry = next(lines, None)
    n_bnd, _ = _header(entry, "boundary")
    bnd_rows = _records(lines, n_bnd, 3, "boundary", entry[0])
    edges, markers = [], []
    for lineno, tok in bnd_rows:
        if not _all_int(tok[:2]):
            raise MeshFormatError("boundary node indices must be integers", lineno)
        try:
            markers.append(BoundaryMarker(tok[2].lower()))
        except ValueError:
            raise MeshFormatError(f"unknown boundary marker {tok[2]!r}", lineno) from None
        edges.append([int(tok[0]), int(tok[1])])

    trailing = next(lines, None)
    if trailing is not None:
        raise MeshFormatError("unexpected content after boundary section", trailing[0])

    line_of = {
        "nodes": [ln for ln, _ in node_rows],
        "elements": [ln for ln, _ in elem_rows],
        "boundary": [ln for ln, _ in bnd_rows],
    }
    try:
        mesh = Mesh(nodes, elements.reshape(-1, kind.n_vertices), edges, markers, kind)
    except _ElementProblem as e:
        raise MeshFormatError(str(e), line_of[e.section][e.index]) from e

    logger.info(f"Loaded mesh {path}: {mesh.n_nodes} nodes, {mesh.n_elements} {kind.value}")
    return mesh


def _all_float(tokens: Sequence[str]) -> bool:
    try:
        [float(t) for t in tokens]
        return True
    except ValueError:
        return False


def _all_int(tokens: Sequence[str]) -> bool:
    try:
        [int(t) for t in tokens]
        return True
    except ValueError:
        return False


def write_vtk(
    path: str | Path, mesh: Mesh, fields: Optional[Dict[str, np.ndarray]] = None
) -> None:
    """VTK legacy ASCII export; complex nodal fields become _re/_im/_abs scalars"""
    points = np.zeros((mesh.n_nodes, 3))
    points[:, :2] = mesh.nodes
    cell_type = "triangle" if mesh.kind is ElementKind.TRIANGLE else "quad"

    point_data: Dict[str, np.ndarray] = {}
    for name, values in (fields or {}).items():
        values = np.asarray(values)
        if values.shape[0] != mesh.n_nodes:
            raise ValueError(f"field {name!r} has {values.shape[0]} values for {mesh.n_nodes} nodes")
        if np.iscomplexobj(values):
            point_data[f"{name}_re"] = values.real.astype(np.float64)
            point_data[f"{name}_im"] = values.imag.astype(np.float64)
            point_data[f"{name}_abs"] = np.abs(values).astype(np.float64)
        else:
            point_data[name] = values.astype(np.float64)

    out = meshio.Mesh(points, [(cell_type, np.asarray(mesh.elements))], point_data=point_data)
    meshio.vtk.write(str(path), out, fmt_version="4.2", binary=False)
