"""
Element-level bubble sub-problems and static condensation.

For each element K the adapted bubbles solve

    -lap(phi_i) - c^2 phi_i = mu_i c^2 psi_i   in K,   phi_i = 0 on dK
    -lap(phi_f) - c^2 phi_f = f                in K,   phi_f = 0 on dK

by P1 (triangles, barycentric sub-division) or Q1 (quads, tensor grid)
Galerkin on a sub-mesh with N_s nodes per edge. Only the integrals
(phi_i, psi_j)_K and (phi_f, psi_j)_K reach the global system.
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union
import logging

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from app.core.elements import SourceFn, element_matrices, load_vectors, scatter_dense
from app.core.errors import BubbleResonanceError, SingularSystemError
from app.core.linalg import dense_solve
from app.core.mesh import ElementGeometry, ElementKind
from app.core.quadrature import q1_shape
from config.config import settings

logger = logging.getLogger(__name__)

SOURCE = "F"
Which = Union[int, str]


@dataclass(frozen=True, eq=False)
class SubMesh:
    parent: ElementGeometry
    n_s: int
    nodes: np.ndarray
    elements: np.ndarray
    interior_index: np.ndarray  # -1 marks sub-boundary nodes
    basis: np.ndarray  # parent basis functions psi_i at the sub-nodes, (P, n_en)
    stiffness: np.ndarray
    mass: np.ndarray

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_interior(self) -> int:
        return int(np.count_nonzero(self.interior_index >= 0))

    @property
    def interior_nodes(self) -> np.ndarray:
        return np.flatnonzero(self.interior_index >= 0)

    @property
    def sub_h(self) -> float:
        return self.parent.h_char / (self.n_s - 1)


@dataclass(frozen=True, eq=False)
class BubbleField:
    values: np.ndarray
    which: Which
    mu: float


@dataclass(frozen=True, eq=False)
class ElementCondensation:
    bubble_mass: np.ndarray  # [i, j] = (phi_i, psi_j)_K
    source_terms: np.ndarray  # [j] = (phi_f, psi_j)_K
    linear_stiffness: np.ndarray
    linear_mass: np.ndarray
    load: np.ndarray  # [j] = (f, psi_j)_K
    mus: Tuple[float, ...]
    n_s: int

    def element_matrix(self, c: float) -> np.ndarray:
        """Row j, column i: a(psi_i, psi_j) - c^2 (phi_i, psi_j)"""
        c2 = c * c
        return self.linear_stiffness - c2 * self.linear_mass - c2 * self.bubble_mass.T

    def element_rhs(self, c: float) -> np.ndarray:
        return self.load + c * c * self.source_terms


def triangle_interior_count(n_s: int) -> int:
    return n_s * (n_s + 1) // 2 - 3 * (n_s - 1)


def quad_interior_count(n_s: int) -> int:
    return (n_s - 2) ** 2


def _triangle_topology(m: int):
    ab = [(a, b) for b in range(m + 1) for a in range(m + 1 - b)]
    index = {p: k for k, p in enumerate(ab)}
    ab = np.array(ab, dtype=np.int64)

    elements = []
    for b in range(m):
        for a in range(m - b):
            elements.append((index[a, b], index[a + 1, b], index[a, b + 1]))
            if a + b + 1 < m:
                elements.append((index[a + 1, b], index[a + 1, b + 1], index[a, b + 1]))

    lam = np.stack([1.0 - ab.sum(axis=1) / m, ab[:, 0] / m, ab[:, 1] / m], axis=1)
    interior = (ab[:, 0] >= 1) & (ab[:, 1] >= 1) & (ab.sum(axis=1) <= m - 1)
    return lam, np.array(elements, dtype=np.int64), interior


def _quad_topology(m: int):
    a, b = np.meshgrid(np.arange(m + 1), np.arange(m + 1))
    a, b = a.ravel(), b.ravel()
    basis = q1_shape(np.stack([a / m, b / m], axis=1))

    ca, cb = np.meshgrid(np.arange(m), np.arange(m))
    p = (cb * (m + 1) + ca).ravel()
    elements = np.stack([p, p + 1, p + m + 2, p + m + 1], axis=1)

    interior = (a >= 1) & (a <= m - 1) & (b >= 1) & (b <= m - 1)
    return basis, elements, interior


def build_submesh(geom: ElementGeometry, n_s: int) -> SubMesh:
    """Uniform sub-division with n_s nodes per parent edge"""
    if n_s < 3:
        raise ValueError(f"N_s must be at least 3, got {n_s}")

    m = n_s - 1
    if geom.kind is ElementKind.TRIANGLE:
        basis, elements, interior = _triangle_topology(m)
    else:
        basis, elements, interior = _quad_topology(m)

    nodes = basis @ geom.vertices
    interior_index = np.full(nodes.shape[0], -1, dtype=np.int64)
    interior_index[interior] = np.arange(np.count_nonzero(interior))

    local_k, local_m = element_matrices(nodes[elements], geom.kind)
    stiffness = scatter_dense(nodes.shape[0], elements, local_k)
    mass = scatter_dense(nodes.shape[0], elements, local_m)

    for arr in (nodes, elements, interior_index, basis, stiffness, mass):
        arr.setflags(write=False)
    return SubMesh(geom, n_s, nodes, elements, interior_index, basis, stiffness, mass)


def _solve_interior(sub: SubMesh, c: float, rhs: np.ndarray) -> np.ndarray:
    idx = sub.interior_nodes
    A = sub.stiffness[np.ix_(idx, idx)] - c * c * sub.mass[np.ix_(idx, idx)]
    ch = c * sub.parent.h_char
    context = f"bubble sub-problem, element {sub.parent.index}"

    try:
        if idx.size <= settings.dense_max_size:
            return dense_solve(A, rhs, context=context)
        try:
            lu = splu(sp.csc_matrix(A), permc_spec="COLAMD")
        except RuntimeError as e:
            raise SingularSystemError(str(e), context) from e
        x = lu.solve(np.ascontiguousarray(rhs))
        if not np.all(np.isfinite(x)):
            raise SingularSystemError("non-finite bubble values", context)
        return x
    except SingularSystemError as e:
        raise BubbleResonanceError(sub.parent.index, ch, str(e)) from e


def _check_resolution(sub: SubMesh, c: float) -> None:
    sub_ch = c * sub.sub_h
    if sub_ch >= settings.submesh_ch_warning:
        logger.warning(
            f"Sub-mesh resolution c*h_sub={sub_ch:.3f} >= {settings.submesh_ch_warning} "
            f"on element {sub.parent.index} (N_s={sub.n_s}); bubbles may be under-resolved"
        )


def _expand(sub: SubMesh, interior_values: np.ndarray) -> np.ndarray:
    values = np.zeros((sub.n_nodes,) + interior_values.shape[1:], dtype=interior_values.dtype)
    values[sub.interior_nodes] = interior_values
    return values


def solve_bubbles(
    sub: SubMesh,
    c: float,
    mus: Sequence[float],
    f: Optional[SourceFn] = None,
) -> Tuple[List[BubbleField], BubbleField]:
    """All basis bubbles and the source bubble from a single factorization"""
    n_en = sub.basis.shape[1]
    if len(mus) != n_en:
        raise ValueError(f"expected {n_en} mu values, got {len(mus)}")
    _check_resolution(sub, c)

    idx = sub.interior_nodes
    mass_rows = sub.mass[idx]
    rhs = np.empty((idx.size, n_en + 1), dtype=np.complex128 if f is not None else np.float64)
    rhs[:, :n_en] = (c * c) * (mass_rows @ sub.basis) * np.asarray(mus, dtype=np.float64)[None, :]
    if f is None:
        rhs[:, n_en] = 0.0
    else:
        f_nodes = np.broadcast_to(f(sub.nodes[:, 0], sub.nodes[:, 1]), (sub.n_nodes,))
        rhs[:, n_en] = mass_rows @ f_nodes
        if not np.any(rhs.imag):
            rhs = rhs.real.copy()

    values = _expand(sub, _solve_interior(sub, c, rhs))
    basis_fields = [BubbleField(values[:, i], i, float(mus[i])) for i in range(n_en)]
    return basis_fields, BubbleField(values[:, n_en], SOURCE, 1.0)


def solve_bubble(
    sub: SubMesh,
    c: float,
    mu: float,
    which: Which,
    f: Optional[SourceFn] = None,
) -> BubbleField:
    """
    One bubble: ``which`` is a 0-based basis index or ``SOURCE``.

    Basis bubbles get the right-hand side mu*c^2*psi_which; the source
    bubble gets f and ignores mu.
    """
    _check_resolution(sub, c)
    mass_rows = sub.mass[sub.interior_nodes]
    if which == SOURCE:
        if f is None:
            return BubbleField(np.zeros(sub.n_nodes), SOURCE, 1.0)
        f_nodes = np.broadcast_to(f(sub.nodes[:, 0], sub.nodes[:, 1]), (sub.n_nodes,))
        rhs = mass_rows @ f_nodes
        return BubbleField(_expand(sub, _solve_interior(sub, c, rhs)), SOURCE, 1.0)

    n_en = sub.basis.shape[1]
    if not (isinstance(which, (int, np.integer)) and 0 <= which < n_en):
        raise ValueError(f"bubble index must be in [0, {n_en}) or {SOURCE!r}, got {which!r}")
    rhs = mu * c * c * (mass_rows @ sub.basis[:, which])
    return BubbleField(_expand(sub, _solve_interior(sub, c, rhs)), int(which), float(mu))


def condense_element(
    geom: ElementGeometry,
    c: float,
    mus: Union[float, Sequence[float]],
    n_s: int,
    f: Optional[SourceFn] = None,
    sub: Optional[SubMesh] = None,
) -> ElementCondensation:
    """Solve the element's bubbles and fold them into condensation integrals"""
    n_en = geom.kind.n_vertices
    if np.isscalar(mus):
        mus = (float(mus),) * n_en
    mus = tuple(float(m) for m in mus)
    if len(mus) != n_en:
        raise ValueError(f"{geom.kind.value} element needs {n_en} mu values, got {len(mus)}")

    sub = sub if sub is not None else build_submesh(geom, n_s)
    basis_fields, source_field = solve_bubbles(sub, c, mus, f)

    phi = np.stack([b.values for b in basis_fields], axis=1)
    projected = sub.mass @ sub.basis
    bubble_mass = phi.T @ projected
    source_terms = source_field.values @ projected

    stiffness, mass = element_matrices(geom.vertices[None], geom.kind)
    load = load_vectors(geom.vertices[None], geom.kind, f)[0]
    return ElementCondensation(
        bubble_mass=bubble_mass,
        source_terms=source_terms,
        linear_stiffness=stiffness[0],
        linear_mass=mass[0],
        load=load,
        mus=mus,
        n_s=sub.n_s,
    )
