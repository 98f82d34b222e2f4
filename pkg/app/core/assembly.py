"""
Global assembly and solve for the Galerkin, RFB and AB methods.

Per element the row for test function psi_j reads

    sum_i d_i [ (grad psi_i, grad psi_j) - c^2 (psi_i, psi_j) - c^2 (phi_i, psi_j) ]
        = (f, psi_j) + c^2 (phi_f, psi_j)

with the bubble integrals zero for Galerkin, mu = 1 for RFB and table
values of mu for AB. Elements of identical shape share one condensation.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple
import logging
import time

import numpy as np
import scipy.sparse as sp

from app.core.bubble import SOURCE, SubMesh, build_submesh, condense_element, solve_bubble
from app.core.elements import edge_mass, element_matrices, load_vectors
from app.core.linalg import SparseSystem, apply_dirichlet, sparse_solve
from app.core.mesh import BoundaryMarker, ElementKind, Mesh, dirichlet_nodes, geometry_of
from app.core.mu_table import MuTable, get_mu_table, lookup_mu, select_n_s
from app.core.problem import Method, ProblemSpec
from config.config import settings
from utils.helper import parallel_map

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolveStats:
    assembly_ms: float
    solve_ms: float
    n_unknowns: int


@dataclass(frozen=True, eq=False)
class Solution:
    nodal_values: np.ndarray
    spec: ProblemSpec
    mesh: Mesh
    stats: SolveStats


@dataclass(frozen=True, eq=False)
class Operator:
    """Global matrix and load vector before boundary elimination"""

    matrix: sp.csr_matrix
    load: np.ndarray
    element_settings: List[Tuple[Tuple[float, ...], int]] = field(default_factory=list)
    n_condensations: int = 0


def element_keys(mesh: Mesh, elem: int, c: float) -> Tuple[float, ...]:
    """Calibration keys of an element: c*m_i per vertex (triangles) or c*h (quads)"""
    geom = geometry_of(mesh.nodes[mesh.elements[elem]], mesh.kind, index=elem)
    if mesh.kind is ElementKind.TRIANGLE:
        return tuple(c * m for m in geom.medians)
    return (c * geom.h_char,)


def _bubble_settings(
    mesh: Mesh, spec: ProblemSpec, table: MuTable
) -> List[Tuple[Tuple[float, ...], int]]:
    """(per-basis mu, N_s) for every element"""
    n_en = mesh.kind.n_vertices
    out = []
    for elem in range(mesh.n_elements):
        keys = element_keys(mesh, elem, spec.c)
        if spec.method is Method.AB:
            looked = [lookup_mu(table, k, clamp=spec.clamp_mu) for k in keys]
            mus = tuple(mu for mu, _ in looked)
            n_s = max(ns for _, ns in looked)
            if len(mus) == 1:
                mus = mus * n_en
        else:
            mus = (1.0,) * n_en
            n_s = max(select_n_s(table, k) for k in keys)
        if spec.n_s is not None:
            n_s = spec.n_s
        out.append((mus, n_s))
    return out


def _shape_key(vertices: np.ndarray, h_char: float, mus, n_s: int):
    offsets = np.round((vertices - vertices[0]) / (1e-9 * h_char)).astype(np.int64)
    return (tuple(offsets.ravel().tolist()), tuple(round(m, 12) for m in mus), n_s)


def _condensed_blocks(
    mesh: Mesh, spec: ProblemSpec, threads: int
) -> Tuple[np.ndarray, np.ndarray, List, int]:
    """Element matrices (E, k, k) and right-hand sides (E, k) including bubbles"""
    table = get_mu_table(mesh.kind, spec.mu_table_path)
    per_element = _bubble_settings(mesh, spec, table)
    source = spec.source.function()
    c = spec.c

    coords = mesh.nodes[mesh.elements]
    geoms = [geometry_of(coords[e], mesh.kind, index=e) for e in range(mesh.n_elements)]

    group_of: Dict[tuple, int] = {}
    representatives: List[int] = []
    membership = np.empty(mesh.n_elements, dtype=np.int64)
    for e, geom in enumerate(geoms):
        mus, n_s = per_element[e]
        key = _shape_key(geom.vertices, geom.h_char, mus, n_s)
        if key not in group_of:
            group_of[key] = len(representatives)
            representatives.append(e)
        membership[e] = group_of[key]

    shared_source = source if spec.source.translation_invariant else None

    def condense(e: int):
        mus, n_s = per_element[e]
        sub = build_submesh(geoms[e], n_s)
        return sub, condense_element(geoms[e], c, mus, n_s, f=shared_source, sub=sub)

    results = parallel_map(condense, representatives, threads=threads)
    logger.info(
        f"Condensed {len(representatives)} distinct element shape(s) "
        f"for {mesh.n_elements} elements ({spec.method.value})"
    )

    k = mesh.kind.n_vertices
    local = np.empty((mesh.n_elements, k, k))
    for g, (_, cond) in enumerate(results):
        local[membership == g] = cond.element_matrix(c)

    rhs = load_vectors(coords, mesh.kind, source).astype(np.complex128)
    if shared_source is not None:
        for g, (_, cond) in enumerate(results):
            rhs[membership == g] += c * c * cond.source_terms
    elif source is not None:
        rhs += c * c * _variable_source_terms(coords, membership, results, c, source, threads)

    return local, rhs, per_element, len(representatives)


def _variable_source_terms(coords, membership, results, c, source, threads) -> np.ndarray:
    """(phi_f, psi_j) per element for a source without translation invariance"""

    def one(e: int) -> np.ndarray:
        sub: SubMesh = results[membership[e]][0]
        shift = coords[e, 0] - sub.parent.vertices[0]
        shifted = lambda x, y: source(x + shift[0], y + shift[1])
        phi_f = solve_bubble(sub, c, 1.0, SOURCE, shifted)
        return phi_f.values @ (sub.mass @ sub.basis)

    return np.array(parallel_map(one, range(coords.shape[0]), threads=threads))


def _scatter(mesh: Mesh, local: np.ndarray) -> sp.csr_matrix:
    conn = mesh.elements
    k = conn.shape[1]
    rows = np.repeat(conn, k, axis=1).ravel()
    cols = np.tile(conn, (1, k)).ravel()
    return sp.coo_matrix(
        (local.reshape(-1).astype(np.complex128), (rows, cols)),
        shape=(mesh.n_nodes, mesh.n_nodes),
    ).tocsr()


def _robin_matrix(mesh: Mesh, coefficient: complex) -> sp.csr_matrix:
    edges = mesh.edges_with(BoundaryMarker.ROBIN)
    if edges.shape[0] == 0:
        return sp.csr_matrix((mesh.n_nodes, mesh.n_nodes), dtype=np.complex128)
    lengths = np.linalg.norm(mesh.nodes[edges[:, 1]] - mesh.nodes[edges[:, 0]], axis=1)
    local = -coefficient * edge_mass(lengths)
    rows = np.repeat(edges, 2, axis=1).ravel()
    cols = np.tile(edges, (1, 2)).ravel()
    return sp.coo_matrix(
        (local.reshape(-1), (rows, cols)), shape=(mesh.n_nodes, mesh.n_nodes)
    ).tocsr()


def assemble_operator(mesh: Mesh, spec: ProblemSpec, threads: Optional[int] = None) -> Operator:
    threads = settings.threads if threads is None else threads
    c = spec.c

    if spec.method is Method.GALERKIN:
        coords = mesh.nodes[mesh.elements]
        stiffness, mass = element_matrices(coords, mesh.kind)
        local = stiffness - c * c * mass
        rhs = load_vectors(coords, mesh.kind, spec.source.function()).astype(np.complex128)
        per_element, n_cond = [], 0
    else:
        local, rhs, per_element, n_cond = _condensed_blocks(mesh, spec, threads)

    matrix = _scatter(mesh, local) + _robin_matrix(mesh, spec.robin_coefficient)
    load = np.zeros(mesh.n_nodes, dtype=np.complex128)
    np.add.at(load, mesh.elements.ravel(), rhs.ravel())
    return Operator(matrix.tocsr(), load, per_element, n_cond)


def assemble(mesh: Mesh, spec: ProblemSpec, threads: Optional[int] = None) -> SparseSystem:
    """Global system with Dirichlet rows eliminated (full node-indexed size)"""
    op = assemble_operator(mesh, spec, threads)
    fixed = dirichlet_nodes(mesh)
    if fixed.size == 0:
        return SparseSystem(op.matrix, op.load)
    values = spec.dirichlet.evaluate(mesh.nodes[fixed], spec.c)
    matrix, rhs = apply_dirichlet(op.matrix, op.load, fixed, values)
    return SparseSystem(matrix, rhs)


def solve_problem(mesh: Mesh, spec: ProblemSpec, threads: Optional[int] = None) -> Solution:
    start = time.perf_counter()
    system = assemble(mesh, spec, threads)
    assembled = time.perf_counter()

    x = sparse_solve(system, context=f"{spec.method.value} system, c={spec.c:g}")
    fixed = dirichlet_nodes(mesh)
    if fixed.size:
        x[fixed] = spec.dirichlet.evaluate(mesh.nodes[fixed], spec.c)
    solved = time.perf_counter()

    stats = SolveStats(
        assembly_ms=1e3 * (assembled - start),
        solve_ms=1e3 * (solved - assembled),
        n_unknowns=mesh.n_nodes - fixed.size,
    )
    logger.info(
        f"Solved {spec.method.value} problem: c={spec.c:g}, {stats.n_unknowns} unknowns, "
        f"assembly {stats.assembly_ms:.1f} ms, solve {stats.solve_ms:.1f} ms"
    )
    return Solution(x, spec, mesh, stats)
