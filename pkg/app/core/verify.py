"""
Exact solutions, error norms, reference solves and the sweep engine.
"""

from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable, List, Optional, Sequence
import logging
import math
import time

import numpy as np
from matplotlib.tri import LinearTriInterpolator, Triangulation
from scipy.spatial import cKDTree

from app.core.assembly import Solution, SolveStats, solve_problem
from app.core.errors import HelmholtzError, ProblemSizeError
from app.core.fdstencil import LatticeDomain, SchemeTag, parse_scheme, solve_lattice
from app.core.mesh import ElementKind, Mesh, gen_equilateral_triangle_domain
from app.core.problem import (
    DirichletKind,
    DirichletSpec,
    Method,
    PlaneWaveConvention,
    ProblemSpec,
    plane_wave,
)
from config.config import settings
from utils.helper import parallel_map

logger = logging.getLogger(__name__)

MeshBuilder = Callable[[float, float], Mesh]

FEM_METHODS = {m.value for m in Method}
FD_METHODS = {SchemeTag.PSEUDO_AB.value, SchemeTag.FOURTH_ORDER.value, SchemeTag.PSEUDO_RFB.value}
DEFAULT_SWEEP_METHODS = ("galerkin", "rfb", "ab", "pseudo-ab", "fourth-order")
FD_PSEUDO_AB_MU = 6.8


class ExactKind(str, Enum):
    PLANE_WAVE = "plane_wave"
    AXIS_WAVE = "axis_wave"
    NONE = "none"


class SampleSet(str, Enum):
    NODES = "nodes"
    NODES_AND_CENTROIDS = "nodes+centroids"


@dataclass(frozen=True)
class ExactSolution:
    kind: ExactKind
    c: float = 0.0
    theta: float = 0.0
    convention: PlaneWaveConvention = PlaneWaveConvention.DIRICHLET

    @classmethod
    def plane_wave(cls, c, theta, convention=PlaneWaveConvention.DIRICHLET) -> "ExactSolution":
        return cls(ExactKind.PLANE_WAVE, c, theta, PlaneWaveConvention(convention))

    @classmethod
    def axis_wave(cls, c) -> "ExactSolution":
        return cls(ExactKind.AXIS_WAVE, c)

    @classmethod
    def from_spec(cls, spec: ProblemSpec) -> "ExactSolution":
        """The closed-form solution when the boundary data is one (zero source only)"""
        if spec.source.function() is not None:
            return cls(ExactKind.NONE)
        d = spec.dirichlet
        if d.kind is DirichletKind.PLANE_WAVE:
            return cls.plane_wave(spec.c, d.theta, d.convention)
        if d.kind is DirichletKind.AXIS_WAVE:
            return cls.axis_wave(spec.c)
        return cls(ExactKind.NONE)

    def __call__(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        if self.kind is ExactKind.PLANE_WAVE:
            return plane_wave(x, y, self.c, self.theta, self.convention)
        if self.kind is ExactKind.AXIS_WAVE:
            return np.sin(self.c * np.asarray(x))
        raise ValueError("no closed-form solution to evaluate")


@dataclass(frozen=True)
class ErrorReport:
    inf_norm: float
    rel_inf: float
    sample_set: SampleSet
    n_samples: int
    max_exact: float
    stats: Optional[SolveStats] = None


def _report(approx, exact, sample_set, stats=None) -> ErrorReport:
    inf_norm = float(np.max(np.abs(approx - exact)))
    scale = float(np.max(np.abs(exact)))
    rel = inf_norm / scale if scale > 0 else math.nan
    return ErrorReport(inf_norm, rel, SampleSet(sample_set), int(np.size(exact)), scale, stats)


def error_inf(
    sol: Solution,
    exact: ExactSolution,
    samples: SampleSet = SampleSet.NODES_AND_CENTROIDS,
) -> ErrorReport:
    """Max |u_h - u| over nodes (and element centroids, interpolating u_h)"""
    if exact.kind is ExactKind.NONE:
        raise ValueError("error_inf needs a closed-form exact solution")
    samples = SampleSet(samples)
    mesh = sol.mesh
    points = [mesh.nodes]
    values = [sol.nodal_values]
    if samples is SampleSet.NODES_AND_CENTROIDS:
        # linear and bilinear interpolants both equal the vertex mean at the centroid
        points.append(mesh.nodes[mesh.elements].mean(axis=1))
        values.append(sol.nodal_values[mesh.elements].mean(axis=1))
    points = np.concatenate(points)
    approx = np.concatenate(values)
    return _report(approx, exact(points[:, 0], points[:, 1]), samples, sol.stats)


# ---------------------------------------------------------------------------
# reference solutions
# ---------------------------------------------------------------------------


def reference_solve(
    problem: ProblemSpec, domain: MeshBuilder, ch_ref: float, threads: Optional[int] = None
) -> Solution:
    """Plain Galerkin on a fine mesh of the same domain, used as surrogate exact solution"""
    mesh = domain(problem.c, ch_ref)
    if mesh.n_nodes > settings.max_unknowns:
        raise ProblemSizeError(
            f"reference mesh at ch={ch_ref:g} has {mesh.n_nodes} nodes, "
            f"above the limit of {settings.max_unknowns}"
        )
    logger.info(f"Reference solve at ch={ch_ref:g}: {mesh.n_elements} elements")
    return solve_problem(mesh, problem.with_method(Method.GALERKIN), threads)


def _as_triangles(mesh: Mesh) -> np.ndarray:
    if mesh.kind is ElementKind.TRIANGLE:
        return mesh.elements
    q = mesh.elements
    return np.concatenate([q[:, [0, 1, 2]], q[:, [0, 2, 3]]])


def interpolate_to(reference: Solution, points: np.ndarray) -> np.ndarray:
    """Piecewise-linear interpolation of a reference field at arbitrary points"""
    ref = reference.mesh
    tri = Triangulation(ref.nodes[:, 0], ref.nodes[:, 1], _as_triangles(ref))
    values = reference.nodal_values
    re = LinearTriInterpolator(tri, values.real)(points[:, 0], points[:, 1])
    im = LinearTriInterpolator(tri, values.imag)(points[:, 0], points[:, 1])

    out = np.ma.filled(re, np.nan) + 1j * np.ma.filled(im, np.nan)
    missing = np.flatnonzero(~np.isfinite(out))
    if missing.size:
        # points on the boundary can fall just outside the triangulation
        _, nearest = cKDTree(ref.nodes).query(points[missing])
        out[missing] = values[nearest]
    return out


def compare_to_reference(solution: Solution, reference: Solution) -> ErrorReport:
    ref_values = interpolate_to(reference, solution.mesh.nodes)
    return _report(solution.nodal_values, ref_values, SampleSet.NODES, solution.stats)


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepRecord:
    method: str
    c: float
    ch: float
    theta: float
    n_unknowns: Optional[int]
    inf_error: float
    rel_error: float
    assembly_ms: Optional[float] = None
    solve_ms: Optional[float] = None


@dataclass(frozen=True)
class SweepCell:
    method: str
    c: float
    ch: float
    theta: float
    side: float = 1.0
    convention: PlaneWaveConvention = PlaneWaveConvention.DIRICHLET
    n_s: Optional[int] = None
    clamp_mu: bool = False
    mu_table_path: Optional[str] = None


def _cell_label(cell: SweepCell) -> str:
    if cell.method in FD_METHODS:
        return parse_scheme(cell.method, FD_PSEUDO_AB_MU).label
    return cell.method


def _effective_ch(cell: SweepCell) -> float:
    n = round(cell.side * cell.c / cell.ch)
    return cell.c * (cell.side / n) if n >= 1 else cell.ch


def _fem_cell(cell: SweepCell) -> SweepRecord:
    mesh = gen_equilateral_triangle_domain(cell.side, cell.ch, cell.c)
    spec = ProblemSpec(
        c=cell.c,
        dirichlet=DirichletSpec(
            kind=DirichletKind.PLANE_WAVE, theta=cell.theta, convention=cell.convention
        ),
        method=Method(cell.method),
        n_s=cell.n_s,
        clamp_mu=cell.clamp_mu,
        mu_table_path=cell.mu_table_path,
    )
    sol = solve_problem(mesh, spec, threads=1)
    report = error_inf(sol, ExactSolution.from_spec(spec), SampleSet.NODES)
    h = cell.side / round(cell.side * cell.c / cell.ch)
    return SweepRecord(
        cell.method, cell.c, cell.c * h, cell.theta, sol.stats.n_unknowns,
        report.inf_norm, report.rel_inf, sol.stats.assembly_ms, sol.stats.solve_ms,
    )


def _fd_cell(cell: SweepCell) -> SweepRecord:
    n = int(round(cell.side * cell.c / cell.ch))
    if n < 2:
        raise ValueError(f"lattice needs at least 2 steps per side, got {n}")
    h = cell.side / n
    exact = ExactSolution.plane_wave(cell.c, cell.theta, cell.convention)
    start = time.perf_counter()
    domain = LatticeDomain.triangle(n, h).with_boundary_data(exact)
    scheme = parse_scheme(cell.method, FD_PSEUDO_AB_MU)
    built = time.perf_counter()
    values = solve_lattice(domain, scheme, cell.c)
    done = time.perf_counter()
    pts = domain.points
    report = _report(values, exact(pts[:, 0], pts[:, 1]), SampleSet.NODES)
    return SweepRecord(
        scheme.label, cell.c, cell.c * h, cell.theta, int(np.count_nonzero(~domain.is_boundary)),
        report.inf_norm, report.rel_inf, 1e3 * (built - start), 1e3 * (done - built),
    )


def run_cell(cell: SweepCell, timings: bool = False) -> SweepRecord:
    """One (method, c, theta) solve; failures become NaN rows"""
    try:
        if cell.method in FEM_METHODS:
            record = _fem_cell(cell)
        elif cell.method in FD_METHODS:
            record = _fd_cell(cell)
        else:
            raise ValueError(f"unknown sweep method {cell.method!r}")
    except (HelmholtzError, ValueError, np.linalg.LinAlgError) as e:
        logger.error(f"Sweep cell {cell.method} c={cell.c:g} theta={cell.theta:g} failed: {e}", exc_info=True)
        return SweepRecord(_cell_label(cell), cell.c, _effective_ch(cell), cell.theta, None, math.nan, math.nan)

    logger.info(f"Sweep cell {record.method} c={cell.c:g}: inf error {record.inf_error:.4e}")
    if not timings:
        record = replace(record, assembly_ms=None, solve_ms=None)
    return record


def pollution_sweep(
    methods: Sequence[str],
    ch: float,
    theta: float,
    c_list: Sequence[float],
    threads: int = 1,
    timings: bool = False,
    **cell_options,
) -> List[SweepRecord]:
    """
    One solve per (method, c) at fixed ch on the equilateral-triangle domain.

    All methods are measured at the lattice nodes so FEM and FD columns are
    comparable. Rows come back in (method, c) input order.
    """
    cells = [SweepCell(m, float(c), ch, theta, **cell_options) for m in methods for c in c_list]
    return parallel_map(lambda cell: run_cell(cell, timings), cells, threads=threads)


def theta_sweep(
    method: str,
    c: float,
    ch: float,
    thetas: Optional[Sequence[float]] = None,
    threads: int = 1,
    timings: bool = False,
    **cell_options,
) -> List[SweepRecord]:
    """Direction study; 13 angles in [0, pi] by default"""
    if thetas is None:
        thetas = np.linspace(0.0, math.pi, 13)
    cells = [SweepCell(method, c, ch, float(t), **cell_options) for t in thetas]
    return parallel_map(lambda cell: run_cell(cell, timings), cells, threads=threads)
