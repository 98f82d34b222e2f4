"""
Closed-form finite-difference companions of the bubble methods.

1D: the three-point Galerkin row, its pseudo-bubble correction and the
nodally exact row obtained from analytic bubbles. 2D: the seven-point
family on equilateral lattices, parameterized by the bubble amplitude
alpha2.
"""

from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable, Dict, Optional, Tuple
import logging
import math

import numpy as np
import scipy.sparse as sp

from app.core.errors import ResonantParameterError
from app.core.linalg import SparseSystem, sparse_solve

logger = logging.getLogger(__name__)

SQRT3 = math.sqrt(3.0)
POLE_TOLERANCE = 1e-8
# below this ch the 1D bubble integrals use their Taylor series in (ch)^2
BUBBLE_SERIES_CH = 0.1
SAME_NODE_SERIES = (1.0 / 45.0, 2.0 / 945.0, 1.0 / 4725.0, 2.0 / 93555.0)
OTHER_NODE_SERIES = (7.0 / 360.0, 31.0 / 15120.0, 127.0 / 604800.0, 73.0 / 3421440.0)

# lattice steps (di, dj) of the six neighbours; node (i, j) sits at ((i + j/2) h, j sqrt(3)/2 h)
NEIGHBOURS = ((1, 0), (-1, 0), (0, 1), (-1, 1), (0, -1), (1, -1))


def _guard_pole(t: float, pole: float, name: str) -> None:
    if abs(pole - t) < POLE_TOLERANCE * pole:
        raise ResonantParameterError(
            f"{name} is singular at c^2 h^2 = {pole:g} (got {t:.12g})"
        )


def alpha1(c: float, h: float) -> float:
    """Pseudo-bubble amplitude in 1D: 3 c^2 h^2 / (4 (12 - c^2 h^2))"""
    t = (c * h) ** 2
    _guard_pole(t, 12.0, "alpha1")
    return 3.0 * t / (4.0 * (12.0 - t))


class SchemeTag(str, Enum):
    GALERKIN = "galerkin"
    PSEUDO_RFB = "pseudo-rfb"
    PSEUDO_AB = "pseudo-ab"
    FOURTH_ORDER = "fourth-order"


@dataclass(frozen=True)
class StencilScheme:
    tag: SchemeTag
    mu: float = 1.0

    @classmethod
    def galerkin(cls) -> "StencilScheme":
        return cls(SchemeTag.GALERKIN)

    @classmethod
    def pseudo_rfb(cls) -> "StencilScheme":
        return cls(SchemeTag.PSEUDO_RFB)

    @classmethod
    def pseudo_ab(cls, mu: float) -> "StencilScheme":
        return cls(SchemeTag.PSEUDO_AB, float(mu))

    @classmethod
    def fourth_order(cls) -> "StencilScheme":
        return cls(SchemeTag.FOURTH_ORDER)

    @property
    def label(self) -> str:
        if self.tag is SchemeTag.PSEUDO_AB:
            return f"{self.tag.value}({self.mu:g})"
        return self.tag.value

    def beta(self, c: float, h: float) -> float:
        """Normalized amplitude alpha2 / (c^2 h^2)"""
        t = (c * h) ** 2
        if self.tag is SchemeTag.GALERKIN:
            return 0.0
        if self.tag is SchemeTag.FOURTH_ORDER:
            return 0.0625
        _guard_pole(t, 72.0, f"alpha2 ({self.label})")
        mu = 1.0 if self.tag is SchemeTag.PSEUDO_RFB else self.mu
        return 2.0 * mu / (3.0 * (72.0 - t))

    def alpha2(self, c: float, h: float) -> float:
        return self.beta(c, h) * (c * h) ** 2


def parse_scheme(name: str, mu: float = 6.8) -> StencilScheme:
    tag = SchemeTag(name)
    if tag is SchemeTag.PSEUDO_AB:
        return StencilScheme.pseudo_ab(mu)
    return StencilScheme(tag)


# ---------------------------------------------------------------------------
# 1D
# ---------------------------------------------------------------------------


class Scheme1D(str, Enum):
    GALERKIN = "galerkin"
    PSEUDO_BUBBLE = "pseudo-bubble"
    EXACT_BUBBLE = "exact-bubble"


@dataclass(frozen=True)
class ExactBubble1D:
    """
    phi(x) = A cos(cx) + B sin(cx) - psi(x) on [0, h], zero at both ends,
    solving -phi'' - c^2 phi = c^2 psi for psi_1 = 1 - x/h or psi_2 = x/h.
    """

    c: float
    h: float
    which: int
    A: float
    B: float

    def psi(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        return 1.0 - x / self.h if self.which == 1 else x / self.h

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        return self.A * np.cos(self.c * x) + self.B * np.sin(self.c * x) - self.psi(x)

    def mass_with(self, j: int) -> float:
        """(phi_which, psi_j) over the element: closed form, or its series for small ch"""
        c, h = self.c, self.h
        ch = c * h
        if ch < BUBBLE_SERIES_CH:
            series = SAME_NODE_SERIES if j == self.which else OTHER_NODE_SERIES
            t2 = ch * ch
            return h * t2 * float(np.polyval(series[::-1], t2))
        if j == self.which:
            return 1.0 / (h * c * c) - 1.0 / (c * math.tan(ch)) - h / 3.0
        return 1.0 / (c * math.sin(ch)) - 1.0 / (h * c * c) - h / 6.0


def exact_bubble_1d(c: float, h: float, which: int) -> ExactBubble1D:
    if which not in (1, 2):
        raise ValueError(f"1D element has bubbles 1 and 2, got {which}")
    ch = c * h
    if not ch > 0:
        raise ValueError(f"1D bubble needs c*h > 0, got {ch}")
    k = round(ch / math.pi)
    if k >= 1 and abs(ch - k * math.pi) < POLE_TOLERANCE * k * math.pi:
        raise ResonantParameterError(f"sin(ch) = 0 at ch = {ch:.12g}; bubble is undefined")
    s = math.sin(ch)
    if which == 1:
        return ExactBubble1D(c, h, 1, 1.0, -math.cos(c * h) / s)
    return ExactBubble1D(c, h, 2, 0.0, 1.0 / s)


def exact_bubble_element_matrix(c: float, h: float) -> np.ndarray:
    """Two-node element matrix of the RFB method with analytic bubbles"""
    bubbles = (exact_bubble_1d(c, h, 1), exact_bubble_1d(c, h, 2))
    stiffness = np.array([[1.0, -1.0], [-1.0, 1.0]]) / h
    mass = h / 6.0 * np.array([[2.0, 1.0], [1.0, 2.0]])
    bubble_mass = np.array([[b.mass_with(j) for j in (1, 2)] for b in bubbles])
    return stiffness - c * c * mass - c * c * bubble_mass.T


def stencil_1d(scheme: Scheme1D, c: float, h: float) -> Tuple[float, float]:
    """(off-diagonal, diagonal) of the interior row, divided by h"""
    scheme = Scheme1D(scheme)
    if scheme is Scheme1D.EXACT_BUBBLE:
        element = exact_bubble_element_matrix(c, h)
        return element[0, 1] / h, (element[0, 0] + element[1, 1]) / h

    off = -1.0 / h**2 - c * c / 6.0
    diag = 2.0 / h**2 - 4.0 * c * c / 6.0
    if scheme is Scheme1D.PSEUDO_BUBBLE:
        a1 = alpha1(c, h)
        off -= a1 * c * c / 4.0
        diag -= 2.0 * a1 * c * c / 4.0
    return off, diag


def fd1d_system(
    scheme: Scheme1D, c: float, n: int, bc: Tuple[complex, complex]
) -> SparseSystem:
    """Tridiagonal system on [0, 1] with n nodes; end rows pin u(0) and u(1)"""
    if n < 3:
        raise ValueError(f"1D grid needs at least 3 nodes, got {n}")
    h = 1.0 / (n - 1)
    off, diag = stencil_1d(scheme, c, h)

    interior = np.arange(1, n - 1)
    rows = np.concatenate([interior, interior, interior, [0, n - 1]])
    cols = np.concatenate([interior - 1, interior, interior + 1, [0, n - 1]])
    vals = np.concatenate(
        [
            np.full(interior.size, off),
            np.full(interior.size, diag),
            np.full(interior.size, off),
            [1.0, 1.0],
        ]
    )
    rhs = np.zeros(n, dtype=np.complex128)
    rhs[0], rhs[-1] = bc
    return SparseSystem.from_triplets(rows, cols, vals, n, rhs)


def fd1d_solve(
    scheme: Scheme1D, c: float, n: int, bc: Tuple[complex, complex]
) -> Tuple[np.ndarray, np.ndarray]:
    """Grid points and nodal solution of the 1D scheme"""
    system = fd1d_system(scheme, c, n, bc)
    return np.linspace(0.0, 1.0, n), sparse_solve(system, context=f"1D {Scheme1D(scheme).value}")


# ---------------------------------------------------------------------------
# 2D equilateral lattices
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class LatticeDomain:
    ij: np.ndarray  # (N, 2) lattice indices
    is_boundary: np.ndarray
    h: float
    origin: Tuple[float, float] = (0.0, 0.0)
    boundary_values: Optional[np.ndarray] = None

    def __post_init__(self):
        lookup = self.index
        for k in np.flatnonzero(~self.is_boundary):
            i, j = self.ij[k]
            if any((i + di, j + dj) not in lookup for di, dj in NEIGHBOURS):
                raise ValueError(f"interior lattice node {(int(i), int(j))} misses a neighbour")

    @property
    def index(self) -> Dict[Tuple[int, int], int]:
        return {(int(i), int(j)): k for k, (i, j) in enumerate(self.ij)}

    @property
    def n_nodes(self) -> int:
        return self.ij.shape[0]

    @property
    def points(self) -> np.ndarray:
        i = self.ij[:, 0].astype(np.float64)
        j = self.ij[:, 1].astype(np.float64)
        return np.stack(
            [self.origin[0] + (i + 0.5 * j) * self.h, self.origin[1] + j * (SQRT3 / 2) * self.h],
            axis=1,
        )

    def with_boundary_data(self, fn: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> "LatticeDomain":
        pts = self.points
        values = np.zeros(self.n_nodes, dtype=np.complex128)
        b = self.is_boundary
        values[b] = fn(pts[b, 0], pts[b, 1])
        return replace(self, boundary_values=values)

    @classmethod
    def _from_mask(cls, i, j, boundary, h, origin):
        ij = np.stack([i.ravel(), j.ravel()], axis=1).astype(np.int64)
        return cls(ij, boundary.ravel(), h, origin)

    @classmethod
    def triangle(cls, n: int, h: float, origin=(0.0, 0.0)) -> "LatticeDomain":
        """Equilateral triangle with n lattice steps per side"""
        i, j = np.meshgrid(np.arange(n + 1), np.arange(n + 1))
        keep = i + j <= n
        i, j = i[keep], j[keep]
        return cls._from_mask(i, j, (i == 0) | (j == 0) | (i + j == n), h, origin)

    @classmethod
    def rhombus(cls, n: int, m: int, h: float, origin=(0.0, 0.0)) -> "LatticeDomain":
        i, j = np.meshgrid(np.arange(n + 1), np.arange(m + 1))
        boundary = (i == 0) | (j == 0) | (i == n) | (j == m)
        return cls._from_mask(i, j, boundary, h, origin)

    @classmethod
    def hexagon(cls, n: int, h: float, origin=(0.0, 0.0)) -> "LatticeDomain":
        """Regular hexagon of n lattice steps per side, centred at origin"""
        i, j = np.meshgrid(np.arange(-n, n + 1), np.arange(-n, n + 1))
        ring = np.maximum(np.maximum(np.abs(i), np.abs(j)), np.abs(i + j))
        keep = ring <= n
        return cls._from_mask(i[keep], j[keep], ring[keep] == n, h, origin)


def sevenpoint_weights(scheme: StencilScheme, c: float, h: float) -> Tuple[float, float]:
    """(centre, neighbour) weights of the seven-point row"""
    a2 = scheme.alpha2(c, h)
    c2 = c * c
    centre = 6.0 / (SQRT3 * h * h) - 6.0 * c2 / (8.0 * SQRT3) - 3.0 * a2 * c2 / (6.0 * SQRT3)
    neighbour = -1.0 / (SQRT3 * h * h) - c2 / (8.0 * SQRT3) - a2 * c2 / (6.0 * SQRT3)
    return centre, neighbour


def sevenpoint_operator(
    domain: LatticeDomain, scheme: StencilScheme, c: float
) -> Tuple[sp.csr_matrix, np.ndarray]:
    """Raw rows (n_interior x N) with exactly seven nonzeros each, and the interior node ids"""
    centre, neighbour = sevenpoint_weights(scheme, c, domain.h)
    lookup = domain.index
    interior = np.flatnonzero(~domain.is_boundary)

    rows, cols, vals = [], [], []
    for r, k in enumerate(interior):
        i, j = domain.ij[k]
        rows.append(r)
        cols.append(k)
        vals.append(centre)
        for di, dj in NEIGHBOURS:
            rows.append(r)
            cols.append(lookup[int(i + di), int(j + dj)])
            vals.append(neighbour)

    op = sp.coo_matrix(
        (np.asarray(vals, dtype=np.complex128), (rows, cols)),
        shape=(interior.size, domain.n_nodes),
    ).tocsr()
    return op, interior


def fd2d_sevenpoint(domain: LatticeDomain, scheme: StencilScheme, c: float) -> SparseSystem:
    """Interior-unknown system with boundary data moved to the right-hand side"""
    op, interior = sevenpoint_operator(domain, scheme, c)
    if interior.size == 0:
        raise ValueError("lattice domain has no interior nodes")
    boundary = np.flatnonzero(domain.is_boundary)
    data = domain.boundary_values
    if data is None:
        data = np.zeros(domain.n_nodes, dtype=np.complex128)

    rhs = -(op[:, boundary] @ data[boundary])
    return SparseSystem(op[:, interior], rhs)


def solve_lattice(domain: LatticeDomain, scheme: StencilScheme, c: float) -> np.ndarray:
    """Nodal values over the whole lattice (boundary nodes carry their data)"""
    system = fd2d_sevenpoint(domain, scheme, c)
    values = np.zeros(domain.n_nodes, dtype=np.complex128)
    if domain.boundary_values is not None:
        values[domain.is_boundary] = domain.boundary_values[domain.is_boundary]
    values[~domain.is_boundary] = sparse_solve(system, context=f"seven-point {scheme.label}")
    logger.info(
        f"Seven-point {scheme.label} solve: {system.n} unknowns, c={c:g}, ch={c * domain.h:.4g}"
    )
    return values
