"""
Complex-capable linear algebra for the two solver levels.

Element-level systems (bubble sub-problems) go through ``dense_solve``;
the global system is a ``SparseSystem`` factorized by SuperLU.
"""

from dataclasses import dataclass
from typing import Sequence, Tuple
import logging
import warnings

import numpy as np
import scipy.sparse as sp
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve
from scipy.sparse.linalg import splu

from app.core.errors import SingularSystemError
from config.config import settings

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class SparseSystem:
    matrix: sp.csr_matrix
    rhs: np.ndarray

    def __post_init__(self):
        matrix = sp.csr_matrix(self.matrix, dtype=np.complex128)
        matrix.sum_duplicates()
        matrix.sort_indices()
        rhs = np.asarray(self.rhs, dtype=np.complex128).ravel()
        n, m = matrix.shape
        if n == 0 or n != m:
            raise ValueError(f"system matrix must be square and non-empty, got {matrix.shape}")
        if rhs.shape[0] != n:
            raise ValueError(f"rhs has length {rhs.shape[0]}, matrix has {n} rows")
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "rhs", rhs)

    @classmethod
    def from_triplets(
        cls,
        rows: Sequence[int] | np.ndarray,
        cols: Sequence[int] | np.ndarray,
        values: Sequence[complex] | np.ndarray,
        n: int,
        rhs: np.ndarray,
    ) -> "SparseSystem":
        """CSR from COO triplets; duplicate entries are summed"""
        coo = sp.coo_matrix(
            (np.asarray(values, dtype=np.complex128), (np.asarray(rows), np.asarray(cols))),
            shape=(n, n),
        )
        return cls(coo.tocsr(), rhs)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def row_offsets(self) -> np.ndarray:
        return self.matrix.indptr

    @property
    def col_indices(self) -> np.ndarray:
        return self.matrix.indices

    @property
    def values(self) -> np.ndarray:
        return self.matrix.data

    def is_structurally_symmetric(self) -> bool:
        pattern = sp.csr_matrix(
            (np.ones(self.matrix.nnz), self.matrix.indices, self.matrix.indptr),
            shape=self.matrix.shape,
        )
        return (pattern != pattern.T).nnz == 0

    def residual(self, x: np.ndarray) -> float:
        """Relative residual ||Ax - b||_inf / ||b||_inf (absolute when b = 0)"""
        r = np.max(np.abs(self.matrix @ x - self.rhs))
        scale = np.max(np.abs(self.rhs))
        return float(r / scale) if scale > 0 else float(r)


def dense_solve(A: np.ndarray, b: np.ndarray, context: str = "") -> np.ndarray:
    """
    LU solve with partial pivoting for small element-level systems.

    ``b`` may be a vector or a k x m block of right-hand sides sharing one
    factorization. Raises ``SingularSystemError`` when a pivot falls below
    ``dense_pivot_tolerance`` times the largest row sum of |A|.
    """
    A = np.asarray(A)
    b = np.asarray(b)
    dtype = np.result_type(A.dtype, b.dtype, np.float64)
    A = A.astype(dtype, copy=False)
    k = A.shape[0]
    if A.ndim != 2 or A.shape[1] != k:
        raise ValueError(f"dense_solve needs a square matrix, got {A.shape}")
    if k > settings.dense_max_size:
        raise ValueError(
            f"dense_solve is for element-level systems (k <= {settings.dense_max_size}), got k={k}"
        )

    scale = float(np.max(np.sum(np.abs(A), axis=1))) if k else 0.0
    if scale == 0.0:
        raise SingularSystemError("matrix is identically zero", context)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LinAlgWarning)
        lu, piv = lu_factor(A, check_finite=True)

    smallest = float(np.min(np.abs(np.diag(lu))))
    if smallest < settings.dense_pivot_tolerance * scale:
        raise SingularSystemError(
            f"numerically singular {k}x{k} system (pivot {smallest:.3e}, row scale {scale:.3e})",
            context,
        )
    return lu_solve((lu, piv), b.astype(dtype, copy=False))


def sparse_solve(system: SparseSystem, context: str = "global system") -> np.ndarray:
    """Direct sparse LU (COLAMD ordering); singular factorizations raise SingularSystemError"""
    advice = "c^2 may be a discrete eigenvalue of the mesh; perturb c slightly"
    try:
        lu = splu(system.matrix.tocsc(), permc_spec="COLAMD")
    except RuntimeError as e:
        raise SingularSystemError(f"sparse factorization failed: {e}; {advice}", context) from e

    pivots = np.abs(lu.U.diagonal())
    row_scale = float(abs(system.matrix).sum(axis=1).max())
    if pivots.min() < settings.dense_pivot_tolerance * row_scale:
        raise SingularSystemError(
            f"near-zero pivot {pivots.min():.3e} in sparse factorization; {advice}", context
        )

    if not np.any(system.rhs):
        return np.zeros(system.n, dtype=np.complex128)

    x = lu.solve(system.rhs)
    if not np.all(np.isfinite(x)):
        raise SingularSystemError(f"non-finite solution; {advice}", context)

    res = system.residual(x)
    if res > settings.sparse_residual_tolerance:
        logger.warning(
            f"Residual {res:.3e} above tolerance {settings.sparse_residual_tolerance:.1e} ({context})"
        )
    return x


def apply_dirichlet(
    matrix: sp.spmatrix, rhs: np.ndarray, nodes: np.ndarray, values: np.ndarray
) -> Tuple[sp.csr_matrix, np.ndarray]:
    """
    Symmetric elimination of prescribed nodal values.

    The system keeps its size: fixed rows and columns become identity, and
    their coupling is lifted into the right-hand side.
    """
    matrix = sp.csr_matrix(matrix, dtype=np.complex128)
    n = matrix.shape[0]
    nodes = np.asarray(nodes, dtype=np.int64)
    values = np.asarray(values, dtype=np.complex128)

    fixed = np.zeros(n, dtype=np.complex128)
    fixed[nodes] = values
    lifted = np.asarray(rhs, dtype=np.complex128) - matrix @ fixed

    keep = np.ones(n)
    keep[nodes] = 0.0
    K = sp.diags(keep)
    reduced = (K @ matrix @ K + sp.diags(1.0 - keep)).tocsr()
    lifted[nodes] = values
    return reduced, lifted
