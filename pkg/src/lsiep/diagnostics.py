"""Surjectivity diagnostics for the differential of the residual map.

The differential at a point is surjective exactly when the matrix whose
columns are its images of the canonical tangent coordinates has full column
rank.  The columns are emitted directly (basis matrices, rotated commutator
pairs, trailing rank-one projectors) without forming any Kronecker factor.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .manifold import ManifoldPoint, skew_to_vec, vec_to_skew, _upper_indices
from .model import ProblemData, stacked_eigs

__all__ = [
    "SurjectivityReport",
    "surjectivity_check",
    "skew_to_vec",
    "vec_to_skew",
]


@dataclass
class SurjectivityReport:
    matrix_cols: int
    numeric_rank: int
    smallest_singular_value: float
    surjective: bool

    def to_dict(self) -> dict:
        return {
            "matrix_cols": self.matrix_cols,
            "numeric_rank": self.numeric_rank,
            "smallest_singular_value": self.smallest_singular_value,
            "surjective": self.surjective,
        }


def _coordinate_columns(p: ProblemData, x: ManifoldPoint) -> np.ndarray:
    """n^2 x (l + n(n-1)/2 + (n-m)) matrix of vectorized coordinate images.

    Column blocks: vec(A_i) for the parameter coordinates; for each packed
    pair i < j the rotated commutator (lb_i - lb_j) (q_i q_j^T + q_j q_i^T);
    for each free diagonal slot the projector q_{m+j} q_{m+j}^T (the sign
    does not affect the rank).
    """
    n, l, m = p.dims
    lb = stacked_eigs(p, x)
    cols = []
    for i in range(l):
        cols.append(p.basis[1 + i].ravel(order="F"))
    for i, j in zip(*_upper_indices(n)):
        pair = np.outer(x.Q[:, i], x.Q[:, j])
        cols.append(((lb[i] - lb[j]) * (pair + pair.T)).ravel(order="F"))
    for j in range(n - m):
        q = x.Q[:, m + j]
        cols.append(np.outer(q, q).ravel(order="F"))
    return np.column_stack(cols)


def surjectivity_check(p: ProblemData,
                       x: ManifoldPoint,
                       rank_tol: float = 1e-10,
                       max_n: int = 64) -> SurjectivityReport:
    """Numeric full-column-rank test of the coordinate matrix.

    Rank counts singular values at or above rank_tol times the largest one.
    The matrix has n^2 rows, so the check is guarded to n <= max_n; raise
    the guard explicitly for bigger problems.
    """
    n, l, m = p.dims
    if n > max_n:
        raise ValueError(
            f"n={n} exceeds the size guard ({max_n}); pass max_n explicitly "
            "to materialize an n^2-row matrix this large")
    mat = _coordinate_columns(p, x)
    svals = np.linalg.svd(mat, compute_uv=False)
    if svals.size == 0 or svals[0] == 0.0:
        rank = 0
        smallest = 0.0
    else:
        rank = int(np.sum(svals >= rank_tol * svals[0]))
        smallest = float(svals[-1])
    return SurjectivityReport(
        matrix_cols=mat.shape[1],
        numeric_rank=rank,
        smallest_singular_value=smallest,
        surjective=rank == mat.shape[1],
    )
