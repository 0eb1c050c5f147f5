"""Geometry of the search space R^l x O(n) x D(n-m).

A point carries the parameter vector c, an orthogonal matrix Q and the free
trailing part of the diagonal.  Tangent vectors keep the rotation generator
Omega (where the ambient direction is Q @ Omega) in packed strictly-upper
coordinates, so Omega is skew-symmetric exactly by construction and the
metric never needs the Q factor.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "ManifoldPoint",
    "TangentVector",
    "RetractionError",
    "inner",
    "norm",
    "retract",
    "skew_to_vec",
    "vec_to_skew",
]


class RetractionError(RuntimeError):
    """The QR factor hit an exactly zero diagonal entry; the step failed."""


@lru_cache(maxsize=128)
def _upper_indices(n: int) -> tuple[np.ndarray, np.ndarray]:
    # Column-by-column scan of the strict upper triangle: (0,1), (0,2),
    # (1,2), (0,3), ...  Obtained by transposing the row-major lower scan.
    rows, cols = np.tril_indices(n, -1)
    rows.setflags(write=False)
    cols.setflags(write=False)
    return cols, rows


def _side_from_packed(length: int) -> int:
    n = int(round((1.0 + np.sqrt(1.0 + 8.0 * length)) / 2.0))
    if n * (n - 1) // 2 != length:
        raise ValueError(f"length {length} is not a triangular number n*(n-1)/2")
    return n


def skew_to_vec(w_mat: np.ndarray) -> np.ndarray:
    """Stack the strictly upper triangular entries of a square matrix,
    column by column, into a vector of length n*(n-1)/2."""
    w_mat = np.asarray(w_mat)
    return w_mat[_upper_indices(w_mat.shape[0])]


def vec_to_skew(w: np.ndarray) -> np.ndarray:
    """Inverse of :func:`skew_to_vec`: build the skew-symmetric matrix whose
    strict upper triangle holds ``w``."""
    w = np.asarray(w, dtype=float)
    n = _side_from_packed(w.shape[0])
    out = np.zeros((n, n))
    out[_upper_indices(n)] = w
    return out - out.T


@dataclass
class ManifoldPoint:
    """Iterate (c, Q, lam) with Q orthogonal and lam the free diagonal block."""

    c: np.ndarray
    Q: np.ndarray
    lam: np.ndarray

    @property
    def n(self) -> int:
        return self.Q.shape[0]

    def orthogonality_residual(self) -> float:
        """Frobenius norm of Q^T Q - I; should stay below 1e-12."""
        n = self.Q.shape[0]
        return float(np.linalg.norm(self.Q.T @ self.Q - np.eye(n)))


@dataclass
class TangentVector:
    """Tangent direction (dc, Omega, dlambda) in reduced coordinates.

    ``omega_packed`` holds the strictly upper entries of Omega in the
    column-major order of :func:`skew_to_vec`; the full skew matrix is
    materialized on demand via :attr:`omega`.
    """

    dc: np.ndarray
    omega_packed: np.ndarray
    dlambda: np.ndarray

    @classmethod
    def from_omega(cls, dc, omega, dlambda) -> "TangentVector":
        """Build from a full generator matrix, skew-symmetrizing it first."""
        omega = np.asarray(omega, dtype=float)
        packed = skew_to_vec(0.5 * (omega - omega.T))
        return cls(np.asarray(dc, dtype=float), packed, np.asarray(dlambda, dtype=float))

    @classmethod
    def zeros(cls, l: int, n: int, n_free: int) -> "TangentVector":
        return cls(np.zeros(l), np.zeros(n * (n - 1) // 2), np.zeros(n_free))

    @property
    def omega(self) -> np.ndarray:
        return vec_to_skew(self.omega_packed)

    def __add__(self, other: "TangentVector") -> "TangentVector":
        return TangentVector(self.dc + other.dc,
                             self.omega_packed + other.omega_packed,
                             self.dlambda + other.dlambda)

    def __sub__(self, other: "TangentVector") -> "TangentVector":
        return TangentVector(self.dc - other.dc,
                             self.omega_packed - other.omega_packed,
                             self.dlambda - other.dlambda)

    def __mul__(self, a: float) -> "TangentVector":
        return TangentVector(a * self.dc, a * self.omega_packed, a * self.dlambda)

    __rmul__ = __mul__

    def __neg__(self) -> "TangentVector":
        return TangentVector(-self.dc, -self.omega_packed, -self.dlambda)


def _check_match(x: ManifoldPoint, u: TangentVector) -> None:
    n = x.Q.shape[0]
    if (u.dc.shape != x.c.shape or u.dlambda.shape != x.lam.shape
            or u.omega_packed.shape[0] != n * (n - 1) // 2):
        raise ValueError("tangent vector dimensions do not match the point")


def inner(x: ManifoldPoint, u: TangentVector, v: TangentVector) -> float:
    """Riemannian metric.

    With directions stored as generators, tr((Q Omega_u)^T (Q Omega_v))
    collapses to tr(Omega_u^T Omega_v) = 2 * dot of the packed entries, so
    the metric is Q-free.
    """
    _check_match(x, u)
    _check_match(x, v)
    return float(u.dc @ v.dc
                 + 2.0 * (u.omega_packed @ v.omega_packed)
                 + u.dlambda @ v.dlambda)


def norm(x: ManifoldPoint, u: TangentVector) -> float:
    return float(np.sqrt(inner(x, u, u)))


def _qf(mat: np.ndarray) -> np.ndarray:
    """Orthogonal factor of the QR decomposition, normalized so the
    triangular factor has strictly positive diagonal."""
    q, r = np.linalg.qr(mat)
    d = np.diag(r)
    if np.any(d == 0.0):
        raise RetractionError("zero diagonal entry in QR factor")
    return q * np.sign(d)


def retract(x: ManifoldPoint, u: TangentVector, t: float = 1.0) -> ManifoldPoint:
    """Move from x along t*u and map back onto the manifold.

    The c and lam parts update additively; the Q part takes the orthogonal
    factor of Q + t*Q*Omega.  Raises :class:`RetractionError` on the
    (measure-zero) event of a singular QR step; callers treat that as a
    failed trial step.
    """
    _check_match(x, u)
    q_new = _qf(x.Q + t * (x.Q @ u.omega))
    return ManifoldPoint(x.c + t * u.dc, q_new, x.lam + t * u.dlambda)
