"""Residual map, cost, differential, adjoint and Riemannian gradient.

The problem: find c so that A(c) = A_0 + sum_i c_i A_i carries m prescribed
eigenvalues, in the least-squares sense.  The residual of an iterate
(c, Q, lam) is

    H = A(c) - Q diag(targets, lam) Q^T

and the cost is half its squared Frobenius norm.  Ambient symmetric
matrices are plain (n, n) ndarrays throughout.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .manifold import ManifoldPoint, TangentVector, skew_to_vec

__all__ = [
    "ProblemData",
    "sym_part",
    "assemble_matrix",
    "stacked_eigs",
    "residual",
    "cost",
    "diff",
    "adjoint",
    "gradient",
    "gn_operator",
]


def sym_part(mat: np.ndarray) -> np.ndarray:
    return 0.5 * (mat + mat.T)


@dataclass
class ProblemData:
    """Instance data: the l+1 basis matrices A_0..A_l and the sorted
    prescribed eigenvalues.  Basis matrices are symmetrized on ingestion."""

    basis: np.ndarray = field(repr=False)   # (l+1, n, n)
    target_eigs: np.ndarray                 # (m,), nondecreasing

    def __post_init__(self):
        basis = np.asarray(self.basis, dtype=float)
        if basis.ndim != 3 or basis.shape[1] != basis.shape[2]:
            raise ValueError("basis must be a stack of square matrices")
        self.basis = 0.5 * (basis + basis.transpose(0, 2, 1))
        self.target_eigs = np.asarray(self.target_eigs, dtype=float)
        if self.target_eigs.ndim != 1 or self.target_eigs.shape[0] > basis.shape[1]:
            raise ValueError("need at most n prescribed eigenvalues")
        if np.any(np.diff(self.target_eigs) < 0):
            raise ValueError("prescribed eigenvalues must be nondecreasing")

    @property
    def n(self) -> int:
        return self.basis.shape[1]

    @property
    def l(self) -> int:
        return self.basis.shape[0] - 1

    @property
    def m(self) -> int:
        return self.target_eigs.shape[0]

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.n, self.l, self.m

    # wire format: {n, l, m, target_eigs, basis: [row-major flattened A_i]}
    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "l": self.l,
            "m": self.m,
            "target_eigs": self.target_eigs.tolist(),
            "basis": [a.reshape(-1).tolist() for a in self.basis],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ProblemData":
        n, l, m = int(doc["n"]), int(doc["l"]), int(doc["m"])
        basis = np.asarray(doc["basis"], dtype=float)
        if basis.shape != (l + 1, n * n):
            raise ValueError("basis does not match the declared dimensions")
        targets = np.asarray(doc["target_eigs"], dtype=float)
        if targets.shape != (m,):
            raise ValueError("target_eigs does not match the declared m")
        return cls(basis.reshape(l + 1, n, n), targets)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()))

    @classmethod
    def load(cls, path: str | Path) -> "ProblemData":
        return cls.from_dict(json.loads(Path(path).read_text()))


def assemble_matrix(p: ProblemData, c: np.ndarray) -> np.ndarray:
    """Evaluate A(c) = A_0 + sum_i c_i A_i."""
    c = np.asarray(c, dtype=float)
    if c.shape != (p.l,):
        raise ValueError(f"expected {p.l} coefficients, got shape {c.shape}")
    if p.l == 0:
        return p.basis[0].copy()
    return p.basis[0] + np.tensordot(c, p.basis[1:], axes=1)


def stacked_eigs(p: ProblemData, x: ManifoldPoint) -> np.ndarray:
    """Length-n diagonal of the block matrix diag(targets, lam)."""
    return np.concatenate([p.target_eigs, x.lam])


def _basis_dots(p: ProblemData, z: np.ndarray) -> np.ndarray:
    """Vector of tr(A_i^T z) for i = 1..l."""
    if p.l == 0:
        return np.zeros(0)
    return np.tensordot(p.basis[1:], z, axes=([1, 2], [0, 1]))


def residual(p: ProblemData, x: ManifoldPoint) -> np.ndarray:
    """H = A(c) - Q diag(targets, lam) Q^T, symmetric."""
    lb = stacked_eigs(p, x)
    return sym_part(assemble_matrix(p, x.c) - (x.Q * lb) @ x.Q.T)


def cost(p: ProblemData, x: ManifoldPoint) -> float:
    return 0.5 * float(np.linalg.norm(residual(p, x), "fro") ** 2)


def diff(p: ProblemData, x: ManifoldPoint, u: TangentVector) -> np.ndarray:
    """Differential of the residual map along a tangent direction.

    The rotation term [Q Lb Q^T, Q Omega Q^T] is evaluated in the rotated
    frame as Q ((lb_a - lb_b) * Omega_ab) Q^T, which costs two products and
    keeps the commutator structure exact.
    """
    lb = stacked_eigs(p, x)
    core = (lb[:, None] - lb[None, :]) * u.omega
    if p.l:
        out = np.tensordot(u.dc, p.basis[1:], axes=1)
    else:
        out = np.zeros((p.n, p.n))
    out = out + x.Q @ core @ x.Q.T
    if p.m < p.n:
        q_free = x.Q[:, p.m:]
        out = out - (q_free * u.dlambda) @ q_free.T
    return sym_part(out)


def adjoint(p: ProblemData, x: ManifoldPoint, z: np.ndarray) -> TangentVector:
    """Adjoint of :func:`diff` with respect to the metric.

    Components: trace pairings with the basis, the generator
    (lb_a - lb_b) * (Q^T z Q)_ab (skew-symmetrized before packing to stop
    1e-15 drift accumulating across CG iterations), and minus the trailing
    diagonal of Q^T z Q.
    """
    lb = stacked_eigs(p, x)
    w = x.Q.T @ z @ x.Q
    core = (lb[:, None] - lb[None, :]) * w
    packed = skew_to_vec(0.5 * (core - core.T))
    dlam = -np.diag(w)[p.m:].copy()
    return TangentVector(_basis_dots(p, z), packed, dlam)


def gradient(p: ProblemData, x: ManifoldPoint) -> TangentVector:
    """Riemannian gradient of the cost: the adjoint applied to the residual."""
    return adjoint(p, x, residual(p, x))


def gn_operator(p: ProblemData, x: ManifoldPoint, u: TangentVector) -> TangentVector:
    """Gauss-Newton operator: adjoint composed with the differential.
    Self-adjoint and positive semidefinite on the tangent space."""
    return adjoint(p, x, diff(p, x, u))
