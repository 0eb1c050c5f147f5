"""Centered preconditioner for the Gauss-Newton normal equation.

On ambient symmetric matrices the operator is

    M[Z] = sum_i tr(A_i^T Z) A_i
         + [S, [S, Z]] + (Q P P^T Q^T) Z (Q P P^T Q^T) + t_hat * Z,

with S = Q diag(targets, lam) Q^T and P the trailing-column selector.  In
the Q-rotated frame everything but the low-rank basis term is an
elementwise scaling by

    d_ab = (lb_a - lb_b)^2 + p_a p_b + t_hat,      p_a = 1 iff a > m,

so M = B + sum_i vec(A_i) vec(A_i)^T with B diagonal in that frame, and the
inverse follows from the Sherman-Morrison-Woodbury identity at the price of
one l x l Cholesky solve.  Kronecker factors are never materialized: every
(Q x Q) product is evaluated as a congruence Q W Q^T.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .manifold import ManifoldPoint
from .model import ProblemData, stacked_eigs, sym_part

__all__ = ["PrecondState", "build"]


@dataclass
class PrecondState:
    """State frozen at one outer iterate; apply/apply_inverse are pure."""

    q_ref: np.ndarray = field(repr=False)
    lam_bar: np.ndarray
    t_hat: float
    denom: np.ndarray = field(repr=False)        # (n, n) scaling d_ab
    basis_tail: np.ndarray = field(repr=False)   # (l, n, n), A_1..A_l
    b_inv_basis: np.ndarray = field(repr=False)  # (l, n, n), B^{-1} images
    smw_core: object = field(repr=False)         # cho_factor of I_l + gram

    def _rotate_scale(self, z: np.ndarray, invert: bool) -> np.ndarray:
        w = self.q_ref.T @ z @ self.q_ref
        w = w / self.denom if invert else w * self.denom
        return self.q_ref @ w @ self.q_ref.T

    def apply(self, z: np.ndarray) -> np.ndarray:
        """M[z]; self-adjoint and positive definite (bounded below by t_hat)."""
        out = self._rotate_scale(z, invert=False)
        if len(self.basis_tail):
            v = np.tensordot(self.basis_tail, z, axes=([1, 2], [0, 1]))
            out = out + np.tensordot(v, self.basis_tail, axes=1)
        return sym_part(out)

    def apply_inverse(self, z: np.ndarray) -> np.ndarray:
        """M^{-1}[z] via B^{-1} plus the low-rank Woodbury correction."""
        y = self._rotate_scale(z, invert=True)
        if self.smw_core is not None:
            t = np.tensordot(self.basis_tail, y, axes=([1, 2], [0, 1]))
            coeff = sla.cho_solve(self.smw_core, t)
            y = y - np.tensordot(coeff, self.b_inv_basis, axes=1)
        return sym_part(y)


def build(p: ProblemData, x: ManifoldPoint, t_hat: float = 1e-5) -> PrecondState:
    """Precompute the rotated scaling, the B^{-1} images of the basis and
    the factored l x l Woodbury core at the current iterate.

    t_hat > 0 keeps the diagonal scaling positive; the core matrix
    I + [tr(A_i^T B^{-1} A_j)] is then symmetric positive definite and the
    Cholesky factorization cannot fail on sane inputs.
    """
    if t_hat <= 0.0:
        raise ValueError("t_hat must be positive")
    n, l, m = p.dims
    lb = stacked_eigs(p, x)
    trailing = (np.arange(n) >= m).astype(float)
    denom = (lb[:, None] - lb[None, :]) ** 2 + np.outer(trailing, trailing) + t_hat

    basis_tail = p.basis[1:]
    b_inv_basis = np.empty((l, n, n))
    for i in range(l):
        w = x.Q.T @ basis_tail[i] @ x.Q
        b_inv_basis[i] = sym_part(x.Q @ (w / denom) @ x.Q.T)
    if l:
        gram = np.tensordot(basis_tail, b_inv_basis, axes=([1, 2], [1, 2]))
        core = np.eye(l) + 0.5 * (gram + gram.T)
        smw_core = sla.cho_factor(core)
    else:
        smw_core = None
    return PrecondState(q_ref=x.Q, lam_bar=lb, t_hat=float(t_hat), denom=denom,
                        basis_tail=basis_tail, b_inv_basis=b_inv_basis,
                        smw_core=smw_core)
