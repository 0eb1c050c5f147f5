"""Conjugate gradients for self-adjoint positive-semidefinite operators on an
abstract inner-product space.

The solver is duck-typed: vectors only need +, -, scalar * and the supplied
inner product, so it runs unchanged on numpy arrays and on tangent vectors.
The iteration always starts from zero, and stopping uses the relative
reduction of the (preconditioned) residual norm; problem-specific truncation
rules belong to the caller.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Optional

import numpy as np

__all__ = ["CgConfig", "CgOutcome", "solve"]

CONVERGED = "converged"
MAX_ITERS = "max_iters"
NONPOSITIVE_CURVATURE = "nonpositive_curvature"


@dataclass
class CgConfig:
    max_iters: int
    rel_tol: float
    abort_on_nonpositive_curvature: bool = True

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not 0.0 < self.rel_tol < 1.0:
            raise ValueError("rel_tol must lie in (0, 1)")


@dataclass
class CgOutcome:
    solution: Any
    iterations: int
    residual_norm: float
    status: str


def solve(apply_op: Callable[[Any], Any],
          rhs: Any,
          inner: Callable[[Any, Any], float],
          cfg: CgConfig,
          apply_prec: Optional[Callable[[Any], Any]] = None) -> CgOutcome:
    """Run (preconditioned) CG from the zero vector.

    ``apply_op`` must be self-adjoint positive semidefinite with respect to
    ``inner``; ``apply_prec``, when given, must be self-adjoint positive
    definite.  On nonpositive curvature the current iterate is returned with
    status "nonpositive_curvature" (or a FloatingPointError is raised when
    the abort flag is off, since plain CG cannot continue through it).
    """
    x = 0.0 * rhs
    r = rhs
    z = apply_prec(r) if apply_prec is not None else r
    rz = inner(r, z)
    if not np.isfinite(rz):
        raise FloatingPointError("preconditioned residual product is not finite")
    if rz < 0.0:
        # rounding-level negativity means the rhs is zero for all practical
        # purposes; anything larger exposes an indefinite preconditioner
        if abs(rz) > 1e-10 * abs(inner(r, r)):
            raise FloatingPointError("preconditioner is not positive definite")
        rz = 0.0
    norm0 = np.sqrt(rz)
    if norm0 == 0.0:
        return CgOutcome(x, 0, 0.0, CONVERGED)
    d = z
    for k in range(cfg.max_iters):
        op_d = apply_op(d)
        d_op_d = inner(d, op_d)
        if not np.isfinite(d_op_d):
            raise FloatingPointError("operator application produced non-finite values")
        if d_op_d <= 0.0:
            if cfg.abort_on_nonpositive_curvature:
                return CgOutcome(x, k, float(np.sqrt(rz)), NONPOSITIVE_CURVATURE)
            raise FloatingPointError("nonpositive curvature encountered")
        alpha = rz / d_op_d
        x = x + alpha * d
        r = r - alpha * op_d
        z = apply_prec(r) if apply_prec is not None else r
        rz_new = inner(r, z)
        if not np.isfinite(rz_new):
            raise FloatingPointError("residual inner product became non-finite")
        res_norm = np.sqrt(max(rz_new, 0.0))
        if res_norm <= cfg.rel_tol * norm0:
            return CgOutcome(x, k + 1, float(res_norm), CONVERGED)
        d = z + (rz_new / rz) * d
        rz = rz_new
    return CgOutcome(x, cfg.max_iters, float(np.sqrt(max(rz, 0.0))), MAX_ITERS)
