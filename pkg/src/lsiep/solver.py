"""Riemannian inexact Gauss-Newton driver.

Each outer iteration solves the normal equation on the tangent space by
truncated CG (optionally through the centered preconditioner), accepts the
candidate only if the inexact-Newton conditions hold on the original
equation, falls back to steepest descent otherwise, and globalizes with
Armijo backtracking through the retraction.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import cg
from .manifold import ManifoldPoint, TangentVector, RetractionError, inner, norm, retract
from .model import ProblemData, adjoint, cost, diff, gn_operator, gradient, residual
from .preconditioner import PrecondState, build as build_preconditioner

__all__ = [
    "SolverConfig",
    "IterationRecord",
    "SolverReport",
    "LineSearchError",
    "compute_direction",
    "line_search",
    "solve",
]

# Backtracking gives up after this many halvings; with a descent direction
# the Armijo test must succeed long before.
MAX_BACKTRACKS = 60

# Floor for the tightening retries of the inner tolerance; below this the
# truncation conditions are declared unattainable.
_MIN_REL_TOL = 1e-14


class LineSearchError(RuntimeError):
    """No Armijo-acceptable step within MAX_BACKTRACKS halvings."""


@dataclass
class SolverConfig:
    grad_tol: float = 1e-8          # stopping threshold on the gradient norm
    beta: float = 0.5               # backtracking factor
    sigma: float = 1e-4             # Armijo slope fraction
    eta_max: float = 0.01           # forcing-term cap
    max_outer: int = 100_000
    use_preconditioner: bool = True
    t_hat: float = 1e-5
    # None derives the inner solve per outer iteration: the iteration cap is
    # n^3 and the relative tolerance is the forcing term min(eta_max, |grad|).
    cg: Optional[cg.CgConfig] = None

    def __post_init__(self):
        if not 0.0 < self.beta < 1.0:
            raise ValueError("beta must lie in (0, 1)")
        if not 0.0 < self.sigma < 0.5:
            raise ValueError("sigma must lie in (0, 1/2)")
        if not 0.0 < self.eta_max < 1.0:
            raise ValueError("eta_max must lie in (0, 1)")
        if self.grad_tol <= 0.0:
            raise ValueError("grad_tol must be positive")
        if self.max_outer < 1:
            raise ValueError("max_outer must be >= 1")
        if self.t_hat <= 0.0:
            raise ValueError("t_hat must be positive")


@dataclass
class IterationRecord:
    cost: float
    grad_norm: float
    residual_norm: float
    cg_iters: int
    step_exponent: int
    fallback: bool


@dataclass
class SolverReport:
    status: str                     # converged | max_outer | line_search_failure
    iterations: int
    trace: list[IterationRecord]
    final_point: ManifoldPoint = field(repr=False)

    @property
    def final_cost(self) -> float:
        return self.trace[-1].cost

    @property
    def final_grad_norm(self) -> float:
        return self.trace[-1].grad_norm

    @property
    def final_residual_norm(self) -> float:
        return self.trace[-1].residual_norm

    @property
    def nf(self) -> int:
        """Cost evaluations: one at the start plus one per line-search trial."""
        return 1 + self.iterations + sum(r.step_exponent for r in self.trace)

    @property
    def ncg_total(self) -> int:
        return sum(r.cg_iters for r in self.trace)

    @property
    def ncg_per_outer(self) -> float:
        return self.ncg_total / self.iterations if self.iterations else 0.0

    def grad_norms(self) -> np.ndarray:
        return np.array([r.grad_norm for r in self.trace])

    def to_dict(self, include_point: bool = True) -> dict:
        doc = {
            "status": self.status,
            "iterations": self.iterations,
            "nf": self.nf,
            "ncg_total": self.ncg_total,
            "ncg_per_outer": self.ncg_per_outer,
            "trace": [
                {"iter": k, "cost": r.cost, "grad_norm": r.grad_norm,
                 "res_norm": r.residual_norm, "cg_iters": r.cg_iters,
                 "l_k": r.step_exponent, "fallback": r.fallback}
                for k, r in enumerate(self.trace)
            ],
        }
        if include_point:
            x = self.final_point
            doc["final_point"] = {"c": x.c.tolist(), "Q": x.Q.reshape(-1).tolist(),
                                  "lam": x.lam.tolist()}
        return doc

    def save_json(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()))

    def trace_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["iter", "cost", "grad_norm", "res_norm",
                         "cg_iters", "l_k", "fallback"])
        for k, r in enumerate(self.trace):
            writer.writerow([k, repr(r.cost), repr(r.grad_norm),
                             repr(r.residual_norm), r.cg_iters,
                             r.step_exponent, int(r.fallback)])
        return buf.getvalue()

    def save_trace_csv(self, path: str | Path) -> None:
        Path(path).write_text(self.trace_csv())


def compute_direction(p: ProblemData,
                      x: ManifoldPoint,
                      grad: TangentVector,
                      prec: Optional[PrecondState],
                      cfg: SolverConfig,
                      res: Optional[np.ndarray] = None) -> tuple[TangentVector, int, bool]:
    """Produce the search direction for one outer iteration.

    A CG candidate is accepted only if, on the unpreconditioned normal
    equation, both the residual condition

        |GN[dx] + grad| <= eta * |grad|,    eta = min(eta_max, |grad|),

    and the slope condition <grad, dx> <= -eta <dx, dx> hold.  A residual-
    condition failure is an accuracy problem, so the inner solve is retried
    with a tightened tolerance while budget remains; a slope-condition
    failure at a converged candidate signals a genuinely flat direction that
    no accuracy can fix.  When the conditions are unattainable the steepest
    descent direction -grad is returned with the fallback flag set.
    """
    metric = lambda u, v: inner(x, u, v)
    grad_norm = norm(x, grad)
    eta = min(cfg.eta_max, grad_norm)

    if prec is not None:
        if res is None:
            res = residual(p, x)
        apply_op = lambda u: adjoint(p, x, prec.apply_inverse(diff(p, x, u)))
        rhs = -1.0 * adjoint(p, x, prec.apply_inverse(res))
    else:
        apply_op = lambda u: gn_operator(p, x, u)
        rhs = -1.0 * grad

    if cfg.cg is not None:
        budget, rel, abort = cfg.cg.max_iters, cfg.cg.rel_tol, \
            cfg.cg.abort_on_nonpositive_curvature
    else:
        budget, rel, abort = p.n ** 3, eta, True

    spent = 0
    while spent < budget:
        out = cg.solve(apply_op, rhs, metric, cg.CgConfig(
            max_iters=budget - spent, rel_tol=rel,
            abort_on_nonpositive_curvature=abort))
        spent += max(out.iterations, 1)
        cand = out.solution
        residual_ok = norm(x, gn_operator(p, x, cand) + grad) <= eta * grad_norm
        slope_ok = metric(grad, cand) <= -eta * metric(cand, cand)
        if residual_ok and slope_ok and norm(x, cand) > 0.0:
            return cand, spent, False
        if not slope_ok or out.status != cg.CONVERGED or rel <= _MIN_REL_TOL:
            break
        rel = max(1e-2 * rel, _MIN_REL_TOL)
    return -1.0 * grad, spent, True


def line_search(p: ProblemData,
                x: ManifoldPoint,
                direction: TangentVector,
                grad: TangentVector,
                cfg: SolverConfig,
                cost_x: Optional[float] = None) -> tuple[int, ManifoldPoint, float, int]:
    """Armijo backtracking: find the smallest exponent with

        h(retract(x, beta^l * dx)) - h(x) <= sigma * beta^l * <grad, dx>.

    Returns (exponent, next point, next cost, number of cost evaluations).
    A failed retraction counts as a failed trial and halves the step.
    """
    slope = inner(x, grad, direction)
    if slope >= 0.0:
        raise ValueError("line search requires a descent direction")
    if cost_x is None:
        cost_x = cost(p, x)
    evals = 0
    for exponent in range(MAX_BACKTRACKS + 1):
        step = cfg.beta ** exponent
        try:
            x_next = retract(x, direction, step)
        except RetractionError:
            continue
        cost_next = cost(p, x_next)
        evals += 1
        if cost_next - cost_x <= cfg.sigma * step * slope:
            return exponent, x_next, cost_next, evals
    raise LineSearchError(
        f"no Armijo step within {MAX_BACKTRACKS} halvings (slope {slope:.3e})")


def solve(p: ProblemData, x0: ManifoldPoint, cfg: SolverConfig) -> SolverReport:
    """Run the Gauss-Newton iteration from x0 until |grad| < grad_tol or the
    outer budget is exhausted.

    The trace has one record per iterate, the initial point included; record
    k >= 1 stores the inner iteration count, step exponent and fallback flag
    of the step that produced iterate k.  Cost decreases strictly along the
    trace.
    """
    x = x0
    res = residual(p, x)
    h = 0.5 * float(np.linalg.norm(res, "fro") ** 2)
    grad = adjoint(p, x, res)
    grad_norm = norm(x, grad)
    trace = [IterationRecord(h, grad_norm, float(np.linalg.norm(res, "fro")), 0, 0, False)]

    status = "max_outer"
    iterations = 0
    for _ in range(cfg.max_outer):
        if grad_norm < cfg.grad_tol:
            status = "converged"
            break
        prec = build_preconditioner(p, x, cfg.t_hat) if cfg.use_preconditioner else None
        direction, cg_iters, fallback = compute_direction(p, x, grad, prec, cfg, res)
        try:
            exponent, x, h, _ = line_search(p, x, direction, grad, cfg, cost_x=h)
        except LineSearchError:
            status = "line_search_failure"
            break
        res = residual(p, x)
        grad = adjoint(p, x, res)
        grad_norm = norm(x, grad)
        iterations += 1
        trace.append(IterationRecord(h, grad_norm, float(np.linalg.norm(res, "fro")),
                                     cg_iters, exponent, fallback))
    else:
        if grad_norm < cfg.grad_tol:
            status = "converged"

    return SolverReport(status=status, iterations=iterations, trace=trace,
                        final_point=x)
