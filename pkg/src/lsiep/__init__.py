"""Least-squares inverse eigenvalue problems on R^l x O(n) x D(n-m),
solved by a preconditioned Riemannian inexact Gauss-Newton method."""

__version__ = "0.1.0"

from .manifold import (
    ManifoldPoint,
    RetractionError,
    TangentVector,
    inner,
    norm,
    retract,
)
from .model import (
    ProblemData,
    assemble_matrix,
    adjoint,
    cost,
    diff,
    gn_operator,
    gradient,
    residual,
)
from .cg import CgConfig, CgOutcome
from .preconditioner import PrecondState, build as build_preconditioner
from .solver import LineSearchError, SolverConfig, SolverReport, solve
from .diagnostics import SurjectivityReport, surjectivity_check
from .problems import (
    GeneratedInstance,
    InstanceSpec,
    build_instance,
    initial_point,
    make_example1,
    make_random,
    make_sturm_liouville,
)
from .experiments import RunConfig, RunSummary, run

__all__ = [
    "__version__",
    "ManifoldPoint",
    "TangentVector",
    "RetractionError",
    "inner",
    "norm",
    "retract",
    "ProblemData",
    "assemble_matrix",
    "adjoint",
    "cost",
    "diff",
    "gn_operator",
    "gradient",
    "residual",
    "CgConfig",
    "CgOutcome",
    "PrecondState",
    "build_preconditioner",
    "LineSearchError",
    "SolverConfig",
    "SolverReport",
    "solve",
    "SurjectivityReport",
    "surjectivity_check",
    "GeneratedInstance",
    "InstanceSpec",
    "build_instance",
    "initial_point",
    "make_example1",
    "make_random",
    "make_sturm_liouville",
    "RunConfig",
    "RunSummary",
    "run",
]
