"""Request/response models for the solver service."""
from __future__ import annotations

from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, Field, model_validator

from ..experiments import RunSummary
from ..model import ProblemData
from ..problems import InstanceSpec
from ..solver import SolverConfig, SolverReport


class InstanceSpecModel(BaseModel):
    kind: Literal["example1", "sturm_liouville", "random"]
    n: Optional[int] = None
    l: Optional[int] = None
    m: Optional[int] = None
    seed: int = 0
    chop_decimals: Optional[int] = None

    def to_spec(self) -> InstanceSpec:
        return InstanceSpec(kind=self.kind, n=self.n, l=self.l, m=self.m,
                            seed=self.seed, chop_decimals=self.chop_decimals)


class ProblemDataModel(BaseModel):
    """Wire form of an instance: row-major flattened basis matrices A_0..A_l
    and the sorted prescribed eigenvalues."""

    n: int
    l: int
    m: int
    target_eigs: list[float]
    basis: list[list[float]]

    def to_problem(self) -> ProblemData:
        return ProblemData.from_dict(self.model_dump())

    @classmethod
    def from_problem(cls, problem: ProblemData) -> "ProblemDataModel":
        return cls(**problem.to_dict())


class SolverOptionsModel(BaseModel):
    zeta: float = Field(default=1e-8, gt=0.0, description="gradient-norm stopping threshold")
    beta: float = Field(default=0.5, gt=0.0, lt=1.0)
    sigma: float = Field(default=1e-4, gt=0.0, lt=0.5)
    eta_max: float = Field(default=0.01, gt=0.0, lt=1.0)
    t_hat: float = Field(default=1e-5, gt=0.0)
    max_outer: int = Field(default=100_000, ge=1)
    use_preconditioner: bool = True

    def to_config(self) -> SolverConfig:
        return SolverConfig(grad_tol=self.zeta, beta=self.beta, sigma=self.sigma,
                            eta_max=self.eta_max, t_hat=self.t_hat,
                            max_outer=self.max_outer,
                            use_preconditioner=self.use_preconditioner)


class TraceRowModel(BaseModel):
    iter: int
    cost: float
    grad_norm: float
    res_norm: float
    cg_iters: int
    l_k: int
    fallback: bool


class SolveRequest(BaseModel):
    """Solve either a named instance family or an inline problem.

    Inline problems start from the eigendecomposition recipe at ``c0``
    (zero when omitted).
    """

    instance: Optional[InstanceSpecModel] = None
    problem: Optional[ProblemDataModel] = None
    c0: Optional[list[float]] = None
    solver: SolverOptionsModel = SolverOptionsModel()
    include_trace: bool = True

    @model_validator(mode="after")
    def _one_source(self):
        if (self.instance is None) == (self.problem is None):
            raise ValueError("provide exactly one of 'instance' or 'problem'")
        if self.c0 is not None and self.problem is None:
            raise ValueError("'c0' only applies to inline problems")
        return self


class SolveResponse(BaseModel):
    status: str
    iterations: int
    nf: int
    ncg_total: int
    ncg_per_outer: float
    res: float
    grad: float
    wall_seconds: float
    c: list[float]
    err_c: Optional[float] = None
    trace: Optional[list[TraceRowModel]] = None

    @classmethod
    def from_report(cls, report: SolverReport, wall_seconds: float,
                    err_c: Optional[float], include_trace: bool) -> "SolveResponse":
        trace = None
        if include_trace:
            trace = [TraceRowModel(iter=k, cost=r.cost, grad_norm=r.grad_norm,
                                   res_norm=r.residual_norm, cg_iters=r.cg_iters,
                                   l_k=r.step_exponent, fallback=r.fallback)
                     for k, r in enumerate(report.trace)]
        return cls(status=report.status, iterations=report.iterations,
                   nf=report.nf, ncg_total=report.ncg_total,
                   ncg_per_outer=report.ncg_per_outer,
                   res=report.final_residual_norm,
                   grad=report.final_grad_norm,
                   wall_seconds=wall_seconds,
                   c=report.final_point.c.tolist(),
                   err_c=err_c, trace=trace)


class SweepRowRequest(BaseModel):
    instance: InstanceSpecModel
    repeats: int = Field(default=1, ge=1)


class SweepRequest(BaseModel):
    rows: list[SweepRowRequest] = Field(min_length=1)
    solver: SolverOptionsModel = SolverOptionsModel()


class RunSummaryModel(BaseModel):
    ct: float
    it: float
    nf: float
    ncg_total: float
    ncg_per_outer: float
    res: float
    grad: float
    err_c: Optional[float]
    runs: int
    failures: int
    statuses: list[str]

    @classmethod
    def from_summary(cls, summary: RunSummary) -> "RunSummaryModel":
        return cls(**summary.to_dict())


class SweepResponse(BaseModel):
    rows: list[RunSummaryModel]


class SurjectivityRequest(BaseModel):
    instance: Optional[InstanceSpecModel] = None
    problem: Optional[ProblemDataModel] = None
    c0: Optional[list[float]] = None
    at_solution: bool = False
    solver: SolverOptionsModel = SolverOptionsModel()
    rank_tol: float = Field(default=1e-10, gt=0.0)
    max_n: int = Field(default=64, ge=1)

    @model_validator(mode="after")
    def _one_source(self):
        if (self.instance is None) == (self.problem is None):
            raise ValueError("provide exactly one of 'instance' or 'problem'")
        if self.c0 is not None and self.problem is None:
            raise ValueError("'c0' only applies to inline problems")
        return self


class SurjectivityResponse(BaseModel):
    matrix_cols: int
    numeric_rank: int
    smallest_singular_value: float
    surjective: bool


class HealthResponse(BaseModel):
    status: str
    version: str


def as_float_array(values: list[float]) -> np.ndarray:
    return np.asarray(values, dtype=float)
