"""FastAPI service wrapping the solver library.

Endpoints are stateless: each request carries an instance family (or an
inline problem) plus solver options, and the response carries the solved
statistics.  The CLI talks to this app in-process by default.
"""
from __future__ import annotations

import time

import numpy as np
from fastapi import FastAPI, HTTPException

from .. import __version__
from ..experiments import RunConfig, relative_coefficient_error, run
from ..diagnostics import surjectivity_check
from ..problems import GeneratedInstance, build_instance, initial_point
from ..solver import solve
from .schemas import (
    HealthResponse,
    RunSummaryModel,
    SolveRequest,
    SolveResponse,
    SurjectivityRequest,
    SurjectivityResponse,
    SweepRequest,
    SweepResponse,
    as_float_array,
)

app = FastAPI(
    title="lsiep",
    description="Least-squares inverse eigenvalue solver "
                "(preconditioned Riemannian Gauss-Newton)",
    version=__version__,
)


def _materialize(instance_model, problem_model, c0) -> GeneratedInstance:
    if instance_model is not None:
        try:
            return build_instance(instance_model.to_spec())
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
    try:
        problem = problem_model.to_problem()
        start = np.zeros(problem.l) if c0 is None else as_float_array(c0)
        return GeneratedInstance(problem, initial_point(problem, start))
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc))


@app.get("/health", response_model=HealthResponse)
def health() -> HealthResponse:
    return HealthResponse(status="ok", version=__version__)


@app.post("/solve", response_model=SolveResponse)
def solve_endpoint(request: SolveRequest) -> SolveResponse:
    instance = _materialize(request.instance, request.problem, request.c0)
    start = time.perf_counter()
    report = solve(instance.problem, instance.x0, request.solver.to_config())
    wall = time.perf_counter() - start
    err_c = None
    if instance.c_true is not None:
        err_c = relative_coefficient_error(report.final_point.c, instance.c_true)
    return SolveResponse.from_report(report, wall, err_c, request.include_trace)


@app.post("/sweep", response_model=SweepResponse)
def sweep_endpoint(request: SweepRequest) -> SweepResponse:
    rows = []
    solver_cfg = request.solver.to_config()
    for row in request.rows:
        try:
            spec = row.instance.to_spec()
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        try:
            summary = run(RunConfig(instance=spec, solver=solver_cfg,
                                    repeats=row.repeats))
        except RuntimeError as exc:
            raise HTTPException(status_code=500, detail=str(exc))
        rows.append(RunSummaryModel.from_summary(summary))
    return SweepResponse(rows=rows)


@app.post("/surjectivity", response_model=SurjectivityResponse)
def surjectivity_endpoint(request: SurjectivityRequest) -> SurjectivityResponse:
    instance = _materialize(request.instance, request.problem, request.c0)
    point = instance.x0
    if request.at_solution:
        report = solve(instance.problem, point, request.solver.to_config())
        point = report.final_point
    try:
        result = surjectivity_check(instance.problem, point,
                                    rank_tol=request.rank_tol,
                                    max_n=request.max_n)
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc))
    return SurjectivityResponse(**result.to_dict())
