"""Experiment harness: repeated seeded solves with table-style statistics.

A run executes ``repeats`` solves of one instance family, averages the
wall-clock time, outer iterations, cost evaluations, inner CG iterations and
final residuals, and (when requested) writes a JSON summary plus one CSV
convergence trace per repeat.
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .problems import InstanceSpec, build_instance
from .solver import SolverConfig, SolverReport, solve

__all__ = ["RunConfig", "RunResult", "RunSummary", "relative_coefficient_error", "run"]


def relative_coefficient_error(c: np.ndarray, c_true: np.ndarray) -> float:
    """Max-norm recovery error |c - c_true|_inf / |c_true|_inf."""
    return float(np.max(np.abs(c - c_true)) / np.max(np.abs(c_true)))


@dataclass
class RunConfig:
    instance: InstanceSpec
    solver: SolverConfig
    repeats: int = 1
    summary_path: Optional[str | Path] = None
    trace_path: Optional[str | Path] = None

    def __post_init__(self):
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")


@dataclass
class RunResult:
    """Statistics of a single solve."""

    status: str
    wall_seconds: float
    iterations: int
    nf: int
    ncg_total: int
    ncg_per_outer: float
    res: float
    grad: float
    err_c: Optional[float]
    report: SolverReport

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "wall_seconds": self.wall_seconds,
            "iterations": self.iterations,
            "nf": self.nf,
            "ncg_total": self.ncg_total,
            "ncg_per_outer": self.ncg_per_outer,
            "res": self.res,
            "grad": self.grad,
            "err_c": self.err_c,
        }


@dataclass
class RunSummary:
    """Means over the successful repeats of one run configuration."""

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

    def to_dict(self) -> dict:
        return {
            "ct": self.ct,
            "it": self.it,
            "nf": self.nf,
            "ncg_total": self.ncg_total,
            "ncg_per_outer": self.ncg_per_outer,
            "res": self.res,
            "grad": self.grad,
            "err_c": self.err_c,
            "runs": self.runs,
            "failures": self.failures,
            "statuses": self.statuses,
        }


def run_once(spec: InstanceSpec, solver_cfg: SolverConfig) -> RunResult:
    instance = build_instance(spec)
    start = time.perf_counter()
    report = solve(instance.problem, instance.x0, solver_cfg)
    wall = time.perf_counter() - start
    err_c = None
    if instance.c_true is not None:
        err_c = relative_coefficient_error(report.final_point.c, instance.c_true)
    return RunResult(
        status=report.status,
        wall_seconds=wall,
        iterations=report.iterations,
        nf=report.nf,
        ncg_total=report.ncg_total,
        ncg_per_outer=report.ncg_per_outer,
        res=report.final_residual_norm,
        grad=report.final_grad_norm,
        err_c=err_c,
        report=report,
    )


def _trace_path_for(base: Path, index: int, repeats: int) -> Path:
    if repeats == 1:
        return base
    return base.with_name(f"{base.stem}_run{index:02d}{base.suffix}")


def run(cfg: RunConfig) -> RunSummary:
    """Execute the repeats and aggregate.

    Random instances advance the seed by one per repeat; the deterministic
    kinds repeat identically (so repeats = 1 reproduces a single solve
    exactly).  Failed repeats keep their status in the summary but are
    excluded from the averages; if every repeat fails a RuntimeError is
    raised.
    """
    results: list[RunResult] = []
    for i in range(cfg.repeats):
        spec = cfg.instance
        if spec.kind == "random" and cfg.repeats > 1:
            spec = replace(spec, seed=spec.seed + i)
        results.append(run_once(spec, cfg.solver))
        if cfg.trace_path is not None:
            path = _trace_path_for(Path(cfg.trace_path), i, cfg.repeats)
            results[-1].report.save_trace_csv(path)

    good = [r for r in results if r.status == "converged"]
    if not good:
        raise RuntimeError(
            "all repeats failed: " + ", ".join(r.status for r in results))

    err_values = [r.err_c for r in good if r.err_c is not None]
    summary = RunSummary(
        ct=float(np.mean([r.wall_seconds for r in good])),
        it=float(np.mean([r.iterations for r in good])),
        nf=float(np.mean([r.nf for r in good])),
        ncg_total=float(np.mean([r.ncg_total for r in good])),
        ncg_per_outer=float(np.mean([r.ncg_per_outer for r in good])),
        res=float(np.mean([r.res for r in good])),
        grad=float(np.mean([r.grad for r in good])),
        err_c=float(np.mean(err_values)) if err_values else None,
        runs=len(results),
        failures=len(results) - len(good),
        statuses=[r.status for r in results],
    )
    if cfg.summary_path is not None:
        Path(cfg.summary_path).write_text(json.dumps(summary.to_dict()))
    return summary
