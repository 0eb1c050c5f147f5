import json

import numpy as np
import pytest

from lsiep.experiments import RunConfig, relative_coefficient_error, run, run_once
from lsiep.problems import InstanceSpec
from lsiep.solver import SolverConfig


def quick_cfg(**kwargs):
    return SolverConfig(grad_tol=kwargs.pop("grad_tol", 1e-8), **kwargs)


class TestRunOnce:
    def test_recovers_known_coefficients(self):
        spec = InstanceSpec(kind="random", n=8, l=3, m=6, seed=42)
        result = run_once(spec, quick_cfg())
        assert result.status == "converged"
        assert result.err_c is not None and result.err_c <= 1e-8
        assert result.nf >= result.iterations + 1


class TestRun:
    def test_single_repeat_equals_raw_run(self):
        spec = InstanceSpec(kind="random", n=8, l=3, m=6, seed=42)
        raw = run_once(spec, quick_cfg())
        summary = run(RunConfig(instance=spec, solver=quick_cfg(), repeats=1))
        assert summary.it == raw.iterations
        assert summary.nf == raw.nf
        assert summary.ncg_total == raw.ncg_total
        assert summary.res == raw.res
        assert summary.err_c == raw.err_c
        assert summary.runs == 1 and summary.failures == 0

    def test_repeats_advance_seed(self):
        spec = InstanceSpec(kind="random", n=8, l=3, m=6, seed=100)
        summary = run(RunConfig(instance=spec, solver=quick_cfg(), repeats=3))
        singles = [run_once(InstanceSpec(kind="random", n=8, l=3, m=6, seed=100 + i),
                            quick_cfg()) for i in range(3)]
        assert summary.err_c == pytest.approx(np.mean([s.err_c for s in singles]))
        assert summary.it == pytest.approx(np.mean([s.iterations for s in singles]))
        assert summary.statuses == ["converged"] * 3

    def test_all_failures_raise(self):
        spec = InstanceSpec(kind="random", n=8, l=3, m=6, seed=42)
        starved = SolverConfig(grad_tol=1e-14, max_outer=1)
        with pytest.raises(RuntimeError):
            run(RunConfig(instance=spec, solver=starved, repeats=2))

    def test_partial_failures_excluded_from_averages(self, monkeypatch):
        import lsiep.experiments as experiments
        spec = InstanceSpec(kind="random", n=8, l=3, m=6, seed=0)
        good = run_once(spec, quick_cfg())
        bad = run_once(spec, SolverConfig(grad_tol=1e-14, max_outer=1))
        outcomes = iter([good, bad, good])
        monkeypatch.setattr(experiments, "run_once", lambda *a, **k: next(outcomes))
        summary = experiments.run(RunConfig(instance=spec, solver=quick_cfg(),
                                            repeats=3))
        assert summary.runs == 3
        assert summary.failures == 1
        assert summary.statuses == ["converged", "max_outer", "converged"]
        # the failed repeat does not pollute the means
        assert summary.it == good.iterations
        assert summary.err_c == good.err_c

    def test_repeats_validation(self):
        spec = InstanceSpec(kind="example1")
        with pytest.raises(ValueError):
            RunConfig(instance=spec, solver=quick_cfg(), repeats=0)


class TestOutputs:
    def test_summary_and_traces_written(self, tmp_path):
        spec = InstanceSpec(kind="random", n=8, l=3, m=6, seed=7)
        summary_path = tmp_path / "summary.json"
        trace_path = tmp_path / "trace.csv"
        run(RunConfig(instance=spec, solver=quick_cfg(), repeats=2,
                      summary_path=summary_path, trace_path=trace_path))
        traces = sorted(tmp_path.glob("trace_run*.csv"))
        assert [t.name for t in traces] == ["trace_run00.csv", "trace_run01.csv"]
        header = traces[0].read_text().splitlines()[0]
        assert header == "iter,cost,grad_norm,res_norm,cg_iters,l_k,fallback"
        doc = json.loads(summary_path.read_text())
        assert doc["runs"] == 2

    def test_single_trace_keeps_plain_name(self, tmp_path):
        spec = InstanceSpec(kind="random", n=8, l=3, m=6, seed=7)
        trace_path = tmp_path / "trace.csv"
        run(RunConfig(instance=spec, solver=quick_cfg(), repeats=1,
                      trace_path=trace_path))
        assert trace_path.exists()

    def test_summary_json_round_trips(self, tmp_path):
        spec = InstanceSpec(kind="random", n=8, l=3, m=6, seed=7)
        summary_path = tmp_path / "summary.json"
        run(RunConfig(instance=spec, solver=quick_cfg(), repeats=1,
                      summary_path=summary_path))
        text = summary_path.read_text()
        assert json.dumps(json.loads(text)) == text


class TestErrorMetric:
    def test_relative_max_norm(self):
        c_true = np.array([2.0, -4.0])
        c = np.array([2.5, -4.0])
        assert relative_coefficient_error(c, c_true) == pytest.approx(0.125)
