import numpy as np
import pytest
from fastapi.testclient import TestClient

from lsiep.problems import make_random
from lsiep.service import app


@pytest.fixture(scope="module")
def client():
    with TestClient(app) as c:
        yield c


RANDOM_INSTANCE = {"kind": "random", "n": 8, "l": 3, "m": 6, "seed": 42}


class TestHealth:
    def test_health(self, client):
        doc = client.get("/health").json()
        assert doc["status"] == "ok"
        assert "version" in doc


class TestSolveEndpoint:
    def test_named_instance(self, client):
        response = client.post("/solve", json={
            "instance": RANDOM_INSTANCE,
            "solver": {"zeta": 1e-8},
        })
        assert response.status_code == 200
        doc = response.json()
        assert doc["status"] == "converged"
        assert doc["err_c"] <= 1e-8
        assert len(doc["c"]) == 3
        assert len(doc["trace"]) == doc["iterations"] + 1
        row = doc["trace"][0]
        assert set(row) == {"iter", "cost", "grad_norm", "res_norm",
                            "cg_iters", "l_k", "fallback"}

    def test_trace_can_be_omitted(self, client):
        response = client.post("/solve", json={
            "instance": RANDOM_INSTANCE,
            "include_trace": False,
        })
        assert response.json()["trace"] is None

    def test_inline_problem(self, client):
        inst = make_random(6, 2, 4, seed=5)
        response = client.post("/solve", json={
            "problem": inst.problem.to_dict(),
            "c0": inst.x0.c.tolist(),
            "solver": {"zeta": 1e-8},
        })
        assert response.status_code == 200
        doc = response.json()
        assert doc["status"] == "converged"
        # inline problems have no ground truth attached
        assert doc["err_c"] is None
        np.testing.assert_allclose(doc["c"], inst.c_true, atol=1e-7)

    def test_requires_exactly_one_source(self, client):
        assert client.post("/solve", json={}).status_code == 422
        inst = make_random(5, 2, 3, seed=1)
        both = {"instance": RANDOM_INSTANCE, "problem": inst.problem.to_dict()}
        assert client.post("/solve", json=both).status_code == 422

    def test_invalid_spec_rejected(self, client):
        response = client.post("/solve", json={
            "instance": {"kind": "sturm_liouville", "l": 4},
        })
        assert response.status_code == 422

    def test_solver_options_validated(self, client):
        response = client.post("/solve", json={
            "instance": RANDOM_INSTANCE,
            "solver": {"beta": 1.5},
        })
        assert response.status_code == 422


class TestSweepEndpoint:
    def test_rows_with_repeats(self, client):
        response = client.post("/sweep", json={
            "rows": [
                {"instance": {"kind": "random", "n": 8, "l": 3, "m": 6, "seed": 100},
                 "repeats": 2},
                {"instance": {"kind": "sturm_liouville", "n": 8, "l": 4}},
            ],
            "solver": {"zeta": 1e-8},
        })
        assert response.status_code == 200
        rows = response.json()["rows"]
        assert len(rows) == 2
        assert rows[0]["runs"] == 2
        assert rows[0]["failures"] == 0
        assert rows[0]["err_c"] <= 1e-7
        assert rows[1]["statuses"] == ["converged"]

    def test_empty_rows_rejected(self, client):
        assert client.post("/sweep", json={"rows": []}).status_code == 422

    def test_all_failed_row_maps_to_500(self, client):
        response = client.post("/sweep", json={
            "rows": [{"instance": RANDOM_INSTANCE}],
            "solver": {"zeta": 1e-14, "max_outer": 1},
        })
        assert response.status_code == 500


class TestSurjectivityEndpoint:
    def test_at_start_point(self, client):
        response = client.post("/surjectivity", json={
            "instance": {"kind": "random", "n": 6, "l": 2, "m": 4, "seed": 3},
        })
        assert response.status_code == 200
        doc = response.json()
        assert doc["matrix_cols"] == 2 + 15 + 2
        assert doc["numeric_rank"] <= doc["matrix_cols"]
        assert isinstance(doc["surjective"], bool)

    def test_at_solution(self, client):
        response = client.post("/surjectivity", json={
            "instance": {"kind": "random", "n": 6, "l": 2, "m": 4, "seed": 3},
            "at_solution": True,
            "solver": {"zeta": 1e-8},
        })
        assert response.status_code == 200

    def test_size_guard_maps_to_422(self, client):
        response = client.post("/surjectivity", json={
            "instance": {"kind": "random", "n": 10, "l": 2, "m": 4, "seed": 3},
            "max_n": 5,
        })
        assert response.status_code == 422
