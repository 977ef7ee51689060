import pytest
from fastapi.testclient import TestClient
from app.main import app
from app.database.database import create_tables

create_tables()
client = TestClient(app)

TRIVIAL = {"kind": "trivial", "theta": 0.0}
DIAGONAL = {
    "kind": "triangular",
    "U": [[[1, 0], [0, 0]], [[0, 0], [1, 0]]],
    "V": [[[1, 0], [0, 0]], [[0, 0], [1, 0]]],
    "c": [0, 0],
}

def test_health_check():
    """Test health check endpoint"""
    response = client.get("/api/v1/health")
    assert response.status_code == 200
    assert response.json()["status"] == "healthy"

def test_member_endpoint():
    """Test membership of the origin and of a boundary point"""
    response = client.post("/api/v1/member", json={"point": [[0, 0], [0, 0], [0, 0]]})
    assert response.status_code == 200
    data = response.json()
    assert data["inside"] is True
    assert data["margin"] == 1.0

    response = client.post("/api/v1/member", json={"point": [[1, 0], [0, 0], [0, 0]]})
    assert response.json()["boundary"] is True

def test_member_wrong_arity():
    """Test that a point with the wrong number of coordinates is rejected"""
    response = client.post("/api/v1/member", json={"point": [[0, 0], [0, 0]]})
    assert response.status_code == 422

def test_rho_endpoint():
    """Test the gauge on a diagonal point"""
    response = client.post("/api/v1/rho", json={"point": [[0.5, 0], [0.5, 0], [0.25, 0]]})
    assert response.status_code == 200
    assert response.json()["rho"] == pytest.approx(0.5)

def test_aut_endpoint():
    """Test that the identity automorphism fixes a point"""
    point = [[0.2, 0], [0, -0.1], [0.05, 0]]
    response = client.post("/api/v1/aut", json={"point": point})
    assert response.status_code == 200
    for got, want in zip(response.json()["point"], point):
        assert got == pytest.approx(want, abs=1e-14)

def test_aut_outside_point():
    """Test that points outside the tetrablock give 422"""
    response = client.post("/api/v1/aut", json={"point": [[0.9, 0], [0.9, 0], [0, 0]]})
    assert response.status_code == 422
    assert "DomainError" in response.json()["detail"]

def test_geodesic_sample_endpoint():
    """Test sampling the trivial geodesic"""
    response = client.post("/api/v1/geodesic/sample", json={"spec": TRIVIAL, "samples": 8})
    assert response.status_code == 200
    rows = response.json()["rows"]
    assert len(rows) == 8
    for row in rows:
        assert row["value"][2] == pytest.approx(row["lam"])
        assert row["margin"] > 0

def test_leftinv_endpoint():
    """Test the Psi left inverse of the diagonal disc"""
    response = client.post("/api/v1/leftinv", json={"spec": DIAGONAL, "samples": 16})
    assert response.status_code == 200
    data = response.json()
    assert data["left_inverse"]["kind"] == "psi_family"
    assert data["residual"] <= 1e-10

def test_lift_endpoint():
    """Test lifting the trivial geodesic through the origin"""
    response = client.post("/api/v1/lift", json={"spec": TRIVIAL, "n": 0, "m": 1})
    assert response.status_code == 200
    assert response.json()["certificate"]["orders"] == [0, 1]

def test_invalid_spec():
    """Test that an out-of-range beta is rejected"""
    spec = {"kind": "nontriangular", "a": [1, 0], "b": [0, 0], "c": [0, 0], "d": [1, 0],
            "mu": [0.5, 0], "beta": 1.5}
    response = client.post("/api/v1/geodesic/sample", json={"spec": spec})
    assert response.status_code == 422

def test_verify_and_runs():
    """Test a short archived equality run and the run listing"""
    response = client.post("/api/v1/verify", json={"suite": "equality", "n": 2, "seed": 7, "archive": True})
    assert response.status_code == 200
    data = response.json()
    assert data["summary"]["n_pass"] == 2
    run_id = data["run_id"]

    response = client.get("/api/v1/runs")
    assert response.status_code == 200
    assert run_id in [run["id"] for run in response.json()]

def test_sandwich_endpoint():
    """Test the bounds for the origin and a point on the third axis"""
    response = client.post("/api/v1/sandwich", json={"w": [[0, 0], [0, 0], [0, 0]], "z": [[0, 0], [0, 0], [0.5, 0]]})
    assert response.status_code == 200
    data = response.json()
    assert data["lower"] == pytest.approx(0.5493061443340549, abs=1e-9)
    assert data["upper"] == pytest.approx(0.8813735870195430, abs=1e-12)
    assert data["notes"] == []
    assert "passed" not in data and "status" not in data

def test_sandwich_rejects_outside_points():
    """Test that a pair with a point outside the tetrablock gives 422"""
    response = client.post("/api/v1/sandwich", json={"w": [[0, 0], [0, 0], [0, 0]], "z": [[0.9, 0], [0.9, 0], [0, 0]]})
    assert response.status_code == 422
    assert "DomainError" in response.json()["detail"]

    response = client.post("/api/v1/sandwich", json={"w": [[0, 0], [0, 0]], "z": [[0, 0], [0, 0], [0, 0]]})
    assert response.status_code == 422
