"""
Tests for Martinet Engine - HTTP endpoints
"""

import metrics
import pytest
from fastapi.testclient import TestClient
from main import app
from schemas import OMEGA0_EXAMPLE, OMEGA1_EXAMPLE

client = TestClient(app)

PXYZ = ["p1", "x", "y", "z"]


@pytest.fixture(autouse=True)
def fresh_metrics(monkeypatch):
    """Reset counters and ignore MARTINET_SEED for each test."""
    monkeypatch.delenv("MARTINET_SEED", raising=False)
    metrics.reset()
    yield
    metrics.reset()


class TestHealth:
    """Tests for /health and /metrics."""

    def test_health(self):
        """Health check reports the service."""
        response = client.get("/health")
        assert response.status_code == 200
        assert response.json()["status"] == "healthy"
        assert response.json()["service"] == "martinet"
        assert response.json()["schema_available"] is True
        assert response.json()["examples_available"] is True

    def test_metrics_count_analyses(self):
        """Analyses and verdicts are counted; /metrics itself is not."""
        client.post(
            "/equiv", json={"chart": PXYZ, "jet_order": 6, "form0": OMEGA0_EXAMPLE, "form1": OMEGA1_EXAMPLE}
        )
        data = client.get("/metrics").json()
        assert data["requests_total"] == 1
        assert data["analyses_total"] == 1
        assert data["verdicts"] == {"not_equivalent": 1}
        assert data["analyses"] == {"equiv": 1}
        assert set(data["engine_seconds"]) == {"equiv"}
        assert data["last_request_at"] is not None

    def test_rejected_analyses_are_not_counted(self):
        """Only successful analyses reach the counters."""
        client.post("/invariants", json={"chart": PXYZ, "form": "w*dx^dy"})
        data = client.get("/metrics").json()
        assert data["requests_total"] == 1
        assert data["analyses_total"] == 0


class TestInvariants:
    """Tests for POST /invariants."""

    def test_report(self):
        """A valid form returns the invariant record."""
        response = client.post("/invariants", json={"chart": PXYZ, "jet_order": 6, "form": OMEGA0_EXAMPLE})
        assert response.status_code == 200
        body = response.json()
        assert body["success"] is True
        assert body["error"] is None
        assert body["data"]["regime"] == "structurally_smooth"
        assert body["data"]["kernel_basis"] == [["0", "0", "1", "0"], ["0", "0", "0", "1"]]
        assert body["data"]["sigma22_incidence"] == 2

    def test_unknown_variable(self):
        """Input errors return 400 with the error code."""
        response = client.post("/invariants", json={"chart": PXYZ, "form": "w*dx^dy"})
        assert response.status_code == 400
        body = response.json()
        assert body["success"] is False
        assert body["error"]["code"] == "UNKNOWN_VARIABLE"
        assert body["error"]["message"].startswith("1:1: unknown variable 'w'")

    def test_parse_error(self):
        """Malformed expressions return 400."""
        response = client.post("/invariants", json={"chart": PXYZ, "form": "x*dx^"})
        assert response.status_code == 400
        assert response.json()["error"]["code"] == "PARSE_ERROR"

    def test_not_closed(self):
        """Non-closed forms are input errors."""
        response = client.post("/invariants", json={"chart": PXYZ, "jet_order": 4, "form": "x*dy^dz"})
        assert response.status_code == 400
        assert response.json()["error"]["code"] == "NOT_CLOSED"

    def test_request_validation(self):
        """Missing fields are rejected by the request model."""
        response = client.post("/invariants", json={"chart": PXYZ})
        assert response.status_code == 422


class TestEquiv:
    """Tests for POST /equiv."""

    def test_not_equivalent(self):
        """The two example germs differ in their kernels."""
        response = client.post(
            "/equiv", json={"chart": PXYZ, "jet_order": 6, "form0": OMEGA0_EXAMPLE, "form1": OMEGA1_EXAMPLE}
        )
        assert response.status_code == 200
        verdict = response.json()["data"]
        assert verdict["outcome"] == "not_equivalent"
        assert verdict["theorem_used"] is None
        assert verdict["evidence"]["invariant"] == "kernel"

    def test_equivalent(self):
        """A germ is equivalent to itself."""
        response = client.post(
            "/equiv", json={"chart": PXYZ, "jet_order": 6, "form0": OMEGA0_EXAMPLE, "form1": OMEGA0_EXAMPLE}
        )
        verdict = response.json()["data"]
        assert verdict["outcome"] == "equivalent"
        assert verdict["theorem_used"] is not None

    def test_bad_category(self):
        """Only C and R are categories."""
        response = client.post(
            "/equiv", json={"chart": PXYZ, "form0": OMEGA0_EXAMPLE, "form1": OMEGA1_EXAMPLE, "category": "Q"}
        )
        assert response.status_code == 422


class TestClassify:
    """Tests for POST /classify."""

    def test_hyperbolic(self):
        """The hyperbolic template classifies with discriminant 1."""
        response = client.post(
            "/classify",
            json={
                "chart": ["p1", "y1", "y2", "y3"],
                "jet_order": 6,
                "form": "d(p1*(dy3 + y1*dy2)) + (dy3 + y1*dy2)^(y1*dy1 - y2*dy2)",
            },
        )
        assert response.status_code == 200
        assert response.json()["data"] == {"label": "hyperbolic", "discriminant": "1", "template": True}

    def test_precondition_is_422(self):
        """A nonsingular form has nothing to classify."""
        response = client.post(
            "/classify", json={"chart": ["p1", "q1", "p2", "q2"], "jet_order": 4, "form": "dp1^dq1 + dp2^dq2"}
        )
        assert response.status_code == 422
        assert response.json()["error"]["code"] == "PRECONDITION_FAILED"
