"""
Tests for Martinet Engine - Report
"""

from enum import Enum
from fractions import Fraction

import numpy as np
import pytest
from config import EXAMPLES_DIR, SCHEMA_VERSION
from dsl import load_frm
from invariants import full_report
from normal_form import decide_equivalence
from report import build_report, jsonable, render_text, schema_errors, validate_report

JET = 6


class Color(Enum):
    RED = "red"


@pytest.fixture
def omega0():
    return load_frm(EXAMPLES_DIR / "omega0.frm", JET).form


@pytest.fixture
def omega1():
    return load_frm(EXAMPLES_DIR / "omega1.frm", JET).form


class TestJsonable:
    """Tests for value conversion."""

    def test_rationals_are_strings(self):
        """Fractions print as 'p/q', integers stay integers."""
        assert jsonable(Fraction(-1, 2)) == "-1/2"
        assert jsonable(Fraction(3)) == "3"
        assert jsonable(3) == 3

    def test_nested_values(self):
        """Enums, tuples and numpy values are converted recursively."""
        value = {"color": Color.RED, "vector": (Fraction(1), Fraction(0)), "x": np.float64(0.5)}
        assert jsonable(value) == {"color": "red", "vector": ["1", "0"], "x": 0.5}

    def test_arrays(self):
        """numpy arrays become lists."""
        assert jsonable(np.array([1, 2])) == [1, 2]

    def test_unknown_type(self):
        """Unsupported objects are rejected."""
        with pytest.raises(TypeError):
            jsonable(object())


class TestBuildReport:
    """Tests for ReportJSON documents."""

    def test_invariant_report_matches_schema(self, omega0):
        """A full invariant report validates against the shipped schema."""
        document = build_report(
            "invariants", {"chart": ["p1", "x", "y", "z"], "jet_order": JET}, report=full_report(omega0)
        )
        assert schema_errors(document) == []
        assert document["schema_version"] == SCHEMA_VERSION
        assert document["report"]["kernel_basis"] == [["0", "0", "1", "0"], ["0", "0", "0", "1"]]
        assert document["report"]["martinet_function"] == "2*p1"
        assert document["verdict"] is None
        assert document["timings"] is None

    def test_verdict_matches_schema(self, omega0, omega1):
        """A not_equivalent verdict carries the differing invariant."""
        verdict = decide_equivalence(omega0, omega1)
        document = build_report("equiv", {"chart": ["p1", "x", "y", "z"], "jet_order": JET}, verdict=verdict)
        validate_report(document)
        assert document["verdict"]["outcome"] == "not_equivalent"
        assert document["verdict"]["evidence"]["invariant"] == "kernel"

    def test_schema_errors_reported(self):
        """Missing fields and a wrong version are listed."""
        errors = schema_errors({"schema_version": "0.1", "command": "invariants"})
        assert errors
        assert any(e.startswith("schema_version") for e in errors)
        assert any(e.startswith("<root>") for e in errors)


class TestRenderText:
    """Tests for text output."""

    def test_flat_lines(self, omega0):
        """Nested keys are joined with dots; empty values are skipped."""
        document = build_report("invariants", {"chart": ["p1"], "jet_order": JET}, report=full_report(omega0))
        text = render_text(document)
        lines = text.splitlines()
        assert "command: invariants" in lines
        assert "report.regime: structurally_smooth" in lines
        assert "report.kernel_basis: (0, 0, 1, 0); (0, 0, 0, 1)" in lines
        assert not any(line.startswith("input") for line in lines)
        assert not any(line.startswith("verdict") for line in lines)
