"""
Tests for Martinet Engine - Command line
"""

import json
import subprocess
import sys
from pathlib import Path

import cli
import pytest
from cli import EXIT_ERROR, EXIT_OK, EXIT_UNDECIDED, main
from config import EXAMPLES_DIR
from report import schema_errors


def example(name):
    return str(EXAMPLES_DIR / f"{name}.frm")


@pytest.fixture(autouse=True)
def no_seed_override(monkeypatch):
    """Keep MARTINET_SEED from the environment out of the tests."""
    monkeypatch.delenv("MARTINET_SEED", raising=False)


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestInvariants:
    """Tests for the invariants command."""

    def test_json_report(self, capsys):
        """--json writes a schema-valid report."""
        code, out, _ = run(capsys, "invariants", example("omega0"), "--json", "--jet", "6")
        assert code == EXIT_OK
        document = json.loads(out)
        assert document["command"] == "invariants"
        assert document["input"]["chart"] == ["p1", "x", "y", "z"]
        assert document["input"]["jet_order"] == 6
        assert document["report"]["sigma22_incidence"] == 2

    def test_output_is_reproducible(self, capsys):
        """Two runs without --timings are byte-identical."""
        _, first, _ = run(capsys, "invariants", example("omega1"), "--json", "--jet", "6")
        _, second, _ = run(capsys, "invariants", example("omega1"), "--json", "--jet", "6")
        assert first == second

    def test_text_output(self, capsys):
        """Without --json the report is printed as key: value lines."""
        code, out, _ = run(capsys, "invariants", example("symplectic"), "--jet", "4")
        assert code == EXIT_OK
        assert "report.regime: nonsingular" in out.splitlines()

    def test_timings(self, capsys):
        """--timings adds the wall-clock total."""
        _, out, _ = run(capsys, "invariants", example("symplectic"), "--json", "--timings", "--jet", "4")
        assert json.loads(out)["timings"]["total_seconds"] >= 0


class TestEquiv:
    """Tests for the equiv command and its exit codes."""

    def test_not_equivalent_exits_zero(self, capsys):
        """A definite answer exits 0."""
        code, out, _ = run(capsys, "equiv", example("omega0"), example("omega1"), "--json", "--jet", "6")
        assert code == EXIT_OK
        verdict = json.loads(out)["verdict"]
        assert verdict["outcome"] == "not_equivalent"
        assert verdict["evidence"]["invariant"] == "kernel"

    def test_inconclusive_exits_two(self, capsys):
        """Hyperbolic and elliptic germs are undecided over C."""
        code, out, _ = run(
            capsys, "equiv", example("hyperbolic"), example("elliptic"), "--category", "C", "--json", "--jet", "6"
        )
        assert code == EXIT_UNDECIDED
        assert json.loads(out)["verdict"]["outcome"] == "inconclusive"

    def test_chart_mismatch(self, capsys):
        """Forms on different charts are an input error."""
        code, out, err = run(capsys, "equiv", example("omega0"), example("symplectic"))
        assert code == EXIT_ERROR
        assert out == ""
        assert err.startswith("error: CHART_MISMATCH: ")


class TestErrors:
    """Tests for error reporting."""

    def test_unknown_variable(self, capsys, tmp_path):
        """The error line carries the code and the file position."""
        path = tmp_path / "bad.frm"
        path.write_text("chart: x y\nx*dw\n", encoding="utf-8")
        code, _, err = run(capsys, "invariants", str(path))
        assert code == EXIT_ERROR
        assert err.startswith("error: UNKNOWN_VARIABLE: 2:3: unknown variable 'dw'")

    def test_missing_file(self, capsys, tmp_path):
        """Unreadable files exit 1."""
        code, _, err = run(capsys, "invariants", str(tmp_path / "missing.frm"))
        assert code == EXIT_ERROR
        assert err.startswith("error: PARSE_ERROR: ")

    def test_wrong_degree(self, capsys, tmp_path):
        """invariants needs a 2-form."""
        path = tmp_path / "one_form.frm"
        path.write_text("chart: x y\nx*dy\n", encoding="utf-8")
        code, _, err = run(capsys, "invariants", str(path))
        assert code == EXIT_ERROR
        assert err.startswith("error: DEGREE_ERROR: ")

    def test_classify_needs_smooth_hypersurface(self, capsys):
        """A nonsingular form has no Σ₂ to classify."""
        code, _, err = run(capsys, "classify", example("symplectic"), "--jet", "4")
        assert code == EXIT_ERROR
        assert err.startswith("error: PRECONDITION_FAILED: ")


class TestOtherCommands:
    """Tests for classify, decompose, from-volume and moser-verify."""

    def test_classify(self, capsys):
        """The hyperbolic template classifies as hyperbolic."""
        code, out, _ = run(capsys, "classify", example("hyperbolic"), "--json", "--jet", "6")
        assert code == EXIT_OK
        result = json.loads(out)["result"]
        assert result["label"] == "hyperbolic"
        assert result["discriminant"] == "1"

    def test_decompose(self, capsys):
        """ω₀ splits into α, σ and θ along p1."""
        code, out, _ = run(capsys, "decompose", example("omega0"), "--json", "--jet", "6")
        assert code == EXIT_OK
        result = json.loads(out)["result"]
        assert result["normal_var"] == "p1"
        assert result["chart_moved"] is False
        assert result["sigma"] == "x*dx^dy"

    def test_from_volume(self, capsys):
        """The quadric density gives a 4-dimensional form."""
        code, out, _ = run(capsys, "from-volume", example("volume_quadric"), "--json", "--jet", "4")
        assert code == EXIT_OK
        assert json.loads(out)["result"]["half_dim"] == 2

    def test_moser_verify(self, capsys):
        """The relative Darboux path is chosen and verified."""
        code, out, _ = run(
            capsys,
            "moser-verify",
            example("darboux0"),
            example("darboux1"),
            "--grid",
            "2",
            "--steps",
            "10",
            "--random",
            "3",
            "--json",
            "--jet",
            "4",
        )
        assert code == EXIT_OK
        result = json.loads(out)["result"]
        assert result["bridge"] == "rel_darboux"
        assert result["ok"] is True
        assert result["summary"]["samples"] == 19
        assert result["summary"]["passed"] == 19


SERVICE_DIR = Path(cli.__file__).resolve().parent
FORM_EXAMPLES = ["omega0", "omega1", "hyperbolic", "elliptic", "parabolic", "symplectic", "darboux0", "orient0"]


def run_script(*argv):
    return subprocess.run(
        [sys.executable, "cli.py", *argv],
        cwd=SERVICE_DIR,
        capture_output=True,
        text=True,
        timeout=600,
        check=False,
    )


class TestEntryPoint:
    """Tests for `python cli.py ...` on the shipped examples."""

    @pytest.mark.parametrize("name", FORM_EXAMPLES)
    def test_invariants_on_examples(self, name):
        """Every shipped 2-form germ yields a schema-valid report and exit 0."""
        completed = run_script("invariants", example(name), "--json", "--jet", "6")
        assert completed.returncode == EXIT_OK, completed.stderr
        document = json.loads(completed.stdout)
        assert schema_errors(document) == []
        assert document["command"] == "invariants"

    def test_kernel_pair_is_not_equivalent(self):
        """equiv omega0 omega1 decides not_equivalent from the Σ₂₂ incidence."""
        completed = run_script("equiv", example("omega0"), example("omega1"), "--json", "--jet", "6")
        assert completed.returncode == EXIT_OK, completed.stderr
        verdict = json.loads(completed.stdout)["verdict"]
        assert verdict["outcome"] == "not_equivalent"
        assert verdict["evidence"]["invariant"] == "kernel"

    def test_undecided_exit_code(self):
        """An inconclusive decision exits 2."""
        completed = run_script(
            "equiv", example("hyperbolic"), example("elliptic"), "--category", "C", "--json", "--jet", "6"
        )
        assert completed.returncode == EXIT_UNDECIDED, completed.stderr
        assert json.loads(completed.stdout)["verdict"]["outcome"] == "inconclusive"

    def test_classify_on_degenerate_sigma22(self):
        """σ = x dx∧dy has no Σ₂₂₀ / Σ₂₂₁ label."""
        completed = run_script("classify", example("omega0"), "--jet", "6")
        assert completed.returncode == EXIT_ERROR
        assert completed.stderr.startswith("error: PRECONDITION_FAILED: template mismatch")

    def test_from_volume_text(self):
        """from-volume prints a text report."""
        completed = run_script("from-volume", example("volume_quadric"), "--jet", "4")
        assert completed.returncode == EXIT_OK, completed.stderr
        assert "command: from-volume" in completed.stdout.splitlines()
