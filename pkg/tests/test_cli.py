"""
Tests for the command-line front end and its exit codes.
"""

import csv
import io
import json

import pytest

from cli.commands import (
    EXIT_ANALYSIS,
    EXIT_FAILED,
    EXIT_INPUT,
    EXIT_LEVEL_CAP,
    EXIT_OK,
    EXIT_UNCONVERGED,
    acceptance_targets,
    main,
    parse_dilation_arg,
    parse_type_arg,
)
from services.acceptance import ACCEPTANCE_CHECKS
from services.core import AnalysisError, MaskFormatError
from services.registry import ExampleVerification, FactCheck
from services.smoothness import SmoothnessReport


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


class TestArgumentHelpers:
    """Test suite for the small argument parsers."""

    def test_type_arg(self):
        assert parse_type_arg("0;2") == [(0,), (2,)]
        assert parse_type_arg("0,0;1,0;0,1") == [(0, 0), (1, 0), (0, 1)]

    def test_bad_type_arg(self):
        with pytest.raises(MaskFormatError, match="bad type"):
            parse_type_arg("0;x")

    def test_dilation_arg(self):
        assert parse_dilation_arg("2") == 2
        assert parse_dilation_arg("2,0;0,1") == [[2, 0], [0, 1]]


class TestReadOnlyCommands:
    """Test suite for list, analyze, refine and spline."""

    def test_list_json(self, capsys):
        code, out = run(capsys, "list", "--json")
        assert code == EXIT_OK
        entries = json.loads(out)
        assert entries[0]["id"] == "ex6.2a"
        assert len(entries) == 16

    def test_analyze_fixture(self, capsys, fixtures_dir):
        code, out = run(capsys, "analyze", str(fixtures_dir / "hermite_cubic.json"), "--json")
        assert code == EXIT_OK
        report = json.loads(out)
        assert report["sr_order"] == 4
        assert report["lpm_order"] == 4
        assert report["hermite_type_ok"] is True
        assert report["theta"] == [1, 2]

    def test_analyze_writes_report(self, capsys, fixtures_dir, tmp_path):
        path = tmp_path / "report.json"
        code, _ = run(capsys, "analyze", str(fixtures_dir / "hermite_cubic.json"), "--out", str(path))
        assert code == EXIT_OK
        assert json.loads(path.read_text())["sr_order"] == 4

    def test_refine_to_stdout(self, capsys, fixtures_dir):
        code, out = run(capsys, "refine", str(fixtures_dir / "hermite_cubic.json"), "--delta", "1", "--levels", "1")
        assert code == EXIT_OK
        rows = list(csv.reader(io.StringIO(out)))
        assert rows[0] == ["component", "position_1", "value_exact", "value_float"]
        assert ["2", "1/2", "-3/2", "-1.5"] in rows

    def test_refine_to_file(self, capsys, fixtures_dir, tmp_path):
        path = tmp_path / "cubic.csv"
        code, out = run(capsys, "refine", str(fixtures_dir / "hermite_cubic.json"), "--levels", "2", "--out", str(path))
        assert code == EXIT_OK
        assert out == ""
        assert path.read_text().startswith("component,position_1")

    def test_spline_dump(self, capsys):
        code, out = run(capsys, "spline", "ex6.3b")
        assert code == EXIT_OK
        assert len(json.loads(out)["components"]) == 2

    def test_spline_from_m_and_n(self, capsys):
        code, out = run(capsys, "spline", "--m", "1", "--N", "1")
        assert code == EXIT_OK
        assert len(json.loads(out)["components"]) == 2


class TestConstruct:
    """Test suite for mask constructions."""

    def test_bspline_mask(self, capsys):
        code, out = run(capsys, "construct", "bspline", "--n", "3")
        assert code == EXIT_OK
        data = json.loads(out)
        assert data["multiplicity"] == 1
        assert len(data["coeffs"]) == 4

    def test_from_spline_writes_file(self, capsys, tmp_path):
        path = tmp_path / "cubic.json"
        code, _ = run(capsys, "construct", "from-spline", "--m", "1", "--N", "1", "--out", str(path))
        assert code == EXIT_OK
        code, out = run(capsys, "analyze", str(path), "--json")
        assert code == EXIT_OK
        assert json.loads(out)["sr_order"] == 4

    def test_existence_type_length(self, capsys):
        code, _ = run(capsys, "construct", "existence", "--type", "0,0;1,0", "--dim", "1")
        assert code == EXIT_INPUT


class TestExitCodes:
    """Test suite for error handling at the command boundary."""

    def test_malformed_file(self, capsys, fixtures_dir):
        code, _ = run(capsys, "analyze", str(fixtures_dir / "malformed_rational.json"))
        assert code == EXIT_INPUT

    def test_missing_file(self, capsys, tmp_path):
        code, _ = run(capsys, "analyze", str(tmp_path / "absent.json"))
        assert code == EXIT_INPUT

    def test_no_source(self, capsys):
        code, _ = run(capsys, "analyze")
        assert code == EXIT_INPUT

    def test_unknown_example(self, capsys):
        code, _ = run(capsys, "analyze", "--example", "ex9.9")
        assert code == EXIT_INPUT

    def test_level_cap(self, capsys, fixtures_dir):
        code, _ = run(capsys, "refine", str(fixtures_dir / "hermite_cubic.json"), "--levels", "5", "--max-level", "3")
        assert code == EXIT_LEVEL_CAP

    def test_refine_delta_out_of_range(self, capsys, fixtures_dir):
        code, _ = run(capsys, "refine", str(fixtures_dir / "hermite_cubic.json"), "--delta", "3")
        assert code == EXIT_INPUT

    def test_analysis_error(self, capsys, mocker):
        mocker.patch("cli.commands.classify", side_effect=AnalysisError("non-invertible germ"))
        code, _ = run(capsys, "analyze", "--example", "ex6.4c")
        assert code == EXIT_ANALYSIS

    def test_short_iteration_exits_unconverged(self, capsys):
        code, out = run(capsys, "smoothness", "--example", "ex6.3b", "--iters", "2", "--json", "--no-rho-inf")
        assert code == EXIT_UNCONVERGED
        data = json.loads(out)
        assert data["smoothness"]["converged"] is False
        assert data["smoothness"]["dense_sm2"] is not None

    def test_unconverged_smoothness(self, capsys, mocker):
        report = SmoothnessReport(
            dim=1, sr_order=4, m_used=3, generators=2, lambda_per_generator=[0.03],
            lam=0.03, rho2=0.17, sm2=2.5, sminf_lower=2.0, iterations=5,
            converged=False, method="power",
        )
        mocker.patch("services.smoothness.SmoothnessEstimator.estimate", return_value=report)
        mocker.patch("cli.commands.convergence_verdict", side_effect=AnalysisError("not a generalized Hermite mask"))
        code, out = run(capsys, "smoothness", "--example", "ex6.4c", "--json")
        assert code == EXIT_UNCONVERGED
        data = json.loads(out)
        assert data["smoothness"]["converged"] is False
        assert data["convergence"]["verdict"] == "not applicable"


class TestVerify:
    """Test suite for the verify command."""

    def test_verify_without_smoothness(self, capsys):
        code, out = run(capsys, "verify", "ex6.4c", "--no-smoothness", "--jobs", "1", "--json")
        assert code == EXIT_OK
        summary = json.loads(out)
        assert summary["ok"] is True
        assert summary["examples"][0]["id"] == "ex6.4c"

    def test_failed_fact_sets_exit_code(self, capsys, mocker):
        failed = ExampleVerification(id="ex6.2a", variant=None, checks=[FactCheck("sum rules", 6, 4, False)])
        verify = mocker.patch("cli.commands.verify_example", return_value=failed)
        code, out = run(capsys, "verify", "ex6.2a", "--json")
        assert code == EXIT_FAILED
        assert json.loads(out)["ok"] is False
        verify.assert_called_once_with("ex6.2a", variant=None, overrides=None, smoothness=True)

    def test_all_runs_variants_and_suite(self, capsys, mocker):
        """Test --all covers every variant, sr10 included, and every suite-level check."""
        def record(example_id, variant=None, **_kwargs):
            return ExampleVerification(id=example_id, variant=variant, checks=[FactCheck("f", 1, 1, True)])

        def suite(name, smoothness=True):
            return ExampleVerification(id=f"acceptance:{name}", variant=None, checks=[FactCheck("f", 1, 1, True)])

        verify = mocker.patch("cli.commands.verify_example", side_effect=record)
        acceptance = mocker.patch("cli.commands.run_acceptance", side_effect=suite)
        code, out = run(capsys, "verify", "--all", "--no-smoothness", "--jobs", "1", "--json")
        assert code == EXIT_OK
        verify.assert_any_call("ex6.2a", variant="sr10", overrides=None, smoothness=False)
        assert acceptance.call_count == len(ACCEPTANCE_CHECKS)
        ids = [entry["id"] for entry in json.loads(out)["examples"]]
        assert "acceptance:bspline" in ids
        assert "acceptance:example1.2" in ids
        assert len(ids) == len(acceptance_targets())

    def test_verify_needs_target(self, capsys):
        code, _ = run(capsys, "verify")
        assert code == EXIT_INPUT
