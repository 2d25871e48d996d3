"""Integration tests for the favard command line."""

import io
import json

import numpy as np
import pandas as pd
import pytest
from click.testing import CliRunner
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from favard.cli import cli, main, run_command
from favard.exceptions import InputError


@pytest.fixture
def runner():
    """Runner with stdout and stderr kept apart."""
    try:
        return CliRunner(mix_stderr=False)
    except TypeError:
        return CliRunner()


@pytest.fixture
def run(runner, tmp_path):
    """Invoke a command with --out and return (exit_code, parsed report or None)."""
    def _run(*args):
        out = tmp_path / "report.json"
        if out.exists():
            out.unlink()
        result = runner.invoke(cli, [*map(str, args), "--out", str(out)])
        report = json.loads(out.read_text(encoding="utf-8")) if out.exists() else None
        return result.exit_code, report
    return _run


def _verdicts(report):
    return {v["name"]: v["passed"] for v in report["verdicts"]}


class TestCommands:
    """Test each command on the shipped description files."""

    def test_factorize_shifted_jacobi(self, run, spec_dir):
        code, report = run("factorize", spec_dir / "shifted_jacobi.json")
        assert code == 0
        assert report["payload"]["positive"] is True
        assert report["payload"]["delta"] == pytest.approx([2.0, 1.5])
        assert report["payload"]["lowers"] == [pytest.approx([0.5])]
        assert _verdicts(report) == {"reassembly": True}

    def test_shift_chebyshev(self, run, spec_dir):
        code, report = run("shift", spec_dir / "chebyshev.json", "--N", 5)
        assert code == 0
        assert report["payload"]["shift"] == pytest.approx(2 * np.cos(np.pi / 7), abs=1e-4)
        assert _verdicts(report) == {"within_jacobi_bound": True, "positive_after_shift": True}

    def test_spectrum_t1(self, run, spec_dir):
        code, report = run("spectrum", spec_dir / "t1.json", "--N", 1)
        assert code == 0
        assert report["payload"]["eigenvalues"] == pytest.approx([4 + np.sqrt(15), 4 - np.sqrt(15)])
        assert all(_verdicts(report).values())
        assert report["passed"] is True

    def test_spectrum_chebyshev_masses(self, run, spec_dir):
        code, report = run("spectrum", spec_dir / "chebyshev.json", "--N", 4)
        k = np.arange(1, 6)
        assert code == 0
        assert report["payload"]["eigenvalues"] == pytest.approx(2 * np.cos(k * np.pi / 6))
        assert report["payload"]["masses"] == pytest.approx(np.sin(k * np.pi / 6) ** 2 / 3)

    def test_measure_t1(self, run, spec_dir):
        code, report = run("measure", spec_dir / "t1.json", "--N", 3)
        assert code == 0
        assert np.allclose(report["payload"]["total_mass"], [[1, 0, 0], [0, 1, 0]], atol=1e-8)
        assert len(report["tables"]["step"]) == 4 * 6

    def test_weyl_chebyshev(self, run, spec_dir):
        code, report = run("weyl", spec_dir / "chebyshev.json", "--N", 40, "--z", "10,0")
        assert code == 0
        assert report["payload"]["S"]["re"] == pytest.approx((10 - np.sqrt(96)) / 2, rel=1e-10)

    def test_weyl_t1_complex_point(self, run, spec_dir):
        code, report = run("weyl", spec_dir / "t1.json", "--N", 4, "--z", "2,1")
        assert code == 0
        assert len(report["tables"]["S"]) == 6

    def test_moments_chebyshev(self, run, spec_dir):
        code, report = run("moments", spec_dir / "chebyshev.json", "--n", 8)
        assert code == 0
        assert report["payload"]["moments"] == pytest.approx([1, 0, 1, 0, 2, 0, 5, 0, 14])

    def test_moments_t1_head(self, run, spec_dir):
        code, report = run("moments", spec_dir / "t1.json", "--n", 1)
        assert code == 0
        assert report["payload"]["moments"][0] == [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]

    def test_quadrature_t1(self, run, spec_dir):
        code, report = run("quadrature", spec_dir / "t1.json", "--N", 4)
        assert code == 0
        assert report["payload"]["degrees"]["1,1"] == 4
        assert report["payload"]["degrees"]["2,3"] == 2
        assert all(_verdicts(report).values())

    def test_quadrature_csv(self, runner, spec_dir):
        result = runner.invoke(cli, ["quadrature", str(spec_dir / "chebyshev.json"), "--N", "4", "--format", "csv"])
        assert result.exit_code == 0
        frame = pd.read_csv(io.StringIO(result.stdout))
        assert frame.loc[0, "table"] == "quadrature"
        assert frame.loc[0, "degree"] == 9

    def test_verify_t1(self, run, spec_dir):
        code, report = run("verify", spec_dir / "t1.json", "--N", 3, "--suite", "cd", "--suite", "interlacing")
        assert code == 0
        assert report["payload"]["overall_status"] == "PASS"
        assert set(_verdicts(report)) == {"cd_verification", "interlacing_verification"}

    def test_verify_without_suites(self, run, spec_dir):
        code, report = run("verify", spec_dir / "t1.json", "--N", 3)
        assert code == 0
        assert report["payload"] == {}
        assert report["verdicts"] == []

    def test_report_is_deterministic(self, runner, spec_dir):
        args = ["spectrum", str(spec_dir / "t1.json"), "--N", "5"]
        assert runner.invoke(cli, args).stdout_bytes == runner.invoke(cli, args).stdout_bytes


class TestExitCodes:
    """Test the mapping of failures to exit codes."""

    def test_unknown_command(self, runner):
        assert runner.invoke(cli, ["diagonalize"]).exit_code == 1

    def test_missing_option(self, runner, spec_dir):
        assert runner.invoke(cli, ["spectrum", str(spec_dir / "t1.json")]).exit_code == 1

    def test_order_out_of_range(self, run, spec_dir):
        code, report = run("spectrum", spec_dir / "t1.json", "--N", 100)
        assert code == 1 and report is None

    @pytest.mark.parametrize("z", ["1,2,3", "abc", "inf,0"])
    def test_bad_point(self, runner, spec_dir, z):
        result = runner.invoke(cli, ["weyl", str(spec_dir / "chebyshev.json"), "--N", "3", "--z", z])
        assert result.exit_code == 1

    def test_nonpositive_tolerance(self, runner, spec_dir):
        result = runner.invoke(cli, ["quadrature", str(spec_dir / "t1.json"), "--N", "2", "--tol", "0"])
        assert result.exit_code == 1

    def test_pole(self, run, spec_dir):
        code, report = run("weyl", spec_dir / "chebyshev.json", "--N", 0, "--z", "0,0")
        assert code == 2 and report is None

    def test_failed_verdict(self, run, spec_dir):
        code, report = run("spectrum", spec_dir / "t1.json", "--N", 6, "--tol", "1e-300")
        assert code == 2
        assert report["passed"] is False

    def test_error_document_on_stderr(self, runner, write_spec):
        path = write_spec({"kind": "jacobi", "n_max": 3, "bands": {"-1": [1.0, -1.0], "0": [0, 0, 0]}})
        result = runner.invoke(cli, ["moments", str(path), "--n", "2"])
        assert result.exit_code == 1
        assert "SPEC_FILE_INVALID" in result.stderr

    @settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
    @given(text=st.text(alphabet=st.characters(blacklist_categories=("Cs",)), max_size=200))
    def test_malformed_files(self, runner, write_spec, text):
        path = write_spec(text, "fuzz.json")
        assert runner.invoke(cli, ["factorize", str(path)]).exit_code == 1


class TestMain:
    """Test the console entry point return codes."""

    def test_success(self, spec_dir, tmp_path):
        assert main(["moments", str(spec_dir / "t1.json"), "--n", "2", "--out", str(tmp_path / "m.json")]) == 0

    def test_usage(self):
        assert main(["diagonalize"]) == 1

    def test_verdict(self, spec_dir):
        assert main(["weyl", str(spec_dir / "chebyshev.json"), "--N", "0", "--z", "0"]) == 2


class TestRunCommand:
    """Test report construction without the click layer."""

    def test_quadrature_report(self, spec_dir):
        report = run_command(spec_dir / "t1.json", "quadrature", N=4)
        assert report.passed
        assert report.payload["degrees"]["1,1"] == 4
        assert report.arguments == {"N": 4}
        assert report.input_digest.startswith("sha256:")

    def test_default_order_is_recorded(self, spec_dir):
        report = run_command(spec_dir / "shifted_jacobi.json", "factorize")
        assert report.arguments == {"N": 1}

    def test_verify_all(self, spec_dir):
        report = run_command(spec_dir / "chebyshev.json", "verify", N=4, suites=("all",), seed=3)
        assert report.arguments["suites"] == ["cd", "interlacing", "biorthogonality", "darboux", "gaussborel"]
        assert report.arguments["seed"] == 3
        assert report.payload["overall_status"] == "PASS"

    def test_unknown_command(self, spec_dir):
        with pytest.raises(InputError) as exc_info:
            run_command(spec_dir / "t1.json", "diagonalize")
        assert exc_info.value.error_code == "UNKNOWN_COMMAND"
