"""
Tests for Layer 7: Command Line

Run with: pytest -q
"""
import json
from pathlib import Path

import numpy as np
import pytest
from pydantic import ValidationError

from gainscope.bounds import InfeasibleProgramError, SolverLimitError, analytic_system_text
from gainscope.cli import (
    EXIT_INPUT,
    EXIT_NUMERICAL,
    EXIT_OK,
    EXIT_REJECTED,
    RunConfig,
    contour_segments,
    exit_code_for,
    extract_contours,
    main,
    parse_grid,
    spot_check_points,
)
from gainscope.config import Settings
from gainscope.oracle import NotHurwitzError
from gainscope.pipeline import LimitExceeded, StepFailed
from gainscope.sysmodel import domain_mask, load_system_file


SYSTEMS_DIR = Path(__file__).resolve().parent.parent / "systems"

ONE_PARAMETER_SYSTEM = """
[dims]
1, 1, 1, 1
[A]
-1 - t1
[B]
1
[C]
1
[nominal]
theta_star = 0
[domain]
g1 = -(t1 + 0.5)*(t1 - 0.5)
[box]
t1 = -0.5, 0.5
"""


@pytest.fixture(scope="module")
def analyzed(tmp_path_factory):
    """Analyze the small analytic example once; returns (system file, output dir)."""
    base = tmp_path_factory.mktemp("analyze")
    system_file = base / "analytic.sys"
    system_file.write_text(analytic_system_text(box=((-0.5, 1.0), (-0.5, 1.0))), encoding="utf-8")
    out = base / "out"
    code = main([
        "analyze", str(system_file),
        "--kind", "s2o-upper",
        "--pin-nominal", "off",
        "--grid", "5",
        "--tol-solver", "1e-9",
        "--out", str(out),
    ])
    assert code == EXIT_OK
    return system_file, out


class TestRunConfig:
    """Tests for RunConfig validation."""

    def test_parse_grid(self):
        """Test N and NxM forms."""
        assert parse_grid("7") == [7]
        assert parse_grid("20x30") == [20, 30]
        with pytest.raises(ValueError):
            parse_grid("ax2")

    def test_grid_too_small(self):
        """Test a grid axis needs two points."""
        with pytest.raises(ValidationError):
            RunConfig(command="sweep", grid="1x5")

    def test_empty_kinds(self):
        """Test at least one kind."""
        with pytest.raises(ValidationError):
            RunConfig(command="analyze", kinds=[])

    def test_negative_degree(self):
        """Test degrees are non-negative."""
        with pytest.raises(ValidationError):
            RunConfig(command="analyze", deg_v=-2)

    def test_resolution(self):
        """Test one grid value applies to every axis."""
        assert RunConfig(command="sweep", grid="5").resolution(2, 20) == [5, 5]
        assert RunConfig(command="sweep").resolution(3, 20) == [20, 20, 20]
        with pytest.raises(ValueError):
            RunConfig(command="sweep", grid="4x5x6").resolution(2, 20)

    def test_apply(self, tmp_path):
        """Test run options override settings without touching the base."""
        base = Settings()
        config = RunConfig(command="analyze", tol_psd=1e-5, threads=3, out=tmp_path)
        applied = config.apply(base)
        assert applied.tolerances.psd == 1e-5
        assert applied.output.threads == 3
        assert applied.output.base_path == tmp_path
        assert base.output.threads == 1
        assert config.degrees().v == 2


class TestContours:
    """Tests for level-set contour extraction."""

    def test_straight_line(self):
        """Test f = x crosses 0.5 along a vertical open polyline."""
        axis = np.array([0.0, 1.0, 2.0])
        values = np.repeat(axis[:, None], 3, axis=1)
        (line,) = extract_contours(axis, axis, values, 0.5)
        assert not line.closed
        assert len(line) == 3
        assert np.allclose(line.points[:, 0], 0.5)
        assert np.allclose(sorted(line.points[:, 1]), [0.0, 1.0, 2.0])

    def test_closed_loop(self):
        """Test a bump gives one closed polyline around the center."""
        axis = np.linspace(-1.0, 1.0, 5)
        X, Y = np.meshgrid(axis, axis, indexing="ij")
        (loop,) = extract_contours(axis, axis, X ** 2 + Y ** 2, 0.4)
        assert loop.closed
        assert np.allclose(loop.points[0], loop.points[-1])
        radii = np.hypot(loop.points[:, 0], loop.points[:, 1])
        assert np.all((radii > 0.25) & (radii < 1.0))

    def test_nan_cells_skipped(self):
        """Test cells with a NaN corner produce no segments."""
        values = np.full((3, 3), np.nan)
        assert contour_segments(values, 0.0) == []

    def test_shape_mismatch(self):
        """Test values must match the axes."""
        with pytest.raises(ValueError):
            extract_contours([0.0, 1.0], [0.0, 1.0, 2.0], np.zeros((2, 2)), 0.0)


class TestExitCodes:
    """Tests for exit code mapping."""

    def test_mapping(self):
        """Test error classes map onto exit codes."""
        assert exit_code_for(ValueError("bad")) == EXIT_INPUT
        assert exit_code_for(FileNotFoundError("x.sys")) == EXIT_INPUT
        assert exit_code_for(InfeasibleProgramError("no")) == EXIT_REJECTED
        assert exit_code_for(SolverLimitError("stalled")) == EXIT_NUMERICAL
        assert exit_code_for(LimitExceeded("steps")) == EXIT_NUMERICAL
        assert exit_code_for(RuntimeError("unknown")) is None

    def test_step_failed_unwrapped(self):
        """Test the cause of a failed step decides the code."""
        error = StepFailed("Step hurwitz failed", "hurwitz", NotHurwitzError("unstable"))
        assert exit_code_for(error) == EXIT_REJECTED

    def test_spot_check_points(self):
        """Test seeded samples are reproducible and in the domain."""
        system = load_system_file(SYSTEMS_DIR / "numerical_example.sys")
        first = spot_check_points(system, 10, seed=3)
        assert first.shape == (10, 2)
        assert np.array_equal(first, spot_check_points(system, 10, seed=3))
        assert domain_mask(system, first).all()


class TestCommands:
    """Tests for the command entry point."""

    def test_analyze_outputs(self, analyzed):
        """Test analyze writes certificate, summary and timings."""
        _, out = analyzed
        assert (out / "certificate_s2o-upper.json").exists()
        assert (out / "timings.json").exists()
        summary = json.loads((out / "summary.json").read_text(encoding="utf-8"))
        assert summary["all_valid"]

    def test_repeated_runs_identical(self, analyzed, tmp_path):
        """Test analyze and sweep write byte-identical files when rerun."""
        system_file, out = analyzed
        again = tmp_path / "again"
        code = main([
            "analyze", str(system_file),
            "--kind", "s2o-upper",
            "--pin-nominal", "off",
            "--grid", "5",
            "--tol-solver", "1e-9",
            "--out", str(again),
        ])
        assert code == EXIT_OK
        for name in ("certificate_s2o-upper.json", "summary.json"):
            assert (again / name).read_bytes() == (out / name).read_bytes()

        sweeps = []
        for run in ("first", "second"):
            code = main([
                "sweep", str(system_file),
                "--certificate", str(out / "certificate_s2o-upper.json"),
                "--grid", "4",
                "--out", str(tmp_path / run),
            ])
            assert code == EXIT_OK
            sweeps.append((tmp_path / run / "sweep.csv").read_bytes())
        assert sweeps[0] == sweeps[1]

    def test_certify_valid(self, analyzed, tmp_path):
        """Test a fresh certificate revalidates and passes the spot-check."""
        system_file, out = analyzed
        code = main([
            "certify",
            "--certificate", str(out / "certificate_s2o-upper.json"),
            "--system", str(system_file),
            "--samples", "5",
            "--out", str(tmp_path),
        ])
        assert code == EXIT_OK
        report = json.loads((tmp_path / "certify.json").read_text(encoding="utf-8"))
        assert report["certificate"]["status"] == "valid"

    def test_certify_tampered(self, analyzed, tmp_path):
        """Test a changed Gram entry is rejected."""
        system_file, out = analyzed
        data = json.loads((out / "certificate_s2o-upper.json").read_text(encoding="utf-8"))
        data["constraints"][0]["gram"]["matrix"][0][0] += 0.5
        tampered = tmp_path / "tampered.json"
        tampered.write_text(json.dumps(data), encoding="utf-8")
        assert main(["certify", "--certificate", str(tampered), "--system", str(system_file)]) == EXIT_REJECTED

    def test_certify_hash_mismatch(self, analyzed):
        """Test a certificate checked against another system."""
        _, out = analyzed
        code = main([
            "certify",
            "--certificate", str(out / "certificate_s2o-upper.json"),
            "--system", str(SYSTEMS_DIR / "numerical_example.sys"),
        ])
        assert code == EXIT_REJECTED

    def test_sweep_with_certificate(self, analyzed, tmp_path):
        """Test sweep writes the surface and plot script."""
        system_file, out = analyzed
        code = main([
            "sweep", str(system_file),
            "--certificate", str(out / "certificate_s2o-upper.json"),
            "--grid", "4",
            "--gnuplot",
            "--out", str(tmp_path),
        ])
        assert code == EXIT_OK
        lines = (tmp_path / "sweep.csv").read_text(encoding="utf-8").splitlines()
        assert lines[0] == "t1,t2,bound,oracle,margin,flag"
        assert len(lines) == 1 + 16
        assert (tmp_path / "sweep.gp").exists()

    def test_levelset_with_certificate(self, analyzed, tmp_path):
        """Test levelset writes polylines for a two-parameter system."""
        system_file, out = analyzed
        code = main([
            "levelset", str(system_file),
            "--certificate", str(out / "certificate_s2o-upper.json"),
            "--level", "0.01",
            "--grid", "6",
            "--out", str(tmp_path),
        ])
        assert code == EXIT_OK
        header = (tmp_path / "levelset.csv").read_text(encoding="utf-8").splitlines()[0]
        assert header == "polyline,closed,vertex,t1,t2"

    def test_levelset_needs_two_parameters(self, tmp_path):
        """Test level sets are refused for one parameter."""
        system_file = tmp_path / "one.sys"
        system_file.write_text(ONE_PARAMETER_SYSTEM, encoding="utf-8")
        code = main(["levelset", str(system_file), "--level", "1.0", "--out", str(tmp_path)])
        assert code == EXIT_REJECTED

    def test_invariance(self, tmp_path):
        """Test invariance rows per grid point and input."""
        code = main([
            "invariance", str(SYSTEMS_DIR / "numerical_example.sys"),
            "--grid", "3",
            "--out", str(tmp_path),
        ])
        assert code == EXIT_OK
        lines = (tmp_path / "invariance.csv").read_text(encoding="utf-8").splitlines()
        assert lines[0].startswith("t1,t2,input,ss_mismatch")
        assert len(lines) == 1 + 9

    def test_missing_system_file(self, tmp_path):
        """Test an unreadable system file is an input error."""
        assert main(["invariance", str(tmp_path / "missing.sys"), "--out", str(tmp_path)]) == EXIT_INPUT

    def test_bad_environment(self, monkeypatch, tmp_path):
        """Test invalid environment configuration is an input error."""
        monkeypatch.setenv("GAINSCOPE_THREADS", "0")
        code = main(["invariance", str(SYSTEMS_DIR / "numerical_example.sys"), "--out", str(tmp_path)])
        assert code == EXIT_INPUT
