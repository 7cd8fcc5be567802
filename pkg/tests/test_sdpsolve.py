"""
Tests for Layer 3: SDP Solver

Run with: pytest -q
"""
import numpy as np
import pytest

from gainscope.config import SolverSettings
from gainscope.sdpsolve import (
    BackendNotFoundError,
    BackendRegistry,
    SdpaFormatError,
    SdpProblem,
    SdpSolution,
    SolverStatus,
    phase_one,
    presolve,
    read_sdpa,
    solve,
    write_sdpa,
)


def trace_with_corner() -> SdpProblem:
    """min Tr X over 2x2 PSD X with X00 = 1 (optimum 1)."""
    problem = SdpProblem()
    blk = problem.add_block(2)
    problem.add_row({(blk, 0, 0): 1.0}, rhs=1.0)
    problem.objective = {(blk, 0, 0): 1.0, (blk, 1, 1): 1.0}
    return problem


def off_diagonal() -> SdpProblem:
    """min Tr X with X01 = 1, so X00 X11 >= 1 and the optimum is 2."""
    problem = SdpProblem()
    blk = problem.add_block(2)
    problem.add_row({(blk, 0, 1): 1.0}, rhs=1.0)
    problem.objective = {(blk, 0, 0): 1.0, (blk, 1, 1): 1.0}
    return problem


def two_blocks() -> SdpProblem:
    """min x + y over scalars x, y >= 0 with x + 2y = 2 (optimum 1 at y = 1)."""
    problem = SdpProblem()
    a = problem.add_block(1)
    b = problem.add_block(1)
    problem.add_row({(a, 0, 0): 1.0, (b, 0, 0): 2.0}, rhs=2.0)
    problem.objective = {(a, 0, 0): 1.0, (b, 0, 0): 1.0}
    return problem


def with_free() -> SdpProblem:
    """min -f with f + X00 = 2 and X01 = 0.5 over 2x2 PSD X."""
    problem = SdpProblem()
    blk = problem.add_block(2)
    f = problem.add_free()
    problem.add_row({(blk, 0, 0): 1.0}, free={f: 1.0}, rhs=2.0)
    problem.add_row({(blk, 0, 1): 1.0}, rhs=0.5)
    problem.add_row({(blk, 1, 1): 1.0}, rhs=1.0)
    problem.objective_free = {f: -1.0}
    return problem


def zero_diagonal() -> SdpProblem:
    """X00 = X11 = 0 and X01 = 0.5: no PSD solution, phase one gives t = -0.5."""
    problem = SdpProblem()
    blk = problem.add_block(2)
    problem.add_row({(blk, 0, 0): 1.0}, rhs=0.0)
    problem.add_row({(blk, 1, 1): 1.0}, rhs=0.0)
    problem.add_row({(blk, 0, 1): 1.0}, rhs=0.5)
    return problem


def face_with_free() -> SdpProblem:
    """min X11 + f with X00 = 0, X11 = 1, X11 + f = 1.5; every feasible X is singular."""
    problem = SdpProblem()
    blk = problem.add_block(2)
    f = problem.add_free()
    problem.add_row({(blk, 0, 0): 1.0}, rhs=0.0)
    problem.add_row({(blk, 1, 1): 1.0}, rhs=1.0)
    problem.add_row({(blk, 1, 1): 1.0}, free={f: 1.0}, rhs=1.5)
    problem.objective = {(blk, 1, 1): 1.0}
    problem.objective_free = {f: 1.0}
    return problem


class TestProblemModel:
    """Tests for SdpProblem building."""

    def test_bad_block(self):
        """Test block dimension and index checks."""
        problem = SdpProblem()
        with pytest.raises(ValueError):
            problem.add_block(0)
        problem.add_block(2)
        with pytest.raises(IndexError):
            problem.add_row({(0, 0, 2): 1.0})
        with pytest.raises(IndexError):
            problem.add_row(free={0: 1.0})

    def test_lower_keys_folded(self):
        """Test (i, j) with i > j is stored as the upper entry."""
        problem = SdpProblem()
        problem.add_block(2)
        problem.add_row({(0, 1, 0): 1.0}, rhs=0.0)
        assert (0, 0, 1) in problem.rows[0].entries

    def test_vectorize_round_trip(self):
        """Test block vectorization is invertible."""
        problem = with_free()
        X = np.array([[1.0, 0.5], [0.5, 1.0]])
        blocks, free = problem.unvectorize(problem.vectorize([X], np.array([1.0])))
        assert np.allclose(blocks[0], X)
        assert free.tolist() == [1.0]
        assert problem.n_columns == 4


class TestPresolve:
    """Tests for presolve reductions."""

    def test_duplicate_rows(self):
        """Test a scaled copy of a row is dropped."""
        problem = trace_with_corner()
        problem.add_row({(0, 0, 0): 2.0}, rhs=2.0)
        reduced, report = presolve(problem)
        assert reduced.n_rows == 1
        assert report.dropped_duplicate == 1

    def test_contradiction(self):
        """Test 1x1 block fixed to a negative value."""
        problem = SdpProblem()
        problem.add_block(1)
        problem.add_row({(0, 0, 0): 1.0}, rhs=-1.0)
        _, report = presolve(problem)
        assert report.infeasible


class TestEmbeddedSolver:
    """Tests for the interior-point backend on small known problems."""

    @pytest.fixture
    def solver_settings(self):
        return SolverSettings(tol=1e-9)

    def test_trace_with_corner(self, solver_settings):
        """Test min Tr X with X00 = 1."""
        solution = solve(trace_with_corner(), solver_settings)
        assert solution.status == SolverStatus.OPTIMAL
        assert solution.objective == pytest.approx(1.0, abs=1e-6)
        assert solution.blocks[0][0, 0] == pytest.approx(1.0, abs=1e-7)

    def test_off_diagonal(self, solver_settings):
        """Test the off-diagonal entry couples the diagonal."""
        solution = solve(off_diagonal(), solver_settings)
        assert solution.is_optimal
        assert solution.objective == pytest.approx(2.0, abs=1e-6)
        assert min(solution.min_eigenvalues()) > -1e-8

    def test_two_blocks(self, solver_settings):
        """Test a linear program written as two 1x1 blocks."""
        solution = solve(two_blocks(), solver_settings)
        assert solution.is_optimal
        assert solution.objective == pytest.approx(1.0, abs=1e-6)
        assert solution.blocks[1][0, 0] == pytest.approx(1.0, abs=1e-5)

    def test_free_variable(self, solver_settings):
        """Test free variables: X00 >= 0.25 forces f <= 1.75."""
        solution = solve(with_free(), solver_settings)
        assert solution.is_optimal
        assert solution.free[0] == pytest.approx(1.75, abs=1e-5)
        assert solution.objective == pytest.approx(-1.75, abs=1e-5)

    def test_infeasible(self, solver_settings):
        """Test X00 = -1 over a 2x2 PSD block."""
        problem = SdpProblem()
        blk = problem.add_block(2)
        problem.add_row({(blk, 0, 0): 1.0}, rhs=-1.0)
        problem.objective = {(blk, 1, 1): 1.0}
        solution = solve(problem, solver_settings)
        assert solution.status == SolverStatus.INFEASIBLE

    def test_zero_diagonal_infeasible(self, solver_settings):
        """Test X00 = X11 = 0 with X01 = 0.5 is classified infeasible by phase one."""
        problem = zero_diagonal()
        solution = solve(problem, solver_settings)
        assert solution.status == SolverStatus.INFEASIBLE
        assert phase_one(problem, tol=1e-9) == pytest.approx(-0.5, abs=1e-4)

    def test_no_interior_point(self, solver_settings):
        """Test a feasible set on a face of the cone with a free variable."""
        problem = face_with_free()
        solution = solve(problem, solver_settings)
        assert solution.is_optimal
        assert solution.free[0] == pytest.approx(0.5, abs=1e-6)
        assert solution.objective == pytest.approx(1.5, abs=1e-6)
        residuals = problem.row_residuals(solution.blocks, solution.free)
        assert np.max(np.abs(residuals)) < 1e-7

    def test_residuals_reported(self, solver_settings):
        """Test an optimal solution satisfies its rows."""
        problem = off_diagonal()
        solution = solve(problem, solver_settings)
        residuals = problem.row_residuals(solution.blocks, solution.free)
        assert np.max(np.abs(residuals)) < 1e-7
        assert solution.to_dict()["status"] == "optimal"

    def test_unknown_backend(self):
        """Test solving with an unregistered backend."""
        with pytest.raises(BackendNotFoundError):
            solve(trace_with_corner(), SolverSettings(backend="missing"))


class TestBackendRegistry:
    """Tests for BackendRegistry."""

    def test_register_and_get(self):
        """Test a custom backend is dispatched by name."""
        registry = BackendRegistry()

        def fake(problem, solver_settings):
            return SdpSolution(status=SolverStatus.NUMERICAL_LIMIT)

        registry.register("fake", fake, "always gives up")
        assert registry.exists("fake")
        assert registry.get("fake").handler(trace_with_corner(), SolverSettings()).status == SolverStatus.NUMERICAL_LIMIT
        assert registry.list_names() == ["fake"]
        assert registry.unregister("fake")
        assert not registry.unregister("fake")


class TestSdpa:
    """Tests for the sparse SDPA format."""

    def test_write_header(self):
        """Test size lines of the export."""
        lines = write_sdpa(two_blocks()).splitlines()
        assert lines[0].startswith('"gainscope export')
        assert lines[1] == "1"
        assert lines[2] == "2"
        assert lines[3] == "1 1"

    def test_reimport_preserves_optimum(self):
        """Test an exported problem solves to the same value after reading it back."""
        problem = off_diagonal()
        again = read_sdpa(write_sdpa(problem))
        solver_settings = SolverSettings(tol=1e-9)
        assert solve(again, solver_settings).objective == pytest.approx(
            solve(problem, solver_settings).objective, abs=1e-6
        )

    def test_free_variables_split(self):
        """Test free variables become a trailing diagonal block."""
        text = write_sdpa(with_free())
        assert text.splitlines()[3] == "2 -2"
        again = read_sdpa(text)
        assert again.block_dims == [2, 1, 1]
        assert again.n_free == 0

    def test_malformed(self):
        """Test malformed SDPA text."""
        with pytest.raises(SdpaFormatError):
            read_sdpa("1\n")
        with pytest.raises(SdpaFormatError):
            read_sdpa("1\n1\n2\n1.0\n1 1 1 1\n")
