"""
Tests for Layer 2: System Models

Run with: pytest -q
"""
from pathlib import Path

import numpy as np
import pytest

from gainscope.sysmodel import (
    BoxInferenceError,
    NominalOutsideDomainError,
    ParamMatrix,
    ParameterSingularityError,
    ShapeMismatchError,
    SystemFormatError,
    build_cascade,
    domain_mask,
    eval_at,
    hurwitz_sample_check,
    infer_box,
    load_system,
    load_system_file,
    mismatch_channel,
    parameter_grid,
    serialize_system,
)


SYSTEMS_DIR = Path(__file__).resolve().parent.parent / "systems"

SCALAR_SYSTEM = """
[dims]
n = 1
m = 1
p = 1
ntheta = 2

[A]
-3 + t1 + t2

[B]
-1 + t2

[C]
2 - t1

[nominal]
theta_star = 0, 0

[domain]
g1 = -(t1 + 1.5)*(t1 - 1.5)
g2 = -(t2 + 1)*(t2 - 1)
"""


def _with(section: str, body: str) -> str:
    """Replace one section body in SCALAR_SYSTEM."""
    head, rest = SCALAR_SYSTEM.split(f"[{section}]\n", 1)
    tail = rest.split("\n\n", 1)[1] if "\n\n" in rest else ""
    return f"{head}[{section}]\n{body}\n\n{tail}"


class TestLoader:
    """Tests for the system file reader."""

    @pytest.fixture
    def system(self):
        return load_system(SCALAR_SYSTEM)

    def test_dimensions(self, system):
        """Test dims and default zero feedthrough."""
        assert (system.n, system.m, system.p, system.n_theta) == (1, 1, 1, 2)
        assert system.param_names == ("t1", "t2")
        assert system.D.is_zero

    def test_evaluate_at_point(self, system):
        """Test numeric instantiation."""
        numeric = system.at([1.0, 0.0])
        assert numeric.A[0, 0] == pytest.approx(-2.0)
        assert numeric.B[0, 0] == pytest.approx(-1.0)
        assert numeric.C[0, 0] == pytest.approx(1.0)

    def test_compact_dims_line(self):
        """Test the 'n, m, p, ntheta' form of [dims]."""
        text = SCALAR_SYSTEM.replace("n = 1\nm = 1\np = 1\nntheta = 2", "1, 1, 1, 2")
        assert load_system(text).n_theta == 2

    def test_serialize_round_trip(self, system):
        """Test canonical text reparses with the same hash."""
        again = load_system(serialize_system(system))
        assert again.system_hash == system.system_hash
        assert again.at([0.3, -0.2]).A == pytest.approx(system.at([0.3, -0.2]).A)

    def test_hash_sensitive_to_content(self, system):
        """Test a changed entry changes the system hash."""
        other = load_system(_with("C", "2 - 2*t1"))
        assert other.system_hash != system.system_hash

    def test_normalized_file(self):
        """Test normalize rewrites to relative coordinates."""
        system = load_system_file(SYSTEMS_DIR / "analytic_example.sys")
        assert system.normalized
        assert system.theta_star == (0.0, 0.0)
        assert np.array(system.box) == pytest.approx(np.array([[-0.9, 3.0], [-0.9, 3.0]]))
        # A(0, 0) = -1 / (1 + 1)
        assert system.nominal().A[0, 0] == pytest.approx(-0.5)
        again = load_system(serialize_system(system))
        assert again.normalized
        assert again.system_hash == system.system_hash

    def test_missing_section(self):
        """Test a missing required section."""
        text = SCALAR_SYSTEM.replace("[C]\n2 - t1\n", "")
        with pytest.raises(SystemFormatError):
            load_system(text)

    def test_unknown_section(self):
        """Test an unknown section header reports its line."""
        with pytest.raises(SystemFormatError) as exc:
            load_system("[dims]\n1, 1, 1, 1\n[bogus]\n")
        assert exc.value.line == 3

    def test_bad_expression_position(self):
        """Test parse errors inside a matrix entry carry line and column."""
        with pytest.raises(SystemFormatError) as exc:
            load_system(_with("A", "-3 + $"))
        lines = _with("A", "-3 + $").splitlines()
        assert exc.value.line == lines.index("-3 + $") + 1
        assert exc.value.column == 6

    def test_wrong_row_count(self):
        """Test a matrix with too many rows reports the first extra row."""
        text = _with("A", "-3\n-4")
        with pytest.raises(SystemFormatError) as exc:
            load_system(text)
        assert exc.value.line == text.splitlines().index("-4") + 1

    def test_empty_matrix_section(self):
        """Test a matrix section without rows reports its own header line."""
        text = _with("B", "")
        with pytest.raises(SystemFormatError) as exc:
            load_system(text)
        assert exc.value.line == text.splitlines().index("[B]") + 1

    def test_undeclared_parameter(self):
        """Test an entry using t3 in a two-parameter system."""
        with pytest.raises((SystemFormatError, ShapeMismatchError)):
            load_system(_with("A", "-3 + t3"))

    def test_nominal_outside_domain(self):
        """Test theta* violating a domain inequality."""
        with pytest.raises(NominalOutsideDomainError):
            load_system(_with("nominal", "theta_star = 2, 0"))

    def test_singular_at_nominal(self):
        """Test a denominator vanishing at theta*."""
        with pytest.raises(ParameterSingularityError):
            load_system(_with("A", "-1/t1"))

    def test_normalize_needs_nonzero_nominal(self):
        """Test normalize with a zero nominal entry."""
        text = SCALAR_SYSTEM + "\n[options]\nnormalize = true\n"
        with pytest.raises(SystemFormatError):
            load_system(text)


class TestParamMatrix:
    """Tests for ParamMatrix."""

    def test_ragged_rows(self):
        """Test rows of different widths are rejected."""
        with pytest.raises(ShapeMismatchError):
            ParamMatrix.from_rows([[1.0, 2.0], [3.0]])

    def test_constant_eval(self):
        """Test a constant matrix evaluates to itself."""
        values = np.array([[1.0, -2.0], [0.5, 4.0]])
        assert eval_at(ParamMatrix.constant(values), [0.0]) == pytest.approx(values)

    def test_stacking(self):
        """Test hstack/vstack shapes."""
        a = ParamMatrix.zeros(2, 1)
        b = ParamMatrix.zeros(2, 3)
        assert ParamMatrix.hstack([a, b]).shape == (2, 4)
        with pytest.raises(ShapeMismatchError):
            ParamMatrix.vstack([a, b])


class TestCascade:
    """Tests for the nominal/error cascade."""

    @pytest.fixture
    def cascade(self):
        return build_cascade(load_system(SCALAR_SYSTEM))

    def test_cascade_matrices(self, cascade):
        """Test block structure at theta = (1, 0)."""
        numeric = cascade.at([1.0, 0.0])
        assert numeric.A == pytest.approx(np.array([[-3.0, 0.0], [-1.0, -2.0]]))
        assert numeric.B == pytest.approx(np.array([[-1.0], [0.0]]))
        assert numeric.C == pytest.approx(np.array([[2.0, 0.0], [1.0, 1.0]]))
        assert numeric.D == pytest.approx(np.zeros((2, 1)))

    def test_zero_mismatch_at_nominal(self, cascade):
        """Test the error channel vanishes at theta*."""
        channel = mismatch_channel(cascade, [0.0, 0.0])
        assert channel.C.shape == (1, 2)
        assert channel.dc_gain() == pytest.approx(np.zeros((1, 1)), abs=1e-12)

    def test_full_output_channel(self, cascade):
        """Test full_output keeps both output blocks."""
        assert mismatch_channel(cascade, [0.5, 0.5], full_output=True).p == 2

    def test_delta_blocks(self, cascade):
        """Test the mismatch output rows."""
        assert cascade.C_delta.shape == (1, 2)
        assert cascade.D_delta.is_zero


class TestGrid:
    """Tests for parameter boxes, grids and the Hurwitz sample check."""

    @pytest.fixture
    def system(self):
        return load_system(SCALAR_SYSTEM)

    def test_infer_box_from_domain(self, system):
        """Test quadratic domain polynomials bound each parameter."""
        box = infer_box(system)
        assert box[0] == pytest.approx((-1.5, 1.5))
        assert box[1] == pytest.approx((-1.0, 1.0))

    def test_infer_box_unbounded(self):
        """Test a parameter without bounds."""
        system = load_system(_with("domain", "g1 = -(t1 + 1.5)*(t1 - 1.5)"))
        with pytest.raises(BoxInferenceError):
            infer_box(system)

    def test_grid_order(self):
        """Test points are in lexicographic order, first axis slowest."""
        grid = parameter_grid(((0.0, 1.0), (0.0, 2.0)), 3, shrink=0.0)
        assert len(grid) == 9
        assert grid.shape == (3, 3)
        assert list(grid.points[1]) == pytest.approx([0.0, 1.0])
        assert list(grid.points[3]) == pytest.approx([0.5, 0.0])
        assert grid.indices[-1] == (2, 2)

    def test_grid_shrink(self):
        """Test the inset from the box boundary."""
        grid = parameter_grid(((0.0, 10.0),), 2, shrink=0.1)
        assert list(grid.axes[0]) == pytest.approx([1.0, 9.0])

    def test_grid_resolution_checks(self):
        """Test invalid resolutions."""
        with pytest.raises(ValueError):
            parameter_grid(((0.0, 1.0),), 1)
        with pytest.raises(ValueError):
            parameter_grid(((0.0, 1.0), (0.0, 1.0)), [3])

    def test_domain_mask(self, system):
        """Test points outside the domain are masked out."""
        points = np.array([[0.0, 0.0], [2.0, 0.0], [1.0, -1.0]])
        assert domain_mask(system, points).tolist() == [True, False, True]

    def test_hurwitz_all_stable(self, system):
        """Test the box is Hurwitz for the scalar plant."""
        grid = parameter_grid(infer_box(system), 5)
        report = hurwitz_sample_check(system, grid.points)
        assert report.all_stable
        assert report.max_abscissa < 0.0

    def test_hurwitz_flags_unstable_point(self, system):
        """Test an unstable point is flagged by index."""
        report = hurwitz_sample_check(system, [[0.0, 0.0], [2.0, 1.5]])
        assert not report.all_stable
        assert report.flagged == [1]
        assert report.to_dict()["flagged"] == [[2.0, 1.5]]
