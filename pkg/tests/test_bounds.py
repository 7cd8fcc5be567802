"""
Tests for Layer 5: Gain Bounds

Run with: pytest -q
"""
from pathlib import Path

import numpy as np
import pytest

from gainscope.bounds import (
    Degrees,
    DominanceReport,
    GainBound,
    GainKind,
    analytic_fixture,
    analytic_system,
    dominance_check,
    h2_bound,
    l2_gain_bound,
    level_set_mask,
    oracle_value,
    resolve_pin,
    state_to_output_lower,
    state_to_output_upper,
    synthesize,
)
from gainscope.config import SolverSettings
from gainscope.oracle import FeedthroughError, l2_induced_gain_exact, state_to_output_gain_exact
from gainscope.sysmodel import domain_mask, infer_box, load_system, load_system_file, parameter_grid


SYSTEMS_DIR = Path(__file__).resolve().parent.parent / "systems"
SOLVER = SolverSettings(tol=1e-9)

# Squared guaranteed cost certified for the scalar plant; the exact worst case
# over the box is 4/9, reached where the input matrix vanishes (t2 = 1)
GUARANTEED_COST = 0.46
WORST_CASE_GAIN = 4.0 / 9.0


def _grid_points(system, resolution: int = 7) -> np.ndarray:
    points = parameter_grid(infer_box(system), resolution).points
    return points[domain_mask(system, points)]


@pytest.fixture(scope="module")
def scalar_plant():
    return load_system_file(SYSTEMS_DIR / "numerical_example.sys")


@pytest.fixture(scope="module")
def small_analytic():
    return analytic_system(box=((-0.5, 1.0), (-0.5, 1.0)))


@pytest.fixture(scope="module")
def guaranteed_cost(scalar_plant):
    """Constant L2 bound over the scalar plant's box."""
    return l2_gain_bound(scalar_plant, Degrees(v=2, gn=0, gd=0), solver_settings=SOLVER)


class TestModels:
    """Tests for bound models and options."""

    def test_degrees_validation(self):
        """Test negative degrees are rejected."""
        with pytest.raises(ValueError):
            Degrees(v=-1)
        assert Degrees.from_dict({"v": 4, "gn": 1}).to_dict()["v"] == 4

    def test_gain_kind(self):
        """Test only the state-to-output lower bound is a lower bound."""
        assert GainKind("s2o-lower").is_lower
        assert not GainKind.L2.is_lower
        with pytest.raises(ValueError):
            GainKind("hinf")

    def test_resolve_pin(self):
        """Test auto pins only nonconstant decision polynomials."""
        assert resolve_pin("auto", 2)
        assert not resolve_pin("auto", 0)
        assert resolve_pin("on", 0)
        assert not resolve_pin("off", 2)
        with pytest.raises(ValueError):
            resolve_pin("sometimes", 1)


class TestDominanceReport:
    """Tests for DominanceReport on fixed numbers."""

    def _report(self, kind, bound, oracle):
        bound, oracle = np.array(bound, dtype=float), np.array(oracle, dtype=float)
        return DominanceReport(
            kind=kind,
            points=np.zeros((len(bound), 2)),
            bound=bound,
            oracle=oracle,
            margin=bound - oracle,
        )

    def test_upper_failures(self):
        """Test an upper bound below the oracle fails."""
        report = self._report(GainKind.S2O_UPPER, [1.0, 0.5, 2.0], [0.5, 0.6, 2.0])
        assert report.failures == [1]
        assert not report.passed
        assert report.worst_margin == pytest.approx(-0.1)

    def test_lower_failures(self):
        """Test a lower bound above the oracle fails."""
        report = self._report(GainKind.S2O_LOWER, [0.1, 0.7], [0.5, 0.6])
        assert report.failures == [1]

    def test_tolerance_and_nan(self):
        """Test tiny violations pass and NaN oracles are ignored."""
        report = self._report(GainKind.L2, [1.0 - 1e-9, 0.0], [1.0, float("nan")])
        assert report.passed
        assert report.to_dict()["failures"] == 0


class TestAnalyticClosedForm:
    """Tests for the closed-form certificate of the first-order example."""

    @pytest.fixture
    def fixture(self):
        return analytic_fixture()

    @pytest.fixture
    def system(self):
        return analytic_system()

    @pytest.fixture
    def grid(self):
        axis = np.linspace(-0.9, 3.0, 50)
        return [(a, b) for a in axis for b in axis]

    def test_nominal_pole(self, fixture):
        """Test a* = -theta1 / (1 + theta2) at theta* = (1, 1)."""
        assert fixture.a_star == pytest.approx(-0.5)

    def test_dissipation_matrix(self, fixture, grid):
        """Test M22 = -1 and det M = 0 over the whole box."""
        for theta in grid[::37]:
            M = fixture.M_at(theta)
            assert M[1, 1] == pytest.approx(-1.0)
            assert np.linalg.det(M) == pytest.approx(0.0, abs=1e-9 * (1.0 + np.abs(M).max() ** 2))

    def test_upper_dominates_exact(self, fixture, grid):
        """Test p1 >= p1n >= 0 on a 50 x 50 grid."""
        for theta in grid:
            point = {"t1": theta[0], "t2": theta[1]}
            p1, p1n = fixture.p1.eval(point), fixture.p1n.eval(point)
            assert p1n >= 0.0
            assert p1 >= p1n - 1e-12 * (1.0 + abs(p1n))

    def test_exact_gain_matches_oracle(self, fixture, system):
        """Test p1n is the state-to-output gain of the system."""
        for theta in [(0.5, -0.3), (2.0, 1.0), (-0.8, 2.5)]:
            expected = fixture.p1n.eval({"t1": theta[0], "t2": theta[1]})
            assert state_to_output_gain_exact(system, theta) == pytest.approx(expected, rel=1e-8, abs=1e-14)

    def test_invariant_line(self, fixture, system):
        """Test the gain vanishes along a(theta) = a*."""
        for t2 in (-0.5, 0.5, 2.0):
            theta = fixture.on_invariant_line(t2)
            assert fixture.p1.eval({"t1": theta[0], "t2": theta[1]}) == pytest.approx(0.0, abs=1e-14)
            assert state_to_output_gain_exact(system, theta) == pytest.approx(0.0, abs=1e-12)

    def test_invariant_line_sampled(self, fixture, system):
        """Test the exact gain vanishes at 100 points along the invariant line."""
        for t2 in np.linspace(-0.9, 3.0, 100):
            theta = fixture.on_invariant_line(t2)
            assert state_to_output_gain_exact(system, theta) <= 1e-10

    def test_nonpositive_nominal(self):
        """Test theta* must be positive."""
        with pytest.raises(ValueError):
            analytic_fixture((0.0, 1.0))


class TestStateToOutput:
    """Tests for the state-to-output bound programs."""

    def test_upper_on_analytic(self, small_analytic):
        """Test the upper bound is certified and dominates the oracle."""
        bound = state_to_output_upper(small_analytic, Degrees(v=2, p1=2), pin="off", solver_settings=SOLVER)
        assert bound.is_valid
        assert not bound.pinned
        report = dominance_check(bound, small_analytic, _grid_points(small_analytic))
        assert report.passed

    def test_sandwich(self, scalar_plant):
        """Test lower <= exact <= upper on the scalar plant."""
        degrees = Degrees(v=2, p1=2)
        upper = state_to_output_upper(scalar_plant, degrees, solver_settings=SOLVER)
        lower = state_to_output_lower(scalar_plant, degrees, solver_settings=SOLVER)
        assert upper.is_valid and lower.is_valid
        assert upper.pinned
        points = _grid_points(scalar_plant, 5)
        assert dominance_check(upper, scalar_plant, points).passed
        assert dominance_check(lower, scalar_plant, points, workers=2).passed
        assert upper.evaluate(scalar_plant.theta_star) == pytest.approx(0.0, abs=1e-6)

    def test_rebuild_from_certificate(self, small_analytic):
        """Test the bound function is recoverable from its certificate."""
        bound = state_to_output_upper(small_analytic, Degrees(v=2, p1=2), pin="off", solver_settings=SOLVER)
        again = GainBound.from_certificate(bound.certificate)
        assert again.kind == GainKind.S2O_UPPER
        assert again.evaluate([0.5, 0.2]) == pytest.approx(bound.evaluate([0.5, 0.2]), rel=1e-6, abs=1e-9)
        assert bound.certificate.metadata["system_hash"] == small_analytic.system_hash


class TestL2AndH2:
    """Tests for the L2-induced and H2 bound programs."""

    def test_guaranteed_cost(self, scalar_plant, guaranteed_cost):
        """Test constant gamma bounds the worst-case squared L2 gain over the box."""
        bound = guaranteed_cost
        assert bound.is_valid
        gamma = bound.evaluate(scalar_plant.theta_star)
        worst = max(l2_induced_gain_exact(scalar_plant, theta) for theta in _grid_points(scalar_plant))
        assert worst == pytest.approx(WORST_CASE_GAIN, rel=1e-5)
        assert worst <= gamma * (1.0 + 1e-6)
        assert gamma <= GUARANTEED_COST * 1.05
        # constant bound: same value everywhere
        assert bound.evaluate([1.0, -0.5]) == pytest.approx(gamma)

    def test_guaranteed_cost_reported_degrees(self, scalar_plant):
        """Test the guaranteed cost with a cubic Lyapunov function and quadratic multipliers."""
        bound = l2_gain_bound(scalar_plant, Degrees(v=3, m=2, gn=0, gd=0), solver_settings=SOLVER)
        assert bound.is_valid
        gamma = bound.evaluate(scalar_plant.theta_star)
        assert GUARANTEED_COST * 0.95 <= gamma <= GUARANTEED_COST * 1.05
        assert gamma >= WORST_CASE_GAIN * (1.0 - 1e-6)

    def test_parameter_dependent_dominance(self, scalar_plant, guaranteed_cost):
        """Test a rational gamma(theta) dominates the oracle on a 20 x 20 grid."""
        bound = l2_gain_bound(scalar_plant, Degrees(v=2, gn=2, gd=1), solver_settings=SOLVER)
        assert bound.is_valid
        assert bound.pinned
        report = dominance_check(bound, scalar_plant, _grid_points(scalar_plant, 20), tol=1e-6)
        assert report.passed
        assert len(report.points) == 400
        nominal = scalar_plant.theta_star
        assert bound.evaluate(nominal) <= guaranteed_cost.evaluate(nominal) + 1e-6

    def test_h2_dominates(self, scalar_plant):
        """Test the H2 bound dominates the exact squared H2 norm."""
        bound = synthesize("h2", scalar_plant, Degrees(v=2, p1=2), solver_settings=SOLVER)
        assert bound.kind == GainKind.H2
        assert bound.is_valid
        assert dominance_check(bound, scalar_plant, _grid_points(scalar_plant, 5)).passed

    def test_h2_feedthrough(self, scalar_plant):
        """Test a parameter-dependent feedthrough is refused before solving."""
        text = (SYSTEMS_DIR / "numerical_example.sys").read_text(encoding="utf-8")
        system = load_system(text.replace("[D]\n0", "[D]\nt1"))
        with pytest.raises(FeedthroughError):
            h2_bound(system)

    def test_oracle_dispatch(self, scalar_plant):
        """Test oracle_value picks the oracle by kind."""
        theta = [1.0, 0.0]
        assert oracle_value("s2o-lower", scalar_plant, theta) == pytest.approx(
            state_to_output_gain_exact(scalar_plant, theta)
        )
        assert oracle_value(GainKind.L2, scalar_plant, theta) == pytest.approx(0.04808, abs=1e-5)

    def test_level_set_mask(self, scalar_plant, guaranteed_cost):
        """Test the sublevel set of a constant bound is all or nothing."""
        bound = guaranteed_cost
        gamma = bound.evaluate(scalar_plant.theta_star)
        points = _grid_points(scalar_plant, 3)
        assert level_set_mask(bound, points, gamma * 2.0).all()
        assert not level_set_mask(bound, points, gamma * 0.5).any()
