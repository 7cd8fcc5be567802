"""
Tests for Layer 2: Exact Gain Oracles

Run with: pytest -q
"""
import math

import numpy as np
import pytest

from gainscope.oracle import (
    FeedthroughError,
    NotHurwitzError,
    frequency_sweep_peak,
    h2_norm_exact,
    h2_norm_quadrature,
    hinf_norm_squared,
    l2_induced_gain_exact,
    lyapunov_residual,
    lyapunov_solve,
    observability_gramian,
    state_to_output_gain_exact,
)
from gainscope.sysmodel import NumericStateSpace, build_cascade, load_system, mismatch_channel


SCALAR_SYSTEM = """
[dims]
1, 1, 1, 2

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

# |G(jw)|^2 = (w^2 + 1) / ((w^2 + 4)(w^2 + 9)) at theta = (1, 0), peak at w^2 = sqrt(24) - 1
PEAK_W2 = math.sqrt(24.0) - 1.0
PEAK_GAIN_SQ = (PEAK_W2 + 1.0) / ((PEAK_W2 + 4.0) * (PEAK_W2 + 9.0))


class TestGramian:
    """Tests for Lyapunov solves."""

    def test_scalar(self):
        """Test -2a P + 1 = 0 gives P = 1/(2a)."""
        result = lyapunov_solve(np.array([[-4.0]]), np.array([[1.0]]))
        assert result.P[0, 0] == pytest.approx(1.0 / 8.0)
        assert not result.flagged

    def test_residual_small(self):
        """Test a random stable system solves to a tiny residual."""
        rng = np.random.default_rng(0)
        A = rng.normal(size=(5, 5)) - 6.0 * np.eye(5)
        C = rng.normal(size=(2, 5))
        result = observability_gramian(A, C)
        assert np.allclose(result.P, result.P.T)
        assert lyapunov_residual(A, C.T @ C, result.P) < 1e-9
        assert np.all(np.linalg.eigvalsh(result.Wo) > 0)

    def test_not_hurwitz(self):
        """Test an unstable matrix raises."""
        with pytest.raises(NotHurwitzError):
            lyapunov_solve(np.array([[0.5]]), np.array([[1.0]]))

    def test_shape_mismatch(self):
        """Test incompatible A and Q."""
        with pytest.raises(ValueError):
            lyapunov_solve(np.eye(2) * -1.0, np.eye(3))


class TestNorms:
    """Tests for system norms on fixed state-space models."""

    @pytest.fixture
    def first_order(self):
        # 1 / (s + 1)
        return NumericStateSpace(np.array([[-1.0]]), np.array([[1.0]]), np.array([[1.0]]), np.array([[0.0]]))

    def test_hinf_first_order(self, first_order):
        """Test ||1/(s+1)||_inf^2 = 1."""
        assert hinf_norm_squared(first_order) == pytest.approx(1.0, rel=1e-7)

    def test_hinf_with_feedthrough(self):
        """Test 1/(s+1) + 1 peaks at DC with value 2."""
        ns = NumericStateSpace(np.array([[-1.0]]), np.array([[1.0]]), np.array([[1.0]]), np.array([[1.0]]))
        assert hinf_norm_squared(ns) == pytest.approx(4.0, rel=1e-7)

    def test_hinf_zero_system(self):
        """Test a zero output gives a zero norm."""
        ns = NumericStateSpace(np.array([[-1.0]]), np.array([[1.0]]), np.array([[0.0]]), np.array([[0.0]]))
        assert hinf_norm_squared(ns) == 0.0

    def test_sweep_agrees_with_bisection(self):
        """Test the frequency sweep matches bisection on a resonant system."""
        ns = NumericStateSpace(
            np.array([[0.0, 1.0], [-4.0, -0.4]]),
            np.array([[0.0], [1.0]]),
            np.array([[1.0, 0.0]]),
            np.array([[0.0]]),
        )
        peak, w = frequency_sweep_peak(ns)
        assert peak ** 2 == pytest.approx(hinf_norm_squared(ns), rel=1e-6)
        assert w == pytest.approx(2.0, rel=0.05)

    def test_h2_quadrature(self, first_order):
        """Test ||1/(s+1)||_2^2 = 1/2 by quadrature."""
        assert h2_norm_quadrature(first_order) == pytest.approx(0.5, rel=1e-8)

    def test_hinf_unstable(self):
        """Test an unstable system raises."""
        ns = NumericStateSpace(np.array([[1.0]]), np.array([[1.0]]), np.array([[1.0]]), np.array([[0.0]]))
        with pytest.raises(NotHurwitzError):
            hinf_norm_squared(ns)


class TestMismatchGains:
    """Tests for exact mismatch gains of the scalar plant."""

    @pytest.fixture
    def system(self):
        return load_system(SCALAR_SYSTEM)

    def test_zero_at_nominal(self, system):
        """Test every gain vanishes at theta*."""
        assert state_to_output_gain_exact(system, [0.0, 0.0]) == pytest.approx(0.0, abs=1e-14)
        assert l2_induced_gain_exact(system, [0.0, 0.0]) == pytest.approx(0.0, abs=1e-14)
        assert h2_norm_exact(system, [0.0, 0.0]) == pytest.approx(0.0, abs=1e-14)

    def test_state_to_output_closed_form(self, system):
        """Test dy = x0 (2 e^-3t - e^-2t) integrates to 7/60 at theta = (1, 0)."""
        assert state_to_output_gain_exact(system, [1.0, 0.0]) == pytest.approx(7.0 / 60.0, rel=1e-9)

    def test_l2_closed_form(self, system):
        """Test the peak of (w^2 + 1) / ((w^2 + 4)(w^2 + 9))."""
        assert l2_induced_gain_exact(system, [1.0, 0.0]) == pytest.approx(PEAK_GAIN_SQ, rel=1e-6)
        assert PEAK_GAIN_SQ == pytest.approx(0.04808, abs=1e-5)

    def test_l2_cross_check(self, system):
        """Test the default sweep cross-check keeps the bisection value."""
        value = l2_induced_gain_exact(system, [0.5, -0.5])
        assert value == pytest.approx(l2_induced_gain_exact(system, [0.5, -0.5], cross_check=False))

    def test_l2_bisection_fallback(self, system, caplog):
        """Test a bisection that runs out of iterations falls back to the sweep peak."""
        with caplog.at_level("WARNING", logger="gainscope.oracle.gains"):
            value = l2_induced_gain_exact(system, [1.0, 0.0], max_iter=1)
        assert value == pytest.approx(PEAK_GAIN_SQ, rel=1e-6)
        assert "using sweep peak" in caplog.text

    def test_h2_gramian_matches_quadrature(self, system):
        """Test the Gramian H2 value against frequency integration."""
        theta = [-1.0, 0.5]
        channel = mismatch_channel(build_cascade(system), theta)
        assert h2_norm_exact(system, theta) == pytest.approx(h2_norm_quadrature(channel), rel=1e-6)

    def test_accepts_cascade(self, system):
        """Test oracles accept a prebuilt cascade."""
        cascade = build_cascade(system)
        assert state_to_output_gain_exact(cascade, [1.0, 0.0]) == pytest.approx(
            state_to_output_gain_exact(system, [1.0, 0.0])
        )

    def test_unstable_point(self, system):
        """Test a non-Hurwitz parameter point raises."""
        with pytest.raises(NotHurwitzError):
            l2_induced_gain_exact(system, [2.0, 1.5])

    def test_h2_feedthrough(self):
        """Test H2 refuses a channel with nonzero dD."""
        text = SCALAR_SYSTEM.replace("[nominal]", "[D]\nt1\n\n[nominal]")
        system = load_system(text)
        with pytest.raises(FeedthroughError):
            h2_norm_exact(system, [1.0, 0.0])
