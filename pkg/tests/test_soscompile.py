"""
Tests for Layer 4: SOS Compiler

Run with: pytest -q
"""
import json

import pytest

from gainscope.config import SolverSettings
from gainscope.polycore import Polynomial
from gainscope.sdpsolve import SolverStatus
from gainscope.soscompile import (
    AffinePoly,
    BilinearityError,
    CertificateStatus,
    DenominatorCertificationError,
    GramOverflowError,
    PendingDenominatorError,
    REASON_GRAM,
    REASON_MATCH,
    SosProgram,
    box_average,
    box_moment,
    certificate_summary,
    certify_positive,
    clear_and_certify_denominator,
    interval_bounds,
    nominal_value,
    recover_and_validate,
    revalidate,
)


T1 = Polynomial.variable("t1")
X1 = Polynomial.variable("x1")


def square_bound_program() -> SosProgram:
    """min gamma with gamma - t1^2 >= 0 on 1 - t1^2 >= 0 (optimum 1)."""
    program = SosProgram("square")
    gamma = program.free("gamma")
    program.add_sos_constraint(gamma.poly() - T1 * T1, domain=[1.0 - T1 * T1], label="bound")
    program.minimize(gamma.poly())
    return program


class TestAffinePoly:
    """Tests for decision-affine polynomials."""

    def test_products(self):
        """Test constant factors keep expressions affine."""
        program = SosProgram()
        p = program.free("p", ["t1"], 1)
        expr = p.poly() * (T1 + 2.0)
        assert expr.degree_in(["t1"]) == 2
        assert set(expr.refs()) == set(p.refs())

    def test_bilinear_rejected(self):
        """Test the product of two decision polynomials."""
        program = SosProgram()
        p = program.free("p")
        q = program.free("q")
        with pytest.raises(BilinearityError):
            p.poly() * q.poly()

    def test_duplicate_declaration(self):
        """Test decision names are unique."""
        program = SosProgram()
        program.free("p")
        with pytest.raises(ValueError):
            program.free("p")


class TestObjectiveHelpers:
    """Tests for objective functionals."""

    def test_box_moment(self):
        """Test means of powers over an interval."""
        assert box_moment(0, -1.0, 3.0) == 1.0
        assert box_moment(1, -1.0, 3.0) == pytest.approx(1.0)
        assert box_moment(2, -1.0, 1.0) == pytest.approx(1.0 / 3.0)

    def test_box_average_and_nominal(self):
        """Test box average and nominal evaluation of a decision polynomial."""
        program = SosProgram()
        p = program.free("p", ["t1"], 2)
        coeffs, _ = box_average(p.poly(), {"t1": (-1.0, 1.0)}).linear_functional()
        by_index = {ref[1]: value for ref, value in coeffs.items()}
        # basis 1, t1, t1^2
        assert by_index[0] == pytest.approx(1.0)
        assert by_index.get(1, 0.0) == pytest.approx(0.0)
        assert by_index[2] == pytest.approx(1.0 / 3.0)
        nominal, _ = nominal_value(p.poly(), {"t1": 0.0}).linear_functional()
        assert {ref[1] for ref in nominal} == {0}


class TestCompileAndSolve:
    """Tests for compilation and solving."""

    @pytest.fixture
    def solver_settings(self):
        return SolverSettings(tol=1e-9)

    def test_square_bound(self, solver_settings):
        """Test the tightest constant above t1^2 on [-1, 1]."""
        program = square_bound_program()
        compiled, solution = program.solve(solver_settings)
        assert solution.status == SolverStatus.OPTIMAL
        assert compiled.objective_value(solution) == pytest.approx(1.0, abs=1e-5)

    def test_maximize(self, solver_settings):
        """Test maximize reports the stated sense."""
        program = SosProgram("lower")
        eps = program.free("eps")
        program.add_sos_constraint(T1 * T1 + 0.5 - eps.poly(), label="floor")
        program.maximize(eps.poly())
        compiled, solution = program.solve(solver_settings)
        assert compiled.objective_value(solution) == pytest.approx(0.5, abs=1e-5)

    def test_infeasible_state_form(self, solver_settings):
        """Test x1^2 t1 is not SOS without a domain."""
        program = SosProgram("odd")
        program.add_sos_constraint(AffinePoly(X1 * X1 * T1), label="odd")
        _, solution = program.solve(solver_settings)
        assert solution.status == SolverStatus.INFEASIBLE

    def test_basis_pruned(self):
        """Test monomials whose square nothing can match leave the Gram basis."""
        program = SosProgram("pruned")
        program.add_sos_constraint(AffinePoly(X1 * X1 + X1 * X1 * T1), label="lean")
        program.add_sos_constraint(AffinePoly(X1 * X1 * T1), label="odd")
        compiled = program.compile()
        (lean,) = compiled.grams_for(0)
        assert lean.decision.basis == [X1]
        assert compiled.grams_for(1) == []
        assert any(not row.entries and not row.free and row.rhs != 0.0 for row in compiled.problem.rows)

    def test_equality(self, solver_settings):
        """Test coefficientwise equality pins a free polynomial."""
        program = SosProgram("match")
        p = program.free("p", ["t1"], 1)
        program.add_equality(p.poly() - (1.0 + 2.0 * T1))
        compiled, solution = program.solve(solver_settings)
        certificate = recover_and_validate(program, compiled, solution)
        assert certificate.decisions["p"].eval({"t1": 1.0}) == pytest.approx(3.0, abs=1e-7)

    def test_gram_overflow(self):
        """Test the Gram basis cap."""
        program = SosProgram("big", gram_cap=3)
        gamma = program.free("gamma")
        program.add_sos_constraint(gamma.poly() - T1 ** 8)
        with pytest.raises(GramOverflowError):
            program.compile()

    def test_pending_denominator(self):
        """Test compile refuses constraints with uncleared denominators."""
        program = SosProgram("pending")
        gamma = program.free("gamma")
        program.add_sos_constraint(gamma.poly() - T1, pending=[(T1 + 2.0, 1)])
        with pytest.raises(PendingDenominatorError):
            program.compile()

    def test_sdpa_export(self, solver_settings, tmp_path):
        """Test the compiled SDP is written when an export path is set."""
        path = tmp_path / "nested" / "square.dat-s"
        program = square_bound_program()
        program.solve(SolverSettings(tol=1e-9, sdpa_export=path))
        assert path.exists()
        assert path.read_text(encoding="utf-8").startswith('"gainscope export')


class TestCertificates:
    """Tests for certificate recovery and revalidation."""

    @pytest.fixture
    def certificate(self):
        program = square_bound_program()
        compiled, solution = program.solve(SolverSettings(tol=1e-9))
        return recover_and_validate(program, compiled, solution)

    def test_valid(self, certificate):
        """Test a solved program yields a valid certificate."""
        assert certificate.status == CertificateStatus.VALID
        assert certificate.is_valid
        assert certificate.coeff_residual <= certificate.match_tol
        assert certificate.min_eig >= -certificate.psd_tol
        assert certificate_summary(certificate)["status"] == "valid"

    def test_json_round_trip_revalidates(self, certificate):
        """Test revalidation from JSON text."""
        again = revalidate(certificate.to_json())
        assert again.is_valid
        assert again.objective == pytest.approx(certificate.objective)

    def test_tampered_gram_entry(self, certificate):
        """Test changing a Gram entry breaks the coefficient match."""
        data = json.loads(certificate.to_json())
        data["constraints"][0]["gram"]["matrix"][0][0] += 0.5
        again = revalidate(data)
        assert again.status == CertificateStatus.INVALID
        assert REASON_MATCH in again.reasons

    def test_negative_gram(self, certificate):
        """Test an indefinite Gram matrix is reported."""
        data = certificate.to_dict()
        data["constraints"][0]["gram"]["matrix"][0][0] = -1.0
        again = revalidate(data)
        assert REASON_GRAM in again.reasons

    def test_tolerance_override(self, certificate):
        """Test revalidate applies new tolerances."""
        again = revalidate(certificate, psd_tol=1e-3, match_tol=1e-3)
        assert again.psd_tol == 1e-3
        assert again.is_valid


class TestDenominators:
    """Tests for denominator positivity and clearing."""

    def test_interval_bounds(self):
        """Test term-wise interval enclosure."""
        assert interval_bounds(2.0 * T1 + 1.0, {"t1": (-1.0, 2.0)}) == (-1.0, 5.0)
        assert interval_bounds(T1 * T1, {"t1": (-1.0, 2.0)}) == (0.0, 4.0)

    def test_constant(self):
        """Test constant denominators."""
        assert certify_positive(Polynomial.constant(2.0)) == ("constant", 2.0)
        with pytest.raises(DenominatorCertificationError):
            certify_positive(Polynomial.constant(-1.0))

    def test_interval_method(self):
        """Test a denominator bounded away from zero on the box."""
        method, lower = certify_positive(1.0 + 0.5 * T1, box={"t1": (-1.0, 1.0)})
        assert method == "interval"
        assert lower == pytest.approx(0.5)

    def test_sos_method(self):
        """Test SOS evidence where interval arithmetic is too loose."""
        d = T1 * T1 - T1 + 1.0
        method, lower = certify_positive(d, domain=[1.0 - T1 * T1], box={"t1": (-1.0, 1.0)})
        assert method == "sos"
        assert lower == pytest.approx(0.75, abs=1e-4)

    def test_sign_change(self):
        """Test a denominator crossing zero on the domain."""
        with pytest.raises(DenominatorCertificationError):
            certify_positive(T1, domain=[1.0 - T1 * T1], box={"t1": (-1.0, 1.0)})

    def test_clear_pending(self):
        """Test clearing a pending denominator records provenance."""
        program = SosProgram("cleared")
        gamma = program.free("gamma")
        constraint = program.add_sos_constraint(
            gamma.poly() - T1, domain=[1.0 - T1 * T1], pending=[(T1 + 2.0, 1)]
        )
        clear_and_certify_denominator(constraint, T1 + 2.0, 1, box={"t1": (-1.0, 1.0)})
        assert constraint.pending == []
        assert constraint.provenance[0].method == "interval"
        program.minimize(gamma.poly())
        compiled, solution = program.solve(SolverSettings(tol=1e-9))
        assert compiled.objective_value(solution) == pytest.approx(1.0, abs=1e-5)
