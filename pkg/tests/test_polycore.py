"""
Tests for Layer 1: Polynomial Core

Run with: pytest -q
"""
import numpy as np
import pytest

from gainscope.polycore import (
    ParseError,
    Polynomial,
    RationalFunction,
    UnknownVariableError,
    ZeroDenominatorError,
    binomial_count,
    canonical_variables,
    clear_denominators,
    monomials_up_to,
    parse_polynomial,
    parse_rational,
)


class TestPolynomial:
    """Tests for Polynomial arithmetic and inspection."""

    @pytest.fixture
    def x(self):
        return Polynomial.variable("x1")

    @pytest.fixture
    def t(self):
        return Polynomial.variable("t1")

    def test_add_and_cancel(self, x, t):
        """Test that adding a term and its negation gives zero."""
        p = x * t + 3.0
        assert (p - x * t - 3.0).is_zero

    def test_divide(self, x, t):
        """Test exact and inexact division by one polynomial."""
        quotient, remainder = ((t + 1.0) ** 2 * x).divide(t + 1.0)
        assert remainder.is_zero
        assert quotient == (t + 1.0) * x
        quotient, remainder = (t * t + 3.0).divide(t + 1.0)
        assert quotient == t - 1.0
        assert remainder == Polynomial.constant(4.0)
        with pytest.raises(ZeroDivisionError):
            t.divide(Polynomial.zero())

    def test_canonical_variable_order(self):
        """Test state variables sort before parameters."""
        assert canonical_variables(["t2", "x1", "e1", "t1", "u1"]) == ("x1", "e1", "u1", "t1", "t2")
        assert canonical_variables(["x10", "x2"]) == ("x2", "x10")

    def test_degree_and_degree_in(self, x, t):
        """Test total and partial degrees."""
        p = x * x * t + t ** 3
        assert p.degree() == 3
        assert p.degree_in(["x1"]) == 2
        assert p.degree_in(["t1"]) == 3

    def test_coefficient_by_name(self, x, t):
        """Test coefficient lookup by {name: power}."""
        p = 2.0 * x * t - 5.0 * t
        assert p.coefficient({"x1": 1, "t1": 1}) == 2.0
        assert p.coefficient({"t1": 1}) == -5.0
        assert p.coefficient({"z1": 1}) == 0.0

    def test_pow(self, t):
        """Test integer powers."""
        p = (t + 1.0) ** 2
        assert p == t * t + 2.0 * t + 1.0
        with pytest.raises(ValueError):
            t ** -1

    def test_derivative(self, x, t):
        """Test partial derivative."""
        p = x * x * t + 4.0 * x
        assert p.derivative("x1") == 2.0 * x * t + 4.0
        assert p.derivative("t1") == x * x

    def test_derivative_unknown_variable(self, x):
        """Test derivative by an undeclared variable raises."""
        with pytest.raises(UnknownVariableError):
            x.derivative("t1")

    def test_substitute_composition(self, t):
        """Test substituting a polynomial for a variable."""
        p = t * t
        q = p.substitute({"t1": Polynomial.variable("t2") + 1.0})
        assert q.eval({"t2": 2.0}) == 9.0

    def test_eval_and_eval_grid_agree(self, x, t):
        """Test pointwise and vectorized evaluation agree."""
        p = 1.5 * x * t - t ** 2 + 0.25
        xs = np.linspace(-1, 1, 5)
        ts = np.linspace(0, 2, 5)
        grid = p.eval_grid({"x1": xs, "t1": ts})
        for i in range(5):
            assert grid[i] == pytest.approx(p.eval({"x1": xs[i], "t1": ts[i]}), abs=1e-14)

    def test_eval_missing_value(self, x):
        """Test evaluating without a value for a used variable raises."""
        with pytest.raises(ValueError):
            x.eval({"t1": 1.0})

    def test_truncate(self, x):
        """Test small coefficients are dropped."""
        p = x + 1e-14
        assert p.truncate(1e-12) == x

    def test_to_string_round_trip(self, x, t):
        """Test canonical text reparses to the same polynomial."""
        p = 0.1 * x * t - 3.0 * t ** 2 + 1e-5
        assert parse_polynomial(p.to_string()) == p

    def test_monomials_up_to(self):
        """Test monomial basis size and grlex order."""
        basis = monomials_up_to(["t1", "t2"], 2)
        assert len(basis) == binomial_count(2, 2) == 6
        assert basis[0] == Polynomial.constant(1.0)
        assert basis[1] == Polynomial.variable("t1")
        assert basis[2] == Polynomial.variable("t2")
        assert [b.degree() for b in basis] == [0, 1, 1, 2, 2, 2]

    def test_hash_ignores_unused_variables(self, x):
        """Test equal polynomials over different variable lists hash alike."""
        assert hash(x.align(["x1", "t1"])) == hash(x)


class TestRationalFunction:
    """Tests for RationalFunction."""

    def test_constant_denominator_folded(self):
        """Test a constant denominator is folded into the numerator."""
        r = RationalFunction(Polynomial.variable("t1"), 2.0)
        assert r.is_polynomial
        assert r.num == Polynomial.variable("t1") * 0.5

    def test_leading_coefficient_normalized(self):
        """Test the denominator's highest grlex term has coefficient 1."""
        t = Polynomial.variable("t1")
        r = RationalFunction(t, 2.0 * t + 4.0)
        assert r.den.coefficient({"t1": 1}) == 1.0
        assert r.eval({"t1": 1.0}) == pytest.approx(1.0 / 6.0)

    def test_zero_denominator(self):
        """Test zero denominator raises."""
        with pytest.raises(ZeroDenominatorError):
            RationalFunction(1.0, Polynomial.zero())

    def test_arithmetic(self):
        """Test sum and quotient of rational functions."""
        t = Polynomial.variable("t1")
        a = RationalFunction(1.0, t + 1.0)
        b = RationalFunction(t, t + 1.0)
        assert (a + b).eval({"t1": 3.0}) == pytest.approx(1.0)
        assert (a / b).eval({"t1": 2.0}) == pytest.approx(0.5)

    def test_clear_denominators(self):
        """Test a matrix over a common denominator reproduces each entry."""
        t1, t2 = Polynomial.variable("t1"), Polynomial.variable("t2")
        rows = [
            [RationalFunction(1.0, t1 + 2.0), RationalFunction(t2)],
            [RationalFunction(t2, t2 + 3.0), 4.0],
        ]
        numerators, d = clear_denominators(rows)
        point = {"t1": 0.5, "t2": -0.25}
        for i in range(2):
            for j in range(2):
                expected = RationalFunction.coerce(rows[i][j]).eval(point)
                assert numerators[i][j].eval(point) / d.eval(point) == pytest.approx(expected)

    def test_clear_denominators_shared_factor(self):
        """Test powers of one factor share the highest power instead of multiplying."""
        t1, t2 = Polynomial.variable("t1"), Polynomial.variable("t2")
        base = t2 + 1.0
        rows = [[RationalFunction(1.0, base), RationalFunction(1.0, base * base)]]
        numerators, d = clear_denominators(rows)
        assert d.degree() == 2
        assert d == base * base
        assert numerators[0][0] == base
        assert numerators[0][1] == Polynomial.constant(1.0)

        rows.append([RationalFunction(t1, base * (t1 + 2.0)), 3.0])
        numerators, d = clear_denominators(rows)
        assert d.degree() == 3
        point = {"t1": 0.3, "t2": -0.6}
        for i, row in enumerate(rows):
            for j, value in enumerate(row):
                expected = RationalFunction.coerce(value).eval(point)
                assert numerators[i][j].eval(point) / d.eval(point) == pytest.approx(expected)


class TestParser:
    """Tests for the expression parser."""

    def test_parse_polynomial(self):
        """Test a polynomial expression parses with precedence."""
        p = parse_polynomial("-3 + t1 + 2*t2^2")
        assert p.eval({"t1": 1.0, "t2": 2.0}) == 6.0

    def test_parse_rational(self):
        """Test a rational expression parses."""
        r = parse_rational("-t1/(1 + t2)")
        assert r.eval({"t1": 2.0, "t2": 1.0}) == -1.0

    def test_scientific_notation(self):
        """Test scientific notation numbers."""
        assert parse_polynomial("1.5e-3*t1").coefficient({"t1": 1}) == 1.5e-3

    def test_unary_minus_on_group(self):
        """Test unary minus applied to a parenthesized product."""
        g = parse_polynomial("-(t1 + 1.5)*(t1 - 1.5)")
        assert g.eval({"t1": 0.0}) == 2.25

    def test_not_a_polynomial(self):
        """Test parse_polynomial rejects rational input."""
        with pytest.raises(ParseError):
            parse_polynomial("1/t1")

    def test_error_column(self):
        """Test parse errors carry a 1-based column."""
        with pytest.raises(ParseError) as exc:
            parse_rational("t1 + $")
        assert exc.value.column == 6

    def test_allowed_identifiers(self):
        """Test identifier whitelist."""
        with pytest.raises(ParseError):
            parse_polynomial("t3 + 1", allowed=["t1", "t2"])

    def test_fractional_exponent_rejected(self):
        """Test non-integer exponents are rejected."""
        with pytest.raises(ParseError):
            parse_polynomial("t1^1.5")
