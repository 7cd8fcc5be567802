"""
gainscope - Polynomial Core (Layer 1)

Sparse multivariate polynomials, rational functions and their text form.
"""
from .polynomial import (
    Polynomial,
    UnknownVariableError,
    ROLE_ORDER,
    binomial_count,
    canonical_variables,
    grlex_key,
    monomial_exponents,
    monomials_up_to,
    variable_key,
)
from .rational import RationalFunction, ZeroDenominatorError, clear_denominators
from .parser import ParseError, parse_polynomial, parse_rational, tokenize

__all__ = [
    # Polynomials
    "Polynomial",
    "UnknownVariableError",
    "ROLE_ORDER",
    "binomial_count",
    "canonical_variables",
    "grlex_key",
    "monomial_exponents",
    "monomials_up_to",
    "variable_key",
    # Rational functions
    "RationalFunction",
    "ZeroDenominatorError",
    "clear_denominators",
    # Parser
    "ParseError",
    "parse_polynomial",
    "parse_rational",
    "tokenize",
]
