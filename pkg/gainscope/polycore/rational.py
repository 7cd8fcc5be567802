"""
gainscope - Rational Functions

Ratios of polynomials used for rational parameter dependence of system
matrices. No polynomial gcd is taken; the canonical form only removes the
scalar factor of the denominator. Common denominators reuse factors found
by exact division.
"""
from numbers import Real
from typing import Dict, List, Mapping, Sequence, Tuple, Union

from .polynomial import Polynomial, canonical_variables


class ZeroDenominatorError(Exception):
    """Raised when a rational function would have the zero polynomial as denominator."""
    pass


def _as_poly(value) -> Polynomial:
    if isinstance(value, Polynomial):
        return value
    if isinstance(value, Real):
        return Polynomial.constant(float(value))
    raise TypeError(f"Cannot use {type(value).__name__} as a polynomial")


class RationalFunction:
    """
    num / den with den nonzero.

    Canonical form: a constant denominator is folded into the numerator;
    otherwise both are divided by the coefficient of the denominator's
    highest grlex term, so that term has coefficient 1.
    """

    __slots__ = ("_num", "_den")

    def __init__(self, num: Union[Polynomial, float], den: Union[Polynomial, float] = 1.0):
        num = _as_poly(num)
        den = _as_poly(den)
        if den.is_zero:
            raise ZeroDenominatorError("Denominator is the zero polynomial")

        if den.is_constant:
            num = num.scale(1.0 / den.constant_term)
            den = Polynomial.constant(1.0)
        else:
            lead = den.sorted_terms()[-1][1]
            if lead != 1.0:
                num = num.scale(1.0 / lead)
                den = den.scale(1.0 / lead)
        if num.is_zero:
            den = Polynomial.constant(1.0)

        self._num = num.drop_unused()
        self._den = den.drop_unused()

    @classmethod
    def coerce(cls, value) -> "RationalFunction":
        if isinstance(value, RationalFunction):
            return value
        return cls(_as_poly(value))

    @property
    def num(self) -> Polynomial:
        return self._num

    @property
    def den(self) -> Polynomial:
        return self._den

    @property
    def is_polynomial(self) -> bool:
        return self._den.is_constant

    @property
    def is_zero(self) -> bool:
        return self._num.is_zero

    @property
    def variables(self) -> Tuple[str, ...]:
        return canonical_variables(self._num.variables + self._den.variables)

    def as_polynomial(self) -> Polynomial:
        """Return the numerator when the denominator is 1."""
        if not self.is_polynomial:
            raise ValueError(f"Not a polynomial: {self}")
        return self._num

    # ==================== ARITHMETIC ====================

    def __add__(self, other):
        try:
            other = RationalFunction.coerce(other)
        except TypeError:
            return NotImplemented
        if self._den == other._den:
            return RationalFunction(self._num + other._num, self._den)
        return RationalFunction(
            self._num * other._den + other._num * self._den,
            self._den * other._den,
        )

    __radd__ = __add__

    def __neg__(self) -> "RationalFunction":
        return RationalFunction(-self._num, self._den)

    def __sub__(self, other):
        try:
            other = RationalFunction.coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        try:
            other = RationalFunction.coerce(other)
        except TypeError:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        try:
            other = RationalFunction.coerce(other)
        except TypeError:
            return NotImplemented
        if other._den.is_constant:
            return RationalFunction(self._num * other._num, self._den)
        if self._den.is_constant:
            return RationalFunction(self._num * other._num, other._den)
        return RationalFunction(self._num * other._num, self._den * other._den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        try:
            other = RationalFunction.coerce(other)
        except TypeError:
            return NotImplemented
        if other.is_zero:
            raise ZeroDenominatorError("Division by the zero rational function")
        return self * RationalFunction(other._den, other._num)

    def __rtruediv__(self, other):
        try:
            other = RationalFunction.coerce(other)
        except TypeError:
            return NotImplemented
        return other / self

    def __pow__(self, power: int) -> "RationalFunction":
        if not isinstance(power, int) or power < 0:
            raise ValueError(f"Power must be a nonnegative integer, got {power!r}")
        return RationalFunction(self._num ** power, self._den ** power)

    def __eq__(self, other) -> bool:
        try:
            other = RationalFunction.coerce(other)
        except TypeError:
            return NotImplemented
        return self._num == other._num and self._den == other._den

    def __hash__(self) -> int:
        return hash((self._num.key(), self._den.key()))

    # ==================== EVALUATION ====================

    def eval(self, point: Mapping[str, float]) -> float:
        """Evaluate at a {name: value} point."""
        return self._num.eval(point) / self._den.eval(point)

    def eval_parts(self, point: Mapping[str, float]) -> Tuple[float, float]:
        """Numerator and denominator values, for singularity checks."""
        return self._num.eval(point), self._den.eval(point)

    def substitute(self, mapping: Mapping[str, Union[Polynomial, float]]) -> "RationalFunction":
        return RationalFunction(self._num.substitute(mapping), self._den.substitute(mapping))

    def to_string(self, precision: int = 17) -> str:
        if self.is_polynomial:
            return self._num.to_string(precision)
        return f"({self._num.to_string(precision)})/({self._den.to_string(precision)})"

    def __str__(self) -> str:
        return self.to_string()

    def __repr__(self) -> str:
        return f"RationalFunction({self.to_string()!r})"


Entry = Union[RationalFunction, Polynomial, float]


def _split(den: Polynomial, factors: List[Polynomial]) -> Tuple[float, Dict[int, int]]:
    """Divide den by known factors as often as exactly possible; new leftovers join the factors."""
    rest = den
    counts: Dict[int, int] = {}
    for i, factor in enumerate(list(factors)):
        while not rest.is_constant:
            quotient, remainder = rest.divide(factor)
            if not remainder.is_zero:
                break
            rest = quotient
            counts[i] = counts.get(i, 0) + 1
    if rest.is_constant:
        return rest.constant_term, counts
    factors.append(rest)
    counts[len(factors) - 1] = 1
    return 1.0, counts


def clear_denominators(
    entries: Sequence[Sequence[Entry]],
) -> Tuple[List[List[Polynomial]], Polynomial]:
    """
    Put a matrix of rational entries over one common denominator.

    Denominators are split into powers of shared factors by exact division,
    lowest degree first, and the common denominator carries each factor at
    its highest power: 1/(1+t) and 1/(1+t)^2 share (1+t)^2. Factors that
    do not divide one another are multiplied; no factorization beyond that
    is attempted, and entry = numerator / d holds exactly.

    Returns:
        (numerator matrix, common denominator d)
    """
    rows = [[RationalFunction.coerce(value) for value in row] for row in entries]

    distinct: Dict[Tuple, Polynomial] = {}
    for row in rows:
        for value in row:
            if value.den.is_zero:
                raise ZeroDenominatorError("Zero denominator in matrix entry")
            if not value.den.is_constant:
                distinct.setdefault(value.den.key(), value.den)

    factors: List[Polynomial] = []
    splits: Dict[Tuple, Tuple[float, Dict[int, int]]] = {}
    for key in sorted(distinct, key=lambda k: (distinct[k].degree(), k)):
        splits[key] = _split(distinct[key], factors)

    powers = [0] * len(factors)
    for _, counts in splits.values():
        for i, k in counts.items():
            powers[i] = max(powers[i], k)

    common = Polynomial.constant(1.0)
    for factor, power in zip(factors, powers):
        common = common * factor ** power

    cofactors: Dict[Tuple, Polynomial] = {}
    for key, (scale, counts) in splits.items():
        other = Polynomial.constant(1.0 / scale)
        for i, (factor, power) in enumerate(zip(factors, powers)):
            other = other * factor ** (power - counts.get(i, 0))
        cofactors[key] = other

    numerators: List[List[Polynomial]] = []
    for row in rows:
        out_row = []
        for value in row:
            if value.den.is_constant:
                out_row.append(value.num * common)
            else:
                out_row.append(value.num * cofactors[value.den.key()])
        numerators.append(out_row)
    return numerators, common
