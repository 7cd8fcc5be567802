"""
gainscope - Affine Decision Polynomials

Polynomials whose coefficients depend affinely on unknown decision scalars:
const(v) + sum_r ref_r * coeff_r(v), with v the indeterminates.
"""
from numbers import Real
from typing import Dict, Iterable, Mapping, Optional, Tuple, Union

from ..polycore import Polynomial, canonical_variables


# (decision name, scalar index)
VarRef = Tuple[str, int]

PolyLike = Union[Polynomial, float, int]


class BilinearityError(Exception):
    """Raised when two decision-dependent expressions are multiplied."""
    pass


def _poly(value: PolyLike) -> Polynomial:
    if isinstance(value, Polynomial):
        return value
    if isinstance(value, Real):
        return Polynomial.constant(float(value))
    raise TypeError(f"Cannot use {type(value).__name__} as a polynomial")


def _derivative(poly: Polynomial, name: str) -> Polynomial:
    if name not in poly.variables:
        return Polynomial.zero()
    return poly.derivative(name)


class AffinePoly:
    """
    Polynomial affine in decision scalars.

    `owners` names the decision polynomials the linear part comes from;
    it is used to report the offending pair when a product is not affine.
    """

    __slots__ = ("const", "linear", "owners")

    def __init__(
        self,
        const: Optional[PolyLike] = None,
        linear: Optional[Mapping[VarRef, PolyLike]] = None,
        owners: Iterable[str] = (),
    ):
        self.const = _poly(const) if const is not None else Polynomial.zero()
        self.linear: Dict[VarRef, Polynomial] = {}
        for ref, coeff in (linear or {}).items():
            coeff = _poly(coeff)
            if not coeff.is_zero:
                self.linear[ref] = coeff
        self.owners = tuple(sorted(set(owners) | {ref[0] for ref in self.linear}))

    @classmethod
    def coerce(cls, value) -> "AffinePoly":
        if isinstance(value, AffinePoly):
            return value
        return cls(const=value)

    @classmethod
    def decision(cls, ref: VarRef, coeff: PolyLike = 1.0) -> "AffinePoly":
        return cls(linear={ref: coeff})

    # ==================== INSPECTION ====================

    @property
    def is_constant(self) -> bool:
        """True if no decision scalar appears."""
        return not self.linear

    def refs(self) -> Tuple[VarRef, ...]:
        return tuple(sorted(self.linear))

    def variables(self) -> Tuple[str, ...]:
        names = list(self.const.used_variables())
        for coeff in self.linear.values():
            names.extend(coeff.used_variables())
        return canonical_variables(names)

    def polynomials(self) -> Iterable[Polynomial]:
        yield self.const
        for ref in sorted(self.linear):
            yield self.linear[ref]

    def degree_in(self, names: Iterable[str]) -> int:
        names = list(names)
        return max((p.degree_in(names) for p in self.polynomials()), default=0)

    def degree(self) -> int:
        return max((p.degree() for p in self.polynomials()), default=0)

    # ==================== ARITHMETIC ====================

    def __add__(self, other) -> "AffinePoly":
        other = AffinePoly.coerce(other)
        linear = dict(self.linear)
        for ref, coeff in other.linear.items():
            linear[ref] = linear[ref] + coeff if ref in linear else coeff
        return AffinePoly(self.const + other.const, linear, self.owners + other.owners)

    __radd__ = __add__

    def __neg__(self) -> "AffinePoly":
        return AffinePoly(-self.const, {r: -c for r, c in self.linear.items()}, self.owners)

    def __sub__(self, other) -> "AffinePoly":
        return self + (-AffinePoly.coerce(other))

    def __rsub__(self, other) -> "AffinePoly":
        return AffinePoly.coerce(other) + (-self)

    def __mul__(self, other) -> "AffinePoly":
        if isinstance(other, AffinePoly):
            if not self.is_constant and not other.is_constant:
                raise BilinearityError(
                    f"Product of decision polynomials {', '.join(self.owners)} and "
                    f"{', '.join(other.owners)} is not affine"
                )
            if self.is_constant:
                return other * self.const
            return self * other.const
        factor = _poly(other)
        return AffinePoly(
            self.const * factor,
            {r: c * factor for r, c in self.linear.items()},
            self.owners,
        )

    __rmul__ = __mul__

    # ==================== TRANSFORMS ====================

    def map(self, fn) -> "AffinePoly":
        """Apply a linear map Polynomial -> Polynomial to every part."""
        return AffinePoly(fn(self.const), {r: fn(c) for r, c in self.linear.items()}, self.owners)

    def derivative(self, name: str) -> "AffinePoly":
        return self.map(lambda p: _derivative(p, name))

    def lie_derivative(self, field: Mapping[str, Polynomial]) -> "AffinePoly":
        """sum_k d(self)/d(v_k) * field[v_k]."""
        names = list(field)

        def apply(p: Polynomial) -> Polynomial:
            total = Polynomial.zero()
            for name in names:
                total = total + _derivative(p, name) * field[name]
            return total

        return self.map(apply)

    def substitute(self, mapping: Mapping[str, Union[Polynomial, float]]) -> "AffinePoly":
        return self.map(lambda p: p.substitute(mapping))

    def evaluate(self, values: Mapping[VarRef, float]) -> Polynomial:
        """Numeric polynomial for given decision values (missing refs count as 0)."""
        result = self.const
        for ref in sorted(self.linear):
            value = values.get(ref, 0.0)
            if value != 0.0:
                result = result + self.linear[ref] * float(value)
        return result

    def linear_functional(self) -> Tuple[Dict[VarRef, float], float]:
        """
        Coefficients of an expression with constant polynomial parts.

        Raises:
            ValueError: If some part still depends on an indeterminate
        """
        for p in self.polynomials():
            if not p.is_constant:
                raise ValueError("Objective must be a scalar (no indeterminates left)")
        return (
            {r: c.constant_term for r, c in sorted(self.linear.items()) if c.constant_term != 0.0},
            self.const.constant_term,
        )

    def __repr__(self) -> str:
        return f"AffinePoly(const={self.const!s}, refs={len(self.linear)}, owners={self.owners})"
