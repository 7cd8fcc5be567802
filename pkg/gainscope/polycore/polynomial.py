"""
gainscope - Sparse Multivariate Polynomials

Immutable polynomials with real coefficients over named indeterminates.
Terms are kept in a dict keyed by exponent tuples; every iteration that
feeds output or summation walks the terms in graded lexicographic order.
"""
import math
import re
from itertools import combinations_with_replacement
from numbers import Real
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np


Exponent = Tuple[int, ...]

# Role order for canonical variable sorting: state, error, input,
# scalarization, parameter, frequency.
ROLE_ORDER = ("x", "e", "u", "z", "t", "s")

_NAME_RE = re.compile(r"^([A-Za-z_]+?)(\d*)$")


class UnknownVariableError(Exception):
    """Raised when an operation names a variable the polynomial does not have."""
    pass


def variable_key(name: str) -> Tuple[int, str, int]:
    """Sort key placing variables by role, then prefix, then index."""
    match = _NAME_RE.match(name)
    if match is None:
        return (len(ROLE_ORDER) + 1, name, 0)
    prefix, digits = match.groups()
    role = ROLE_ORDER.index(prefix) if prefix in ROLE_ORDER else len(ROLE_ORDER)
    return (role, prefix, int(digits) if digits else 0)


def canonical_variables(names: Iterable[str]) -> Tuple[str, ...]:
    """Deduplicate and sort variable names into canonical order."""
    return tuple(sorted(set(names), key=variable_key))


def grlex_key(exponent: Exponent) -> Tuple[int, Tuple[int, ...]]:
    """Graded lexicographic sort key (ascending; earlier variables first within a degree)."""
    return (sum(exponent), tuple(-a for a in exponent))


def monomial_exponents(n: int, d: int) -> List[Exponent]:
    """All exponent vectors in n variables with total degree <= d, grlex order."""
    if d < 0:
        raise ValueError(f"degree must be >= 0, got {d}")
    result: List[Exponent] = []
    for total in range(d + 1):
        if n == 0:
            if total == 0:
                result.append(())
            continue
        for combo in combinations_with_replacement(range(n), total):
            exponent = [0] * n
            for index in combo:
                exponent[index] += 1
            result.append(tuple(exponent))
    result.sort(key=grlex_key)
    return result


class Polynomial:
    """
    Sparse polynomial with float coefficients.

    Variables are stored in canonical order; exponent tuples have one entry
    per variable. The zero polynomial has an empty term map. Instances are
    never mutated after construction.
    """

    __slots__ = ("_vars", "_terms")

    def __init__(
        self,
        variables: Sequence[str] = (),
        terms: Optional[Mapping[Exponent, float]] = None,
        drop_tol: float = 0.0,
    ):
        """
        Create a polynomial.

        Args:
            variables: Variable names; reordered canonically
            terms: Map exponent tuple (in the given variable order) -> coefficient
            drop_tol: Terms with |coefficient| <= drop_tol are discarded
                (0 keeps every nonzero coefficient)
        """
        names = tuple(variables)
        if len(set(names)) != len(names):
            raise ValueError(f"Duplicate variable names: {names}")
        canonical = canonical_variables(names)
        order = [names.index(v) for v in canonical]

        cleaned: Dict[Exponent, float] = {}
        for exponent, coeff in (terms or {}).items():
            if len(exponent) != len(names):
                raise ValueError(
                    f"Exponent {exponent} has length {len(exponent)}, expected {len(names)}"
                )
            if any(a < 0 for a in exponent):
                raise ValueError(f"Negative exponent in {exponent}")
            key = tuple(int(exponent[i]) for i in order)
            value = cleaned.get(key, 0.0) + float(coeff)
            cleaned[key] = value

        self._vars = canonical
        self._terms = {
            e: c for e, c in cleaned.items()
            if c != 0.0 and abs(c) > drop_tol
        }

    @classmethod
    def _raw(cls, variables: Tuple[str, ...], terms: Dict[Exponent, float]) -> "Polynomial":
        """Build from already-canonical data without validation."""
        obj = cls.__new__(cls)
        obj._vars = variables
        obj._terms = terms
        return obj

    # ==================== CONSTRUCTORS ====================

    @classmethod
    def zero(cls, variables: Sequence[str] = ()) -> "Polynomial":
        return cls(variables)

    @classmethod
    def constant(cls, value: float, variables: Sequence[str] = ()) -> "Polynomial":
        """Constant polynomial."""
        names = tuple(variables)
        return cls(names, {(0,) * len(names): float(value)})

    @classmethod
    def variable(cls, name: str) -> "Polynomial":
        """The polynomial consisting of a single indeterminate."""
        return cls((name,), {(1,): 1.0})

    @classmethod
    def monomial(
        cls,
        variables: Sequence[str],
        exponent: Sequence[int],
        coeff: float = 1.0,
    ) -> "Polynomial":
        return cls(tuple(variables), {tuple(exponent): coeff})

    # ==================== INSPECTION ====================

    @property
    def variables(self) -> Tuple[str, ...]:
        return self._vars

    @property
    def nvars(self) -> int:
        return len(self._vars)

    @property
    def terms(self) -> Dict[Exponent, float]:
        """Copy of the term map."""
        return dict(self._terms)

    @property
    def is_zero(self) -> bool:
        return not self._terms

    @property
    def is_constant(self) -> bool:
        return all(sum(e) == 0 for e in self._terms)

    @property
    def constant_term(self) -> float:
        return self._terms.get((0,) * len(self._vars), 0.0)

    def degree(self) -> int:
        """Total degree (0 for the zero polynomial)."""
        return max((sum(e) for e in self._terms), default=0)

    def degree_in(self, names: Iterable[str]) -> int:
        """Maximum total degree in the given subset of variables."""
        wanted = set(names)
        idx = [i for i, v in enumerate(self._vars) if v in wanted]
        return max((sum(e[i] for i in idx) for e in self._terms), default=0)

    def used_variables(self) -> Tuple[str, ...]:
        """Variables appearing with a positive exponent in some term."""
        return tuple(
            v for i, v in enumerate(self._vars)
            if any(e[i] > 0 for e in self._terms)
        )

    def sorted_terms(self) -> List[Tuple[Exponent, float]]:
        """Terms in ascending graded lexicographic order."""
        return sorted(self._terms.items(), key=lambda item: grlex_key(item[0]))

    def coefficient(self, exponent: Union[Exponent, Mapping[str, int]]) -> float:
        """Coefficient of a monomial, given as exponent tuple or {name: power}."""
        if isinstance(exponent, Mapping):
            for name in exponent:
                if name not in self._vars and exponent[name] != 0:
                    return 0.0
            exponent = tuple(int(exponent.get(v, 0)) for v in self._vars)
        return self._terms.get(tuple(exponent), 0.0)

    def max_abs_coefficient(self) -> float:
        return max((abs(c) for c in self._terms.values()), default=0.0)

    def key(self) -> Tuple:
        """Hashable canonical form independent of unused variables."""
        items = []
        for exponent, coeff in self._terms.items():
            named = tuple((v, a) for v, a in zip(self._vars, exponent) if a)
            items.append((named, coeff))
        items.sort()
        return tuple(items)

    def __hash__(self) -> int:
        return hash(self.key())

    # ==================== ALIGNMENT ====================

    def align(self, variables: Iterable[str]) -> "Polynomial":
        """Re-express over a superset of variables."""
        target = canonical_variables(list(variables) + list(self._vars))
        if target == self._vars:
            return self
        missing = [v for v in self.used_variables() if v not in target]
        if missing:
            raise UnknownVariableError(f"Variables {missing} not in target list")
        positions = [target.index(v) for v in self._vars]
        terms: Dict[Exponent, float] = {}
        for exponent, coeff in self._terms.items():
            new = [0] * len(target)
            for pos, a in zip(positions, exponent):
                new[pos] = a
            terms[tuple(new)] = coeff
        return Polynomial._raw(target, terms)

    def terms_in(self, variables: Sequence[str]) -> Dict[Exponent, float]:
        """Term map with exponents indexed by an explicit variable list."""
        index = {v: i for i, v in enumerate(variables)}
        for v in self.used_variables():
            if v not in index:
                raise UnknownVariableError(f"Variable '{v}' not in {tuple(variables)}")
        mapped = [index.get(v) for v in self._vars]
        result: Dict[Exponent, float] = {}
        for exponent, coeff in self._terms.items():
            new = [0] * len(variables)
            for pos, a in zip(mapped, exponent):
                if a:
                    new[pos] = a
            result[tuple(new)] = coeff
        return result

    def drop_unused(self) -> "Polynomial":
        """Remove variables that appear in no term."""
        used = self.used_variables()
        if used == self._vars:
            return self
        return Polynomial._raw(used, self.terms_in(used))

    def _aligned(self, other: "Polynomial"):
        if self._vars == other._vars:
            return self._vars, self._terms, other._terms
        target = canonical_variables(self._vars + other._vars)
        return target, self.align(target)._terms, other.align(target)._terms

    # ==================== ARITHMETIC ====================

    def _coerce(self, other) -> Optional["Polynomial"]:
        if isinstance(other, Polynomial):
            return other
        if isinstance(other, Real):
            return Polynomial.constant(float(other), self._vars)
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        variables, a, b = self._aligned(other)
        out = dict(a)
        for exponent, coeff in b.items():
            value = out.get(exponent, 0.0) + coeff
            if value == 0.0:
                out.pop(exponent, None)
            else:
                out[exponent] = value
        return Polynomial._raw(variables, out)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial._raw(self._vars, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def scale(self, factor: float) -> "Polynomial":
        factor = float(factor)
        if factor == 0.0:
            return Polynomial._raw(self._vars, {})
        return Polynomial._raw(self._vars, {e: c * factor for e, c in self._terms.items()})

    def __mul__(self, other):
        if isinstance(other, Real):
            return self.scale(other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        variables, a, b = self._aligned(other)
        out: Dict[Exponent, float] = {}
        for ea, ca in a.items():
            for eb, cb in b.items():
                exponent = tuple(x + y for x, y in zip(ea, eb))
                out[exponent] = out.get(exponent, 0.0) + ca * cb
        return Polynomial._raw(variables, {e: c for e, c in out.items() if c != 0.0})

    def __rmul__(self, other):
        if isinstance(other, Real):
            return self.scale(other)
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, Real):
            if other == 0:
                raise ZeroDivisionError("polynomial division by zero")
            return self.scale(1.0 / float(other))
        return NotImplemented

    def divide(self, other: "Polynomial", tol: float = 1e-12) -> Tuple["Polynomial", "Polynomial"]:
        """
        Divide by one polynomial, leading terms in graded lexicographic order.

        Returns (quotient, remainder) with self = quotient * other + remainder.
        Coefficients at or below tol times the largest coefficient of self
        are treated as cancelled.
        """
        if other.is_zero:
            raise ZeroDivisionError("polynomial division by zero")
        variables, p, q = self._aligned(other)
        lead, lead_coeff = max(q.items(), key=lambda item: grlex_key(item[0]))
        cutoff = tol * max((abs(c) for c in p.values()), default=0.0)
        p = dict(p)
        quotient: Dict[Exponent, float] = {}
        remainder: Dict[Exponent, float] = {}
        while p:
            exponent, coeff = max(p.items(), key=lambda item: grlex_key(item[0]))
            if abs(coeff) <= cutoff:
                del p[exponent]
                continue
            if any(a < b for a, b in zip(exponent, lead)):
                remainder[exponent] = coeff
                del p[exponent]
                continue
            shift = tuple(a - b for a, b in zip(exponent, lead))
            factor = coeff / lead_coeff
            quotient[shift] = quotient.get(shift, 0.0) + factor
            for eq, cq in q.items():
                key = tuple(x + y for x, y in zip(shift, eq))
                value = p.get(key, 0.0) - factor * cq
                if key == exponent or value == 0.0:
                    p.pop(key, None)
                else:
                    p[key] = value
        return Polynomial._raw(variables, quotient), Polynomial._raw(variables, remainder)

    def __pow__(self, power: int) -> "Polynomial":
        if not isinstance(power, int) or power < 0:
            raise ValueError(f"Polynomial power must be a nonnegative integer, got {power!r}")
        result = Polynomial.constant(1.0, self._vars)
        base = self
        while power:
            if power & 1:
                result = result * base
            power >>= 1
            if power:
                base = base * base
        return result

    def __eq__(self, other) -> bool:
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        _, a, b = self._aligned(other)
        return a == b

    def truncate(self, tol: float) -> "Polynomial":
        """Drop terms with |coefficient| <= tol."""
        return Polynomial._raw(
            self._vars, {e: c for e, c in self._terms.items() if abs(c) > tol}
        )

    # ==================== CALCULUS & COMPOSITION ====================

    def derivative(self, name: str) -> "Polynomial":
        """Formal partial derivative with respect to a declared variable."""
        if name not in self._vars:
            raise UnknownVariableError(f"Unknown variable '{name}' (have {self._vars})")
        i = self._vars.index(name)
        out: Dict[Exponent, float] = {}
        for exponent, coeff in self._terms.items():
            a = exponent[i]
            if a == 0:
                continue
            new = exponent[:i] + (a - 1,) + exponent[i + 1:]
            out[new] = coeff * a
        return Polynomial._raw(self._vars, out)

    def substitute(self, mapping: Mapping[str, Union["Polynomial", float]]) -> "Polynomial":
        """Replace variables by polynomials or numbers (composition)."""
        replaced = {v for v in mapping if v in self._vars}
        if not replaced:
            return self
        keep = tuple(v for v in self._vars if v not in replaced)
        keep_idx = [self._vars.index(v) for v in keep]
        powers: Dict[Tuple[str, int], Polynomial] = {}

        def power_of(name: str, a: int) -> Polynomial:
            key = (name, a)
            if key not in powers:
                value = mapping[name]
                if not isinstance(value, Polynomial):
                    value = Polynomial.constant(float(value))
                powers[key] = value ** a
            return powers[key]

        result = Polynomial.zero(keep)
        for exponent, coeff in self.sorted_terms():
            kept = tuple(exponent[i] for i in keep_idx)
            term = Polynomial._raw(keep, {kept: coeff})
            for i, v in enumerate(self._vars):
                if v in replaced and exponent[i]:
                    term = term * power_of(v, exponent[i])
            result = result + term
        return result

    # ==================== EVALUATION ====================

    def _point_vector(self, point) -> List[float]:
        if isinstance(point, Mapping):
            values = []
            for v in self._vars:
                if v not in point:
                    if v in self.used_variables():
                        raise ValueError(f"No value given for variable '{v}'")
                    values.append(0.0)
                else:
                    values.append(float(point[v]))
            return values
        values = [float(x) for x in point]
        if len(values) != len(self._vars):
            raise ValueError(
                f"Point has {len(values)} values for {len(self._vars)} variables {self._vars}"
            )
        return values

    def eval(self, point: Union[Sequence[float], Mapping[str, float]]) -> float:
        """
        Evaluate at a point.

        Args:
            point: Values in canonical variable order, or a {name: value} map

        Returns:
            Value, summed in grlex term order
        """
        values = self._point_vector(point)
        total = 0.0
        for exponent, coeff in self.sorted_terms():
            term = coeff
            for x, a in zip(values, exponent):
                if a:
                    term *= x ** a
            total += term
        return total

    def eval_grid(self, values: Mapping[str, np.ndarray]) -> np.ndarray:
        """Vectorized evaluation over broadcastable arrays keyed by variable name."""
        arrays = {}
        for v in self.used_variables():
            if v not in values:
                raise ValueError(f"No values given for variable '{v}'")
            arrays[v] = np.asarray(values[v], dtype=float)
        shape = np.broadcast_shapes(*(a.shape for a in arrays.values())) if arrays else ()
        total = np.zeros(shape)
        for exponent, coeff in self.sorted_terms():
            term = np.full(shape, coeff)
            for v, a in zip(self._vars, exponent):
                if a:
                    term = term * arrays[v] ** a
            total = total + term
        return total

    # ==================== TEXT ====================

    def to_string(self, precision: int = 17) -> str:
        """Render as text the parser reads back, highest-degree terms first."""
        if not self._terms:
            return "0"
        parts: List[str] = []
        for exponent, coeff in reversed(self.sorted_terms()):
            factors = []
            for v, a in zip(self._vars, exponent):
                if a == 1:
                    factors.append(v)
                elif a > 1:
                    factors.append(f"{v}^{a}")
            magnitude = abs(coeff)
            if factors and magnitude == 1.0:
                body = "*".join(factors)
            else:
                body = "*".join([format(magnitude, f".{precision}g")] + factors)
            if not parts:
                parts.append(("-" if coeff < 0 else "") + body)
            else:
                parts.append((" - " if coeff < 0 else " + ") + body)
        return "".join(parts)

    def __str__(self) -> str:
        return self.to_string()

    def __repr__(self) -> str:
        return f"Polynomial({self.to_string()!r})"


def monomials_up_to(variables: Sequence[str], d: int) -> List[Polynomial]:
    """
    All monomials of total degree <= d, graded lexicographic order.

    The count is C(n + d, d) for n variables.
    """
    names = canonical_variables(variables)
    return [
        Polynomial._raw(names, {exponent: 1.0})
        for exponent in monomial_exponents(len(names), d)
    ]


def binomial_count(n: int, d: int) -> int:
    return math.comb(n + d, d)
