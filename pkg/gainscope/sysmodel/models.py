"""
gainscope - System Models

Parameter-dependent matrices, uncertain systems, their cascade form and
numeric instantiations at a fixed parameter point.
"""
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from ..polycore import Polynomial, RationalFunction


DEFAULT_SINGULAR_TOL = 1e-12


class ShapeMismatchError(Exception):
    """Raised when system matrix shapes are inconsistent."""
    pass


class NominalOutsideDomainError(Exception):
    """Raised when the nominal parameter violates a domain inequality."""
    pass


class ParameterSingularityError(Exception):
    """Raised when a denominator vanishes (|den| <= tolerance) at a parameter point."""
    pass


def parameter_names(count: int) -> Tuple[str, ...]:
    """Canonical parameter identifiers t1..tk."""
    return tuple(f"t{i + 1}" for i in range(count))


def theta_point(names: Sequence[str], theta: Sequence[float]) -> Dict[str, float]:
    """Map a parameter vector onto its identifiers."""
    values = [float(v) for v in np.asarray(theta, dtype=float).ravel()]
    if len(values) != len(names):
        raise ValueError(f"Parameter vector has {len(values)} entries, expected {len(names)}")
    return dict(zip(names, values))


Scalar = Union[RationalFunction, Polynomial, float]


@dataclass(frozen=True)
class ParamMatrix:
    """
    Matrix with rational-function entries in the parameters.
    """
    entries: Tuple[Tuple[RationalFunction, ...], ...]
    shape: Tuple[int, int]

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[Scalar]], ncols: Optional[int] = None) -> "ParamMatrix":
        """Build from nested rows; entries are coerced to RationalFunction."""
        converted = tuple(tuple(RationalFunction.coerce(v) for v in row) for row in rows)
        widths = {len(row) for row in converted}
        if len(widths) > 1:
            raise ShapeMismatchError(f"Ragged rows with widths {sorted(widths)}")
        if ncols is None:
            ncols = widths.pop() if widths else 0
        elif widths and widths.pop() != ncols:
            raise ShapeMismatchError(f"Rows do not have {ncols} columns")
        return cls(converted, (len(converted), ncols))

    @classmethod
    def constant(cls, values: np.ndarray) -> "ParamMatrix":
        values = np.atleast_2d(np.asarray(values, dtype=float))
        return cls.from_rows([[float(v) for v in row] for row in values], ncols=values.shape[1])

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "ParamMatrix":
        return cls.from_rows([[0.0] * ncols for _ in range(nrows)], ncols=ncols)

    @property
    def nrows(self) -> int:
        return self.shape[0]

    @property
    def ncols(self) -> int:
        return self.shape[1]

    def __getitem__(self, index: Tuple[int, int]) -> RationalFunction:
        i, j = index
        return self.entries[i][j]

    def rows(self) -> List[List[RationalFunction]]:
        return [list(row) for row in self.entries]

    def block(self, rows: slice, cols: slice) -> "ParamMatrix":
        selected = [list(row[cols]) for row in self.entries[rows]]
        width = len(range(*cols.indices(self.ncols)))
        return ParamMatrix.from_rows(selected, ncols=width)

    def map(self, fn: Callable[[RationalFunction], Scalar]) -> "ParamMatrix":
        return ParamMatrix.from_rows([[fn(v) for v in row] for row in self.entries], ncols=self.ncols)

    def __sub__(self, other: "ParamMatrix") -> "ParamMatrix":
        if self.shape != other.shape:
            raise ShapeMismatchError(f"Cannot subtract {other.shape} from {self.shape}")
        return ParamMatrix.from_rows(
            [[a - b for a, b in zip(ra, rb)] for ra, rb in zip(self.entries, other.entries)],
            ncols=self.ncols,
        )

    @staticmethod
    def hstack(blocks: Sequence["ParamMatrix"]) -> "ParamMatrix":
        nrows = {b.nrows for b in blocks}
        if len(nrows) != 1:
            raise ShapeMismatchError("hstack blocks must share row count")
        rows = [sum((list(b.entries[i]) for b in blocks), []) for i in range(nrows.pop())]
        return ParamMatrix.from_rows(rows, ncols=sum(b.ncols for b in blocks))

    @staticmethod
    def vstack(blocks: Sequence["ParamMatrix"]) -> "ParamMatrix":
        ncols = {b.ncols for b in blocks}
        if len(ncols) != 1:
            raise ShapeMismatchError("vstack blocks must share column count")
        rows = [list(row) for b in blocks for row in b.entries]
        return ParamMatrix.from_rows(rows, ncols=ncols.pop())

    @property
    def is_constant(self) -> bool:
        return all(v.is_polynomial and v.num.is_constant for row in self.entries for v in row)

    @property
    def is_zero(self) -> bool:
        return all(v.is_zero for row in self.entries for v in row)

    def denominators(self) -> List[Polynomial]:
        """Distinct non-constant denominators, in first-seen order."""
        seen: Dict[Tuple, Polynomial] = {}
        for row in self.entries:
            for v in row:
                if not v.den.is_constant:
                    seen.setdefault(v.den.key(), v.den)
        return list(seen.values())

    def substitute(self, mapping: Mapping[str, Union[Polynomial, float]]) -> "ParamMatrix":
        return self.map(lambda v: v.substitute(mapping))

    def eval(self, point: Mapping[str, float], singular_tol: float = DEFAULT_SINGULAR_TOL) -> np.ndarray:
        """
        Evaluate entrywise at a named parameter point.

        Raises:
            ParameterSingularityError: If some |denominator| <= singular_tol
        """
        out = np.zeros(self.shape)
        for i, row in enumerate(self.entries):
            for j, v in enumerate(row):
                num, den = v.eval_parts(point)
                if abs(den) <= singular_tol:
                    raise ParameterSingularityError(
                        f"parameter singularity: denominator {v.den} = {den:.3g} at {point}"
                    )
                out[i, j] = num / den
        return out


@dataclass
class NumericStateSpace:
    """State-space matrices at a concrete parameter value."""
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        self.A = np.atleast_2d(np.asarray(self.A, dtype=float))
        self.B = np.atleast_2d(np.asarray(self.B, dtype=float))
        self.C = np.atleast_2d(np.asarray(self.C, dtype=float))
        self.D = np.atleast_2d(np.asarray(self.D, dtype=float))
        n = self.A.shape[0]
        if self.A.shape != (n, n):
            raise ShapeMismatchError(f"A must be square, got {self.A.shape}")
        if self.B.shape[0] != n or self.C.shape[1] != n:
            raise ShapeMismatchError(
                f"Inconsistent shapes A{self.A.shape} B{self.B.shape} C{self.C.shape}"
            )
        if self.D.shape != (self.C.shape[0], self.B.shape[1]):
            raise ShapeMismatchError(f"D must be {(self.C.shape[0], self.B.shape[1])}, got {self.D.shape}")
        for name in ("A", "B", "C", "D"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"Non-finite entries in {name}")

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]

    @property
    def p(self) -> int:
        return self.C.shape[0]

    def spectral_abscissa(self) -> float:
        """Largest real part among the eigenvalues of A."""
        return float(np.max(np.linalg.eigvals(self.A).real))

    def is_hurwitz(self, margin: float = 0.0) -> bool:
        return self.spectral_abscissa() < -margin

    def transfer(self, s: complex) -> np.ndarray:
        """Frequency response C (sI - A)^-1 B + D."""
        resolvent = np.linalg.solve(s * np.eye(self.n) - self.A, self.B.astype(complex))
        return self.C @ resolvent + self.D

    def dc_gain(self) -> np.ndarray:
        """Steady-state gain C (-A)^-1 B + D."""
        return self.C @ np.linalg.solve(-self.A, self.B) + self.D

    def select_input(self, i: int) -> "NumericStateSpace":
        return NumericStateSpace(self.A, self.B[:, i:i + 1], self.C, self.D[:, i:i + 1])


@dataclass(frozen=True)
class UncertainSystem:
    """
    Uncertain LTI system (A, B, C, D)(theta) with nominal point and domain.

    The domain is {theta : g_j(theta) >= 0 for all j}; an empty list means
    the whole parameter space.
    """
    A: ParamMatrix
    B: ParamMatrix
    C: ParamMatrix
    D: ParamMatrix
    theta_star: Tuple[float, ...]
    domain: Tuple[Polynomial, ...] = ()
    param_names: Tuple[str, ...] = ()
    box: Optional[Tuple[Tuple[float, float], ...]] = None
    normalized: bool = False
    singular_tol: float = DEFAULT_SINGULAR_TOL

    def __post_init__(self):
        if not self.param_names:
            object.__setattr__(self, "param_names", parameter_names(len(self.theta_star)))
        object.__setattr__(self, "theta_star", tuple(float(v) for v in self.theta_star))
        object.__setattr__(self, "domain", tuple(self.domain))
        self._check_shapes()
        self._check_nominal()

    def _check_shapes(self) -> None:
        n = self.A.nrows
        if self.A.shape != (n, n):
            raise ShapeMismatchError(f"A must be square, got {self.A.shape}")
        if self.B.nrows != n:
            raise ShapeMismatchError(f"B has {self.B.nrows} rows, expected {n}")
        if self.C.ncols != n:
            raise ShapeMismatchError(f"C has {self.C.ncols} columns, expected {n}")
        if self.D.shape != (self.C.nrows, self.B.ncols):
            raise ShapeMismatchError(f"D must be {(self.C.nrows, self.B.ncols)}, got {self.D.shape}")
        if len(self.param_names) != len(self.theta_star):
            raise ShapeMismatchError(
                f"{len(self.theta_star)} nominal values for {len(self.param_names)} parameters"
            )
        if self.box is not None and len(self.box) != len(self.theta_star):
            raise ShapeMismatchError(f"Box has {len(self.box)} intervals for {self.n_theta} parameters")
        allowed = set(self.param_names)
        for matrix in (self.A, self.B, self.C, self.D):
            for row in matrix.entries:
                for v in row:
                    extra = set(v.num.used_variables() + v.den.used_variables()) - allowed
                    if extra:
                        raise ShapeMismatchError(f"Entry {v} uses undeclared parameters {sorted(extra)}")

    def _check_nominal(self) -> None:
        point = self.nominal_point
        for j, g in enumerate(self.domain):
            value = g.eval(point)
            if value < -1e-12:
                raise NominalOutsideDomainError(
                    f"nominal point outside domain: g{j + 1}(theta*) = {value:.6g} < 0"
                )
        for matrix in (self.A, self.B, self.C, self.D):
            matrix.eval(point, self.singular_tol)

    @property
    def n(self) -> int:
        return self.A.nrows

    @property
    def m(self) -> int:
        return self.B.ncols

    @property
    def p(self) -> int:
        return self.C.nrows

    @property
    def n_theta(self) -> int:
        return len(self.theta_star)

    @property
    def nominal_point(self) -> Dict[str, float]:
        return dict(zip(self.param_names, self.theta_star))

    def point(self, theta: Sequence[float]) -> Dict[str, float]:
        return theta_point(self.param_names, theta)

    def in_domain(self, theta: Sequence[float], tol: float = 0.0) -> bool:
        point = self.point(theta)
        return all(g.eval(point) >= -tol for g in self.domain)

    def at(self, theta: Sequence[float]) -> NumericStateSpace:
        """Numeric (A, B, C, D) at theta."""
        point = self.point(theta)
        return NumericStateSpace(
            self.A.eval(point, self.singular_tol),
            self.B.eval(point, self.singular_tol),
            self.C.eval(point, self.singular_tol),
            self.D.eval(point, self.singular_tol),
        )

    def nominal(self) -> NumericStateSpace:
        return self.at(self.theta_star)

    @property
    def system_hash(self) -> str:
        """sha256 of the canonical serialized form."""
        from .loader import serialize_system
        from ..storage import content_hash
        return content_hash(serialize_system(self))


@dataclass(frozen=True)
class CascadeSystem:
    """
    Doubled system driving the nominal state x and the error e = x - x~.

    Abar = [[A*, 0], [dA, A]], Bbar = [[B*], [dB]],
    Cbar = [[C*, 0], [dC, C]], Dbar = [[D*], [dD]] with d. = .(theta*) - .(theta).
    The last p output rows form the mismatch output dy.
    """
    Abar: ParamMatrix
    Bbar: ParamMatrix
    Cbar: ParamMatrix
    Dbar: ParamMatrix
    parent: UncertainSystem = field(repr=False)

    @property
    def n(self) -> int:
        return self.parent.n

    @property
    def p(self) -> int:
        return self.parent.p

    @property
    def C_delta(self) -> ParamMatrix:
        """Mismatch output rows [dC, C]."""
        return self.Cbar.block(slice(self.p, 2 * self.p), slice(0, 2 * self.n))

    @property
    def D_delta(self) -> ParamMatrix:
        """Mismatch feedthrough dD."""
        return self.Dbar.block(slice(self.p, 2 * self.p), slice(0, self.parent.m))

    def at(self, theta: Sequence[float]) -> NumericStateSpace:
        point = self.parent.point(theta)
        tol = self.parent.singular_tol
        return NumericStateSpace(
            self.Abar.eval(point, tol),
            self.Bbar.eval(point, tol),
            self.Cbar.eval(point, tol),
            self.Dbar.eval(point, tol),
        )
