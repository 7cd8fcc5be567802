"""
gainscope - SOS Program Models
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

from ..polycore import Polynomial, canonical_variables, monomials_up_to
from .affine import AffinePoly, VarRef


# Indeterminate prefixes treated as state-like (quadratic forms are built over them)
STATE_ROLES = ("x", "e", "u", "z")


def is_state_variable(name: str) -> bool:
    return name.rstrip("0123456789") in STATE_ROLES


class DecisionStructure(str, Enum):
    """How the unknown coefficients of a decision polynomial are encoded."""
    FREE = "free"
    SOS = "sos"
    STATE_QUADRATIC = "state-quadratic"


class ConstraintKind(str, Enum):
    SOS = "sos"
    ZERO = "equals-zero"


@dataclass
class DecisionPoly:
    """
    A polynomial with unknown coefficients.

    FREE:             sum_k c_k * basis[k]
    SOS:              basis^T Q basis with Q a PSD Gram block
    STATE_QUADRATIC:  z^T P(theta) z, z = state, P symmetric with entries
                      sum_alpha c * basis[alpha] (basis = theta monomials)
    """
    name: str
    structure: DecisionStructure
    basis: List[Polynomial]
    state: Tuple[str, ...] = ()
    internal: bool = False
    _poly: Optional[AffinePoly] = field(default=None, repr=False, compare=False)

    @property
    def pairs(self) -> List[Tuple[int, int]]:
        """Upper-triangle index pairs of the Gram block or of P."""
        size = len(self.state) if self.structure == DecisionStructure.STATE_QUADRATIC else len(self.basis)
        return [(i, j) for i in range(size) for j in range(i, size)]

    @property
    def n_scalars(self) -> int:
        if self.structure == DecisionStructure.FREE:
            return len(self.basis)
        if self.structure == DecisionStructure.SOS:
            return len(self.pairs)
        return len(self.pairs) * len(self.basis)

    @property
    def is_gram(self) -> bool:
        return self.structure == DecisionStructure.SOS

    def ref(self, index: int) -> VarRef:
        if not 0 <= index < self.n_scalars:
            raise IndexError(f"{self.name} has {self.n_scalars} scalars, got index {index}")
        return (self.name, index)

    def refs(self) -> List[VarRef]:
        return [(self.name, k) for k in range(self.n_scalars)]

    def poly(self) -> AffinePoly:
        """The decision polynomial as an affine expression in its scalars."""
        if self._poly is not None:
            return self._poly
        linear: Dict[VarRef, Polynomial] = {}
        if self.structure == DecisionStructure.FREE:
            for k, mono in enumerate(self.basis):
                linear[(self.name, k)] = mono
        elif self.structure == DecisionStructure.SOS:
            for k, (i, j) in enumerate(self.pairs):
                product = self.basis[i] * self.basis[j]
                linear[(self.name, k)] = product if i == j else product * 2.0
        else:
            states = [Polynomial.variable(s) for s in self.state]
            k = 0
            for (a, b) in self.pairs:
                quad = states[a] * states[b]
                if a != b:
                    quad = quad * 2.0
                for mono in self.basis:
                    linear[(self.name, k)] = quad * mono
                    k += 1
        self._poly = AffinePoly(linear=linear, owners=(self.name,))
        return self._poly

    def entry(self, a: int, b: int) -> AffinePoly:
        """P[a, b] as a theta polynomial (STATE_QUADRATIC only)."""
        if self.structure != DecisionStructure.STATE_QUADRATIC:
            raise ValueError(f"{self.name} is not state-quadratic")
        a, b = min(a, b), max(a, b)
        start = self.pairs.index((a, b)) * len(self.basis)
        return AffinePoly(
            linear={(self.name, start + k): mono for k, mono in enumerate(self.basis)},
            owners=(self.name,),
        )

    def describe(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "structure": self.structure.value,
            "basis": [m.to_string() for m in self.basis],
            "state": list(self.state),
            "scalars": self.n_scalars,
        }


def free_basis(variables: Sequence[str], degree: int) -> List[Polynomial]:
    return monomials_up_to(canonical_variables(variables), degree)


def state_basis(state: Sequence[str], params: Sequence[str], degree: int) -> List[Polynomial]:
    """{s * theta^alpha : s in state, |alpha| <= degree}, state-major."""
    thetas = monomials_up_to(canonical_variables(params), degree)
    return [Polynomial.variable(s) * mono for s in canonical_variables(state) for mono in thetas]


@dataclass
class DenominatorProvenance:
    """How a cleared denominator was shown positive on the domain."""
    denominator: Polynomial
    power: int
    method: str
    lower_bound: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "denominator": self.denominator.to_string(),
            "power": self.power,
            "method": self.method,
            "lower_bound": self.lower_bound,
        }


@dataclass
class SosConstraint:
    """
    expression - sum_j m_j * domain[j] is SOS (or expression == 0).

    `pending` lists denominators (d, k) the true constraint is divided by;
    they must be certified positive and cleared before compilation.
    """
    label: str
    expression: AffinePoly
    domain: List[Polynomial] = field(default_factory=list)
    kind: ConstraintKind = ConstraintKind.SOS
    multiplier_degree: Optional[int] = None
    products: bool = False
    pending: List[Tuple[Polynomial, int]] = field(default_factory=list)
    provenance: List[DenominatorProvenance] = field(default_factory=list)

    def domain_polys(self) -> List[Polynomial]:
        """Domain inequalities, with pairwise products when enabled."""
        polys = list(self.domain)
        if self.products:
            for i in range(len(self.domain)):
                for j in range(i + 1, len(self.domain)):
                    polys.append(self.domain[i] * self.domain[j])
        return polys
