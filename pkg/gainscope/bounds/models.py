"""
gainscope - Bound Models
"""
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Any, Dict, Mapping, Optional, Sequence, Tuple

import numpy as np

from ..polycore import Polynomial, parse_polynomial
from ..soscompile import BoundCertificate, certificate_summary


class InfeasibleProgramError(Exception):
    """Raised when a bound program is infeasible at the requested degrees."""
    pass


class SolverLimitError(Exception):
    """Raised when the SDP solver stops without a usable answer."""
    pass


class GainKind(str, Enum):
    """Which gain a bound refers to."""
    S2O_UPPER = "s2o-upper"
    S2O_LOWER = "s2o-lower"
    L2 = "l2"
    H2 = "h2"

    @property
    def is_lower(self) -> bool:
        return self == GainKind.S2O_LOWER


class ObjectiveMode(str, Enum):
    NOMINAL = "nominal"
    INTEGRAL = "integral"


@dataclass
class Degrees:
    """
    Parameter degrees of the decision polynomials.

    v:  storage function / P(theta)
    m:  domain multipliers (None fits them to each constraint)
    p1: p1, p2, p_l1, p_l2 and q1
    gn, gd: numerator and denominator of the L2 bound
    """
    v: int = 2
    m: Optional[int] = None
    p1: int = 2
    gn: int = 0
    gd: int = 0

    def __post_init__(self):
        for name, value in asdict(self).items():
            if value is not None and value < 0:
                raise ValueError(f"Degree {name} must be >= 0, got {value}")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "Degrees":
        return cls(**{k: data[k] for k in ("v", "m", "p1", "gn", "gd") if k in data})


@dataclass
class GainBound:
    """
    Certified bound(theta) = numerator(theta) / denominator(theta), squared-gain
    convention.
    """
    kind: GainKind
    numerator: Polynomial
    denominator: Polynomial
    certificate: BoundCertificate
    degrees: Degrees
    param_names: Tuple[str, ...]
    pinned: bool = False
    objective: ObjectiveMode = ObjectiveMode.NOMINAL
    full_output: bool = False
    extra: Dict[str, Any] = field(default_factory=dict)

    @property
    def is_valid(self) -> bool:
        return self.certificate.is_valid

    def _point(self, theta: Sequence[float]) -> Dict[str, float]:
        theta = np.asarray(theta, dtype=float).ravel()
        if len(theta) != len(self.param_names):
            raise ValueError(f"Expected {len(self.param_names)} parameter values, got {len(theta)}")
        return dict(zip(self.param_names, theta))

    def evaluate(self, theta: Sequence[float]) -> float:
        point = self._point(theta)
        return self.numerator.eval(point) / self.denominator.eval(point)

    def evaluate_grid(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        values = {name: points[:, k] for k, name in enumerate(self.param_names)}
        num = self.numerator.eval_grid(values) * np.ones(len(points))
        den = self.denominator.eval_grid(values) * np.ones(len(points))
        return num / den

    def describe(self) -> Dict[str, Any]:
        """Everything needed to rebuild the bound from its certificate."""
        return {
            "kind": self.kind.value,
            "numerator": self.numerator.to_string(),
            "denominator": self.denominator.to_string(),
            "param_names": list(self.param_names),
            "degrees": self.degrees.to_dict(),
            "pinned": self.pinned,
            "objective": self.objective.value,
            "full_output": self.full_output,
        }

    def to_dict(self) -> Dict[str, Any]:
        data = self.describe()
        data["certificate"] = certificate_summary(self.certificate)
        data.update(self.extra)
        return data

    @classmethod
    def from_certificate(cls, certificate: BoundCertificate) -> "GainBound":
        """
        Rebuild the bound function recorded in a certificate's metadata.

        Raises:
            ValueError: If the certificate carries no bound description
        """
        info = certificate.metadata.get("bound")
        if not info:
            raise ValueError("Certificate has no bound description")
        return cls(
            kind=GainKind(info["kind"]),
            numerator=parse_polynomial(info["numerator"]),
            denominator=parse_polynomial(info["denominator"]),
            certificate=certificate,
            degrees=Degrees.from_dict(info.get("degrees", {})),
            param_names=tuple(info["param_names"]),
            pinned=bool(info.get("pinned", False)),
            objective=ObjectiveMode(info.get("objective", "nominal")),
            full_output=bool(info.get("full_output", False)),
        )
