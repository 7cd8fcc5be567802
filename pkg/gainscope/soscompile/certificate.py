"""
gainscope - Bound Certificates

A certificate stores every recovered decision polynomial, the numeric
constraint expressions and their Gram/multiplier matrices. Validation
re-expands the Gram forms independently of the solver and checks PSD-ness
and coefficient matching; it works from the serialized form alone.
"""
import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Mapping, Optional, Union

import numpy as np

from ..config import settings
from ..polycore import Polynomial, parse_polynomial
from ..sdpsolve import SdpSolution
from .models import ConstraintKind
from .program import CompiledProgram, SosProgram


REASON_GRAM = "gram-not-psd"
REASON_MATCH = "coefficient-mismatch"


class CertificateStatus(str, Enum):
    VALID = "valid"
    INVALID = "invalid"


def _poly_text(poly: Polynomial) -> str:
    return poly.to_string(17)


@dataclass
class GramRecord:
    """Gram matrix over a monomial basis; `weight` is g_j for a multiplier."""
    name: str
    basis: List[Polynomial]
    matrix: np.ndarray
    weight: Optional[Polynomial] = None

    @property
    def min_eig(self) -> float:
        if not self.matrix.size:
            return 0.0
        sym = 0.5 * (self.matrix + self.matrix.T)
        return float(np.linalg.eigvalsh(sym)[0])

    def form(self) -> Polynomial:
        """basis^T matrix basis, entry by entry."""
        total = Polynomial.zero()
        size = len(self.basis)
        for i in range(size):
            for j in range(size):
                value = float(self.matrix[i, j])
                if value != 0.0:
                    total = total + self.basis[i] * self.basis[j] * value
        return total

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "basis": [_poly_text(b) for b in self.basis],
            "matrix": [[float(v) for v in row] for row in self.matrix],
            "weight": _poly_text(self.weight) if self.weight is not None else None,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "GramRecord":
        return cls(
            name=data["name"],
            basis=[parse_polynomial(b) for b in data["basis"]],
            matrix=np.array(data["matrix"], dtype=float).reshape(len(data["basis"]), len(data["basis"])),
            weight=parse_polynomial(data["weight"]) if data.get("weight") is not None else None,
        )


@dataclass
class ConstraintRecord:
    """A numeric constraint with its certificate pieces."""
    label: str
    kind: str
    expression: Polynomial
    gram: Optional[GramRecord] = None
    multipliers: List[GramRecord] = field(default_factory=list)
    provenance: List[Dict[str, Any]] = field(default_factory=list)

    def residual(self) -> float:
        """Max |coefficient| of expression - sum_j g_j m_j - gram form."""
        diff = self.expression
        if self.kind == ConstraintKind.SOS.value:
            if self.gram is not None:
                diff = diff - self.gram.form()
            for mult in self.multipliers:
                diff = diff - mult.form() * mult.weight
        return diff.max_abs_coefficient()

    def to_dict(self) -> Dict[str, Any]:
        return {
            "label": self.label,
            "kind": self.kind,
            "expression": _poly_text(self.expression),
            "gram": self.gram.to_dict() if self.gram is not None else None,
            "multipliers": [m.to_dict() for m in self.multipliers],
            "provenance": list(self.provenance),
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ConstraintRecord":
        return cls(
            label=data["label"],
            kind=data["kind"],
            expression=parse_polynomial(data["expression"]),
            gram=GramRecord.from_dict(data["gram"]) if data.get("gram") else None,
            multipliers=[GramRecord.from_dict(m) for m in data.get("multipliers", [])],
            provenance=list(data.get("provenance", [])),
        )


@dataclass
class BoundCertificate:
    status: CertificateStatus
    reasons: List[str] = field(default_factory=list)
    decisions: Dict[str, Polynomial] = field(default_factory=dict)
    decision_grams: List[GramRecord] = field(default_factory=list)
    constraints: List[ConstraintRecord] = field(default_factory=list)
    objective: float = float("nan")
    min_eigs: Dict[str, float] = field(default_factory=dict)
    coeff_residual: float = 0.0
    psd_tol: float = 1e-7
    match_tol: float = 1e-7
    solver: Dict[str, Any] = field(default_factory=dict)
    notes: List[str] = field(default_factory=list)
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def is_valid(self) -> bool:
        return self.status == CertificateStatus.VALID

    @property
    def min_eig(self) -> float:
        return min(self.min_eigs.values(), default=0.0)

    def grams(self) -> List[GramRecord]:
        records = list(self.decision_grams)
        for c in self.constraints:
            if c.gram is not None:
                records.append(c.gram)
            records.extend(c.multipliers)
        return records

    def to_dict(self) -> Dict[str, Any]:
        return {
            "status": self.status.value,
            "reasons": list(self.reasons),
            "decisions": {name: _poly_text(p) for name, p in self.decisions.items()},
            "decision_grams": [g.to_dict() for g in self.decision_grams],
            "constraints": [c.to_dict() for c in self.constraints],
            "objective": self.objective,
            "min_eigs": dict(self.min_eigs),
            "coeff_residual": self.coeff_residual,
            "tolerances": {"psd": self.psd_tol, "match": self.match_tol},
            "solver": dict(self.solver),
            "notes": list(self.notes),
            "metadata": dict(self.metadata),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "BoundCertificate":
        tolerances = data.get("tolerances", {})
        return cls(
            status=CertificateStatus(data.get("status", "invalid")),
            reasons=list(data.get("reasons", [])),
            decisions={name: parse_polynomial(text) for name, text in data.get("decisions", {}).items()},
            decision_grams=[GramRecord.from_dict(g) for g in data.get("decision_grams", [])],
            constraints=[ConstraintRecord.from_dict(c) for c in data.get("constraints", [])],
            objective=float(data.get("objective", float("nan"))),
            min_eigs=dict(data.get("min_eigs", {})),
            coeff_residual=float(data.get("coeff_residual", 0.0)),
            psd_tol=float(tolerances.get("psd", settings.tolerances.psd)),
            match_tol=float(tolerances.get("match", settings.tolerances.match)),
            solver=dict(data.get("solver", {})),
            notes=list(data.get("notes", [])),
            metadata=dict(data.get("metadata", {})),
        )

    @classmethod
    def from_json(cls, text: str) -> "BoundCertificate":
        return cls.from_dict(json.loads(text))


# ==================== VALIDATION ====================

def _validate(certificate: BoundCertificate) -> BoundCertificate:
    certificate.min_eigs = {g.name: g.min_eig for g in certificate.grams()}
    certificate.coeff_residual = max((c.residual() for c in certificate.constraints), default=0.0)
    reasons = []
    if certificate.min_eig < -certificate.psd_tol:
        reasons.append(REASON_GRAM)
    if not certificate.coeff_residual <= certificate.match_tol:
        reasons.append(REASON_MATCH)
    certificate.reasons = reasons
    certificate.status = CertificateStatus.INVALID if reasons else CertificateStatus.VALID
    return certificate


def recover_and_validate(
    program: SosProgram,
    compiled: CompiledProgram,
    solution: SdpSolution,
    psd_tol: Optional[float] = None,
    match_tol: Optional[float] = None,
) -> BoundCertificate:
    """
    Substitute solved coefficients and validate a posteriori.

    The residual is recomputed by re-expanding every Gram form, not taken
    from the solver. Invalid certificates are returned flagged.
    """
    values = compiled.values(solution)
    certificate = BoundCertificate(
        status=CertificateStatus.INVALID,
        objective=compiled.objective_value(solution),
        psd_tol=psd_tol if psd_tol is not None else settings.tolerances.psd,
        match_tol=match_tol if match_tol is not None else settings.tolerances.match,
        solver=solution.to_dict(),
        notes=list(program.notes),
    )

    for name, decision in program.decisions.items():
        certificate.decisions[name] = decision.poly().evaluate(values).drop_unused()

    for gram in compiled.grams:
        if gram.constraint is None:
            certificate.decision_grams.append(
                GramRecord(gram.decision.name, gram.decision.basis, compiled.gram_matrix(gram, solution))
            )

    for index, constraint in enumerate(program.constraints):
        record = ConstraintRecord(
            label=constraint.label,
            kind=constraint.kind.value,
            expression=constraint.expression.evaluate(values).drop_unused(),
            provenance=[p.to_dict() for p in constraint.provenance],
        )
        for gram in compiled.grams_for(index):
            entry = GramRecord(
                gram.decision.name, gram.decision.basis, compiled.gram_matrix(gram, solution), gram.weight
            )
            if gram.is_main:
                record.gram = entry
            else:
                record.multipliers.append(entry)
        certificate.constraints.append(record)

    return _validate(certificate)


def revalidate(
    source: Union[BoundCertificate, Mapping[str, Any], str],
    psd_tol: Optional[float] = None,
    match_tol: Optional[float] = None,
) -> BoundCertificate:
    """Re-run validation on a certificate, its dict form or its JSON text."""
    if isinstance(source, str):
        certificate = BoundCertificate.from_json(source)
    elif isinstance(source, BoundCertificate):
        certificate = BoundCertificate.from_dict(source.to_dict())
    else:
        certificate = BoundCertificate.from_dict(source)
    if psd_tol is not None:
        certificate.psd_tol = psd_tol
    if match_tol is not None:
        certificate.match_tol = match_tol
    return _validate(certificate)


def certificate_summary(certificate: BoundCertificate) -> Dict[str, Any]:
    """Short status record for reports."""
    return {
        "status": certificate.status.value,
        "reasons": list(certificate.reasons),
        "objective": certificate.objective,
        "min_eig": certificate.min_eig,
        "coeff_residual": certificate.coeff_residual,
        "solver_status": certificate.solver.get("status"),
    }
