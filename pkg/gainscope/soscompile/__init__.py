"""
gainscope - SOS Compiler (Layer 4)

Decision polynomials, SOS constraints on parameter domains, compilation to
standard-form SDPs and certificate recovery.
"""
from .affine import AffinePoly, BilinearityError, VarRef
from .models import (
    ConstraintKind,
    DecisionPoly,
    DecisionStructure,
    DenominatorProvenance,
    SosConstraint,
    STATE_ROLES,
    is_state_variable,
)
from .program import (
    CompiledProgram,
    GramBlock,
    GramOverflowError,
    PendingDenominatorError,
    SosProgram,
    box_average,
    box_moment,
    nominal_value,
)
from .denominators import (
    DenominatorCertificationError,
    certify_positive,
    clear_and_certify_denominator,
    interval_bounds,
)
from .certificate import (
    BoundCertificate,
    CertificateStatus,
    ConstraintRecord,
    GramRecord,
    REASON_GRAM,
    REASON_MATCH,
    certificate_summary,
    recover_and_validate,
    revalidate,
)

__all__ = [
    # Affine algebra
    "AffinePoly",
    "BilinearityError",
    "VarRef",
    # Models
    "ConstraintKind",
    "DecisionPoly",
    "DecisionStructure",
    "DenominatorProvenance",
    "SosConstraint",
    "STATE_ROLES",
    "is_state_variable",
    # Program
    "CompiledProgram",
    "GramBlock",
    "GramOverflowError",
    "PendingDenominatorError",
    "SosProgram",
    "box_average",
    "box_moment",
    "nominal_value",
    # Denominators
    "DenominatorCertificationError",
    "certify_positive",
    "clear_and_certify_denominator",
    "interval_bounds",
    # Certificates
    "BoundCertificate",
    "CertificateStatus",
    "ConstraintRecord",
    "GramRecord",
    "REASON_GRAM",
    "REASON_MATCH",
    "certificate_summary",
    "recover_and_validate",
    "revalidate",
]
