"""
gainscope - System Models (Layer 2)

Uncertain LTI systems, the nominal/error cascade and parameter grids.
"""
from .models import (
    ParamMatrix,
    NumericStateSpace,
    UncertainSystem,
    CascadeSystem,
    ShapeMismatchError,
    NominalOutsideDomainError,
    ParameterSingularityError,
    DEFAULT_SINGULAR_TOL,
    parameter_names,
    theta_point,
)
from .loader import SystemFormatError, load_system, load_system_file, serialize_system
from .cascade import (
    HurwitzReport,
    build_cascade,
    eval_at,
    hurwitz_sample_check,
    mismatch_channel,
)
from .grid import (
    BoxInferenceError,
    ParameterGrid,
    domain_mask,
    infer_box,
    parameter_grid,
)

__all__ = [
    # Models
    "ParamMatrix",
    "NumericStateSpace",
    "UncertainSystem",
    "CascadeSystem",
    "ShapeMismatchError",
    "NominalOutsideDomainError",
    "ParameterSingularityError",
    "DEFAULT_SINGULAR_TOL",
    "parameter_names",
    "theta_point",
    # Loader
    "SystemFormatError",
    "load_system",
    "load_system_file",
    "serialize_system",
    # Cascade
    "HurwitzReport",
    "build_cascade",
    "eval_at",
    "hurwitz_sample_check",
    "mismatch_channel",
    # Grid
    "BoxInferenceError",
    "ParameterGrid",
    "domain_mask",
    "infer_box",
    "parameter_grid",
]
