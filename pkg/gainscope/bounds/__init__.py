"""
gainscope - Certified Bounds (Layer 5)

State-to-output, L2-induced and H2 bound programs on the cascade, the
analytic first-order example and oracle dominance checks.
"""
from .models import (
    Degrees,
    GainBound,
    GainKind,
    InfeasibleProgramError,
    ObjectiveMode,
    SolverLimitError,
)
from .programs import (
    ClearedCascade,
    clear_cascade,
    h2_bound,
    l2_gain_bound,
    objective_box,
    resolve_pin,
    state_to_output_lower,
    state_to_output_upper,
    synthesize,
)
from .analytic import (
    AnalyticFixture,
    analytic_fixture,
    analytic_system,
    analytic_system_text,
)
from .verify import (
    DOMINANCE_REL_TOL,
    DominanceReport,
    dominance_check,
    level_set_mask,
    oracle_value,
)

__all__ = [
    # Models
    "Degrees",
    "GainBound",
    "GainKind",
    "InfeasibleProgramError",
    "ObjectiveMode",
    "SolverLimitError",
    # Programs
    "ClearedCascade",
    "clear_cascade",
    "h2_bound",
    "l2_gain_bound",
    "objective_box",
    "resolve_pin",
    "state_to_output_lower",
    "state_to_output_upper",
    "synthesize",
    # Analytic example
    "AnalyticFixture",
    "analytic_fixture",
    "analytic_system",
    "analytic_system_text",
    # Verification
    "DOMINANCE_REL_TOL",
    "DominanceReport",
    "dominance_check",
    "level_set_mask",
    "oracle_value",
]
