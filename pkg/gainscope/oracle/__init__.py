"""
gainscope - Exact Gain Oracles (Layer 2)

Pointwise ground truth for every synthesized bound.
"""
from .gramian import (
    GramianResult,
    NotHurwitzError,
    lyapunov_residual,
    lyapunov_solve,
    observability_gramian,
)
from .gains import (
    BisectionError,
    FeedthroughError,
    frequency_sweep_peak,
    h2_norm_exact,
    h2_norm_quadrature,
    hinf_norm_squared,
    l2_induced_gain_exact,
    state_to_output_gain_exact,
)

__all__ = [
    # Gramians
    "GramianResult",
    "NotHurwitzError",
    "lyapunov_residual",
    "lyapunov_solve",
    "observability_gramian",
    # Gains
    "BisectionError",
    "FeedthroughError",
    "frequency_sweep_peak",
    "h2_norm_exact",
    "h2_norm_quadrature",
    "hinf_norm_squared",
    "l2_induced_gain_exact",
    "state_to_output_gain_exact",
]
