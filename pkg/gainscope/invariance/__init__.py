"""
gainscope - Output Invariance (Layer 2)
"""
from .checks import (
    InvarianceReport,
    DEFAULT_INVARIANCE_TOL,
    VARIANT_NOMINAL,
    VARIANT_THETA,
    dc_gain_mismatch,
    invariance_report,
    mismatch_transfer_numerator,
    output_invariant_test,
    scan_invariance,
    ss_invariant_test,
)

__all__ = [
    "InvarianceReport",
    "DEFAULT_INVARIANCE_TOL",
    "VARIANT_NOMINAL",
    "VARIANT_THETA",
    "dc_gain_mismatch",
    "invariance_report",
    "mismatch_transfer_numerator",
    "output_invariant_test",
    "scan_invariance",
    "ss_invariant_test",
]
