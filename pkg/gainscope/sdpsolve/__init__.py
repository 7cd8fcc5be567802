"""
gainscope - SDP Solver (Layer 3)

Standard-form block SDPs, presolve, the embedded interior-point backend and
SDPA text I/O.
"""
from .models import (
    SdpProblem,
    SdpRow,
    SdpSolution,
    SolverStatus,
    PresolveReport,
)
from .presolve import presolve, postsolve
from .interior import interior_point, phase_one, phase_one_problem
from .backends import (
    BackendNotFoundError,
    BackendRegistry,
    SdpBackend,
    backends,
    polish,
    solve,
    solve_embedded,
)
from .sdpa import SdpaFormatError, read_sdpa, write_sdpa

__all__ = [
    # Models
    "SdpProblem",
    "SdpRow",
    "SdpSolution",
    "SolverStatus",
    "PresolveReport",
    # Presolve
    "presolve",
    "postsolve",
    # Interior point
    "interior_point",
    "phase_one",
    "phase_one_problem",
    # Backends
    "BackendNotFoundError",
    "BackendRegistry",
    "SdpBackend",
    "backends",
    "polish",
    "solve",
    "solve_embedded",
    # SDPA
    "SdpaFormatError",
    "read_sdpa",
    "write_sdpa",
]
