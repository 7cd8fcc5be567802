"""
gainscope - Analysis Pipeline (Layer 6)

Plans and runs analyses step by step.
"""
from .models import AnalysisPlan, RunContext, Step, StepAction, StepStatus
from .planner import PlanManager
from .step_runner import StepRunner, bound_summary
from .runner import AnalysisRunner, LimitExceeded, StepFailed

__all__ = [
    # Models
    "AnalysisPlan",
    "RunContext",
    "Step",
    "StepAction",
    "StepStatus",
    # Plan Manager
    "PlanManager",
    # Step Runner
    "StepRunner",
    "bound_summary",
    # Runner
    "AnalysisRunner",
    "LimitExceeded",
    "StepFailed",
]
