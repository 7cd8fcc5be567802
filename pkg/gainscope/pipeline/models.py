"""
gainscope - Pipeline Models

Data classes for analysis runs: AnalysisPlan, Step, RunContext.
"""
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

from ..config import Settings
from ..storage import OutputStorage


class StepStatus(str, Enum):
    """Step execution status."""
    PENDING = "pending"
    RUNNING = "running"
    COMPLETED = "completed"
    FAILED = "failed"
    SKIPPED = "skipped"


class StepAction(str, Enum):
    """Types of analysis steps."""
    LOAD = "load"
    HURWITZ = "hurwitz"
    SYNTHESIZE = "synthesize"
    VERIFY = "verify"
    EXPORT = "export"


@dataclass
class Step:
    """Single step in an analysis plan."""
    step_id: str
    action: StepAction
    action_data: Dict[str, Any] = field(default_factory=dict)
    depends_on: List[str] = field(default_factory=list)

    # Execution state
    status: StepStatus = StepStatus.PENDING
    result: Any = None
    error: Optional[str] = None

    # Timing
    started_at: Optional[datetime] = None
    completed_at: Optional[datetime] = None

    @property
    def elapsed_seconds(self) -> Optional[float]:
        if self.started_at is None or self.completed_at is None:
            return None
        return (self.completed_at - self.started_at).total_seconds()

    def to_dict(self) -> Dict:
        """Convert to dictionary (timing excluded, see RunContext.timings)."""
        return {
            "step_id": self.step_id,
            "action": self.action.value,
            "action_data": self.action_data,
            "depends_on": self.depends_on,
            "status": self.status.value,
            "error": self.error,
        }


@dataclass
class AnalysisPlan:
    """
    Ordered steps of one analysis run.

    Step ids are derived from the action and kind, so two runs with the same
    configuration produce the same plan.
    """
    name: str
    steps: List[Step] = field(default_factory=list)

    @property
    def is_complete(self) -> bool:
        """Check if all steps are done."""
        return all(
            s.status in (StepStatus.COMPLETED, StepStatus.SKIPPED)
            for s in self.steps
        )

    @property
    def has_failed(self) -> bool:
        """Check if any step failed."""
        return any(s.status == StepStatus.FAILED for s in self.steps)

    def get_step(self, step_id: str) -> Optional[Step]:
        """Get step by ID."""
        for step in self.steps:
            if step.step_id == step_id:
                return step
        return None

    def get_next_step(self) -> Optional[Step]:
        """Get next pending step whose dependencies are done."""
        done = (StepStatus.COMPLETED, StepStatus.SKIPPED)
        for step in self.steps:
            if step.status != StepStatus.PENDING:
                continue
            deps = [self.get_step(dep_id) for dep_id in step.depends_on]
            if all(dep is not None and dep.status in done for dep in deps):
                return step
        return None

    def to_dict(self) -> Dict:
        return {
            "name": self.name,
            "steps": [s.to_dict() for s in self.steps],
        }


@dataclass
class RunContext:
    """
    State passed through an analysis run.

    Holds the loaded system, synthesized bounds and verification reports,
    plus the step and wall-time limits.
    """
    system_path: Optional[Path] = None
    system_text: Optional[str] = None
    settings: Settings = field(default_factory=Settings)
    storage: Optional[OutputStorage] = None

    # Filled by steps
    system: Any = None
    grid_points: Optional[np.ndarray] = None
    bounds: Dict[str, Any] = field(default_factory=dict)
    reports: Dict[str, Any] = field(default_factory=dict)
    step_results: Dict[str, Any] = field(default_factory=dict)
    timings: Dict[str, float] = field(default_factory=dict)

    # Execution limits
    steps_executed: int = 0
    max_steps: int = 20
    start_time: Optional[datetime] = None
    max_wall_time_seconds: float = 3600.0

    @property
    def elapsed_seconds(self) -> float:
        if self.start_time is None:
            return 0.0
        return (datetime.now(timezone.utc) - self.start_time).total_seconds()

    @property
    def is_over_step_limit(self) -> bool:
        """Check if step limit exceeded."""
        return self.steps_executed >= self.max_steps

    @property
    def is_over_time_limit(self) -> bool:
        """Check if time limit exceeded."""
        if self.start_time is None:
            return False
        return self.elapsed_seconds >= self.max_wall_time_seconds

    def add_step_result(self, step_id: str, result: Any) -> None:
        """Store result from completed step."""
        self.step_results[step_id] = result

    def get_step_result(self, step_id: str) -> Any:
        """Get result from previous step."""
        return self.step_results.get(step_id)
