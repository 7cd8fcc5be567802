"""
gainscope - Analysis Runner (Layer 6)

Runs an AnalysisPlan step by step under step and wall-time limits.
"""
import logging
from datetime import datetime, timezone
from typing import Any, Dict, Optional

from .models import AnalysisPlan, RunContext, Step, StepStatus
from .planner import PlanManager
from .step_runner import StepRunner


logger = logging.getLogger(__name__)

# Default configuration
DEFAULT_MAX_STEPS = 20
DEFAULT_MAX_WALL_TIME = 3600  # 1 hour


class LimitExceeded(Exception):
    """Raised when run limits are exceeded."""
    pass


class StepFailed(Exception):
    """Raised when a step fails; the original exception is kept as `cause`."""

    def __init__(self, message: str, step_id: str, cause: Exception):
        super().__init__(message)
        self.step_id = step_id
        self.cause = cause


class AnalysisRunner:
    """
    Runs analysis plans.

    Loop:
        - check limits
        - pick next step with satisfied dependencies
        - execute, record timing
    """

    def __init__(
        self,
        plan_manager: Optional[PlanManager] = None,
        step_runner: Optional[StepRunner] = None,
        max_steps: int = DEFAULT_MAX_STEPS,
        max_wall_time_seconds: float = DEFAULT_MAX_WALL_TIME,
    ):
        self._plan_manager = plan_manager or PlanManager()
        self._step_runner = step_runner or StepRunner()
        self._max_steps = max_steps
        self._max_wall_time = max_wall_time_seconds

    @property
    def plan_manager(self) -> PlanManager:
        return self._plan_manager

    def run(self, plan: AnalysisPlan, context: RunContext) -> Dict[str, Any]:
        """
        Execute plan steps until complete.

        Returns:
            Final result dictionary

        Raises:
            LimitExceeded: If the step or wall-time limit is hit
            StepFailed: If a step raises
        """
        context.max_steps = self._max_steps
        context.max_wall_time_seconds = self._max_wall_time
        context.start_time = datetime.now(timezone.utc)

        while not plan.is_complete:
            self._check_limits(context)

            step = plan.get_next_step()
            if step is None:
                break

            logger.info(f"[Runner] step {step.step_id} started")
            try:
                self._step_runner.execute(step, context)
            except Exception as e:
                logger.info(f"[Runner] step {step.step_id} failed: {e}")
                self._skip_dependents(plan, step)
                raise StepFailed(f"Step {step.step_id} failed: {e}", step.step_id, e) from e
            logger.info(f"[Runner] step {step.step_id} completed in {context.timings[step.step_id]:.3f}s")

        return self._build_result(plan, context)

    def _check_limits(self, context: RunContext) -> None:
        if context.is_over_step_limit:
            raise LimitExceeded(
                f"Step limit exceeded: {context.steps_executed}/{context.max_steps}"
            )
        if context.is_over_time_limit:
            raise LimitExceeded(
                f"Time limit exceeded: {context.elapsed_seconds:.0f}s/{context.max_wall_time_seconds:.0f}s"
            )

    def _skip_dependents(self, plan: AnalysisPlan, failed: Step) -> None:
        blocked = {failed.step_id}
        for step in plan.steps:
            if step.status == StepStatus.PENDING and blocked.intersection(step.depends_on):
                step.status = StepStatus.SKIPPED
                blocked.add(step.step_id)

    def _build_result(self, plan: AnalysisPlan, context: RunContext) -> Dict[str, Any]:
        last_step = plan.steps[-1] if plan.steps else None
        return {
            "success": not plan.has_failed,
            "plan": plan.to_dict(),
            "steps_executed": context.steps_executed,
            "primary_output": last_step.result if last_step else None,
            "step_results": dict(context.step_results),
            "timings": dict(context.timings),
        }
