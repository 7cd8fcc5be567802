"""
gainscope - Step Runner

Executes individual analysis steps.
"""
import logging
import math
from dataclasses import replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable, Dict

import numpy as np

from ..bounds import (
    Degrees,
    GainBound,
    dominance_check,
    objective_box,
    synthesize,
)
from ..oracle import NotHurwitzError
from ..storage import OutputStorage
from ..sysmodel import (
    domain_mask,
    hurwitz_sample_check,
    load_system,
    load_system_file,
    parameter_grid,
)
from .models import RunContext, Step, StepAction, StepStatus


logger = logging.getLogger(__name__)


def bound_summary(bound: GainBound, system, grid_points: np.ndarray) -> Dict[str, Any]:
    """Report record for one bound: squared values and their square roots."""
    nominal = bound.evaluate(system.theta_star)
    data = bound.to_dict()
    data["nominal_value"] = nominal
    data["nominal_value_sqrt"] = math.sqrt(max(nominal, 0.0))
    if grid_points is not None and len(grid_points):
        values = bound.evaluate_grid(grid_points)
        data["grid_max"] = float(np.max(values))
        data["grid_max_sqrt"] = math.sqrt(max(float(np.max(values)), 0.0))
        data["grid_min"] = float(np.min(values))
    return data


class StepRunner:
    """
    Executes individual steps.

    Routes step actions to handlers:
    - LOAD → parse the system file and build the sampling grid
    - HURWITZ → sampled stability check of A(theta)
    - SYNTHESIZE → solve one bound program
    - VERIFY → oracle dominance on the grid
    - EXPORT → certificates and summary
    """

    def __init__(self):
        self._handlers: Dict[StepAction, Callable[[Step, RunContext], Any]] = {
            StepAction.LOAD: self._handle_load,
            StepAction.HURWITZ: self._handle_hurwitz,
            StepAction.SYNTHESIZE: self._handle_synthesize,
            StepAction.VERIFY: self._handle_verify,
            StepAction.EXPORT: self._handle_export,
        }

    def execute(self, step: Step, context: RunContext) -> Any:
        """
        Execute a single step.

        Returns:
            Step result

        Raises:
            Exception: If step execution fails (step is marked FAILED)
        """
        handler = self._handlers.get(step.action)
        if handler is None:
            raise ValueError(f"Unknown step action: {step.action}")

        step.status = StepStatus.RUNNING
        step.started_at = datetime.now(timezone.utc)

        try:
            result = handler(step, context)
        except Exception as e:
            step.status = StepStatus.FAILED
            step.error = f"{type(e).__name__}: {e}"
            step.completed_at = datetime.now(timezone.utc)
            raise

        step.status = StepStatus.COMPLETED
        step.result = result
        step.completed_at = datetime.now(timezone.utc)
        context.add_step_result(step.step_id, result)
        context.timings[step.step_id] = step.elapsed_seconds
        context.steps_executed += 1
        return result

    # ==================== HANDLERS ====================

    def _handle_load(self, step: Step, context: RunContext) -> Dict[str, Any]:
        if context.system is None:
            if context.system_text is not None:
                context.system = load_system(context.system_text)
            elif context.system_path is not None:
                context.system = load_system_file(context.system_path)
            else:
                raise ValueError("No system file given")
        system = context.system

        resolution = step.action_data.get("grid") or context.settings.grid.resolution
        box = tuple(objective_box(system)[name] for name in system.param_names)
        grid = parameter_grid(box, resolution, context.settings.grid.shrink)
        mask = domain_mask(system, grid.points, tol=context.settings.tolerances.drop)
        context.grid_points = grid.points[mask]
        logger.info(f"Loaded system n={system.n}, {len(context.grid_points)} grid points in domain")
        return {
            "system_hash": system.system_hash,
            "param_names": list(system.param_names),
            "theta_star": list(system.theta_star),
            "grid_shape": list(grid.shape),
            "grid_points": int(len(context.grid_points)),
        }

    def _handle_hurwitz(self, step: Step, context: RunContext) -> Dict[str, Any]:
        report = hurwitz_sample_check(
            context.system,
            context.grid_points,
            eps=context.settings.tolerances.hurwitz,
        )
        if not report.all_stable:
            raise NotHurwitzError(
                f"A(theta) is not Hurwitz at {len(report.flagged)} of {len(report.points)} "
                f"sampled points (max abscissa {report.max_abscissa:.6g})"
            )
        return report.to_dict()

    def _handle_synthesize(self, step: Step, context: RunContext) -> Dict[str, Any]:
        data = step.action_data
        solver_settings = context.settings.solver
        if data.get("sdpa_export"):
            solver_settings = replace(solver_settings, sdpa_export=Path(data["sdpa_export"]))
        bound = synthesize(
            data["kind"],
            context.system,
            degrees=Degrees.from_dict(data.get("degrees", {})),
            pin=data.get("pin", "auto"),
            objective=data.get("objective", "nominal"),
            full_output=data.get("full_output", False),
            solver_settings=solver_settings,
        )
        context.bounds[data["kind"]] = bound
        return bound_summary(bound, context.system, context.grid_points)

    def _handle_verify(self, step: Step, context: RunContext) -> Dict[str, Any]:
        kind = step.action_data["kind"]
        report = dominance_check(
            context.bounds[kind],
            context.system,
            context.grid_points,
            workers=context.settings.output.threads,
        )
        if not report.passed:
            logger.warning(f"{kind}: dominance failed at {len(report.failures)} grid points")
        context.reports[kind] = report
        return report.to_dict()

    def _handle_export(self, step: Step, context: RunContext) -> Dict[str, Any]:
        storage = context.storage or OutputStorage(context.settings.output.base_path)
        written = []
        summary: Dict[str, Any] = {
            "system_hash": context.system.system_hash,
            "hurwitz": context.get_step_result("hurwitz"),
            "bounds": {},
        }
        for kind in step.action_data["kinds"]:
            bound = context.bounds[kind]
            ref = storage.save_text(bound.certificate.to_json(), f"certificate_{kind}.json")
            written.append(ref.name)
            entry = context.get_step_result(f"synthesize-{kind}")
            if kind in context.reports:
                entry = dict(entry, dominance=context.reports[kind].to_dict())
            summary["bounds"][kind] = entry
        summary["all_valid"] = all(b.is_valid for b in context.bounds.values())
        written.append(storage.save_json(summary, "summary.json").name)
        return {"written": written, "all_valid": summary["all_valid"]}
