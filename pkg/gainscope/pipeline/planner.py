"""
gainscope - Plan Manager

Builds analysis plans from the requested bound kinds.
"""
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from ..bounds import Degrees, GainKind
from .models import AnalysisPlan, Step, StepAction


def export_path(path: Optional[str], kind: str, count: int) -> Optional[str]:
    """SDPA export path for one kind: unchanged for a single kind, else stem_kind.suffix."""
    if path is None or count == 1:
        return path
    p = Path(path)
    return str(p.with_name(f"{p.stem}_{kind}{p.suffix}"))


class PlanManager:
    """
    Creates analysis plans.

    analyze: load -> hurwitz -> (synthesize -> verify) per kind -> export
    """

    def build_plan(
        self,
        kinds: Sequence[str],
        degrees: Optional[Degrees] = None,
        pin: str = "auto",
        objective: str = "nominal",
        full_output: bool = False,
        grid: Optional[Sequence[int]] = None,
        verify: bool = True,
        export: bool = True,
        sdpa_export: Optional[str] = None,
    ) -> AnalysisPlan:
        """
        Build the analyze plan.

        Args:
            kinds: Bound kinds to synthesize, in order
            degrees: Parameter degrees shared by every program
            pin: Pin mode for the nominal value (auto, on, off)
            objective: nominal or integral
            full_output: Use the full output rows for h2
            grid: Points per parameter axis for sampling
            verify: Add an oracle dominance step per kind
            export: Add the final export step
            sdpa_export: Write each compiled program here (suffixed by kind when
                several kinds are requested)

        Returns:
            Analysis plan with steps
        """
        if not kinds:
            raise ValueError("At least one bound kind is required")
        degrees = degrees or Degrees()

        steps: List[Step] = [
            Step(step_id="load", action=StepAction.LOAD, action_data={"grid": list(grid or [])}),
            Step(step_id="hurwitz", action=StepAction.HURWITZ, depends_on=["load"]),
        ]
        final_deps = []
        for kind in kinds:
            kind = GainKind(kind).value
            synth_id = f"synthesize-{kind}"
            steps.append(Step(
                step_id=synth_id,
                action=StepAction.SYNTHESIZE,
                action_data=self._synthesis_data(
                    kind, degrees, pin, objective, full_output,
                    export_path(sdpa_export, kind, len(kinds)),
                ),
                depends_on=["hurwitz"],
            ))
            final_deps.append(synth_id)
            if verify:
                verify_id = f"verify-{kind}"
                steps.append(Step(
                    step_id=verify_id,
                    action=StepAction.VERIFY,
                    action_data={"kind": kind},
                    depends_on=[synth_id],
                ))
                final_deps.append(verify_id)

        if export:
            steps.append(Step(
                step_id="export",
                action=StepAction.EXPORT,
                action_data={"kinds": [GainKind(k).value for k in kinds]},
                depends_on=final_deps,
            ))
        return AnalysisPlan(name="analyze", steps=steps)

    def _synthesis_data(
        self,
        kind: str,
        degrees: Degrees,
        pin: str,
        objective: str,
        full_output: bool,
        sdpa_export: Optional[str],
    ) -> Dict[str, Any]:
        return {
            "kind": kind,
            "degrees": degrees.to_dict(),
            "pin": pin,
            "objective": objective,
            "full_output": full_output,
            "sdpa_export": sdpa_export,
        }
