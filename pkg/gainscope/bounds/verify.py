"""
gainscope - Bound Verification

Pointwise comparison of certified bounds against the exact oracles, and
level-set sampling.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..oracle import (
    BisectionError,
    NotHurwitzError,
    h2_norm_exact,
    l2_induced_gain_exact,
    state_to_output_gain_exact,
)
from ..sysmodel import CascadeSystem, ParameterSingularityError, UncertainSystem, build_cascade
from .models import GainBound, GainKind


logger = logging.getLogger(__name__)

DOMINANCE_REL_TOL = 1e-6


def oracle_value(
    kind: Union[GainKind, str],
    system: Union[UncertainSystem, CascadeSystem],
    theta: Sequence[float],
    full_output: bool = False,
) -> float:
    """Exact squared gain of the kind a bound refers to."""
    kind = GainKind(kind)
    if kind in (GainKind.S2O_UPPER, GainKind.S2O_LOWER):
        return state_to_output_gain_exact(system, theta)
    if kind == GainKind.L2:
        return l2_induced_gain_exact(system, theta)
    return h2_norm_exact(system, theta, full_output=full_output)


@dataclass
class DominanceReport:
    """bound(theta) against oracle(theta); margin = bound - oracle (NaN where skipped)."""
    kind: GainKind
    points: np.ndarray
    bound: np.ndarray
    oracle: np.ndarray
    margin: np.ndarray
    tol: float = DOMINANCE_REL_TOL
    skipped: List[int] = field(default_factory=list)

    def _allowed(self) -> np.ndarray:
        return self.tol * (1.0 + np.abs(self.oracle))

    @property
    def failures(self) -> List[int]:
        allowed = self._allowed()
        if self.kind.is_lower:
            bad = self.margin > allowed
        else:
            bad = self.margin < -allowed
        return [int(i) for i in np.flatnonzero(bad & ~np.isnan(self.margin))]

    @property
    def passed(self) -> bool:
        return not self.failures

    @property
    def worst_margin(self) -> float:
        valid = self.margin[~np.isnan(self.margin)]
        if not len(valid):
            return float("nan")
        return float(np.max(valid) if self.kind.is_lower else np.min(valid))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind.value,
            "points": int(len(self.points)),
            "skipped": len(self.skipped),
            "failures": len(self.failures),
            "worst_margin": self.worst_margin,
            "passed": self.passed,
        }


def _compare(
    bound: GainBound,
    cascade: CascadeSystem,
    theta: np.ndarray,
) -> Tuple[float, float, Optional[str]]:
    value = bound.evaluate(theta)
    try:
        exact = oracle_value(bound.kind, cascade, theta, bound.full_output)
    except (ParameterSingularityError, NotHurwitzError, BisectionError) as e:
        return value, float("nan"), str(e)
    return value, exact, None


def dominance_check(
    bound: GainBound,
    system: UncertainSystem,
    points: Sequence[Sequence[float]],
    tol: float = DOMINANCE_REL_TOL,
    workers: int = 1,
) -> DominanceReport:
    """
    Evaluate bound and oracle on every point (point order preserved).

    Upper bounds must satisfy bound >= oracle - tol (1 + oracle); lower
    bounds bound <= oracle + tol (1 + oracle). Points where the oracle is
    undefined are skipped and reported.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    cascade = build_cascade(system)
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        results = list(pool.map(lambda theta: _compare(bound, cascade, theta), points))

    values = np.array([r[0] for r in results])
    exact = np.array([r[1] for r in results])
    skipped = [i for i, r in enumerate(results) if r[2] is not None]
    for i in skipped:
        logger.warning(f"Skipped theta={points[i].tolist()}: {results[i][2]}")
    return DominanceReport(
        kind=bound.kind,
        points=points,
        bound=values,
        oracle=exact,
        margin=values - exact,
        tol=tol,
        skipped=skipped,
    )


def level_set_mask(bound: GainBound, points: Sequence[Sequence[float]], level: float) -> np.ndarray:
    """True where bound(theta) <= level."""
    return bound.evaluate_grid(np.asarray(points, dtype=float)) <= level
