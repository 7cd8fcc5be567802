"""
gainscope - Parameter Boxes and Grids
"""
import math
from dataclasses import dataclass
from itertools import product
from typing import List, Sequence, Tuple, Union

import numpy as np

from .models import UncertainSystem


DEFAULT_RESOLUTION = 20
DEFAULT_SHRINK = 0.01

Box = Tuple[Tuple[float, float], ...]


class BoxInferenceError(Exception):
    """Raised when the domain does not bound every parameter."""
    pass


def _univariate_interval(g, name: str) -> Tuple[float, float]:
    degree = g.degree()
    c0 = g.coefficient({name: 0})
    c1 = g.coefficient({name: 1})
    if degree == 1:
        root = -c0 / c1
        return (root, math.inf) if c1 > 0 else (-math.inf, root)
    if degree == 2:
        c2 = g.coefficient({name: 2})
        disc = c1 * c1 - 4.0 * c2 * c0
        if c2 < 0 and disc >= 0:
            sq = math.sqrt(disc)
            r1, r2 = sorted(((-c1 - sq) / (2 * c2), (-c1 + sq) / (2 * c2)))
            return (r1, r2)
    return (-math.inf, math.inf)


def infer_box(system: UncertainSystem) -> Box:
    """
    Axis-aligned box for sampling.

    Uses the [box] section when present, otherwise intersects the intervals
    implied by univariate affine or concave quadratic domain polynomials.

    Raises:
        BoxInferenceError: If some parameter stays unbounded
    """
    if system.box is not None:
        return tuple(tuple(b) for b in system.box)

    bounds = {name: [-math.inf, math.inf] for name in system.param_names}
    for g in system.domain:
        used = g.used_variables()
        if len(used) != 1 or used[0] not in bounds:
            continue
        lo, hi = _univariate_interval(g, used[0])
        current = bounds[used[0]]
        current[0] = max(current[0], lo)
        current[1] = min(current[1], hi)

    for name, (lo, hi) in bounds.items():
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise BoxInferenceError(
                f"Cannot infer a bounded interval for {name}; add a [box] section"
            )
        if lo >= hi:
            raise BoxInferenceError(f"Empty interval for {name}: [{lo}, {hi}]")
    return tuple((bounds[n][0], bounds[n][1]) for n in system.param_names)


@dataclass
class ParameterGrid:
    """Tensor grid, points in lexicographic index order (first axis slowest)."""
    axes: List[np.ndarray]
    points: np.ndarray
    indices: List[Tuple[int, ...]]

    def __len__(self) -> int:
        return len(self.points)

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(len(a) for a in self.axes)


def parameter_grid(
    box: Box,
    resolution: Union[int, Sequence[int]] = DEFAULT_RESOLUTION,
    shrink: float = DEFAULT_SHRINK,
) -> ParameterGrid:
    """
    Build a grid over the box, pulled inward by `shrink` of each side length.

    Args:
        box: Interval per parameter
        resolution: Points per axis (int or one per axis), each >= 2
        shrink: Relative inset from the box boundary
    """
    k = len(box)
    counts = [resolution] * k if isinstance(resolution, int) else list(resolution)
    if len(counts) != k:
        raise ValueError(f"Resolution has {len(counts)} entries for {k} parameters")
    if any(c < 2 for c in counts):
        raise ValueError(f"Grid resolution must be >= 2 per axis, got {counts}")

    axes = []
    for (lo, hi), count in zip(box, counts):
        inset = shrink * (hi - lo)
        axes.append(np.linspace(lo + inset, hi - inset, count))

    indices = list(product(*(range(c) for c in counts)))
    points = np.array([[axes[a][i] for a, i in enumerate(idx)] for idx in indices], dtype=float)
    return ParameterGrid(axes=axes, points=points.reshape(len(indices), k), indices=indices)


def domain_mask(system: UncertainSystem, points: np.ndarray, tol: float = 0.0) -> np.ndarray:
    """Boolean mask of grid points satisfying every domain inequality."""
    points = np.atleast_2d(points)
    mask = np.ones(len(points), dtype=bool)
    for g in system.domain:
        values = g.eval_grid({name: points[:, i] for i, name in enumerate(system.param_names)})
        mask &= np.broadcast_to(values, mask.shape) >= -tol
    return mask
