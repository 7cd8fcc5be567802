"""
gainscope - Level-Set Contours

Marching squares on a tensor grid. Cell corners are numbered
0:(i,j) 1:(i+1,j) 2:(i+1,j+1) 3:(i,j+1); a corner is "outside" when
value - level > 0. Segment endpoints are identified by the grid edge they
cross, so segments chain into polylines without float comparisons.
"""
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np


Corner = Tuple[int, int]
EdgeKey = Tuple[Corner, Corner]

# Outside-corner mask (corner 0 is the high bit) -> segments as pairs of cell edges.
# Saddles list two resolutions: [center inside, center outside].
MARCHING_SQUARES_TABLE = {
    0b0000: [],
    0b0001: [((0, 3), (2, 3))],
    0b0010: [((1, 2), (2, 3))],
    0b0011: [((0, 3), (1, 2))],
    0b0100: [((0, 1), (1, 2))],
    0b0110: [((0, 1), (2, 3))],
    0b0111: [((0, 1), (0, 3))],
    0b1000: [((0, 1), (0, 3))],
    0b1001: [((0, 1), (2, 3))],
    0b1011: [((0, 1), (1, 2))],
    0b1100: [((0, 3), (1, 2))],
    0b1101: [((1, 2), (2, 3))],
    0b1110: [((0, 3), (2, 3))],
    0b1111: [],
}
SADDLES = {
    0b0101: (
        [((0, 1), (1, 2)), ((0, 3), (2, 3))],
        [((0, 1), (0, 3)), ((1, 2), (2, 3))],
    ),
    0b1010: (
        [((0, 1), (0, 3)), ((1, 2), (2, 3))],
        [((0, 1), (1, 2)), ((0, 3), (2, 3))],
    ),
}


@dataclass
class Polyline:
    points: np.ndarray
    closed: bool

    def __len__(self) -> int:
        return len(self.points)


def _corners(i: int, j: int) -> List[Corner]:
    return [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)]


def _edge_key(a: Corner, b: Corner) -> EdgeKey:
    return (a, b) if a <= b else (b, a)


def _crossing(
    key: EdgeKey,
    f: np.ndarray,
    x: np.ndarray,
    y: np.ndarray,
) -> np.ndarray:
    (i0, j0), (i1, j1) = key
    v0, v1 = f[i0, j0], f[i1, j1]
    t = v0 / (v0 - v1) if v0 != v1 else 0.5
    t = min(max(t, 0.0), 1.0)
    p0 = np.array([x[i0], y[j0]])
    p1 = np.array([x[i1], y[j1]])
    return p0 * (1.0 - t) + p1 * t


def contour_segments(values: np.ndarray, level: float) -> List[Tuple[EdgeKey, EdgeKey]]:
    """Segments of {value = level} as pairs of crossed grid edges, cell by cell."""
    f = np.asarray(values, dtype=float) - level
    segments = []
    nx, ny = f.shape
    for i in range(nx - 1):
        for j in range(ny - 1):
            corners = _corners(i, j)
            samples = [f[c] for c in corners]
            if any(np.isnan(samples)):
                continue
            index = 0
            for v in samples:
                index = (index << 1) | int(v > 0)
            if index in SADDLES:
                center_outside = float(np.mean(samples)) > 0
                cell = SADDLES[index][int(center_outside)]
            else:
                cell = MARCHING_SQUARES_TABLE[index]
            for (a0, a1), (b0, b1) in cell:
                segments.append((
                    _edge_key(corners[a0], corners[a1]),
                    _edge_key(corners[b0], corners[b1]),
                ))
    return segments


def _chain(segments: List[Tuple[EdgeKey, EdgeKey]]) -> List[Tuple[List[EdgeKey], bool]]:
    adjacency: Dict[EdgeKey, List[int]] = {}
    for k, (a, b) in enumerate(segments):
        adjacency.setdefault(a, []).append(k)
        adjacency.setdefault(b, []).append(k)

    used = [False] * len(segments)

    def walk(start: EdgeKey) -> List[EdgeKey]:
        path = [start]
        current = start
        while True:
            nxt = next((k for k in adjacency[current] if not used[k]), None)
            if nxt is None:
                return path
            used[nxt] = True
            a, b = segments[nxt]
            current = b if a == current else a
            path.append(current)

    chains = []
    # Open polylines start at edges touched by a single segment (the grid boundary).
    for key in sorted(k for k, segs in adjacency.items() if len(segs) == 1):
        if not any(not used[s] for s in adjacency[key]):
            continue
        chains.append((walk(key), False))
    for k, (a, _) in enumerate(segments):
        if not used[k]:
            path = walk(a)
            chains.append((path, len(path) > 2 and path[0] == path[-1]))
    return chains


def extract_contours(
    x: Sequence[float],
    y: Sequence[float],
    values: np.ndarray,
    level: float,
) -> List[Polyline]:
    """
    Polylines of values(x_i, y_j) = level.

    Args:
        x, y: Grid axes
        values: Array of shape (len(x), len(y)); NaN cells are skipped
        level: Contour level

    Returns:
        Polylines in deterministic order (open ones first)
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    f = np.asarray(values, dtype=float) - level
    if f.shape != (len(x), len(y)):
        raise ValueError(f"Values shape {f.shape} does not match grid {(len(x), len(y))}")

    polylines = []
    for keys, closed in _chain(contour_segments(values, level)):
        points = np.array([_crossing(key, f, x, y) for key in keys])
        polylines.append(Polyline(points=points, closed=closed))
    return polylines
