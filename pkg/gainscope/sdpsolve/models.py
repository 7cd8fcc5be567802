"""
gainscope - SDP Data Models

Standard form:

    minimize    <C, X> + c_f . f + constant
    subject to  <A_i, X> + F_i . f = b_i      (i = 1..m)
                X = diag(X_1, ..., X_K),  X_k symmetric PSD

A row or objective coefficient stored under (k, i, j) with i <= j multiplies
the entry X_k[i, j] once; off-diagonal coefficients are therefore split in
half across the symmetric pair when the matrix A_i is formed.
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import numpy as np


EntryKey = Tuple[int, int, int]


class SolverStatus(str, Enum):
    """Outcome of a solve."""
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    NUMERICAL_LIMIT = "numerical-limit"


@dataclass
class SdpRow:
    """One equality row."""
    entries: Dict[EntryKey, float] = field(default_factory=dict)
    free: Dict[int, float] = field(default_factory=dict)
    rhs: float = 0.0
    label: str = ""

    @property
    def is_zero(self) -> bool:
        return not any(self.entries.values()) and not any(self.free.values())

    def max_abs(self) -> float:
        values = list(self.entries.values()) + list(self.free.values())
        return max((abs(v) for v in values), default=0.0)

    def scaled(self, factor: float) -> "SdpRow":
        return SdpRow(
            entries={k: v * factor for k, v in self.entries.items()},
            free={k: v * factor for k, v in self.free.items()},
            rhs=self.rhs * factor,
            label=self.label,
        )


@dataclass
class SdpProblem:
    """Block-PSD equality-constrained SDP."""
    block_dims: List[int] = field(default_factory=list)
    n_free: int = 0
    rows: List[SdpRow] = field(default_factory=list)
    objective: Dict[EntryKey, float] = field(default_factory=dict)
    objective_free: Dict[int, float] = field(default_factory=dict)
    constant: float = 0.0
    block_labels: List[str] = field(default_factory=list)

    # ==================== BUILDING ====================

    def add_block(self, dim: int, label: str = "") -> int:
        """Append a PSD block; returns its index."""
        if dim < 1:
            raise ValueError(f"Block dimension must be >= 1, got {dim}")
        self.block_dims.append(int(dim))
        self.block_labels.append(label)
        return len(self.block_dims) - 1

    def add_free(self, count: int = 1) -> int:
        """Append free variables; returns the index of the first."""
        start = self.n_free
        self.n_free += count
        return start

    def add_row(
        self,
        entries: Optional[Dict[EntryKey, float]] = None,
        free: Optional[Dict[int, float]] = None,
        rhs: float = 0.0,
        label: str = "",
    ) -> int:
        row = SdpRow(
            entries={self._check_key(k): float(v) for k, v in (entries or {}).items() if v != 0.0},
            free={int(k): float(v) for k, v in (free or {}).items() if v != 0.0},
            rhs=float(rhs),
            label=label,
        )
        for k in row.free:
            if not 0 <= k < self.n_free:
                raise IndexError(f"Free variable {k} out of range ({self.n_free})")
        self.rows.append(row)
        return len(self.rows) - 1

    def _check_key(self, key: EntryKey) -> EntryKey:
        blk, i, j = key
        if i > j:
            i, j = j, i
        if not 0 <= blk < len(self.block_dims):
            raise IndexError(f"Block {blk} out of range ({len(self.block_dims)} blocks)")
        if not 0 <= i <= j < self.block_dims[blk]:
            raise IndexError(f"Entry ({i}, {j}) outside block {blk} of size {self.block_dims[blk]}")
        return (blk, i, j)

    # ==================== DENSE VIEWS ====================

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    @property
    def n_blocks(self) -> int:
        return len(self.block_dims)

    @property
    def total_dim(self) -> int:
        return sum(self.block_dims)

    def column_offsets(self) -> List[int]:
        """Start column of each block in the upper-triangular vectorization."""
        offsets, pos = [], 0
        for n in self.block_dims:
            offsets.append(pos)
            pos += n * (n + 1) // 2
        return offsets

    @property
    def n_columns(self) -> int:
        return sum(n * (n + 1) // 2 for n in self.block_dims) + self.n_free

    def entry_column(self, key: EntryKey, offsets: Optional[List[int]] = None) -> int:
        blk, i, j = key
        offsets = offsets or self.column_offsets()
        n = self.block_dims[blk]
        return offsets[blk] + i * n - i * (i - 1) // 2 + (j - i)

    def dense_rows(self) -> Tuple[np.ndarray, np.ndarray]:
        """Row matrix over (upper-triangular entries, free variables) and rhs."""
        offsets = self.column_offsets()
        free_start = self.n_columns - self.n_free
        matrix = np.zeros((self.n_rows, self.n_columns))
        for r, row in enumerate(self.rows):
            for key, value in row.entries.items():
                matrix[r, self.entry_column(key, offsets)] += value
            for k, value in row.free.items():
                matrix[r, free_start + k] += value
        return matrix, np.array([row.rhs for row in self.rows])

    def vectorize(self, blocks: List[np.ndarray], free: np.ndarray) -> np.ndarray:
        """Stack upper-triangular block entries and free values into one column vector."""
        parts = [b[np.triu_indices(b.shape[0])] for b in blocks]
        return np.concatenate(parts + [np.asarray(free, dtype=float)])

    def unvectorize(self, vector: np.ndarray) -> Tuple[List[np.ndarray], np.ndarray]:
        blocks, pos = [], 0
        for n in self.block_dims:
            size = n * (n + 1) // 2
            X = np.zeros((n, n))
            X[np.triu_indices(n)] = vector[pos:pos + size]
            X = X + np.triu(X, 1).T
            blocks.append(X)
            pos += size
        return blocks, np.array(vector[pos:pos + self.n_free], dtype=float)

    def row_matrix(self, row: SdpRow, blk: int) -> np.ndarray:
        """Symmetric matrix A_i restricted to one block."""
        n = self.block_dims[blk]
        A = np.zeros((n, n))
        for (b, i, j), value in row.entries.items():
            if b != blk:
                continue
            if i == j:
                A[i, i] += value
            else:
                A[i, j] += 0.5 * value
                A[j, i] += 0.5 * value
        return A

    def objective_matrices(self) -> List[np.ndarray]:
        return [self.row_matrix(SdpRow(entries=self.objective), k) for k in range(self.n_blocks)]

    def objective_value(self, blocks: List[np.ndarray], free: np.ndarray) -> float:
        total = self.constant
        for (b, i, j), value in self.objective.items():
            total += value * blocks[b][i, j]
        for k, value in self.objective_free.items():
            total += value * free[k]
        return float(total)

    def row_residuals(self, blocks: List[np.ndarray], free: np.ndarray) -> np.ndarray:
        """b_i - (<A_i, X> + F_i . f) for each row."""
        out = np.zeros(self.n_rows)
        for r, row in enumerate(self.rows):
            value = sum(c * blocks[b][i, j] for (b, i, j), c in row.entries.items())
            value += sum(c * free[k] for k, c in row.free.items())
            out[r] = row.rhs - value
        return out

    def summary(self) -> Dict[str, Any]:
        return {
            "blocks": list(self.block_dims),
            "free": self.n_free,
            "rows": self.n_rows,
        }


@dataclass
class PresolveReport:
    """What presolve removed and how to map a solution back."""
    kept_rows: List[int] = field(default_factory=list)
    row_scales: List[float] = field(default_factory=list)
    dropped_zero: int = 0
    dropped_duplicate: int = 0
    dropped_dependent: int = 0
    fixed_scalars: Dict[int, float] = field(default_factory=dict)
    block_map: List[int] = field(default_factory=list)
    infeasible: bool = False
    message: str = ""

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kept_rows": len(self.kept_rows),
            "dropped_zero": self.dropped_zero,
            "dropped_duplicate": self.dropped_duplicate,
            "dropped_dependent": self.dropped_dependent,
            "fixed_scalars": {str(k): v for k, v in sorted(self.fixed_scalars.items())},
            "infeasible": self.infeasible,
            "message": self.message,
        }


@dataclass
class SdpSolution:
    """Primal/dual solution with status and final residuals."""
    status: SolverStatus
    blocks: List[np.ndarray] = field(default_factory=list)
    free: np.ndarray = field(default_factory=lambda: np.zeros(0))
    duals: np.ndarray = field(default_factory=lambda: np.zeros(0))
    objective: float = float("nan")
    dual_objective: float = float("nan")
    iterations: int = 0
    primal_residual: float = float("nan")
    dual_residual: float = float("nan")
    gap: float = float("nan")
    message: str = ""
    presolve: Optional[PresolveReport] = None
    phase_one_value: Optional[float] = None

    @property
    def is_optimal(self) -> bool:
        return self.status == SolverStatus.OPTIMAL

    def min_eigenvalues(self) -> List[float]:
        return [float(np.linalg.eigvalsh(B)[0]) if B.size else 0.0 for B in self.blocks]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "status": self.status.value,
            "objective": self.objective,
            "dual_objective": self.dual_objective,
            "iterations": self.iterations,
            "primal_residual": self.primal_residual,
            "dual_residual": self.dual_residual,
            "gap": self.gap,
            "message": self.message,
            "phase_one_value": self.phase_one_value,
            "presolve": self.presolve.to_dict() if self.presolve else None,
        }
