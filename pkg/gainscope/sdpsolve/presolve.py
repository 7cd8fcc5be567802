"""
gainscope - SDP Presolve

Removes zero, duplicate and linearly dependent rows, eliminates 1x1 blocks
fixed by a single row, and scales rows to unit infinity-norm. Everything
removed is recorded so a reduced solution maps back onto the original.
"""
import logging
from typing import Dict, List, Tuple

import numpy as np
from scipy import linalg

from .models import PresolveReport, SdpProblem, SdpRow, SdpSolution


logger = logging.getLogger(__name__)

FEASIBILITY_TOL = 1e-9
RANK_TOL = 1e-10


def _fixed_scalars(problem: SdpProblem, report: PresolveReport) -> Dict[int, float]:
    fixed: Dict[int, float] = {}
    for row in problem.rows:
        if row.free or len(row.entries) != 1:
            continue
        (blk, _, _), coeff = next(iter(row.entries.items()))
        if problem.block_dims[blk] != 1 or coeff == 0.0:
            continue
        value = row.rhs / coeff
        if value < -FEASIBILITY_TOL:
            report.infeasible = True
            report.message = f"1x1 block {blk} fixed to negative value {value:.6g}"
            return fixed
        if blk in fixed and abs(fixed[blk] - value) > FEASIBILITY_TOL * (1.0 + abs(value)):
            report.infeasible = True
            report.message = f"1x1 block {blk} fixed to both {fixed[blk]:.6g} and {value:.6g}"
            return fixed
        fixed[blk] = max(value, 0.0)
    return fixed


def _row_key(row: SdpRow) -> Tuple[Tuple, float]:
    items = sorted(
        [(("x",) + k, v) for k, v in row.entries.items()]
        + [(("f", k), v) for k, v in row.free.items()]
    )
    lead = items[0][1]
    key = tuple((name, float(f"{v / lead:.12g}")) for name, v in items)
    return key, row.rhs / lead


def presolve(problem: SdpProblem) -> Tuple[SdpProblem, PresolveReport]:
    """
    Reduce a problem.

    Returns:
        (reduced problem, report); report.infeasible is set when two rows
        contradict each other or a row reads 0 = c with c != 0
    """
    report = PresolveReport()

    fixed = _fixed_scalars(problem, report)
    if report.infeasible:
        return problem, report
    report.fixed_scalars = fixed

    block_map, new_dims, new_labels = [], [], []
    for k, n in enumerate(problem.block_dims):
        if k in fixed:
            block_map.append(-1)
        else:
            block_map.append(len(new_dims))
            new_dims.append(n)
            new_labels.append(problem.block_labels[k] if k < len(problem.block_labels) else "")
    report.block_map = block_map

    constant = problem.constant
    objective = {}
    for (b, i, j), v in problem.objective.items():
        if b in fixed:
            constant += v * fixed[b]
        else:
            objective[(block_map[b], i, j)] = v

    candidates: List[Tuple[int, SdpRow]] = []
    for index, row in enumerate(problem.rows):
        rhs = row.rhs
        entries = {}
        for (b, i, j), v in row.entries.items():
            if b in fixed:
                rhs -= v * fixed[b]
            else:
                entries[(block_map[b], i, j)] = v
        reduced = SdpRow(entries=entries, free=dict(row.free), rhs=rhs, label=row.label)

        if reduced.is_zero:
            if abs(rhs) > FEASIBILITY_TOL * (1.0 + abs(row.rhs)):
                report.infeasible = True
                report.message = f"Row {index} ({row.label or 'unlabeled'}) reads 0 = {rhs:.6g}"
                return problem, report
            report.dropped_zero += 1
            continue
        candidates.append((index, reduced))

    seen: Dict[Tuple, Tuple[int, float]] = {}
    unique: List[Tuple[int, SdpRow]] = []
    for index, row in candidates:
        key, rhs = _row_key(row)
        if key in seen:
            other, other_rhs = seen[key]
            if abs(rhs - other_rhs) > FEASIBILITY_TOL * (1.0 + abs(other_rhs)):
                report.infeasible = True
                report.message = f"Rows {other} and {index} are contradictory"
                return problem, report
            report.dropped_duplicate += 1
            continue
        seen[key] = (index, rhs)
        unique.append((index, row))

    reduced_problem = SdpProblem(
        block_dims=new_dims,
        n_free=problem.n_free,
        rows=[row for _, row in unique],
        objective=objective,
        objective_free=dict(problem.objective_free),
        constant=constant,
        block_labels=new_labels,
    )

    if unique:
        A, b = reduced_problem.dense_rows()
        _, R, piv = linalg.qr(A.T, mode="economic", pivoting=True)
        diag = np.abs(np.diag(R))
        rank = int(np.sum(diag > RANK_TOL * diag[0])) if diag.size and diag[0] > 0 else 0
        if rank < len(unique):
            independent = sorted(int(p) for p in piv[:rank])
            solution = np.linalg.lstsq(A[independent], b[independent], rcond=None)[0]
            mismatch = float(np.max(np.abs(A @ solution - b)))
            if mismatch > 1e-8 * (1.0 + float(np.max(np.abs(b)))):
                report.infeasible = True
                report.message = f"Dependent rows are inconsistent (mismatch {mismatch:.3g})"
                return problem, report
            report.dropped_dependent = len(unique) - rank
            logger.info(f"Presolve pruned {report.dropped_dependent} dependent rows")
            unique = [unique[i] for i in independent]

    scaled_rows, scales = [], []
    for _, row in unique:
        factor = 1.0 / row.max_abs()
        scaled_rows.append(row.scaled(factor))
        scales.append(factor)
    reduced_problem.rows = scaled_rows
    report.kept_rows = [index for index, _ in unique]
    report.row_scales = scales
    return reduced_problem, report


def postsolve(solution: SdpSolution, original: SdpProblem, report: PresolveReport) -> SdpSolution:
    """Map a solution of the reduced problem back onto the original structure."""
    blocks = []
    for k, n in enumerate(original.block_dims):
        if report.block_map and report.block_map[k] < 0:
            blocks.append(np.array([[report.fixed_scalars[k]]]))
        elif solution.blocks:
            blocks.append(solution.blocks[report.block_map[k] if report.block_map else k])
        else:
            blocks.append(np.zeros((n, n)))

    duals = np.zeros(original.n_rows)
    if solution.duals.size:
        for r, (index, scale) in enumerate(zip(report.kept_rows, report.row_scales)):
            duals[index] = solution.duals[r] * scale

    free = solution.free if solution.free.size else np.zeros(original.n_free)
    solution.blocks = blocks
    solution.free = free
    solution.duals = duals
    solution.presolve = report
    return solution
