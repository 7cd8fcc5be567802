"""
gainscope - Sparse SDPA Text Format

SDPA reads  max <F0, Y>  s.t. <F_i, Y> = c_i, Y PSD, so a problem in
standard form maps to F_i = A_i, c_i = b_i, F0 = -C. Free variables are
written as differences of two entries on a trailing diagonal block.
"""
import re
from typing import Dict, List, Tuple

from .models import SdpProblem, SdpRow


class SdpaFormatError(Exception):
    """Raised when SDPA text cannot be read."""
    pass


def _real(value: float) -> str:
    return format(float(value), ".17g")


def write_sdpa(problem: SdpProblem) -> str:
    """Render the problem in sparse SDPA format (1-based, upper triangle)."""
    dims = list(problem.block_dims)
    free_block = None
    if problem.n_free:
        free_block = len(dims)
        dims.append(-2 * problem.n_free)

    lines = [
        f'"gainscope export: {len(problem.block_dims)} blocks, {problem.n_free} free, '
        f'objective constant {_real(problem.constant)}"',
        str(problem.n_rows),
        str(len(dims)),
        " ".join(str(d) for d in dims),
        " ".join(_real(row.rhs) for row in problem.rows) if problem.rows else "",
    ]

    def emit(matno: int, entries: Dict, free: Dict, sign: float) -> None:
        for (blk, i, j) in sorted(entries):
            value = entries[(blk, i, j)]
            entry = value if i == j else 0.5 * value
            lines.append(f"{matno} {blk + 1} {i + 1} {j + 1} {_real(sign * entry)}")
        for k in sorted(free):
            value = sign * free[k]
            lines.append(f"{matno} {free_block + 1} {2 * k + 1} {2 * k + 1} {_real(value)}")
            lines.append(f"{matno} {free_block + 1} {2 * k + 2} {2 * k + 2} {_real(-value)}")

    emit(0, problem.objective, problem.objective_free, -1.0)
    for r, row in enumerate(problem.rows):
        emit(r + 1, row.entries, row.free, 1.0)
    return "\n".join(lines) + "\n"


def _numbers(line: str) -> List[str]:
    return [tok for tok in re.split(r"[\s,{}()]+", line.strip()) if tok]


def read_sdpa(text: str) -> SdpProblem:
    """
    Parse sparse SDPA text.

    Diagonal blocks (negative sizes) become one 1x1 block per diagonal entry.

    Raises:
        SdpaFormatError: On malformed input
    """
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith(("*", '"'))]
    if len(lines) < 3:
        raise SdpaFormatError("SDPA text needs at least the size lines")
    try:
        m = int(_numbers(lines[0])[0])
        nblocks = int(_numbers(lines[1])[0])
        sizes = [int(tok) for tok in _numbers(lines[2])[:nblocks]]
    except (IndexError, ValueError) as e:
        raise SdpaFormatError(f"Malformed SDPA header: {e}")
    if len(sizes) != nblocks:
        raise SdpaFormatError(f"Expected {nblocks} block sizes, got {len(sizes)}")

    cursor = 3
    rhs: List[float] = []
    while len(rhs) < m and cursor < len(lines):
        rhs += [float(tok) for tok in _numbers(lines[cursor])]
        cursor += 1
    if len(rhs) < m:
        raise SdpaFormatError(f"Expected {m} right-hand sides, got {len(rhs)}")

    problem = SdpProblem()
    # (sdpa block, index) -> (our block, offset); diagonal blocks map entry-wise
    mapping: Dict[Tuple[int, int], int] = {}
    dense_index: Dict[int, int] = {}
    for b, size in enumerate(sizes):
        if size > 0:
            dense_index[b] = problem.add_block(size)
        else:
            for i in range(-size):
                mapping[(b, i)] = problem.add_block(1)
    for r in range(m):
        problem.rows.append(SdpRow(rhs=rhs[r]))

    for line in lines[cursor:]:
        tokens = _numbers(line)
        if len(tokens) != 5:
            raise SdpaFormatError(f"Expected 'matno block i j value', got {line!r}")
        matno, blk, i, j = (int(t) for t in tokens[:4])
        value = float(tokens[4])
        blk, i, j = blk - 1, i - 1, j - 1
        if not 0 <= blk < nblocks or not 0 <= matno <= m:
            raise SdpaFormatError(f"Index out of range in {line!r}")
        i, j = min(i, j), max(i, j)
        if blk in dense_index:
            key = (dense_index[blk], i, j)
            coeff = value if i == j else 2.0 * value
        else:
            if i != j:
                raise SdpaFormatError(f"Off-diagonal entry in diagonal block: {line!r}")
            key = (mapping[(blk, i)], 0, 0)
            coeff = value
        target = problem.objective if matno == 0 else problem.rows[matno - 1].entries
        sign = -1.0 if matno == 0 else 1.0
        target[key] = target.get(key, 0.0) + sign * coeff
    return problem
