"""
gainscope - Embedded Interior-Point Solver

Primal-dual path following with the HKM search direction and Mehrotra
predictor-corrector steps. Free variables enter through a regularized
saddle-point form of the Schur complement system. A primal iterate that
stops improving is projected back onto the equality rows in the metric
of X. When the main loop still stalls or diverges, a phase-one problem
decides between infeasibility and a numerical limit.
"""
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from scipy import linalg

from .models import SdpProblem, SdpRow, SdpSolution, SolverStatus


logger = logging.getLogger(__name__)

DIVERGENCE_LIMIT = 1e9
STALL_STEP = 1e-9
STALL_COUNT = 5
# pinf must drop by 10% over this many iterations
PINF_WINDOW = 10
PINF_PROGRESS = 0.9
# primal infeasibility this far above the gap switches to centering steps
PRIMAL_LAG = 1e3
RECOVERY_TOL = 1e-6
RECOVERY_ROUNDS = 3
SADDLE_REG = 1e-12
REFINE_STEPS = 3
EIG_FLOOR = 1e-14


class _Operator:
    """Dense per-block stacks of the row matrices A_i."""

    def __init__(self, problem: SdpProblem):
        self.dims = list(problem.block_dims)
        self.m = problem.n_rows
        self.nf = problem.n_free
        self.b = np.array([row.rhs for row in problem.rows], dtype=float)
        self.F = np.zeros((self.m, self.nf))
        self.block_rows: List[np.ndarray] = []
        self.block_mats: List[np.ndarray] = []

        touching: List[List[int]] = [[] for _ in self.dims]
        for r, row in enumerate(problem.rows):
            for k, value in row.free.items():
                self.F[r, k] += value
            for blk in sorted({key[0] for key in row.entries}):
                touching[blk].append(r)

        for blk, rows in enumerate(touching):
            mats = np.zeros((len(rows), self.dims[blk], self.dims[blk]))
            for t, r in enumerate(rows):
                mats[t] = problem.row_matrix(problem.rows[r], blk)
            self.block_rows.append(np.array(rows, dtype=int))
            self.block_mats.append(mats)

        self.C = problem.objective_matrices()
        self.cf = np.zeros(self.nf)
        for k, value in problem.objective_free.items():
            self.cf[k] += value
        self.constant = problem.constant

    def apply(self, X: List[np.ndarray]) -> np.ndarray:
        out = np.zeros(self.m)
        for rows, mats, Xk in zip(self.block_rows, self.block_mats, X):
            if len(rows):
                out[rows] += np.einsum("rij,ij->r", mats, Xk)
        return out

    def adjoint(self, y: np.ndarray) -> List[np.ndarray]:
        out = []
        for rows, mats, n in zip(self.block_rows, self.block_mats, self.dims):
            if len(rows):
                out.append(np.einsum("r,rij->ij", y[rows], mats))
            else:
                out.append(np.zeros((n, n)))
        return out

    def schur(self, X: List[np.ndarray], Sinv: List[np.ndarray]) -> np.ndarray:
        """M_ij = <A_i, X A_j S^-1>, symmetrized."""
        M = np.zeros((self.m, self.m))
        for rows, mats, Xk, Zk in zip(self.block_rows, self.block_mats, X, Sinv):
            r = len(rows)
            if not r:
                continue
            T = np.matmul(np.matmul(Xk, mats), Zk)
            M[np.ix_(rows, rows)] += mats.reshape(r, -1) @ T.reshape(r, -1).T
        return 0.5 * (M + M.T)


class _SaddleSolver:
    """
    Solves [[M, F], [F^T, 0]] [dy; df] = [h; rf].

    The factorized matrix is the quasi-definite [[M + dI, F], [F^T, -dI]];
    iterative refinement against the exact system removes the shift.
    """

    def __init__(self, M: np.ndarray, F: np.ndarray):
        self.m, self.nf = F.shape
        diag = float(np.max(np.abs(np.diag(M)))) if self.m else 1.0
        delta = SADDLE_REG * max(1.0, diag)
        self.K = np.block([[M, F], [F.T, np.zeros((self.nf, self.nf))]])
        shifted = self.K.copy()
        shifted[:self.m, :self.m] += delta * np.eye(self.m)
        shifted[self.m:, self.m:] -= delta * np.eye(self.nf)
        if not shifted.size:
            self.factor = None
            return
        self.factor = linalg.lu_factor(shifted, check_finite=False)
        pivots = np.abs(np.diag(self.factor[0]))
        if not np.all(np.isfinite(pivots)) or (pivots.size and pivots.min() == 0.0):
            raise linalg.LinAlgError("singular saddle-point matrix")

    def solve(self, h: np.ndarray, rf: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        if self.factor is None:
            return np.zeros(self.m), np.zeros(self.nf)
        rhs = np.concatenate([h, rf])
        sol = linalg.lu_solve(self.factor, rhs, check_finite=False)
        residual = rhs - self.K @ sol
        norm = float(np.linalg.norm(residual))
        for _ in range(REFINE_STEPS):
            if norm <= 1e-15 * (1.0 + float(np.linalg.norm(rhs))):
                break
            candidate = sol + linalg.lu_solve(self.factor, residual, check_finite=False)
            candidate_residual = rhs - self.K @ candidate
            candidate_norm = float(np.linalg.norm(candidate_residual))
            if not candidate_norm < norm:
                break
            sol, residual, norm = candidate, candidate_residual, candidate_norm
        return sol[:self.m], sol[self.m:]


def _sym(M: np.ndarray) -> np.ndarray:
    return 0.5 * (M + M.T)


def _floored_eigh(X: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    w, V = np.linalg.eigh(_sym(X))
    floor = EIG_FLOOR * max(1.0, float(np.max(np.abs(w))) if w.size else 1.0)
    return np.maximum(w, floor), V


def _inverse(S: np.ndarray) -> np.ndarray:
    try:
        factor = linalg.cho_factor(S, lower=True)
        return _sym(linalg.cho_solve(factor, np.eye(S.shape[0])))
    except linalg.LinAlgError:
        w, V = _floored_eigh(S)
        return _sym((V / w) @ V.T)


def _max_step(X: np.ndarray, dX: np.ndarray) -> float:
    """Largest alpha with X + alpha dX PSD (inf if unbounded)."""
    try:
        L = np.linalg.cholesky(X)
        W = linalg.solve_triangular(L, dX, lower=True)
        W = linalg.solve_triangular(L, W.T, lower=True)
    except np.linalg.LinAlgError:
        w, V = _floored_eigh(X)
        root = V / np.sqrt(w)
        W = root.T @ dX @ root
    lam = float(np.linalg.eigvalsh(_sym(W))[0])
    return math.inf if lam >= 0 else -1.0 / lam


def _keep_interior(X: np.ndarray) -> np.ndarray:
    """X itself if it factorizes, else X with its eigenvalues floored."""
    try:
        np.linalg.cholesky(X)
        return X
    except np.linalg.LinAlgError:
        w, V = _floored_eigh(X)
        return _sym((V * w) @ V.T)


def _inner(A: List[np.ndarray], B: List[np.ndarray]) -> float:
    return float(sum(np.sum(a * b) for a, b in zip(A, B)))


@dataclass
class _Iterate:
    X: List[np.ndarray]
    S: List[np.ndarray]
    y: np.ndarray
    f: np.ndarray


@dataclass
class _Measures:
    pobj: float
    dobj: float
    pinf: float
    dinf: float
    gap: float
    mu: float


def _measure(op: _Operator, it: _Iterate) -> Tuple[_Measures, np.ndarray, List[np.ndarray], np.ndarray]:
    rp = op.b - op.apply(it.X) - op.F @ it.f
    ATy = op.adjoint(it.y)
    Rd = [C - A - S for C, A, S in zip(op.C, ATy, it.S)]
    rf = op.cf - op.F.T @ it.y

    pobj = _inner(op.C, it.X) + float(op.cf @ it.f) + op.constant
    dobj = float(op.b @ it.y) + op.constant
    c_norm = math.sqrt(sum(float(np.sum(C * C)) for C in op.C) + float(op.cf @ op.cf))
    pinf = float(np.linalg.norm(rp)) / (1.0 + float(np.linalg.norm(op.b)))
    dinf = math.sqrt(sum(float(np.sum(R * R)) for R in Rd) + float(rf @ rf)) / (1.0 + c_norm)
    gap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
    mu = _inner(it.X, it.S) / max(1, sum(op.dims))
    return _Measures(pobj, dobj, pinf, dinf, gap, mu), rp, Rd, rf


def _initial_point(op: _Operator) -> _Iterate:
    scale_p, scale_d = 1.0, 1.0
    for rows, mats in zip(op.block_rows, op.block_mats):
        for t, r in enumerate(rows):
            norm = float(np.linalg.norm(mats[t]))
            scale_p = max(scale_p, (1.0 + abs(op.b[r])) / (1.0 + norm))
            scale_d = max(scale_d, norm)
    for C in op.C:
        scale_d = max(scale_d, float(np.linalg.norm(C)))
    n_total = max(1, sum(op.dims))
    xi = max(10.0, math.sqrt(n_total), math.sqrt(n_total) * scale_p)
    eta = max(10.0, math.sqrt(n_total), scale_d)
    return _Iterate(
        X=[xi * np.eye(n) for n in op.dims],
        S=[eta * np.eye(n) for n in op.dims],
        y=np.zeros(op.m),
        f=np.zeros(op.nf),
    )


def _direction(op, solver, it, Sinv, G, rp, Rd, rf):
    h = rp - op.apply(G)
    dy, df = solver.solve(h, rf)
    ATdy = op.adjoint(dy)
    dS = [_sym(R - A) for R, A in zip(Rd, ATdy)]
    dX = [_sym(Gk + Xk @ Ak @ Zk) for Gk, Xk, Ak, Zk in zip(G, it.X, ATdy, Sinv)]
    return dX, dy, df, dS


def _step_lengths(it, dX, dS, gamma) -> Tuple[float, float]:
    ap = min([1.0] + [gamma * _max_step(X, D) for X, D in zip(it.X, dX)])
    ad = min([1.0] + [gamma * _max_step(S, D) for S, D in zip(it.S, dS)])
    return ap, ad


def _project_primal(op: _Operator, it: _Iterate, rp: np.ndarray) -> Optional[_Iterate]:
    """
    Correct X and f so that A(X) + F f = b, moving X only inside its range.

    Solves (A X A^T X + F F^T) z = rp and sets dX = X A^T(z) X, df = F^T z;
    None when the corrected X is not PSD.
    """
    system = op.schur(it.X, it.X) + op.F @ op.F.T
    z = np.linalg.lstsq(system, rp, rcond=None)[0]
    ATz = op.adjoint(z)
    dX = [_sym(X @ A @ X) for X, A in zip(it.X, ATz)]
    if any(_max_step(X, D) < 1.0 for X, D in zip(it.X, dX)):
        return None
    return _Iterate(
        X=[_sym(X + D) for X, D in zip(it.X, dX)],
        S=it.S,
        y=it.y,
        f=it.f + op.F.T @ z,
    )


def _recover(op: _Operator, it: _Iterate, measures: _Measures, rp: np.ndarray, tol: float):
    """Projected iterate and its measures if that brings pinf under tol, else None."""
    best = None
    for _ in range(RECOVERY_ROUNDS):
        projected = _project_primal(op, it, rp)
        if projected is None:
            break
        new_measures, new_rp, _, _ = _measure(op, projected)
        if not new_measures.pinf < measures.pinf:
            break
        it, measures, rp = projected, new_measures, new_rp
        best = (it, measures)
        if measures.pinf <= tol:
            break
    if best is None or best[1].pinf > tol:
        return None
    if best[1].dinf > max(tol, RECOVERY_TOL) or best[1].gap > max(tol, RECOVERY_TOL):
        return None
    return best


def interior_point(
    problem: SdpProblem,
    tol: float = 1e-8,
    max_iter: int = 200,
) -> Tuple[SdpSolution, bool]:
    """
    Run the path-following loop on an already presolved problem.

    The loop stops on convergence, divergence, the iteration limit or a
    stall: STALL_COUNT consecutive blocked steps on an infeasible side, or
    pinf not dropping by 10% over PINF_WINDOW iterations. A stopped primal
    iterate is then projected onto the rows once more.

    Returns:
        (solution, diverged); the status is OPTIMAL or NUMERICAL_LIMIT, the
        caller classifies failures
    """
    op = _Operator(problem)
    it = _initial_point(op)
    diverged = False
    stalls = 0
    history: List[float] = []
    measures = rp = None
    reason = "iteration limit"

    for iteration in range(max_iter + 1):
        measures, rp, Rd, rf = _measure(op, it)
        logger.debug(
            f"iter {iteration:3d} pobj {measures.pobj:+.8e} dobj {measures.dobj:+.8e} "
            f"pinf {measures.pinf:.2e} dinf {measures.dinf:.2e} gap {measures.gap:.2e}"
        )
        if measures.pinf <= tol and measures.dinf <= tol and measures.gap <= tol:
            return _solution(SolverStatus.OPTIMAL, it, measures, iteration, "converged"), False

        size = max(float(np.linalg.norm(it.y)), max(float(np.linalg.norm(X)) for X in it.X) if it.X else 0.0)
        if size > DIVERGENCE_LIMIT or not np.isfinite(size):
            diverged = True
            break
        history.append(measures.pinf)
        if len(history) > PINF_WINDOW and measures.pinf > tol:
            if measures.pinf > PINF_PROGRESS * history[-1 - PINF_WINDOW]:
                reason = "no progress in primal infeasibility"
                break
        if stalls >= STALL_COUNT:
            reason = "step length stalled"
            break
        if iteration == max_iter:
            break

        try:
            Sinv = [_inverse(S) for S in it.S]
            solver = _SaddleSolver(op.schur(it.X, Sinv), op.F)
        except linalg.LinAlgError:
            reason = "factorization failed"
            break

        # Predictor
        G = [-X - X @ R @ Z for X, R, Z in zip(it.X, Rd, Sinv)]
        dXa, dya, dfa, dSa = _direction(op, solver, it, Sinv, G, rp, Rd, rf)
        ap, ad = _step_lengths(it, dXa, dSa, 1.0)
        n_total = max(1, sum(op.dims))
        mu_aff = _inner(
            [X + ap * D for X, D in zip(it.X, dXa)],
            [S + ad * D for S, D in zip(it.S, dSa)],
        ) / n_total
        sigma = min(1.0, max(0.0, (mu_aff / measures.mu) ** 3)) if measures.mu > 0 else 0.0
        if measures.pinf > PRIMAL_LAG * max(measures.gap, tol):
            sigma = max(sigma, 0.5)

        # Corrector
        G = [
            sigma * measures.mu * Z - X - X @ R @ Z - DX @ DS @ Z
            for X, R, Z, DX, DS in zip(it.X, Rd, Sinv, dXa, dSa)
        ]
        dX, dy, df, dS = _direction(op, solver, it, Sinv, G, rp, Rd, rf)
        gamma = 0.9 + 0.09 * min(ap, ad)
        ap, ad = _step_lengths(it, dX, dS, gamma)

        it = _Iterate(
            X=[_keep_interior(_sym(X + ap * D)) for X, D in zip(it.X, dX)],
            S=[_keep_interior(_sym(S + ad * D)) for S, D in zip(it.S, dS)],
            y=it.y + ad * dy,
            f=it.f + ap * df,
        )
        blocked = (ap < STALL_STEP and measures.pinf > tol) or (ad < STALL_STEP and measures.dinf > tol)
        stalls = stalls + 1 if blocked else 0

    if diverged:
        return _solution(SolverStatus.NUMERICAL_LIMIT, it, measures, iteration, "diverged"), True

    recovered = _recover(op, it, measures, rp, tol)
    if recovered is not None:
        it, measures = recovered
        logger.debug(f"Primal projection after {reason}: pinf {measures.pinf:.2e} gap {measures.gap:.2e}")
        return _solution(
            SolverStatus.OPTIMAL, it, measures, iteration, "converged after primal projection"
        ), False

    message = f"no convergence after {iteration} iterations ({reason})"
    return _solution(SolverStatus.NUMERICAL_LIMIT, it, measures, iteration, message), False


def _solution(status, it: _Iterate, m: _Measures, iterations: int, message: str) -> SdpSolution:
    return SdpSolution(
        status=status,
        blocks=[X.copy() for X in it.X],
        free=it.f.copy(),
        duals=it.y.copy(),
        objective=m.pobj,
        dual_objective=m.dobj,
        iterations=iterations,
        primal_residual=m.pinf,
        dual_residual=m.dinf,
        gap=m.gap,
        message=message,
    )


# ==================== PHASE ONE ====================


def phase_one_problem(problem: SdpProblem, trace_cap: float) -> SdpProblem:
    """
    maximize t subject to the rows at X' + tI, X' PSD, tr(X') <= trace_cap
    and t <= trace_cap.

    The last free variable is t; the last two 1x1 blocks are slacks.
    """
    aux = SdpProblem(
        block_dims=list(problem.block_dims),
        n_free=problem.n_free,
        block_labels=list(problem.block_labels) or [""] * problem.n_blocks,
    )
    t = aux.add_free()
    slack = aux.add_block(1, "trace-slack")
    t_slack = aux.add_block(1, "t-slack")
    for row in problem.rows:
        shift = sum(v for (_, i, j), v in row.entries.items() if i == j)
        free = dict(row.free)
        if shift:
            free[t] = shift
        aux.rows.append(SdpRow(entries=dict(row.entries), free=free, rhs=row.rhs, label=row.label))
    trace = {(k, i, i): 1.0 for k, n in enumerate(problem.block_dims) for i in range(n)}
    trace[(slack, 0, 0)] = 1.0
    aux.add_row(trace, rhs=trace_cap, label="trace-cap")
    aux.add_row({(t_slack, 0, 0): 1.0}, free={t: 1.0}, rhs=trace_cap, label="t-cap")
    aux.objective_free = {t: -1.0}
    return aux


def phase_one(
    problem: SdpProblem,
    tol: float = 1e-8,
    max_iter: int = 200,
    trace_cap: float = 1e5,
) -> Optional[float]:
    """Optimal t of the phase-one problem, or None if it could not be solved."""
    aux = phase_one_problem(problem, trace_cap)
    solution, _ = interior_point(aux, tol=tol, max_iter=max_iter)
    if not solution.is_optimal:
        return None
    return float(solution.free[problem.n_free])
