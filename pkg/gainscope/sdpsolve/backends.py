"""
gainscope - SDP Backend Registry

Every backend solves the standard form of SdpProblem; soscompile only ever
calls solve(), so external solvers can be registered without touching it.
"""
import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional

import numpy as np

from ..config import SolverSettings, settings as global_settings
from .interior import interior_point, phase_one
from .models import SdpProblem, SdpSolution, SolverStatus
from .presolve import postsolve, presolve


logger = logging.getLogger(__name__)

SolveHandler = Callable[[SdpProblem, SolverSettings], SdpSolution]


class BackendNotFoundError(Exception):
    """Raised when a solve names a backend that is not registered."""
    pass


@dataclass
class SdpBackend:
    """A registered solver."""
    name: str
    handler: SolveHandler
    description: str = ""


class BackendRegistry:
    """
    Backend Registry - manages available SDP solvers.

    Operations:
        - register(): Add backend
        - get(): Get backend by name
        - list(): List all backends
    """

    def __init__(self):
        self._backends: Dict[str, SdpBackend] = {}

    def register(self, name: str, handler: SolveHandler, description: str = "") -> SdpBackend:
        backend = SdpBackend(name=name, handler=handler, description=description)
        self._backends[name] = backend
        return backend

    def unregister(self, name: str) -> bool:
        """
        Remove backend from registry.

        Returns:
            True if removed, False if not found
        """
        if name in self._backends:
            del self._backends[name]
            return True
        return False

    def get(self, name: str) -> Optional[SdpBackend]:
        return self._backends.get(name)

    def exists(self, name: str) -> bool:
        return name in self._backends

    def list(self) -> List[SdpBackend]:
        return list(self._backends.values())

    def list_names(self) -> List[str]:
        return list(self._backends.keys())

    def clear(self) -> None:
        self._backends.clear()


# ==================== EMBEDDED BACKEND ====================

def polish(problem: SdpProblem, solution: SdpSolution) -> bool:
    """
    Minimum-norm least-squares correction onto the equality rows.

    Applied only if every block stays PSD and the residual shrinks.

    Returns:
        True if the correction was kept
    """
    if not problem.n_rows:
        return False
    A, b = problem.dense_rows()
    x = problem.vectorize(solution.blocks, solution.free)
    before = float(np.max(np.abs(A @ x - b)))
    delta = np.linalg.lstsq(A, b - A @ x, rcond=None)[0]
    blocks, free = problem.unvectorize(x + delta)
    after = float(np.max(np.abs(A @ (x + delta) - b)))
    if after >= before:
        return False
    for B in blocks:
        if float(np.linalg.eigvalsh(B)[0]) < -1e-10:
            return False
    solution.blocks = blocks
    solution.free = free
    solution.objective = problem.objective_value(blocks, free)
    return True


def solve_embedded(problem: SdpProblem, solver_settings: SolverSettings) -> SdpSolution:
    """Presolve, path-following solve, phase-one classification, postsolve, polish."""
    reduced, report = presolve(problem)
    if report.infeasible:
        logger.info(f"Presolve detected infeasibility: {report.message}")
        solution = SdpSolution(status=SolverStatus.INFEASIBLE, message=report.message)
        return postsolve(solution, problem, report)

    if not reduced.block_dims:
        # Everything fixed by presolve; only free variables may remain.
        solution = SdpSolution(
            status=SolverStatus.OPTIMAL,
            free=np.zeros(problem.n_free),
            objective=reduced.constant,
            dual_objective=reduced.constant,
            message="solved in presolve",
        )
        if reduced.rows:
            A, b = reduced.dense_rows()
            solution.free = np.linalg.lstsq(A, b, rcond=None)[0]
            solution.objective = reduced.objective_value([], solution.free)
        return postsolve(solution, problem, report)

    solution, diverged = interior_point(reduced, tol=solver_settings.tol, max_iter=solver_settings.max_iter)

    if not solution.is_optimal:
        t_star = phase_one(
            reduced,
            tol=solver_settings.tol,
            max_iter=solver_settings.max_iter,
            trace_cap=solver_settings.phase_one_trace_cap,
        )
        solution.phase_one_value = t_star
        threshold = max(1e-6, 100.0 * solver_settings.tol)
        if t_star is not None and t_star < -threshold:
            solution.status = SolverStatus.INFEASIBLE
            solution.message = f"phase one: max t = {t_star:.6g} < 0"
        elif t_star is not None and diverged and solution.objective < -1e6 * (1.0 + abs(solution.dual_objective)):
            solution.status = SolverStatus.UNBOUNDED
            solution.message = "primal objective unbounded below"
        else:
            solution.message = f"numerical limit ({solution.message})"
        logger.info(f"Solve ended with status {solution.status.value}: {solution.message}")

    solution = postsolve(solution, problem, report)
    if solution.is_optimal and solver_settings.polish:
        polish(problem, solution)
    return solution


# Global registry instance
backends = BackendRegistry()
backends.register("embedded", solve_embedded, "HKM predictor-corrector interior point")


def solve(
    problem: SdpProblem,
    solver_settings: Optional[SolverSettings] = None,
    backend: Optional[str] = None,
) -> SdpSolution:
    """
    Solve with a registered backend (settings.solver.backend by default).

    Raises:
        BackendNotFoundError: If the backend is not registered
    """
    solver_settings = solver_settings or global_settings.solver
    name = backend or solver_settings.backend
    entry = backends.get(name)
    if entry is None:
        raise BackendNotFoundError(f"Unknown SDP backend {name!r} (have {backends.list_names()})")
    logger.debug(f"Solving SDP {problem.summary()} with backend {name}")
    return entry.handler(problem, solver_settings)
