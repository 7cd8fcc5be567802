"""
gainscope - Lyapunov Equations and Observability Gramians
"""
import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_continuous_lyapunov


logger = logging.getLogger(__name__)

# Above this size the dense Kronecker system gets expensive.
KRONECKER_MAX_DIM = 40
RESIDUAL_TOL = 1e-8


class NotHurwitzError(Exception):
    """Raised when a Lyapunov solve is requested for a non-Hurwitz matrix."""
    pass


@dataclass
class GramianResult:
    """Solution of A^T P + P A + Q = 0 with its residual."""
    P: np.ndarray
    residual: float
    flagged: bool = False

    @property
    def Wo(self) -> np.ndarray:
        return self.P


def lyapunov_residual(A: np.ndarray, Q: np.ndarray, P: np.ndarray) -> float:
    """Frobenius norm of A^T P + P A + Q."""
    return float(np.linalg.norm(A.T @ P + P @ A + Q, "fro"))


def lyapunov_solve(A: np.ndarray, Q: np.ndarray) -> GramianResult:
    """
    Solve A^T P + P A + Q = 0 for symmetric P.

    Uses the vectorized system (I kron A^T + A^T kron I) vec(P) = -vec(Q)
    up to 40 states and scipy's Bartels-Stewart solver beyond.

    Raises:
        NotHurwitzError: If some eigenvalue of A has nonnegative real part
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    n = A.shape[0]
    if A.shape != (n, n) or Q.shape != (n, n):
        raise ValueError(f"Lyapunov solve needs square A and Q of equal size, got {A.shape}, {Q.shape}")

    abscissa = float(np.max(np.linalg.eigvals(A).real)) if n else -np.inf
    if abscissa >= 0.0:
        raise NotHurwitzError(f"Matrix is not Hurwitz (spectral abscissa {abscissa:.6g})")

    if n <= KRONECKER_MAX_DIM:
        eye = np.eye(n)
        lhs = np.kron(eye, A.T) + np.kron(A.T, eye)
        vec = np.linalg.solve(lhs, -Q.reshape(-1, order="F"))
        P = vec.reshape((n, n), order="F")
    else:
        P = solve_continuous_lyapunov(A.T, -Q)

    P = 0.5 * (P + P.T)
    residual = lyapunov_residual(A, Q, P)
    flagged = residual > RESIDUAL_TOL * (1.0 + np.linalg.norm(P, "fro"))
    if flagged:
        logger.warning(f"Lyapunov residual {residual:.3g} exceeds tolerance (n={n})")
    return GramianResult(P=P, residual=residual, flagged=bool(flagged))


def observability_gramian(A: np.ndarray, C: np.ndarray) -> GramianResult:
    """Wo solving A^T Wo + Wo A + C^T C = 0."""
    C = np.atleast_2d(np.asarray(C, dtype=float))
    return lyapunov_solve(A, C.T @ C)
