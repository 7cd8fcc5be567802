"""
gainscope - Pointwise Exact Gains

Ground-truth mismatch gains at a fixed parameter point: state-to-output
(Gramian eigenvalue), L2-induced (Hamiltonian bisection) and H2 (Gramian
trace). All gains are squared.
"""
import logging
import math
from typing import Sequence, Tuple, Union

import numpy as np
from scipy import integrate, optimize

from ..sysmodel import (
    CascadeSystem,
    NumericStateSpace,
    UncertainSystem,
    build_cascade,
    mismatch_channel,
)
from .gramian import NotHurwitzError, lyapunov_solve


logger = logging.getLogger(__name__)

DEFAULT_BISECTION_TOL = 1e-8
DEFAULT_MAX_ITER = 200
SAMPLE_FREQUENCIES = (0.0, 1.0, 10.0, 100.0)


class BisectionError(Exception):
    """Raised when the Hamiltonian bisection does not converge."""
    pass


class FeedthroughError(Exception):
    """Raised when the H2 norm is requested for a channel with feedthrough."""
    pass


SystemLike = Union[UncertainSystem, CascadeSystem]


def _as_cascade(system: SystemLike) -> CascadeSystem:
    if isinstance(system, CascadeSystem):
        return system
    return build_cascade(system)


def _sigma_max(ns: NumericStateSpace, w: float) -> float:
    return float(np.linalg.norm(ns.transfer(1j * w), 2))


def _require_hurwitz(ns: NumericStateSpace) -> None:
    abscissa = ns.spectral_abscissa()
    if abscissa >= 0.0:
        raise NotHurwitzError(f"Cascade is not Hurwitz (spectral abscissa {abscissa:.6g})")


# ==================== STATE TO OUTPUT ====================

def state_to_output_gain_exact(system: SystemLike, theta: Sequence[float]) -> float:
    """
    sup over x0 of ||dy||^2 / ||x0||^2 with u = 0 and e(0) = 0.

    Largest eigenvalue of the top-left n x n block of the mismatch
    observability Gramian of the cascade.

    Raises:
        NotHurwitzError: If A(theta*) or A(theta) is not Hurwitz
        ParameterSingularityError: If the cascade cannot be evaluated at theta
    """
    cascade = _as_cascade(system)
    channel = mismatch_channel(cascade, theta)
    gramian = lyapunov_solve(channel.A, channel.C.T @ channel.C)
    n = cascade.n
    block = gramian.P[:n, :n]
    return max(0.0, float(np.linalg.eigvalsh(0.5 * (block + block.T))[-1]))


# ==================== L2-INDUCED ====================

def frequency_sweep_peak(
    ns: NumericStateSpace,
    points: int = 400,
) -> Tuple[float, float]:
    """
    Peak of the largest singular value over a log-spaced frequency grid,
    refined by bounded scalar minimization around the best grid point.

    Returns:
        (peak singular value, frequency)
    """
    eigs = np.abs(np.linalg.eigvals(ns.A)) if ns.n else np.array([1.0])
    eigs = eigs[eigs > 0]
    w_lo = 1e-3 * (float(np.min(eigs)) if len(eigs) else 1.0)
    w_hi = 1e3 * (float(np.max(eigs)) if len(eigs) else 1.0)
    grid = np.concatenate(([0.0], np.logspace(math.log10(w_lo), math.log10(w_hi), points)))
    values = np.array([_sigma_max(ns, w) for w in grid])
    best = int(np.argmax(values))
    peak, w_peak = float(values[best]), float(grid[best])

    if 0 < best < len(grid) - 1:
        lo, hi = math.log10(max(grid[best - 1], w_lo)), math.log10(grid[best + 1])
        result = optimize.minimize_scalar(
            lambda lw: -_sigma_max(ns, 10.0 ** lw),
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": 1e-12},
        )
        if -result.fun > peak:
            peak, w_peak = float(-result.fun), float(10.0 ** result.x)
    return peak, w_peak


def _hamiltonian(ns: NumericStateSpace, gamma: float) -> np.ndarray:
    A, B, C, D = ns.A, ns.B, ns.C, ns.D
    R = gamma ** 2 * np.eye(ns.m) - D.T @ D
    invR = np.linalg.inv(R)
    F = A + B @ invR @ D.T @ C
    return np.block([
        [F, B @ invR @ B.T],
        [-C.T @ (np.eye(ns.p) + D @ invR @ D.T) @ C, -F.T],
    ])


def _has_imaginary_eigenvalue(H: np.ndarray) -> bool:
    eigs = np.linalg.eigvals(H)
    return bool(np.any(np.abs(eigs.real) <= 1e-8 * np.maximum(1.0, np.abs(eigs))))


def hinf_norm_squared(
    ns: NumericStateSpace,
    tol: float = DEFAULT_BISECTION_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> float:
    """
    Squared H-infinity norm of a stable system by Hamiltonian bisection.

    gamma exceeds the norm iff the Hamiltonian has no eigenvalue on the
    imaginary axis.

    Raises:
        NotHurwitzError: If the system is unstable
        BisectionError: If the bracket does not close within max_iter steps
    """
    _require_hurwitz(ns)
    d_norm = float(np.linalg.norm(ns.D, 2)) if ns.D.size else 0.0
    lo = max([d_norm] + [_sigma_max(ns, w) for w in SAMPLE_FREQUENCIES])

    scale = 1.0 + float(np.linalg.norm(ns.B, 2) * np.linalg.norm(ns.C, 2)) + d_norm
    if lo <= 1e-12 * scale:
        lo = max(lo, frequency_sweep_peak(ns)[0])
        if lo <= 1e-12 * scale:
            return 0.0

    hi = 2.0 * lo + d_norm
    iterations = 0
    while _has_imaginary_eigenvalue(_hamiltonian(ns, hi)):
        hi *= 2.0
        iterations += 1
        if iterations > max_iter:
            raise BisectionError(f"No upper bound found after {max_iter} doublings")

    while hi - lo > 0.5 * tol * lo:
        mid = 0.5 * (lo + hi)
        if _has_imaginary_eigenvalue(_hamiltonian(ns, mid)):
            lo = mid
        else:
            hi = mid
        iterations += 1
        if iterations > max_iter:
            raise BisectionError(f"Bisection did not converge after {max_iter} iterations")
    return lo * hi


def l2_induced_gain_exact(
    system: SystemLike,
    theta: Sequence[float],
    tol: float = DEFAULT_BISECTION_TOL,
    cross_check: bool = True,
    max_iter: int = DEFAULT_MAX_ITER,
) -> float:
    """
    Squared H-infinity norm of the u -> dy path of the cascade at theta.

    The Hamiltonian bisection value is checked against a log-spaced
    frequency sweep (skipped with cross_check=False). The sweep peak is a
    lower bound on the norm, so it replaces the bisection value when it is
    larger by more than 1e-6 relative, and when bisection fails.
    """
    channel = mismatch_channel(_as_cascade(system), theta)
    try:
        value = hinf_norm_squared(channel, tol=tol, max_iter=max_iter)
    except BisectionError as e:
        sweep = frequency_sweep_peak(channel)[0] ** 2
        logger.warning(f"L2 gain at theta={list(theta)}: {e}; using sweep peak {sweep:.10g}")
        return sweep
    if cross_check:
        sweep = frequency_sweep_peak(channel)[0] ** 2
        if sweep - value > 1e-6 * max(value, 1e-12):
            logger.warning(
                f"L2 gain cross-check disagrees at theta={list(theta)}: "
                f"bisection {value:.10g}, sweep {sweep:.10g}"
            )
            return sweep
    return value


# ==================== H2 ====================

def _require_no_feedthrough(channel: NumericStateSpace) -> None:
    if channel.D.size and float(np.max(np.abs(channel.D))) > 1e-12:
        raise FeedthroughError("feedthrough not allowed: H2 norm needs dD(theta) = 0")


def h2_norm_exact(
    system: SystemLike,
    theta: Sequence[float],
    full_output: bool = False,
) -> float:
    """
    Squared H2 norm Tr(Bbar^T Wo Bbar) of the mismatch channel (or of all
    2p cascade outputs when full_output is set).

    Raises:
        FeedthroughError: If the channel has nonzero feedthrough at theta
        NotHurwitzError: If the cascade is not Hurwitz
    """
    channel = mismatch_channel(_as_cascade(system), theta, full_output=full_output)
    _require_no_feedthrough(channel)
    gramian = lyapunov_solve(channel.A, channel.C.T @ channel.C)
    return max(0.0, float(np.trace(channel.B.T @ gramian.P @ channel.B)))


def h2_norm_quadrature(ns: NumericStateSpace) -> float:
    """Squared H2 norm as (1/pi) * integral over [0, inf) of ||G(jw)||_F^2."""
    _require_hurwitz(ns)
    _require_no_feedthrough(ns)

    def integrand(w: float) -> float:
        return float(np.linalg.norm(ns.transfer(1j * w), "fro") ** 2)

    value, _ = integrate.quad(integrand, 0.0, np.inf, limit=400, epsabs=1e-14, epsrel=1e-10)
    return value / math.pi
