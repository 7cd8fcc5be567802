"""
gainscope - Output Invariance Checks

Pointwise tests whether the mismatch output dy vanishes at steady state
or identically, for a unit input on one channel.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from ..polycore import Polynomial
from ..sysmodel import CascadeSystem, UncertainSystem, build_cascade


logger = logging.getLogger(__name__)

DEFAULT_INVARIANCE_TOL = 1e-9
DEFAULT_NUMERATOR_ZERO = 1e-10

# Which output rows feed the transfer numerator: the dy rows of Cbar(theta),
# or those of Cbar(theta*) (that is [0, C(theta*)]).
VARIANT_THETA = "theta"
VARIANT_NOMINAL = "nominal"


def dc_gain_mismatch(system: UncertainSystem, theta: Sequence[float], i: int) -> np.ndarray:
    """
    Steady-state dy for a unit constant input on channel i.

    Returns:
        G(theta*)_i(0) - G(theta)_i(0) as a length-p vector
    """
    if not 0 <= i < system.m:
        raise IndexError(f"Input index {i} out of range for m={system.m}")
    nominal = system.nominal().select_input(i).dc_gain()
    current = system.at(theta).select_input(i).dc_gain()
    return (nominal - current).ravel()


def ss_invariant_test(
    system: UncertainSystem,
    theta: Sequence[float],
    i: Optional[int] = None,
    tol: float = DEFAULT_INVARIANCE_TOL,
) -> bool:
    """Steady-state invariance on channel i, or on every channel when i is None."""
    channels = range(system.m) if i is None else [i]
    return all(np.linalg.norm(dc_gain_mismatch(system, theta, j)) <= tol for j in channels)


def _leverrier_faddeev(A: np.ndarray):
    """Characteristic coefficients c_0..c_N (c_0 = 1) and adjugate terms M_0..M_{N-1}."""
    N = A.shape[0]
    coeffs = [1.0]
    M = np.eye(N)
    adjugate = [M]
    for k in range(1, N + 1):
        AM = A @ M
        c = -float(np.trace(AM)) / k
        coeffs.append(c)
        if k < N:
            M = AM + c * np.eye(N)
            adjugate.append(M)
    return coeffs, adjugate


def mismatch_transfer_numerator(
    system: UncertainSystem,
    theta: Sequence[float],
    i: int,
    variant: str = VARIANT_THETA,
    zero_tol: float = DEFAULT_NUMERATOR_ZERO,
    cascade: Optional[CascadeSystem] = None,
) -> List[Polynomial]:
    """
    Numerator of dy/u_i over det(sI - Abar), one polynomial in s per output.

    Chat * adj(sI - Abar) * Bbar_i + det(sI - Abar) * Dhat_i, with the
    adjugate from the Leverrier-Faddeev recursion. Coefficients below
    zero_tol times the leading scale are set to zero.
    """
    if variant not in (VARIANT_THETA, VARIANT_NOMINAL):
        raise ValueError(f"Unknown numerator variant {variant!r}")
    cascade = cascade or build_cascade(system)
    numeric = cascade.at(theta)
    p = cascade.p
    source = numeric if variant == VARIANT_THETA else cascade.at(system.theta_star)
    C_hat = source.C[p:, :]
    b = numeric.B[:, i]
    d = numeric.D[p:, i]

    coeffs, adjugate = _leverrier_faddeev(numeric.A)
    N = numeric.n
    scale = max(1.0, max(abs(c) for c in coeffs)) * max(
        1.0, float(np.linalg.norm(C_hat, 2) * np.linalg.norm(b) + np.linalg.norm(d))
    )

    result = []
    for row in range(p):
        by_power: Dict[int, float] = {}
        for k, M in enumerate(adjugate):
            by_power[N - 1 - k] = by_power.get(N - 1 - k, 0.0) + float(C_hat[row] @ M @ b)
        for k, c in enumerate(coeffs):
            by_power[N - k] = by_power.get(N - k, 0.0) + c * float(d[row])
        terms = {(power,): value for power, value in by_power.items() if abs(value) > zero_tol * scale}
        result.append(Polynomial(("s",), terms))
    return result


def output_invariant_test(
    system: UncertainSystem,
    theta: Sequence[float],
    i: Optional[int] = None,
    tol: float = DEFAULT_INVARIANCE_TOL,
) -> bool:
    """Full output invariance on channel i, or on every channel when i is None."""
    channels = range(system.m) if i is None else [i]
    cascade = build_cascade(system)
    for j in channels:
        numerators = mismatch_transfer_numerator(system, theta, j, cascade=cascade)
        if any(poly.max_abs_coefficient() > tol for poly in numerators):
            return False
    return True


@dataclass
class InvarianceReport:
    """
    Invariance flags for one parameter point and input channel.

    Numerator coefficients are listed per output in ascending powers of s.
    """
    theta: List[float]
    input_index: int
    ss_mismatch: float
    tf_numerator_coeffs: List[List[float]]
    nominal_numerator_coeffs: List[List[float]] = field(default_factory=list)
    variants_disagree: bool = False
    tol: float = DEFAULT_INVARIANCE_TOL
    is_ss_invariant: bool = False
    is_fully_invariant: bool = False

    @property
    def numerator_norm(self) -> float:
        return max((abs(c) for row in self.tf_numerator_coeffs for c in row), default=0.0)

    def to_dict(self) -> dict:
        return {
            "theta": self.theta,
            "input_index": self.input_index,
            "ss_mismatch": self.ss_mismatch,
            "tf_numerator_coeffs": self.tf_numerator_coeffs,
            "nominal_numerator_coeffs": self.nominal_numerator_coeffs,
            "variants_disagree": self.variants_disagree,
            "tol": self.tol,
            "is_ss_invariant": self.is_ss_invariant,
            "is_fully_invariant": self.is_fully_invariant,
        }


def _ascending(poly: Polynomial) -> List[float]:
    return [poly.coefficient({"s": k}) for k in range(poly.degree() + 1)]


def invariance_report(
    system: UncertainSystem,
    theta: Sequence[float],
    i: int,
    tol: float = DEFAULT_INVARIANCE_TOL,
    cascade: Optional[CascadeSystem] = None,
) -> InvarianceReport:
    """Both invariance flags for channel i, with the nominal-row numerator variant."""
    cascade = cascade or build_cascade(system)
    ss = float(np.linalg.norm(dc_gain_mismatch(system, theta, i)))
    numerators = mismatch_transfer_numerator(system, theta, i, cascade=cascade)
    nominal = mismatch_transfer_numerator(system, theta, i, variant=VARIANT_NOMINAL, cascade=cascade)

    full = all(poly.max_abs_coefficient() <= tol for poly in numerators)
    nominal_full = all(poly.max_abs_coefficient() <= tol for poly in nominal)
    disagree = full != nominal_full
    if disagree:
        logger.info(f"Numerator variants disagree at theta={list(theta)}, input {i}")

    is_ss = ss <= tol
    return InvarianceReport(
        theta=[float(v) for v in theta],
        input_index=i,
        ss_mismatch=ss,
        tf_numerator_coeffs=[_ascending(poly) for poly in numerators],
        nominal_numerator_coeffs=[_ascending(poly) for poly in nominal],
        variants_disagree=disagree,
        tol=tol,
        is_ss_invariant=is_ss,
        is_fully_invariant=full and is_ss,
    )


def scan_invariance(
    system: UncertainSystem,
    points: Sequence[Sequence[float]],
    tol: float = DEFAULT_INVARIANCE_TOL,
) -> List[InvarianceReport]:
    """Reports for every point and channel, point-major."""
    cascade = build_cascade(system)
    return [
        invariance_report(system, theta, i, tol=tol, cascade=cascade)
        for theta in points
        for i in range(system.m)
    ]
