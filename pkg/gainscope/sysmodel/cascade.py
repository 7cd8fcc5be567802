"""
gainscope - Cascade Construction

Builds the nominal/error cascade and instantiates it at parameter points.
"""
import logging
from dataclasses import dataclass, field
from typing import List, Sequence, Union

import numpy as np

from .models import (
    CascadeSystem,
    NumericStateSpace,
    ParamMatrix,
    parameter_names,
    theta_point,
    UncertainSystem,
)


logger = logging.getLogger(__name__)

DEFAULT_HURWITZ_EPS = 1e-9


def _nominal_constant(matrix: ParamMatrix, system: UncertainSystem) -> ParamMatrix:
    values = matrix.eval(system.nominal_point, system.singular_tol)
    return ParamMatrix.constant(values)


def build_cascade(system: UncertainSystem) -> CascadeSystem:
    """
    Symbolic cascade of the nominal and uncertain systems.

    Returns:
        CascadeSystem with Abar = [[A*, 0], [A* - A, A]], Bbar = [[B*], [B* - B]],
        Cbar = [[C*, 0], [C* - C, C]], Dbar = [[D*], [D* - D]]
    """
    A0 = _nominal_constant(system.A, system)
    B0 = _nominal_constant(system.B, system)
    C0 = _nominal_constant(system.C, system)
    D0 = _nominal_constant(system.D, system)

    zeros_nn = ParamMatrix.zeros(system.n, system.n)
    Abar = ParamMatrix.vstack([
        ParamMatrix.hstack([A0, zeros_nn]),
        ParamMatrix.hstack([A0 - system.A, system.A]),
    ])
    Bbar = ParamMatrix.vstack([B0, B0 - system.B])
    Cbar = ParamMatrix.vstack([
        ParamMatrix.hstack([C0, ParamMatrix.zeros(system.p, system.n)]),
        ParamMatrix.hstack([C0 - system.C, system.C]),
    ])
    Dbar = ParamMatrix.vstack([D0, D0 - system.D])
    return CascadeSystem(Abar=Abar, Bbar=Bbar, Cbar=Cbar, Dbar=Dbar, parent=system)


def eval_at(
    obj: Union[ParamMatrix, CascadeSystem, UncertainSystem],
    theta: Sequence[float],
    names: Sequence[str] = (),
) -> Union[np.ndarray, NumericStateSpace]:
    """
    Instantiate at theta.

    A ParamMatrix evaluates to an array (parameter names default to t1..tk);
    systems evaluate to a NumericStateSpace.

    Raises:
        ParameterSingularityError: If some |denominator| <= 1e-12 at theta
    """
    if isinstance(obj, (CascadeSystem, UncertainSystem)):
        return obj.at(theta)
    if isinstance(obj, ParamMatrix):
        theta = np.asarray(theta, dtype=float).ravel()
        names = tuple(names) or parameter_names(len(theta))
        return obj.eval(theta_point(names, theta))
    raise TypeError(f"Cannot evaluate {type(obj).__name__}")


def mismatch_channel(
    cascade: CascadeSystem,
    theta: Sequence[float],
    full_output: bool = False,
) -> NumericStateSpace:
    """
    Numeric u -> dy path of the cascade at theta (all 2p outputs if full_output).
    """
    numeric = cascade.at(theta)
    if full_output:
        return numeric
    p = cascade.p
    return NumericStateSpace(numeric.A, numeric.B, numeric.C[p:, :], numeric.D[p:, :])


@dataclass
class HurwitzReport:
    """
    Sampled stability check of A(theta).

    This is evidence on sampled points only, not a certificate over the domain.
    """
    points: np.ndarray
    abscissae: np.ndarray
    eps: float
    flagged: List[int] = field(default_factory=list)

    @property
    def all_stable(self) -> bool:
        return not self.flagged

    @property
    def max_abscissa(self) -> float:
        return float(np.max(self.abscissae)) if len(self.abscissae) else float("-inf")

    def to_dict(self) -> dict:
        return {
            "points": int(len(self.points)),
            "eps": self.eps,
            "max_abscissa": self.max_abscissa,
            "flagged": [list(map(float, self.points[i])) for i in self.flagged],
            "all_stable": self.all_stable,
        }


def hurwitz_sample_check(
    system: UncertainSystem,
    grid: Sequence[Sequence[float]],
    eps: float = DEFAULT_HURWITZ_EPS,
) -> HurwitzReport:
    """
    Spectral abscissa of A(theta) at every grid point.

    Points with max real part >= -eps are flagged.

    Raises:
        ParameterSingularityError: If A cannot be evaluated at a point
    """
    points = np.atleast_2d(np.asarray(grid, dtype=float))
    abscissae = np.zeros(len(points))
    flagged = []
    for i, theta in enumerate(points):
        A = system.A.eval(system.point(theta), system.singular_tol)
        abscissae[i] = float(np.max(np.linalg.eigvals(A).real))
        if abscissae[i] >= -eps:
            flagged.append(i)
    if flagged:
        logger.warning(f"Hurwitz sample check flagged {len(flagged)} of {len(points)} points")
    return HurwitzReport(points=points, abscissae=abscissae, eps=eps, flagged=flagged)
