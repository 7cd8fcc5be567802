"""
gainscope - Denominator Positivity Certificates

A rational constraint N / d^k >= 0 is replaced by N >= 0 once d > 0 is
established on the domain, by interval evidence on a box or by an auxiliary
SOS program d - eps - sum_j m_j g_j in SOS with eps maximized.
"""
import logging
from dataclasses import replace
from typing import Mapping, Optional, Tuple

from ..config import SolverSettings
from ..polycore import Polynomial
from .affine import AffinePoly
from .models import DenominatorProvenance, SosConstraint
from .program import SosProgram


logger = logging.getLogger(__name__)

DEFAULT_MARGIN = 1e-9

Interval = Tuple[float, float]


class DenominatorCertificationError(Exception):
    """Raised when a denominator cannot be shown positive on the domain."""
    pass


def _power_interval(lo: float, hi: float, power: int) -> Interval:
    a, b = lo ** power, hi ** power
    if power % 2 == 0 and lo < 0.0 < hi:
        return 0.0, max(a, b)
    return min(a, b), max(a, b)


def interval_bounds(poly: Polynomial, box: Mapping[str, Interval]) -> Interval:
    """Enclosure of poly over a box by term-wise interval arithmetic."""
    lower = upper = 0.0
    for exponent, coeff in poly.sorted_terms():
        lo, hi = coeff, coeff
        for name, a in zip(poly.variables, exponent):
            if not a:
                continue
            if name not in box:
                raise ValueError(f"No interval for variable '{name}'")
            f_lo, f_hi = _power_interval(box[name][0], box[name][1], a)
            corners = (lo * f_lo, lo * f_hi, hi * f_lo, hi * f_hi)
            lo, hi = min(corners), max(corners)
        lower += lo
        upper += hi
    return lower, upper


def certify_positive(
    d: Polynomial,
    domain=(),
    box: Optional[Mapping[str, Interval]] = None,
    solver_settings: Optional[SolverSettings] = None,
    margin: float = DEFAULT_MARGIN,
) -> Tuple[str, float]:
    """
    Show d > 0 on the domain.

    Returns:
        (method, certified lower bound)

    Raises:
        DenominatorCertificationError: If neither interval nor SOS evidence works
    """
    if d.is_constant:
        value = d.constant_term
        if value <= 0.0:
            raise DenominatorCertificationError(f"Constant denominator {value} is not positive")
        return "constant", value

    if box is not None and all(v in box for v in d.used_variables()):
        lower, _ = interval_bounds(d, box)
        if lower > margin:
            return "interval", lower

    program = SosProgram("denominator")
    eps = program.free("eps")
    program.add_sos_constraint(AffinePoly(d) - eps.poly(), domain=list(domain), label="positivity")
    program.maximize(eps.poly())
    compiled, solution = program.solve(replace(solver_settings, sdpa_export=None) if solver_settings else None)
    if solution.is_optimal:
        value = compiled.objective_value(solution)
        if value > margin:
            return "sos", value
        raise DenominatorCertificationError(
            f"Denominator {d} not certified positive: best margin {value:.3g}"
        )
    raise DenominatorCertificationError(
        f"Denominator {d} not certified positive: auxiliary program {solution.status.value}"
    )


def clear_and_certify_denominator(
    constraint: SosConstraint,
    d: Polynomial,
    k: int = 1,
    box: Optional[Mapping[str, Interval]] = None,
    solver_settings: Optional[SolverSettings] = None,
) -> SosConstraint:
    """
    Certify d > 0 on the constraint's domain and clear d^k.

    A pending (d, k) entry is removed (its numerator is already stored);
    otherwise the expression is multiplied by d^k. The evidence is recorded
    in the constraint's provenance.

    Raises:
        DenominatorCertificationError: If d cannot be certified positive
    """
    method, lower = certify_positive(d, constraint.domain, box, solver_settings)
    key = d.key()
    matched = [entry for entry in constraint.pending if entry[0].key() == key and entry[1] == k]
    if matched:
        constraint.pending.remove(matched[0])
    elif method != "constant":
        constraint.expression = constraint.expression * (d ** k)
    constraint.provenance.append(DenominatorProvenance(d, k, method, lower))
    logger.debug(f"Cleared ({d})^{k} from {constraint.label} by {method} (lower bound {lower:.6g})")
    return constraint
