"""
gainscope - Bound Programs

Dissipation-inequality programs for the mismatch channel of the cascade.
Storage functions are quadratic in the cascade state z = (x, e) with
parameter-polynomial coefficients; every constraint is stated over common
denominators (Abar = NA/d_a, Bbar = NB/d_a, Cdelta = NC/d_c, Ddelta = ND/d_c)
and the denominators are certified positive before compilation.
"""
import logging
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

from ..config import SolverSettings
from ..oracle import FeedthroughError
from ..polycore import Polynomial, clear_denominators
from ..sdpsolve import SolverStatus
from ..soscompile import (
    AffinePoly,
    BoundCertificate,
    SosConstraint,
    SosProgram,
    box_average,
    clear_and_certify_denominator,
    nominal_value,
    recover_and_validate,
)
from ..sysmodel import (
    BoxInferenceError,
    CascadeSystem,
    ParamMatrix,
    UncertainSystem,
    build_cascade,
    infer_box,
)
from .models import (
    Degrees,
    GainBound,
    GainKind,
    InfeasibleProgramError,
    ObjectiveMode,
    SolverLimitError,
)


logger = logging.getLogger(__name__)

TRACE_WEIGHT = 1e-6
LOWER_AVERAGE_WEIGHT = 1e-3

PinMode = Union[str, bool, None]
Interval = Tuple[float, float]


def names(prefix: str, count: int) -> List[str]:
    return [f"{prefix}{k + 1}" for k in range(count)]


def _linear(row: Sequence[Polynomial], variables: Sequence[str]) -> Polynomial:
    total = Polynomial.zero()
    for coeff, name in zip(row, variables):
        if not coeff.is_zero:
            total = total + coeff * Polynomial.variable(name)
    return total


def _squared_norm(variables: Sequence[str]) -> Polynomial:
    total = Polynomial.zero()
    for name in variables:
        v = Polynomial.variable(name)
        total = total + v * v
    return total


# ==================== CLEARED CASCADE ====================

def _clear(matrix: ParamMatrix, nominal: Mapping[str, float]) -> Tuple[List[List[Polynomial]], Polynomial]:
    numerators, d = clear_denominators(matrix.rows())
    if d.eval(nominal) < 0.0:
        numerators = [[-v for v in row] for row in numerators]
        d = -d
    return numerators, d


@dataclass
class ClearedCascade:
    """The cascade over two common denominators, each positive at theta*."""
    cascade: CascadeSystem
    NA: List[List[Polynomial]]
    NB: List[List[Polynomial]]
    NC: List[List[Polynomial]]
    ND: List[List[Polynomial]]
    d_a: Polynomial
    d_c: Polynomial

    @property
    def order(self) -> int:
        return 2 * self.cascade.n

    @property
    def inputs(self) -> int:
        return self.cascade.parent.m

    def drift(self, z: Sequence[str], u: Sequence[str] = ()) -> Dict[str, Polynomial]:
        """d_a * dz/dt as polynomials in (z, u, theta)."""
        field = {}
        for k, name in enumerate(z):
            f = _linear(self.NA[k], z)
            if u:
                f = f + _linear(self.NB[k], u)
            field[name] = f
        return field

    def output_energy(self, z: Sequence[str], u: Sequence[str] = ()) -> Polynomial:
        """d_c^2 * |dy|^2."""
        total = Polynomial.zero()
        for r in range(len(self.NC)):
            y = _linear(self.NC[r], z)
            if u:
                y = y + _linear(self.ND[r], u)
            total = total + y * y
        return total

    def input_trace(self) -> Polynomial:
        """d_a^2 * Tr(Bbar^T Bbar)."""
        total = Polynomial.zero()
        for row in self.NB:
            for v in row:
                total = total + v * v
        return total

    def pending(self) -> List[Tuple[Polynomial, int]]:
        return [(self.d_a, 1), (self.d_c, 2)]


def clear_cascade(system: UncertainSystem, full_output: bool = False) -> ClearedCascade:
    """
    Build the cascade and clear its denominators jointly per channel.

    With full_output the output rows are all of Cbar (both y and dy).
    """
    cascade = build_cascade(system)
    nominal = system.nominal_point
    NAB, d_a = _clear(ParamMatrix.hstack([cascade.Abar, cascade.Bbar]), nominal)
    C, D = (cascade.Cbar, cascade.Dbar) if full_output else (cascade.C_delta, cascade.D_delta)
    NCD, d_c = _clear(ParamMatrix.hstack([C, D]), nominal)
    order = 2 * cascade.n
    return ClearedCascade(
        cascade=cascade,
        NA=[row[:order] for row in NAB],
        NB=[row[order:] for row in NAB],
        NC=[row[:order] for row in NCD],
        ND=[row[order:] for row in NCD],
        d_a=d_a,
        d_c=d_c,
    )


# ==================== SHARED HELPERS ====================

def resolve_pin(pin: PinMode, degree: int) -> bool:
    """'auto' pins only decision polynomials of degree >= 1."""
    if pin is None or pin == "auto":
        return degree >= 1
    if isinstance(pin, bool):
        return pin
    if pin in ("on", "true", "yes"):
        return True
    if pin in ("off", "false", "no"):
        return False
    raise ValueError(f"Pin mode must be auto, on or off, got {pin!r}")


def objective_box(system: UncertainSystem) -> Dict[str, Interval]:
    """Sampling box by parameter name; a unit box around theta* if the domain is unbounded."""
    try:
        box = infer_box(system)
    except BoxInferenceError:
        logger.warning("Domain does not bound every parameter; averaging over theta* +/- 1")
        box = tuple((v - 1.0, v + 1.0) for v in system.theta_star)
    return dict(zip(system.param_names, box))


def _certification_box(system: UncertainSystem) -> Optional[Dict[str, Interval]]:
    try:
        return dict(zip(system.param_names, infer_box(system)))
    except BoxInferenceError:
        return None


def _clear_pending(
    constraint: SosConstraint,
    box: Optional[Mapping[str, Interval]],
    solver_settings: Optional[SolverSettings],
) -> None:
    for d, k in list(constraint.pending):
        clear_and_certify_denominator(constraint, d, k, box=box, solver_settings=solver_settings)


def _objective(
    program: SosProgram,
    target: AffinePoly,
    system: UncertainSystem,
    mode: ObjectiveMode,
    pinned: bool,
) -> Tuple[AffinePoly, ObjectiveMode]:
    """Nominal value of target, or its box average (forced when pinned)."""
    if pinned and mode == ObjectiveMode.NOMINAL:
        program.note("objective switched to the box average because the nominal value is pinned")
        mode = ObjectiveMode.INTEGRAL
    if mode == ObjectiveMode.INTEGRAL:
        return box_average(target, objective_box(system)), mode
    return nominal_value(target, system.nominal_point), mode


def _solve(
    program: SosProgram,
    kind: GainKind,
    degrees: Degrees,
    solver_settings: Optional[SolverSettings],
) -> BoundCertificate:
    compiled, solution = program.solve(solver_settings)
    if solution.status == SolverStatus.INFEASIBLE:
        raise InfeasibleProgramError(
            f"{kind.value} program infeasible at degrees {degrees.to_dict()}; "
            f"try raising the parameter degrees"
        )
    if not solution.is_optimal:
        raise SolverLimitError(f"{kind.value} program: {solution.status.value} ({solution.message})")
    return recover_and_validate(program, compiled, solution)


def _finish(
    kind: GainKind,
    system: UncertainSystem,
    certificate: BoundCertificate,
    numerator: Polynomial,
    denominator: Polynomial,
    degrees: Degrees,
    pinned: bool,
    mode: ObjectiveMode,
    full_output: bool = False,
) -> GainBound:
    bound = GainBound(
        kind=kind,
        numerator=numerator,
        denominator=denominator,
        certificate=certificate,
        degrees=degrees,
        param_names=tuple(system.param_names),
        pinned=pinned,
        objective=mode,
        full_output=full_output,
    )
    certificate.metadata["bound"] = bound.describe()
    certificate.metadata["system_hash"] = system.system_hash
    certificate.metadata["theta_star"] = list(system.theta_star)
    logger.info(
        f"{kind.value}: certificate {certificate.status.value}, objective {certificate.objective:.6g}"
    )
    return bound


# ==================== STATE TO OUTPUT ====================

def state_to_output_upper(
    system: UncertainSystem,
    degrees: Optional[Degrees] = None,
    pin: PinMode = "auto",
    objective: Union[ObjectiveMode, str] = ObjectiveMode.NOMINAL,
    solver_settings: Optional[SolverSettings] = None,
) -> GainBound:
    """
    Upper bound p1(theta) on sup ||dy||^2 / ||x0||^2 (u = 0, e(0) = 0).

    V(z) <= p1 |x|^2 + p2 |e|^2 and dV/dt + |dy|^2 <= 0 on the domain.

    Raises:
        InfeasibleProgramError: If no certificate exists at these degrees
        SolverLimitError: If the solver stops early
    """
    degrees = degrees or Degrees()
    mode = ObjectiveMode(objective)
    cleared = clear_cascade(system)
    theta = list(system.param_names)
    n = system.n
    x, e = names("x", n), names("e", n)
    z = x + e
    box = _certification_box(system)

    program = SosProgram(GainKind.S2O_UPPER.value)
    V = program.state_quadratic("V", z, theta, degrees.v)
    p1 = program.free("p1", theta, degrees.p1)
    p2 = program.free("p2", theta, degrees.p1)

    program.add_sos_constraint(
        p1.poly() * _squared_norm(x) + p2.poly() * _squared_norm(e) - V.poly(),
        domain=system.domain,
        multiplier_degree=degrees.m,
        label="storage",
    )
    decay = program.add_sos_constraint(
        -(V.poly().lie_derivative(cleared.drift(z)) * (cleared.d_c * cleared.d_c))
        - cleared.output_energy(z) * cleared.d_a,
        domain=system.domain,
        multiplier_degree=degrees.m,
        label="dissipation",
        pending=cleared.pending(),
    )
    _clear_pending(decay, box, solver_settings)

    pinned = resolve_pin(pin, degrees.p1)
    if pinned:
        program.add_equality(nominal_value(p1.poly(), system.nominal_point), label="pin")
    target, mode = _objective(program, p1.poly(), system, mode, pinned)
    program.minimize(target)
    program.regularize_trace(TRACE_WEIGHT)

    certificate = _solve(program, GainKind.S2O_UPPER, degrees, solver_settings)
    return _finish(
        GainKind.S2O_UPPER, system, certificate,
        certificate.decisions["p1"], Polynomial.constant(1.0), degrees, pinned, mode,
    )


def state_to_output_lower(
    system: UncertainSystem,
    degrees: Optional[Degrees] = None,
    pin: PinMode = "auto",
    objective: Union[ObjectiveMode, str] = ObjectiveMode.NOMINAL,
    solver_settings: Optional[SolverSettings] = None,
) -> GainBound:
    """
    Lower bound p_l1(theta) on sup ||dy||^2 / ||x0||^2.

    V_l(z) >= p_l1 |x|^2 + p_l2 |e|^2 and dV_l/dt + |dy|^2 >= 0 on the
    domain. V_l is homogeneous quadratic in z, so it vanishes as the state
    decays. The objective maximizes p_l1(theta*) plus a small box average.
    """
    degrees = degrees or Degrees()
    mode = ObjectiveMode(objective)
    cleared = clear_cascade(system)
    theta = list(system.param_names)
    n = system.n
    x, e = names("x", n), names("e", n)
    z = x + e
    box = _certification_box(system)

    program = SosProgram(GainKind.S2O_LOWER.value)
    program.note("lower storage function is homogeneous quadratic in (x, e)")
    V = program.state_quadratic("Vl", z, theta, degrees.v)
    pl1 = program.free("pl1", theta, degrees.p1)
    pl2 = program.free("pl2", theta, degrees.p1)

    program.add_sos_constraint(
        V.poly() - pl1.poly() * _squared_norm(x) - pl2.poly() * _squared_norm(e),
        domain=system.domain,
        multiplier_degree=degrees.m,
        label="storage",
    )
    supply = program.add_sos_constraint(
        V.poly().lie_derivative(cleared.drift(z)) * (cleared.d_c * cleared.d_c)
        + cleared.output_energy(z) * cleared.d_a,
        domain=system.domain,
        multiplier_degree=degrees.m,
        label="dissipation",
        pending=cleared.pending(),
    )
    _clear_pending(supply, box, solver_settings)

    pinned = resolve_pin(pin, degrees.p1)
    if pinned:
        program.add_equality(nominal_value(pl1.poly(), system.nominal_point), label="pin")
        target = box_average(pl1.poly(), objective_box(system))
        mode = ObjectiveMode.INTEGRAL
    elif mode == ObjectiveMode.INTEGRAL:
        target = box_average(pl1.poly(), objective_box(system))
    else:
        target = nominal_value(pl1.poly(), system.nominal_point) + box_average(
            pl1.poly(), objective_box(system)
        ) * LOWER_AVERAGE_WEIGHT
    program.maximize(target)
    program.regularize_trace(TRACE_WEIGHT)

    certificate = _solve(program, GainKind.S2O_LOWER, degrees, solver_settings)
    return _finish(
        GainKind.S2O_LOWER, system, certificate,
        certificate.decisions["pl1"], Polynomial.constant(1.0), degrees, pinned, mode,
    )


# ==================== L2-INDUCED ====================

def l2_gain_bound(
    system: UncertainSystem,
    degrees: Optional[Degrees] = None,
    objective: Union[ObjectiveMode, str] = ObjectiveMode.NOMINAL,
    pin: PinMode = "auto",
    solver_settings: Optional[SolverSettings] = None,
) -> GainBound:
    """
    gamma(theta) = gamma_n / gamma_d bounding ||dy||^2 / ||u||^2 (zero initial state).

    dV/dt <= -gamma_d |dy|^2 + gamma_n |u|^2 with V SOS and gamma_d >= 1
    on the domain; minimizes gamma_n(theta*) (or its box average).
    With gamma_n, gamma_d constant the result is a guaranteed cost over
    the whole domain.
    """
    degrees = degrees or Degrees()
    mode = ObjectiveMode(objective)
    cleared = clear_cascade(system)
    theta = list(system.param_names)
    n, m = system.n, system.m
    z = names("x", n) + names("e", n)
    u = names("u", m)
    box = _certification_box(system)

    program = SosProgram(GainKind.L2.value)
    program.note("gamma_d >= 1 imposed on the domain")
    V = program.state_quadratic("V", z, theta, degrees.v)
    gn = program.free("gamma_n", theta, degrees.gn)
    gd = program.free("gamma_d", theta, degrees.gd)

    program.add_sos_constraint(V.poly(), domain=system.domain, multiplier_degree=degrees.m, label="storage")
    d_c2 = cleared.d_c * cleared.d_c
    dissipation = program.add_sos_constraint(
        -(V.poly().lie_derivative(cleared.drift(z, u)) * d_c2)
        - gd.poly() * (cleared.output_energy(z, u) * cleared.d_a)
        + gn.poly() * (_squared_norm(u) * (cleared.d_a * d_c2)),
        domain=system.domain,
        multiplier_degree=degrees.m,
        label="dissipation",
        pending=cleared.pending(),
    )
    _clear_pending(dissipation, box, solver_settings)
    program.add_sos_constraint(
        gd.poly() - 1.0, domain=system.domain, multiplier_degree=degrees.m, label="normalization"
    )

    pinned = resolve_pin(pin, degrees.gn)
    if pinned:
        program.add_equality(nominal_value(gn.poly(), system.nominal_point), label="pin")
    target, mode = _objective(program, gn.poly(), system, mode, pinned)
    program.minimize(target)

    certificate = _solve(program, GainKind.L2, degrees, solver_settings)
    return _finish(
        GainKind.L2, system, certificate,
        certificate.decisions["gamma_n"], certificate.decisions["gamma_d"], degrees, pinned, mode,
    )


# ==================== H2 ====================

def h2_bound(
    system: UncertainSystem,
    degrees: Optional[Degrees] = None,
    full_output: bool = False,
    objective: Union[ObjectiveMode, str] = ObjectiveMode.NOMINAL,
    solver_settings: Optional[SolverSettings] = None,
) -> GainBound:
    """
    q1(theta) * Tr(Bbar^T Bbar) bounding the squared H2 norm of the mismatch
    channel (all cascade outputs with full_output).

    0 <= P <= q1 I and Abar^T P + P Abar + C^T C <= 0, scalarized with a
    fresh vector z.

    Raises:
        FeedthroughError: If the channel's feedthrough is not identically zero
    """
    degrees = degrees or Degrees()
    mode = ObjectiveMode(objective)
    cleared = clear_cascade(system, full_output=full_output)
    feed = cleared.cascade.Dbar if full_output else cleared.cascade.D_delta
    if not feed.is_zero:
        raise FeedthroughError("feedthrough not allowed: the H2 bound needs dD(theta) = 0")
    theta = list(system.param_names)
    z = names("z", cleared.order)
    box = _certification_box(system)

    program = SosProgram(GainKind.H2.value)
    P = program.state_quadratic("P", z, theta, degrees.v)
    q1 = program.free("q1", theta, degrees.p1)

    program.add_sos_constraint(P.poly(), domain=system.domain, multiplier_degree=degrees.m, label="psd")
    program.add_sos_constraint(
        q1.poly() * _squared_norm(z) - P.poly(),
        domain=system.domain,
        multiplier_degree=degrees.m,
        label="ceiling",
    )
    lyapunov = program.add_sos_constraint(
        -(P.poly().lie_derivative(cleared.drift(z)) * (cleared.d_c * cleared.d_c))
        - cleared.output_energy(z) * cleared.d_a,
        domain=system.domain,
        multiplier_degree=degrees.m,
        label="lyapunov",
        pending=cleared.pending(),
    )
    _clear_pending(lyapunov, box, solver_settings)
    if full_output:
        program.note("full cascade output channel")

    target, mode = _objective(program, q1.poly(), system, mode, False)
    program.minimize(target)

    certificate = _solve(program, GainKind.H2, degrees, solver_settings)
    q1_value = certificate.decisions["q1"]
    return _finish(
        GainKind.H2, system, certificate,
        q1_value * cleared.input_trace(), cleared.d_a * cleared.d_a,
        degrees, False, mode, full_output,
    )


def synthesize(
    kind: Union[GainKind, str],
    system: UncertainSystem,
    degrees: Optional[Degrees] = None,
    pin: PinMode = "auto",
    objective: Union[ObjectiveMode, str] = ObjectiveMode.NOMINAL,
    full_output: bool = False,
    solver_settings: Optional[SolverSettings] = None,
) -> GainBound:
    """Run the program for one gain kind (pinning does not apply to h2)."""
    kind = GainKind(kind)
    if kind == GainKind.S2O_UPPER:
        return state_to_output_upper(system, degrees, pin, objective, solver_settings)
    if kind == GainKind.S2O_LOWER:
        return state_to_output_lower(system, degrees, pin, objective, solver_settings)
    if kind == GainKind.L2:
        return l2_gain_bound(system, degrees, objective, pin, solver_settings)
    return h2_bound(system, degrees, full_output, objective, solver_settings)
