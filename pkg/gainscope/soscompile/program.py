"""
gainscope - SOS Program Builder and Compiler

Constraints are stated over decision polynomials; compile() introduces one
Gram block per constraint plus one SOS multiplier per domain inequality and
emits one equality row per monomial.
"""
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from ..config import SolverSettings, settings
from ..polycore import Polynomial, canonical_variables, grlex_key
from ..sdpsolve import SdpProblem, SdpSolution, solve, write_sdpa
from .affine import AffinePoly, VarRef
from .models import (
    ConstraintKind,
    DecisionPoly,
    DecisionStructure,
    SosConstraint,
    free_basis,
    is_state_variable,
    state_basis,
)


logger = logging.getLogger(__name__)

Interval = Tuple[float, float]


class GramOverflowError(Exception):
    """Raised when a Gram basis grows past the configured cap."""
    pass


class PendingDenominatorError(Exception):
    """Raised when compiling a constraint whose denominators are not yet cleared."""
    pass


# ==================== OBJECTIVE HELPERS ====================

def nominal_value(expression: AffinePoly, point: Mapping[str, float]) -> AffinePoly:
    """Evaluate the indeterminates of a decision expression at a point."""
    return expression.substitute(dict(point))


def box_moment(power: int, lo: float, hi: float) -> float:
    """Mean of t**power over [lo, hi]."""
    if hi == lo:
        return lo ** power
    return (hi ** (power + 1) - lo ** (power + 1)) / ((power + 1) * (hi - lo))


def _box_mean(poly: Polynomial, box: Mapping[str, Interval]) -> float:
    total = 0.0
    for exponent, coeff in poly.sorted_terms():
        term = coeff
        for name, a in zip(poly.variables, exponent):
            if not a:
                continue
            if name not in box:
                raise ValueError(f"No interval for variable '{name}'")
            term *= box_moment(a, *box[name])
        total += term
    return total


def box_average(expression: AffinePoly, box: Mapping[str, Interval]) -> AffinePoly:
    """Average of a decision expression over an axis-aligned box (exact moments)."""
    return expression.map(lambda p: Polynomial.constant(_box_mean(p, box)))


# ==================== COMPILED FORM ====================

@dataclass
class GramBlock:
    """A PSD block of the compiled problem and where it came from."""
    decision: DecisionPoly
    block: int
    constraint: Optional[int] = None
    weight: Optional[Polynomial] = None

    @property
    def is_main(self) -> bool:
        return self.constraint is not None and self.weight is None


@dataclass
class CompiledProgram:
    problem: SdpProblem
    columns: Dict[VarRef, Tuple] = field(default_factory=dict)
    grams: List[GramBlock] = field(default_factory=list)
    row_counts: List[int] = field(default_factory=list)
    sense: float = 1.0

    def values(self, solution: SdpSolution) -> Dict[VarRef, float]:
        """Decision scalar values read off a solution (zeros where absent)."""
        values: Dict[VarRef, float] = {}
        for ref, column in self.columns.items():
            if column[0] == "free":
                k = column[1]
                values[ref] = float(solution.free[k]) if k < len(solution.free) else 0.0
            else:
                _, blk, i, j = column
                values[ref] = float(solution.blocks[blk][i, j]) if blk < len(solution.blocks) else 0.0
        return values

    def gram_matrix(self, gram: GramBlock, solution: SdpSolution) -> np.ndarray:
        if gram.block < len(solution.blocks):
            return np.array(solution.blocks[gram.block], dtype=float)
        size = len(gram.decision.basis)
        return np.zeros((size, size))

    def objective_value(self, solution: SdpSolution) -> float:
        """Objective in the sense it was stated (maximize or minimize)."""
        return self.sense * solution.objective

    def grams_for(self, constraint: int) -> List[GramBlock]:
        return [g for g in self.grams if g.constraint == constraint]


def _prune_basis(
    names: Sequence[str],
    main: List[Polynomial],
    expr: AffinePoly,
    plans: List[Tuple[Polynomial, List[Polynomial]]],
) -> List[Polynomial]:
    """
    Drop basis monomials whose square no term can match.

    A Gram diagonal entry Q_mm is the only source of m^2 unless the
    expression, a multiplier product or another pair of basis monomials
    also produces it; otherwise its row forces Q_mm = 0, and PSD then
    forces the whole row and column to zero. Repeats until stable.
    """
    def exponent(mono: Polynomial) -> Tuple[int, ...]:
        return next(iter(mono.terms_in(names)))

    def add(a: Tuple[int, ...], b: Tuple[int, ...]) -> Tuple[int, ...]:
        return tuple(x + y for x, y in zip(a, b))

    support = set()
    for p in expr.polynomials():
        support.update(e for e, c in p.terms_in(names).items() if c != 0.0)
    for g, basis in plans:
        exps = [exponent(b) for b in basis]
        g_exps = list(g.terms_in(names))
        for i, a in enumerate(exps):
            for b in exps[i:]:
                ab = add(a, b)
                support.update(add(ab, t) for t in g_exps)

    kept = [(exponent(m), m) for m in main]
    while True:
        exps = [e for e, _ in kept]
        cross = {add(exps[i], exps[j]) for i in range(len(exps)) for j in range(i + 1, len(exps))}
        reduced = [(e, m) for e, m in kept if add(e, e) in support or add(e, e) in cross]
        if len(reduced) == len(kept):
            return [m for _, m in kept]
        kept = reduced


# ==================== PROGRAM ====================

class SosProgram:
    """
    Sum-of-squares program builder.

    Usage:
        program = SosProgram("example")
        p = program.free("p", ["t1"], 2)
        program.add_sos_constraint(p.poly() - t1_squared, domain=[g])
        program.minimize(nominal_value(p.poly(), {"t1": 0.0}))
        compiled, solution = program.solve()
    """

    def __init__(
        self,
        name: str = "program",
        gram_cap: Optional[int] = None,
        drop_tol: Optional[float] = None,
    ):
        self.name = name
        self.gram_cap = gram_cap if gram_cap is not None else settings.solver.gram_cap
        self.drop_tol = drop_tol if drop_tol is not None else settings.tolerances.drop
        self.decisions: Dict[str, DecisionPoly] = {}
        self.constraints: List[SosConstraint] = []
        self.notes: List[str] = []
        self.objective: Tuple[Dict[VarRef, float], float] = ({}, 0.0)
        self.sense = 1.0
        self.trace_weight = 0.0

    # ==================== DECLARATIONS ====================

    def declare(
        self,
        name: str,
        structure: Union[DecisionStructure, str],
        variables: Sequence[str] = (),
        degree: int = 0,
        state: Sequence[str] = (),
    ) -> DecisionPoly:
        """
        Declare a decision polynomial with fresh unknown coefficients.

        Args:
            name: Unique name
            structure: free, sos or state-quadratic
            variables: Indeterminates of the coefficients (theta for state-quadratic)
            degree: Maximum total degree in `variables`
            state: Quadratic-form variables (state-quadratic only)
        """
        structure = DecisionStructure(structure)
        if name in self.decisions:
            raise ValueError(f"Decision polynomial '{name}' already declared")
        if degree < 0:
            raise ValueError(f"Degree of '{name}' must be >= 0, got {degree}")
        if structure == DecisionStructure.STATE_QUADRATIC:
            if not state:
                raise ValueError(f"State-quadratic '{name}' needs state variables")
            decision = DecisionPoly(
                name, structure, free_basis(variables, degree), state=canonical_variables(state)
            )
        elif structure == DecisionStructure.SOS:
            decision = DecisionPoly(name, structure, free_basis(variables, math.ceil(degree / 2)))
        else:
            decision = DecisionPoly(name, structure, free_basis(variables, degree))
        self.decisions[name] = decision
        return decision

    def free(self, name: str, variables: Sequence[str] = (), degree: int = 0) -> DecisionPoly:
        return self.declare(name, DecisionStructure.FREE, variables, degree)

    def sos(self, name: str, variables: Sequence[str], degree: int) -> DecisionPoly:
        return self.declare(name, DecisionStructure.SOS, variables, degree)

    def state_quadratic(
        self, name: str, state: Sequence[str], params: Sequence[str], degree: int
    ) -> DecisionPoly:
        return self.declare(name, DecisionStructure.STATE_QUADRATIC, params, degree, state=state)

    # ==================== CONSTRAINTS ====================

    def add_sos_constraint(
        self,
        expression: Union[AffinePoly, Polynomial, float],
        domain: Iterable[Polynomial] = (),
        multiplier_degree: Optional[int] = None,
        label: Optional[str] = None,
        products: bool = False,
        pending: Iterable[Tuple[Polynomial, int]] = (),
    ) -> SosConstraint:
        """
        Register expression - sum_j m_j g_j in SOS with fresh SOS multipliers m_j.

        Args:
            expression: Affine in the decision scalars
            domain: Inequalities g_j >= 0 describing the parameter domain
            multiplier_degree: Total degree of the multipliers in the parameters
                (default: fit to the expression)
            products: Also add multipliers for pairwise products g_i g_j
            pending: Denominators (d, k) still to be certified and cleared
        """
        constraint = SosConstraint(
            label=label or f"c{len(self.constraints) + 1}",
            expression=AffinePoly.coerce(expression),
            domain=list(domain),
            multiplier_degree=multiplier_degree,
            products=products,
            pending=[(d, int(k)) for d, k in pending if not (d.is_constant and d.constant_term == 1.0)],
        )
        self.constraints.append(constraint)
        return constraint

    def add_equality(self, expression: Union[AffinePoly, Polynomial, float], label: Optional[str] = None) -> SosConstraint:
        """Require expression == 0 coefficientwise."""
        constraint = SosConstraint(
            label=label or f"eq{len(self.constraints) + 1}",
            expression=AffinePoly.coerce(expression),
            kind=ConstraintKind.ZERO,
        )
        self.constraints.append(constraint)
        return constraint

    # ==================== OBJECTIVE ====================

    def minimize(self, expression: AffinePoly) -> None:
        self.objective = AffinePoly.coerce(expression).linear_functional()
        self.sense = 1.0

    def maximize(self, expression: AffinePoly) -> None:
        self.objective = (-AffinePoly.coerce(expression)).linear_functional()
        self.sense = -1.0

    def regularize_trace(self, weight: float) -> None:
        """Add weight * trace of every Gram block to the minimized objective."""
        self.trace_weight = float(weight)

    def note(self, text: str) -> None:
        self.notes.append(text)

    # ==================== COMPILATION ====================

    def _multiplier_plan(self, constraint: SosConstraint) -> Tuple[List[Polynomial], List[Tuple[Polynomial, List[Polynomial]]]]:
        """Main Gram basis and (g_j, multiplier basis) pairs."""
        expr = constraint.expression
        domain = constraint.domain_polys()
        names = list(expr.variables())
        for g in domain:
            names.extend(g.used_variables())
        names = canonical_variables(names)

        state = [v for v in names if is_state_variable(v)]
        structured = bool(state) and all(not g.degree_in(state) for g in domain)
        if structured:
            for p in expr.polynomials():
                terms = p.terms_in(names)
                idx = [names.index(s) for s in state]
                if any(sum(e[i] for i in idx) != 2 for e in terms):
                    structured = False
                    break
        params = [v for v in names if v not in state] if structured else names
        expr_degree = expr.degree_in(params)

        half = math.ceil(expr_degree / 2)
        multipliers: List[Tuple[Polynomial, int]] = []
        for g in domain:
            g_half = math.ceil(g.degree() / 2)
            if constraint.multiplier_degree is not None:
                m_half = math.ceil(constraint.multiplier_degree / 2)
            else:
                m_half = half - g_half
            if m_half < 0:
                continue
            multipliers.append((g, m_half))
            half = max(half, m_half + g_half)

        if structured:
            main = state_basis(state, params, half)
            plans = [(g, state_basis(state, params, m_half)) for g, m_half in multipliers]
        else:
            main = free_basis(params, half)
            plans = [(g, free_basis(params, m_half)) for g, m_half in multipliers]
        pruned = _prune_basis(names, main, expr, plans)
        if len(pruned) < len(main):
            logger.debug(f"{constraint.label}: Gram basis reduced from {len(main)} to {len(pruned)} monomials")
        return pruned, plans

    def _check_cap(self, label: str, basis: List[Polynomial]) -> None:
        if len(basis) > self.gram_cap:
            raise GramOverflowError(
                f"Gram basis for {label} has {len(basis)} monomials (cap {self.gram_cap}); "
                f"reduce the decision or multiplier degrees"
            )

    def compile(self) -> CompiledProgram:
        """
        Build the standard-form SDP.

        Rows follow constraint order, then graded lexicographic monomial
        order; coefficients with |c| <= drop_tol are dropped.

        Raises:
            PendingDenominatorError: If a constraint still has uncleared denominators
            GramOverflowError: If a Gram basis exceeds the cap
        """
        problem = SdpProblem()
        compiled = CompiledProgram(problem=problem, sense=self.sense)

        def allocate(decision: DecisionPoly, constraint: Optional[int] = None, weight=None) -> None:
            if decision.is_gram:
                self._check_cap(decision.name, decision.basis)
                blk = problem.add_block(len(decision.basis), label=decision.name)
                for k, (i, j) in enumerate(decision.pairs):
                    compiled.columns[(decision.name, k)] = ("gram", blk, i, j)
                compiled.grams.append(GramBlock(decision, blk, constraint, weight))
            else:
                start = problem.add_free(decision.n_scalars)
                for k in range(decision.n_scalars):
                    compiled.columns[(decision.name, k)] = ("free", start + k)

        for decision in self.decisions.values():
            allocate(decision)

        for index, constraint in enumerate(self.constraints):
            if constraint.pending:
                names = ", ".join(f"({d})^{k}" for d, k in constraint.pending)
                raise PendingDenominatorError(
                    f"Constraint {constraint.label} has uncleared denominators: {names}"
                )
            residual = constraint.expression
            if constraint.kind == ConstraintKind.SOS:
                main_basis, plans = self._multiplier_plan(constraint)
                if main_basis:
                    main = DecisionPoly(f"{constraint.label}/gram", DecisionStructure.SOS, main_basis, internal=True)
                    allocate(main, index)
                    residual = residual - main.poly()
                for j, (g, basis) in enumerate(plans):
                    mult = DecisionPoly(f"{constraint.label}/m{j + 1}", DecisionStructure.SOS, basis, internal=True)
                    allocate(mult, index, g)
                    residual = residual - mult.poly() * g
            compiled.row_counts.append(self._emit_rows(problem, compiled, residual, constraint.label))

        coeffs, constant = self.objective
        problem.constant = constant
        for ref, c in coeffs.items():
            column = compiled.columns.get(ref)
            if column is None:
                raise KeyError(f"Objective uses undeclared scalar {ref}")
            if column[0] == "free":
                problem.objective_free[column[1]] = problem.objective_free.get(column[1], 0.0) + c
            else:
                key = column[1:]
                problem.objective[key] = problem.objective.get(key, 0.0) + c
        if self.trace_weight:
            for gram in compiled.grams:
                for i in range(len(gram.decision.basis)):
                    key = (gram.block, i, i)
                    problem.objective[key] = problem.objective.get(key, 0.0) + self.trace_weight

        logger.debug(f"Compiled {self.name}: {problem.summary()}")
        return compiled

    def _emit_rows(self, problem: SdpProblem, compiled: CompiledProgram, residual: AffinePoly, label: str) -> int:
        names = residual.variables()
        rows: Dict[Tuple[int, ...], Dict[VarRef, float]] = {}
        rhs: Dict[Tuple[int, ...], float] = {}
        for exponent, c in residual.const.terms_in(names).items():
            rhs[exponent] = -c
        for ref in residual.refs():
            for exponent, c in residual.linear[ref].terms_in(names).items():
                bucket = rows.setdefault(exponent, {})
                bucket[ref] = bucket.get(ref, 0.0) + c

        count = 0
        for exponent in sorted(set(rows) | set(rhs), key=grlex_key):
            entries: Dict[Tuple[int, int, int], float] = {}
            free: Dict[int, float] = {}
            for ref, c in sorted(rows.get(exponent, {}).items()):
                if abs(c) <= self.drop_tol:
                    continue
                column = compiled.columns[ref]
                if column[0] == "free":
                    free[column[1]] = free.get(column[1], 0.0) + c
                else:
                    key = column[1:]
                    entries[key] = entries.get(key, 0.0) + c
            b = rhs.get(exponent, 0.0)
            if abs(b) <= self.drop_tol:
                b = 0.0
            if not entries and not free and b == 0.0:
                continue
            monomial = Polynomial.monomial(names, exponent).to_string() if names else "1"
            problem.add_row(entries, free, rhs=b, label=f"{label}:{monomial}")
            count += 1
        return count

    # ==================== SOLVE ====================

    def solve(
        self,
        solver_settings: Optional[SolverSettings] = None,
        backend: Optional[str] = None,
    ) -> Tuple[CompiledProgram, SdpSolution]:
        compiled = self.compile()
        if solver_settings is not None and solver_settings.sdpa_export is not None:
            export = Path(solver_settings.sdpa_export)
            export.parent.mkdir(parents=True, exist_ok=True)
            export.write_text(write_sdpa(compiled.problem), encoding="utf-8")
            logger.info(f"{self.name}: SDP written to {export}")
        solution = solve(compiled.problem, solver_settings, backend)
        logger.info(
            f"{self.name}: {solution.status.value} after {solution.iterations} iterations "
            f"(objective {compiled.objective_value(solution):.6g})"
        )
        return compiled, solution
