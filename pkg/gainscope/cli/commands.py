"""
gainscope - CLI Commands

Each command takes a validated RunConfig plus Settings and returns an exit code:
0 success, 1 input/config errors, 2 infeasible or rejected requests and
invalid certificates, 3 solver numerical limits.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import ValidationError

from ..bounds import (
    GainBound,
    InfeasibleProgramError,
    SolverLimitError,
    dominance_check,
    objective_box,
    oracle_value,
)
from ..config import ConfigError, Settings
from ..invariance import invariance_report
from ..oracle import BisectionError, FeedthroughError, NotHurwitzError
from ..pipeline import AnalysisRunner, LimitExceeded, RunContext, StepFailed
from ..polycore import ParseError, UnknownVariableError, ZeroDenominatorError
from ..sdpsolve import BackendNotFoundError, SdpaFormatError
from ..soscompile import (
    BilinearityError,
    BoundCertificate,
    DenominatorCertificationError,
    GramOverflowError,
    PendingDenominatorError,
    certificate_summary,
    revalidate,
)
from ..storage import OutputStorage
from ..sysmodel import (
    BoxInferenceError,
    NominalOutsideDomainError,
    ParameterSingularityError,
    ShapeMismatchError,
    SystemFormatError,
    UncertainSystem,
    build_cascade,
    domain_mask,
    load_system_file,
    parameter_grid,
)
from .config import RunConfig
from .contour import extract_contours


logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_REJECTED = 2
EXIT_NUMERICAL = 3

INPUT_ERRORS = (
    OSError,
    ParseError,
    SystemFormatError,
    ShapeMismatchError,
    NominalOutsideDomainError,
    UnknownVariableError,
    ZeroDenominatorError,
    SdpaFormatError,
    ConfigError,
    ValidationError,
    BackendNotFoundError,
    KeyError,
    ValueError,
)
REJECTED_ERRORS = (
    InfeasibleProgramError,
    FeedthroughError,
    NotHurwitzError,
    ParameterSingularityError,
    BoxInferenceError,
    BilinearityError,
    GramOverflowError,
    PendingDenominatorError,
    DenominatorCertificationError,
)
NUMERICAL_ERRORS = (SolverLimitError, BisectionError, LimitExceeded)


class UnsupportedRequestError(Exception):
    """Raised when a command cannot handle the requested system or options."""
    pass


def exit_code_for(error: BaseException) -> Optional[int]:
    """Exit code for a known failure (StepFailed unwrapped), None otherwise."""
    if isinstance(error, StepFailed):
        error = error.cause
    if isinstance(error, NUMERICAL_ERRORS):
        return EXIT_NUMERICAL
    if isinstance(error, REJECTED_ERRORS + (UnsupportedRequestError,)):
        return EXIT_REJECTED
    if isinstance(error, INPUT_ERRORS):
        return EXIT_INPUT
    return None


def error_message(error: BaseException) -> str:
    if isinstance(error, StepFailed):
        error = error.cause
    return str(error)


# ==================== SHARED ====================

def _require_system(config: RunConfig) -> UncertainSystem:
    if config.system is None:
        raise ConfigError(f"{config.command.value} needs a system file")
    return load_system_file(config.system)


def _storage(settings: Settings) -> OutputStorage:
    return OutputStorage(settings.output.base_path)


def _grid(config: RunConfig, settings: Settings, system: UncertainSystem):
    box = tuple(objective_box(system)[name] for name in system.param_names)
    resolution = config.resolution(system.n_theta, settings.grid.resolution)
    return parameter_grid(box, resolution, settings.grid.shrink)


def _run_analysis(
    config: RunConfig,
    settings: Settings,
    system: UncertainSystem,
    kinds: Sequence[str],
    verify: bool,
) -> Tuple[RunContext, Dict[str, Any]]:
    storage = _storage(settings)
    runner = AnalysisRunner()
    plan = runner.plan_manager.build_plan(
        kinds=kinds,
        degrees=config.degrees(),
        pin=config.pin_nominal.value,
        objective=config.objective.value,
        full_output=config.full_output,
        grid=config.resolution(system.n_theta, settings.grid.resolution),
        verify=verify,
        sdpa_export=str(config.sdpa_export) if config.sdpa_export else None,
    )
    context = RunContext(system_path=config.system, settings=settings, storage=storage, system=system)
    try:
        result = runner.run(plan, context)
    finally:
        storage.save_json({k: context.timings[k] for k in sorted(context.timings)}, "timings.json")
    return context, result


def check_system_hash(certificate: BoundCertificate, system: UncertainSystem) -> Optional[str]:
    """Mismatch message, or None when the certificate belongs to the system."""
    recorded = certificate.metadata.get("system_hash")
    if recorded != system.system_hash:
        return f"system hash mismatch: certificate {recorded}, system file {system.system_hash}"
    return None


def _bound_for(config: RunConfig, settings: Settings, system: UncertainSystem) -> GainBound:
    """Bound from --certificate, or synthesized for the first --kind."""
    if config.certificate is not None:
        certificate = BoundCertificate.from_json(config.certificate.read_text(encoding="utf-8"))
        mismatch = check_system_hash(certificate, system)
        if mismatch:
            raise UnsupportedRequestError(mismatch)
        return GainBound.from_certificate(revalidate(certificate, config.tol_psd, config.tol_match))
    kind = config.kinds[0].value
    context, _ = _run_analysis(config, settings, system, [kind], verify=False)
    return context.bounds[kind]


def _gnuplot_sweep(csv_name: str, names: Sequence[str]) -> str:
    lines = [
        "set datafile separator ','",
        "set key autotitle columnhead",
        f"set xlabel '{names[0]}'",
    ]
    if len(names) == 2:
        lines += [
            f"set ylabel '{names[1]}'",
            "set zlabel 'bound'",
            f"splot '{csv_name}' using 1:2:3 with points pt 7 ps 0.5, '' using 1:2:4 with points pt 6 ps 0.5",
        ]
    else:
        lines += [f"plot '{csv_name}' using 1:{len(names) + 1} with lines, '' using 1:{len(names) + 2} with points"]
    return "\n".join(lines) + "\n"


def _gnuplot_levelset(csv_name: str, names: Sequence[str], count: int, level: float) -> str:
    return "\n".join([
        "set datafile separator ','",
        f"set xlabel '{names[0]}'",
        f"set ylabel '{names[1]}'",
        f"set title 'bound = {level!r}'",
        "set size ratio -1",
        f"plot for [k=0:{max(count - 1, 0)}] '{csv_name}' using ($1==k ? $4 : NaN):5 with lines notitle",
        "",
    ])


# ==================== COMMANDS ====================

def cmd_analyze(config: RunConfig, settings: Settings) -> int:
    """Synthesize every requested kind, verify on the grid, export certificates and summary."""
    system = _require_system(config)
    context, result = _run_analysis(config, settings, system, [k.value for k in config.kinds], verify=True)

    all_valid = True
    for kind, bound in context.bounds.items():
        summary = context.get_step_result(f"synthesize-{kind}")
        report = context.reports.get(kind)
        status = bound.certificate.status.value
        all_valid = all_valid and bound.is_valid
        print(
            f"{kind}: {status}  objective={bound.certificate.objective:.10g}  "
            f"bound(theta*)={summary['nominal_value']:.10g} (sqrt {summary['nominal_value_sqrt']:.10g})"
        )
        if "grid_max" in summary:
            print(f"{kind}: grid max {summary['grid_max']:.10g} (sqrt {summary['grid_max_sqrt']:.10g})")
        if report is not None:
            verdict = "passed" if report.passed else f"FAILED at {len(report.failures)} points"
            print(f"{kind}: dominance {verdict}, worst margin {report.worst_margin:.3g}")
    return EXIT_OK if all_valid else EXIT_REJECTED


def _oracle_row(bound: GainBound, cascade, theta: np.ndarray) -> Tuple[float, float, str]:
    value = bound.evaluate(theta)
    try:
        exact = oracle_value(bound.kind, cascade, theta, bound.full_output)
    except (ParameterSingularityError, NotHurwitzError, BisectionError) as e:
        logger.warning(f"Skipped theta={theta.tolist()}: {e}")
        return value, float("nan"), "skipped"
    return value, exact, "ok"


def cmd_sweep(config: RunConfig, settings: Settings) -> int:
    """CSV surface of bound, oracle and margin over the grid (lexicographic order)."""
    system = _require_system(config)
    bound = _bound_for(config, settings, system)
    grid = _grid(config, settings, system)
    inside = domain_mask(system, grid.points, tol=settings.tolerances.drop)
    cascade = build_cascade(system)

    def row(index: int) -> Tuple[float, float, str]:
        theta = grid.points[index]
        if not inside[index]:
            return bound.evaluate(theta), float("nan"), "outside"
        return _oracle_row(bound, cascade, theta)

    with ThreadPoolExecutor(max_workers=settings.output.threads) as pool:
        results = list(pool.map(row, range(len(grid))))

    names = list(system.param_names)
    rows: List[List[Any]] = []
    failures = 0
    for theta, (value, exact, flag) in zip(grid.points, results):
        margin = value - exact
        if flag == "ok":
            allowed = config.tol_dominance * (1.0 + abs(exact))
            if (margin > allowed) if bound.kind.is_lower else (margin < -allowed):
                flag = "violated"
                failures += 1
        rows.append([float(v) for v in theta] + [float(value), float(exact), float(margin), flag])

    storage = _storage(settings)
    storage.save_csv(names + ["bound", "oracle", "margin", "flag"], rows, "sweep.csv")
    if config.gnuplot:
        storage.save_text(_gnuplot_sweep("sweep.csv", names), "sweep.gp")
    print(f"sweep: {len(rows)} points, {failures} dominance violations -> {storage.base_path / 'sweep.csv'}")
    return EXIT_OK if bound.is_valid and not failures else EXIT_REJECTED


def cmd_levelset(config: RunConfig, settings: Settings) -> int:
    """Polylines of bound(theta) = level on a two-parameter grid."""
    system = _require_system(config)
    if system.n_theta != 2:
        raise UnsupportedRequestError(f"unsupported: level sets need 2 parameters, system has {system.n_theta}")
    if config.level is None:
        raise ConfigError("levelset needs --level")
    bound = _bound_for(config, settings, system)
    grid = _grid(config, settings, system)

    with np.errstate(divide="ignore", invalid="ignore"):
        values = bound.evaluate_grid(grid.points).reshape(grid.shape)
    polylines = extract_contours(grid.axes[0], grid.axes[1], values, config.level)

    names = list(system.param_names)
    rows = []
    for k, line in enumerate(polylines):
        for v, point in enumerate(line.points):
            rows.append([k, line.closed, v, float(point[0]), float(point[1])])

    storage = _storage(settings)
    storage.save_csv(["polyline", "closed", "vertex"] + names, rows, "levelset.csv")
    if config.gnuplot:
        storage.save_text(_gnuplot_levelset("levelset.csv", names, len(polylines), config.level), "levelset.gp")
    print(f"levelset: {len(polylines)} polylines at level {config.level!r}")
    return EXIT_OK


def cmd_invariance(config: RunConfig, settings: Settings) -> int:
    """Invariance flags and residuals per grid point and input channel."""
    system = _require_system(config)
    grid = _grid(config, settings, system)
    inside = domain_mask(system, grid.points, tol=settings.tolerances.drop)
    cascade = build_cascade(system)
    tol = settings.tolerances.invariance

    names = list(system.param_names)
    rows = []
    for theta in grid.points[inside]:
        for i in range(system.m):
            cells = [float(v) for v in theta] + [i]
            try:
                report = invariance_report(system, theta, i, tol=tol, cascade=cascade)
            except ParameterSingularityError as e:
                logger.warning(f"Skipped theta={theta.tolist()}: {e}")
                rows.append(cells + [float("nan"), float("nan"), False, False, False, "skipped"])
                continue
            rows.append(cells + [
                report.ss_mismatch,
                report.numerator_norm,
                report.is_ss_invariant,
                report.is_fully_invariant,
                report.variants_disagree,
                "ok",
            ])

    storage = _storage(settings)
    storage.save_csv(
        names + ["input", "ss_mismatch", "numerator_norm", "ss_invariant", "fully_invariant",
                 "variants_disagree", "flag"],
        rows,
        "invariance.csv",
    )
    print(f"invariance: {len(rows)} rows -> {storage.base_path / 'invariance.csv'}")
    return EXIT_OK


def spot_check_points(system: UncertainSystem, count: int, seed: int, max_draws: int = 100) -> np.ndarray:
    """Up to `count` seeded uniform samples of the box that lie in the domain."""
    rng = np.random.default_rng(seed)
    box = np.array([objective_box(system)[name] for name in system.param_names])
    draws = rng.uniform(box[:, 0], box[:, 1], size=(max_draws * max(count, 1), len(box)))
    inside = domain_mask(system, draws)
    return draws[inside][:count]


def cmd_certify(config: RunConfig, settings: Settings) -> int:
    """Revalidate a certificate file; with --system also check its hash and spot-check dominance."""
    if config.certificate is None:
        raise ConfigError("certify needs --certificate")
    certificate = revalidate(
        config.certificate.read_text(encoding="utf-8"),
        psd_tol=config.tol_psd,
        match_tol=config.tol_match,
    )
    report: Dict[str, Any] = {"certificate": certificate_summary(certificate)}
    ok = certificate.is_valid
    if not ok:
        print(f"certificate INVALID: {', '.join(certificate.reasons)}")

    if config.system is not None:
        system = load_system_file(config.system)
        mismatch = check_system_hash(certificate, system)
        if mismatch:
            print(mismatch)
            return EXIT_REJECTED
        if config.samples and "bound" in certificate.metadata:
            bound = GainBound.from_certificate(certificate)
            points = spot_check_points(system, config.samples, config.seed)
            dominance = dominance_check(bound, system, points, tol=config.tol_dominance)
            report["dominance"] = dominance.to_dict()
            if not dominance.passed:
                print(f"dominance spot-check failed at {len(dominance.failures)} of {len(points)} points")
                ok = False
    else:
        logger.warning("No system file given; skipping hash check and dominance spot-check")

    if config.out is not None:
        _storage(settings).save_json(report, "certify.json")
    if ok:
        print("certificate VALID")
    return EXIT_OK if ok else EXIT_REJECTED


COMMANDS = {
    "analyze": cmd_analyze,
    "sweep": cmd_sweep,
    "levelset": cmd_levelset,
    "invariance": cmd_invariance,
    "certify": cmd_certify,
}
