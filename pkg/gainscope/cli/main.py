"""
gainscope - Command Line Entry Point (Layer 7)

    gainscope analyze SYSTEM --kind l2 --deg-gn 0 --deg-gd 0 --out out/
    gainscope sweep SYSTEM [--certificate FILE] --grid 20x20 --gnuplot
    gainscope levelset SYSTEM --level 1.0
    gainscope invariance SYSTEM
    gainscope certify --certificate FILE [--system SYSTEM]
"""
import argparse
import logging
import sys
from typing import Any, Dict, List, Optional

from pydantic import ValidationError

from ..config import ConfigError, Settings, settings
from .commands import COMMANDS, EXIT_INPUT, error_message, exit_code_for
from .config import RunConfig


logger = logging.getLogger(__name__)

KINDS = ["s2o-upper", "s2o-lower", "l2", "h2"]


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--grid", help="points per axis, N or NxM")
    parser.add_argument("--out", help="output directory (default: GAINSCOPE_OUT or ./out)")
    parser.add_argument("--threads", type=int, help="parallel workers (default: GAINSCOPE_THREADS)")
    parser.add_argument("--tol-psd", type=float, default=1e-7)
    parser.add_argument("--tol-match", type=float, default=1e-7)
    parser.add_argument("--tol-solver", type=float, default=1e-8)
    parser.add_argument("--tol-dominance", type=float, default=1e-6)
    parser.add_argument("-v", "--verbose", action="store_true")


def _add_synthesis(parser: argparse.ArgumentParser, many_kinds: bool) -> None:
    if many_kinds:
        parser.add_argument("--kind", action="append", choices=KINDS, help="repeatable")
    else:
        parser.add_argument("--kind", choices=KINDS, default="s2o-upper")
    parser.add_argument("--deg-v", type=int, default=2, help="storage function / P(theta) degree")
    parser.add_argument("--deg-m", type=int, help="multiplier degree (default: fitted per constraint)")
    parser.add_argument("--deg-p1", type=int, default=2, help="p1, p2 and q1 degree")
    parser.add_argument("--deg-gn", type=int, default=0, help="L2 bound numerator degree")
    parser.add_argument("--deg-gd", type=int, default=0, help="L2 bound denominator degree")
    parser.add_argument("--pin-nominal", choices=["auto", "on", "off"], default="auto")
    parser.add_argument("--objective", choices=["nominal", "integral"], default="nominal")
    parser.add_argument("--full-output", action="store_true", help="h2 on the full output rows")
    parser.add_argument("--sdpa-export", help="write the compiled SDP in SDPA sparse format")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gainscope",
        description="Certified parameter-dependent gain bounds for uncertain LTI systems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    analyze = sub.add_parser("analyze", help="synthesize and verify bounds")
    analyze.add_argument("system")
    _add_synthesis(analyze, many_kinds=True)
    _add_common(analyze)

    sweep = sub.add_parser("sweep", help="CSV surface of bound, oracle and margin")
    sweep.add_argument("system")
    sweep.add_argument("--certificate", help="use this certificate instead of synthesizing")
    sweep.add_argument("--gnuplot", action="store_true")
    _add_synthesis(sweep, many_kinds=False)
    _add_common(sweep)

    levelset = sub.add_parser("levelset", help="contour of bound(theta) = level")
    levelset.add_argument("system")
    levelset.add_argument("--level", type=float, required=True)
    levelset.add_argument("--certificate")
    levelset.add_argument("--gnuplot", action="store_true")
    _add_synthesis(levelset, many_kinds=False)
    _add_common(levelset)

    invariance = sub.add_parser("invariance", help="invariance flags over the grid")
    invariance.add_argument("system")
    _add_common(invariance)

    certify = sub.add_parser("certify", help="revalidate a certificate file")
    certify.add_argument("--certificate", required=True)
    certify.add_argument("--system", help="system file for hash check and spot-check")
    certify.add_argument("--seed", type=int, default=0)
    certify.add_argument("--samples", type=int, default=25)
    _add_common(certify)

    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    """Map parsed arguments onto a validated RunConfig."""
    data: Dict[str, Any] = {k: v for k, v in vars(args).items() if v is not None}
    kind = data.pop("kind", None)
    if kind is not None:
        data["kinds"] = kind if isinstance(kind, list) else [kind]
    return RunConfig(**data)


def install_settings(configured: Settings) -> None:
    """Copy configured sections onto the global settings instance."""
    settings.tolerances = configured.tolerances
    settings.solver = configured.solver
    settings.grid = configured.grid
    settings.output = configured.output


def main(argv: Optional[List[str]] = None) -> int:
    """Run one command; returns the process exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        base = Settings.from_env()
        config = config_from_args(args)
    except (ConfigError, ValidationError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT

    configured = config.apply(base)
    logging.basicConfig(
        level=logging.DEBUG if config.verbose else getattr(logging, configured.output.log_level, logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
    )
    install_settings(configured)

    try:
        return COMMANDS[config.command.value](config, configured)
    except Exception as e:
        code = exit_code_for(e)
        if code is None:
            raise
        logger.debug("Command failed", exc_info=True)
        print(f"error: {error_message(e)}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
