"""
gainscope - Command Line (Layer 7)
"""
from .config import Command, PinMode, RunConfig, parse_grid
from .contour import Polyline, contour_segments, extract_contours
from .commands import (
    COMMANDS,
    EXIT_INPUT,
    EXIT_NUMERICAL,
    EXIT_OK,
    EXIT_REJECTED,
    UnsupportedRequestError,
    check_system_hash,
    cmd_analyze,
    cmd_certify,
    cmd_invariance,
    cmd_levelset,
    cmd_sweep,
    exit_code_for,
    spot_check_points,
)
from .main import build_parser, config_from_args, main

__all__ = [
    # Config
    "Command",
    "PinMode",
    "RunConfig",
    "parse_grid",
    # Contours
    "Polyline",
    "contour_segments",
    "extract_contours",
    # Commands
    "COMMANDS",
    "EXIT_INPUT",
    "EXIT_NUMERICAL",
    "EXIT_OK",
    "EXIT_REJECTED",
    "UnsupportedRequestError",
    "check_system_hash",
    "cmd_analyze",
    "cmd_certify",
    "cmd_invariance",
    "cmd_levelset",
    "cmd_sweep",
    "exit_code_for",
    "spot_check_points",
    # Entry point
    "build_parser",
    "config_from_args",
    "main",
]
