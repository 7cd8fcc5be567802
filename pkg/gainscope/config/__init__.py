"""
gainscope - Configuration
"""
from .settings import (
    Settings,
    ToleranceSettings,
    SolverSettings,
    GridSettings,
    OutputSettings,
    ConfigError,
    settings,
)

__all__ = [
    "Settings",
    "ToleranceSettings",
    "SolverSettings",
    "GridSettings",
    "OutputSettings",
    "ConfigError",
    "settings",
]
