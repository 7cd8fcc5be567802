"""
gainscope - Configuration Settings
"""
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional


class ConfigError(Exception):
    """Raised when an environment or config value cannot be used."""
    pass


@dataclass
class ToleranceSettings:
    """Numerical tolerances shared by the layers."""
    psd: float = 1e-7
    match: float = 1e-7
    drop: float = 1e-12
    hurwitz: float = 1e-9
    singular: float = 1e-12
    invariance: float = 1e-9
    numerator_zero: float = 1e-10


@dataclass
class SolverSettings:
    """Embedded SDP solver configuration."""
    backend: str = "embedded"
    tol: float = 1e-8
    max_iter: int = 200
    gram_cap: int = 200
    phase_one_trace_cap: float = 1e5
    polish: bool = True
    sdpa_export: Optional[Path] = None  # write each compiled bound program here before solving


@dataclass
class GridSettings:
    """Parameter grid configuration."""
    resolution: int = 20
    shrink: float = 0.01


@dataclass
class OutputSettings:
    """Output configuration."""
    base_path: Path = field(default_factory=lambda: Path("out"))
    threads: int = 1
    log_level: str = "WARNING"


def _read_int(env: Mapping[str, str], key: str, minimum: int) -> Optional[int]:
    raw = env.get(key)
    if raw is None or raw == "":
        return None
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"{key} must be an integer, got {raw!r}")
    if value < minimum:
        raise ConfigError(f"{key} must be >= {minimum}, got {value}")
    return value


@dataclass
class Settings:
    """Main settings container."""
    tolerances: ToleranceSettings = field(default_factory=ToleranceSettings)
    solver: SolverSettings = field(default_factory=SolverSettings)
    grid: GridSettings = field(default_factory=GridSettings)
    output: OutputSettings = field(default_factory=OutputSettings)

    @classmethod
    def from_env(cls, env: Optional[Mapping[str, str]] = None) -> "Settings":
        """
        Build settings from environment variables.

        Reads GAINSCOPE_THREADS, GAINSCOPE_OUT, GAINSCOPE_BACKEND,
        GAINSCOPE_SOLVER_TOL and GAINSCOPE_LOG_LEVEL; unset keys keep defaults.
        """
        env = os.environ if env is None else env
        result = cls()

        threads = _read_int(env, "GAINSCOPE_THREADS", 1)
        if threads is not None:
            result.output.threads = threads

        out = env.get("GAINSCOPE_OUT")
        if out:
            result.output.base_path = Path(out)

        backend = env.get("GAINSCOPE_BACKEND")
        if backend:
            result.solver.backend = backend

        tol = env.get("GAINSCOPE_SOLVER_TOL")
        if tol:
            try:
                result.solver.tol = float(tol)
            except ValueError:
                raise ConfigError(f"GAINSCOPE_SOLVER_TOL must be a number, got {tol!r}")
            if not result.solver.tol > 0:
                raise ConfigError("GAINSCOPE_SOLVER_TOL must be positive")

        level = env.get("GAINSCOPE_LOG_LEVEL")
        if level:
            result.output.log_level = level.upper()

        return result


# Global settings instance
settings = Settings()
