"""
gainscope - Run Configuration (Pydantic)

Validated command-line configuration.
"""
from dataclasses import replace
from enum import Enum
from pathlib import Path
from typing import List, Optional

from pydantic import BaseModel, Field, field_validator

from ..bounds import Degrees, GainKind, ObjectiveMode
from ..config import Settings


class Command(str, Enum):
    ANALYZE = "analyze"
    SWEEP = "sweep"
    LEVELSET = "levelset"
    INVARIANCE = "invariance"
    CERTIFY = "certify"


class PinMode(str, Enum):
    AUTO = "auto"
    ON = "on"
    OFF = "off"


def parse_grid(text: str) -> List[int]:
    """'20' or '20x30' -> per-axis point counts."""
    parts = [p for p in str(text).lower().replace("*", "x").split("x") if p.strip()]
    try:
        return [int(p) for p in parts]
    except ValueError:
        raise ValueError(f"Grid must look like N or NxM, got {text!r}")


class RunConfig(BaseModel):
    """One CLI invocation."""
    command: Command
    system: Optional[Path] = None
    certificate: Optional[Path] = None
    kinds: List[GainKind] = Field(default=[GainKind.S2O_UPPER], min_length=1)

    # Parameter degrees
    deg_v: int = Field(default=2, ge=0)
    deg_m: Optional[int] = Field(default=None, ge=0)
    deg_p1: int = Field(default=2, ge=0)
    deg_gn: int = Field(default=0, ge=0)
    deg_gd: int = Field(default=0, ge=0)

    pin_nominal: PinMode = PinMode.AUTO
    objective: ObjectiveMode = ObjectiveMode.NOMINAL
    full_output: bool = False

    grid: List[int] = Field(default_factory=list)
    level: Optional[float] = None

    # Tolerances
    tol_psd: float = Field(default=1e-7, gt=0)
    tol_match: float = Field(default=1e-7, gt=0)
    tol_solver: float = Field(default=1e-8, gt=0)
    tol_dominance: float = Field(default=1e-6, gt=0)

    out: Optional[Path] = None
    sdpa_export: Optional[Path] = None
    gnuplot: bool = False
    seed: int = 0
    samples: int = Field(default=25, ge=0)
    threads: Optional[int] = Field(default=None, ge=1)
    verbose: bool = False

    @field_validator("grid", mode="before")
    @classmethod
    def _grid(cls, value):
        if value is None or value == "":
            return []
        if isinstance(value, (str, int)):
            value = parse_grid(str(value))
        return list(value)

    @field_validator("grid")
    @classmethod
    def _grid_resolution(cls, value: List[int]) -> List[int]:
        if any(v < 2 for v in value):
            raise ValueError(f"grid resolution must be >= 2 per axis, got {value}")
        return value

    def degrees(self) -> Degrees:
        return Degrees(v=self.deg_v, m=self.deg_m, p1=self.deg_p1, gn=self.deg_gn, gd=self.deg_gd)

    def resolution(self, n_params: int, default: int) -> List[int]:
        """Per-axis grid counts; a single value applies to every axis."""
        if not self.grid:
            return [default] * n_params
        if len(self.grid) == 1:
            return self.grid * n_params
        if len(self.grid) != n_params:
            raise ValueError(f"Grid has {len(self.grid)} axes for {n_params} parameters")
        return list(self.grid)

    def apply(self, base: Settings) -> Settings:
        """Settings with this run's tolerances, threads and output directory."""
        result = Settings(
            tolerances=replace(base.tolerances, psd=self.tol_psd, match=self.tol_match),
            solver=replace(base.solver, tol=self.tol_solver),
            grid=replace(base.grid),
            output=replace(base.output),
        )
        if self.threads is not None:
            result.output.threads = self.threads
        if self.out is not None:
            result.output.base_path = self.out
        return result
