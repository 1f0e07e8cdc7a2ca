"""Request and response models for the HTTP service."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field, field_validator, model_validator

from ..bench import parse_arithmetic

Ordering = Literal["lex", "rb"]


class _ArithmeticMixin(BaseModel):
    arithmetic: str = "float"

    @field_validator("arithmetic")
    @classmethod
    def _check_arithmetic(cls, v: str) -> str:
        parse_arithmetic(v)
        return v


class SolveRequest(_ArithmeticMixin):
    """Solve the built-in manufactured problem at one grid size."""

    size: int = Field(default=32, ge=1, le=2048)
    omega: float = Field(default=1.5, allow_inf_nan=False)
    tol: float | None = Field(default=None, gt=0.0)
    max_sweeps: int = Field(default=50_000, ge=1)
    ordering: Ordering = "lex"
    seed: int | None = None


class SolveResponse(BaseModel):
    size: int
    omega: float
    arithmetic: str
    ordering: str
    tol: float
    iterations: int
    final_residual: float
    converged: bool
    diverged: bool
    wall_time_s: float
    error_vs_exact: float


class BenchRequest(_ArithmeticMixin):
    sizes: list[int] = Field(default=[8, 16, 32, 64, 128, 256, 512], min_length=1)
    omega: float = Field(default=1.5, allow_inf_nan=False)
    tol: float | None = Field(default=None, gt=0.0)
    max_sweeps: int = Field(default=50_000, ge=1)
    ordering: Ordering = "lex"
    freq_hz: float = Field(default=100e6, gt=0.0, allow_inf_nan=False)
    seed: int = 0
    assigns_per_update: int = Field(default=6, ge=1)

    @field_validator("sizes")
    @classmethod
    def _check_sizes(cls, v: list[int]) -> list[int]:
        for s in v:
            if not 1 <= s <= 2048:
                raise ValueError(f"size {s} outside 1..2048")
        return v


class BenchRow(BaseModel):
    size: int
    omega: float
    arithmetic: str
    ordering: str
    iterations: int
    final_residual: float
    wall_time_s: float
    model_cycles_seq: int
    model_cycles_par: int
    model_speedup: float | None
    converged: bool


class BenchResponse(BaseModel):
    rows: list[BenchRow]
    all_converged: bool


class OmegaSweepRequest(_ArithmeticMixin):
    size: int = Field(default=64, ge=1, le=2048)
    start: float = Field(default=1.0)
    stop: float = Field(default=1.95)
    step: float = Field(default=0.05, gt=0.0)
    tol: float | None = Field(default=None, gt=0.0)
    max_sweeps: int = Field(default=50_000, ge=1)
    ordering: Ordering = "lex"
    seed: int = 0

    @model_validator(mode="after")
    def _check_range(self) -> "OmegaSweepRequest":
        if not (0.0 < self.start <= self.stop < 2.0):
            raise ValueError("omega range must satisfy 0 < start <= stop < 2")
        return self


class OmegaSweepRow(BaseModel):
    omega: float
    iterations: int
    final_residual: float
    converged: bool
    is_minimizer: bool


class OmegaSweepResponse(BaseModel):
    size: int
    rows: list[OmegaSweepRow]
    minimizer: float | None


class CyclesRequest(BaseModel):
    size: int = Field(default=32, ge=1, le=2048)
    sweeps: int = Field(default=1, ge=0)
    assigns_per_update: int = Field(default=6, ge=1)
    freq_hz: float = Field(default=100e6, gt=0.0, allow_inf_nan=False)


class CyclesResponse(BaseModel):
    size: int
    sweeps: int
    assigns_per_update: int
    freq_hz: float
    cycles_sequential: int
    cycles_red_black: int
    speedup: float | None
    time_sequential_s: float
    time_red_black_s: float


class HealthResponse(BaseModel):
    status: str
    version: str
