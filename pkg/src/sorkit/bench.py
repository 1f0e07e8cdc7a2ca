"""Benchmark harness: timed solves plus modelled hardware cycle counts.

Every run solves the built-in smooth manufactured problem (zero boundary,
trigonometric solution) from a seeded random initial guess, then prices
the same number of sweeps under the sequential and red-black hardware
schedules.  Results are written as CSV with a fixed column set; floats are
printed with 17 significant digits so files round-trip exactly.  All
columns except wall_time_s are deterministic for a given configuration and
seed.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .cyclemodel import DEFAULT_ASSIGNS_PER_UPDATE, build_sor_schedule, cycles
from .fixedpoint import FIXED_DEFAULT_TOL, solve_fixed
from .poisson import trig_problem
from .splitting import ORDERINGS, SolveReport, SorParams
from .stencil import solve_mesh

# Default grid ladder stops at 512; larger grids are valid sizes but take
# minutes per run, so they must be requested explicitly.
DEFAULT_SIZES = (8, 16, 32, 64, 128, 256, 512)
DEFAULT_OMEGA = 1.5
DEFAULT_TOL = 1e-8
DEFAULT_MAX_SWEEPS = 50_000
DEFAULT_FREQ_HZ = 100e6

CSV_HEADER = (
    "size,omega,arithmetic,ordering,iterations,final_residual,wall_time_s,"
    "model_cycles_seq,model_cycles_par,model_speedup,converged"
)

OMEGA_CSV_HEADER = "omega,iterations,final_residual,converged,is_minimizer"


def parse_arithmetic(text: str) -> tuple[str, int | None]:
    """Split an arithmetic spec: "float" or "fixed:<frac_bits>"."""
    if text == "float":
        return "float", None
    if text.startswith("fixed:"):
        try:
            frac = int(text.split(":", 1)[1])
        except ValueError:
            raise ValueError(f"bad fixed-point spec {text!r}") from None
        if not 2 <= frac <= 48:
            raise ValueError(f"frac_bits must be in 2..48, got {frac}")
        return "fixed", frac
    raise ValueError(f"arithmetic must be 'float' or 'fixed:<frac_bits>', got {text!r}")


def parse_sizes(text: str) -> tuple[int, ...]:
    """Parse a comma-separated size list."""
    try:
        sizes = tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise ValueError(f"bad size list {text!r}") from None
    if not sizes:
        raise ValueError("size list is empty")
    return sizes


@dataclass
class RunConfig:
    """Everything a benchmark or omega sweep needs.

    ``tol=None`` resolves to 1e-8 for float arithmetic and to the
    quantisation floor for fixed.  ``omega_range`` (start, stop, step) is
    only read by ``run_omega_sweep``, which works on ``sizes[0]``.
    """

    sizes: tuple[int, ...] = DEFAULT_SIZES
    omega: float = DEFAULT_OMEGA
    omega_range: tuple[float, float, float] | None = None
    tol: float | None = None
    max_sweeps: int = DEFAULT_MAX_SWEEPS
    ordering: str = "lex"
    arithmetic: str = "float"
    freq_hz: float = DEFAULT_FREQ_HZ
    seed: int = 0
    out: str | None = None
    assigns_per_update: int = DEFAULT_ASSIGNS_PER_UPDATE

    def __post_init__(self) -> None:
        self.sizes = tuple(int(s) for s in self.sizes)
        if not self.sizes or any(s < 1 for s in self.sizes):
            raise ValueError("sizes must be a nonempty list of positive grid sizes")
        if self.ordering not in ORDERINGS:
            raise ValueError(f"ordering must be one of {ORDERINGS}")
        parse_arithmetic(self.arithmetic)
        if self.tol is not None and not self.tol > 0.0:
            raise ValueError("tol must be positive")
        if self.max_sweeps < 1:
            raise ValueError("max_sweeps must be at least 1")
        if not (math.isfinite(self.freq_hz) and self.freq_hz > 0.0):
            raise ValueError("freq_hz must be positive")
        if self.omega_range is not None:
            start, stop, step = self.omega_range
            if not (0.0 < start <= stop < 2.0):
                raise ValueError("omega range must satisfy 0 < start <= stop < 2")
            if not step > 0.0:
                raise ValueError("omega range step must be positive")

    def resolved_tol(self) -> float:
        if self.tol is not None:
            return self.tol
        kind, _ = parse_arithmetic(self.arithmetic)
        return FIXED_DEFAULT_TOL if kind == "fixed" else DEFAULT_TOL


@dataclass
class ReportRow:
    """One benchmark line; field order matches the CSV columns."""

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


@dataclass
class OmegaRow:
    """One omega-sweep line."""

    omega: float
    iterations: int
    final_residual: float
    converged: bool
    is_minimizer: bool


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    if value is None:
        return ""
    return str(value)


def _format_rows(header: str, rows) -> str:
    fields = header.split(",")
    lines = [header]
    for row in rows:
        lines.append(",".join(_fmt(getattr(row, name)) for name in fields))
    return "\n".join(lines) + "\n"


def format_csv(rows) -> str:
    """Benchmark rows as CSV text in the canonical schema.

    No field ever contains a comma or quote, so lines are plain joins;
    newlines are always "\\n" regardless of platform.
    """
    return _format_rows(CSV_HEADER, rows)


def format_omega_csv(rows) -> str:
    return _format_rows(OMEGA_CSV_HEADER, rows)


def write_csv(rows, path: str) -> None:
    """Write benchmark rows in the canonical schema."""
    with open(path, "w", newline="") as fh:
        fh.write(format_csv(rows))


def write_omega_csv(rows, path: str) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(format_omega_csv(rows))


def _initial_guess(seed: int, index: int, n: int) -> np.ndarray:
    rng = np.random.default_rng((seed, index))
    return rng.uniform(-1.0, 1.0, (n, n))


def _solve_one(n: int, params: SorParams, kind: str, frac: int | None, x0: np.ndarray) -> SolveReport:
    problem = trig_problem(n)
    if kind == "float":
        return solve_mesh(problem, params, x0)
    return solve_fixed(problem, params, frac_bits=frac, x0=x0)


def run_bench(config: RunConfig) -> list[ReportRow]:
    """Run the size ladder; returns one row per size, CSV written if asked.

    A size that fails outright (fixed-point overflow, nonfinite iterates)
    is recorded as an unconverged row rather than aborting the remaining
    sizes.  Hitting the sweep cap is not a failure: the row simply carries
    ``converged=false`` and the capped iteration count.
    """
    kind, frac = parse_arithmetic(config.arithmetic)
    tol = config.resolved_tol()
    rows: list[ReportRow] = []
    for idx, n in enumerate(config.sizes):
        params = SorParams(config.omega, tol, config.max_sweeps, config.ordering)
        x0 = _initial_guess(config.seed, idx, n)
        t0 = time.perf_counter()
        try:
            report = _solve_one(n, params, kind, frac, x0)
            iterations = report.iterations
            final_residual = float(report.residual_history[-1])
            converged = report.converged
            wall = report.wall_time
        except (ArithmeticError, OverflowError):
            iterations = 0
            final_residual = float("inf")
            converged = False
            wall = time.perf_counter() - t0
        cyc_seq = cycles(build_sor_schedule(n, "sequential", iterations, config.assigns_per_update))
        cyc_par = cycles(build_sor_schedule(n, "red_black", iterations, config.assigns_per_update))
        rows.append(
            ReportRow(
                size=n,
                omega=config.omega,
                arithmetic=config.arithmetic,
                ordering=config.ordering,
                iterations=iterations,
                final_residual=final_residual,
                wall_time_s=wall,
                model_cycles_seq=cyc_seq,
                model_cycles_par=cyc_par,
                model_speedup=cyc_seq / cyc_par if cyc_par else None,
                converged=converged,
            )
        )
    if config.out:
        write_csv(rows, config.out)
    return rows


def _omega_grid(omega_range: tuple[float, float, float]) -> list[float]:
    start, stop, step = omega_range
    count = int(round((stop - start) / step)) + 1
    grid = [round(start + k * step, 12) for k in range(count)]
    return [w for w in grid if w <= stop + 1e-9]


def run_omega_sweep(config: RunConfig) -> list[OmegaRow]:
    """Solve ``sizes[0]`` once per omega in the configured range.

    Every omega starts from the same seeded initial guess so iteration
    counts are directly comparable.  The converged row with the fewest
    iterations is flagged as the minimizer (first such omega on ties).
    """
    if config.omega_range is None:
        raise ValueError("omega sweep needs an omega range")
    kind, frac = parse_arithmetic(config.arithmetic)
    tol = config.resolved_tol()
    n = config.sizes[0]
    x0 = _initial_guess(config.seed, 0, n)
    rows: list[OmegaRow] = []
    for omega in _omega_grid(config.omega_range):
        params = SorParams(omega, tol, config.max_sweeps, config.ordering)
        try:
            report = _solve_one(n, params, kind, frac, x0)
            rows.append(
                OmegaRow(
                    omega=omega,
                    iterations=report.iterations,
                    final_residual=float(report.residual_history[-1]),
                    converged=report.converged,
                    is_minimizer=False,
                )
            )
        except (ArithmeticError, OverflowError):
            rows.append(OmegaRow(omega, 0, float("inf"), False, False))
    best = None
    for i, row in enumerate(rows):
        if row.converged and (best is None or row.iterations < rows[best].iterations):
            best = i
    if best is not None:
        rows[best].is_minimizer = True
    if config.out:
        write_omega_csv(rows, config.out)
    return rows
