"""HTTP facade over the solver package.

Handlers are plain functions from request models to response models; the
CLI calls them directly when no remote URL is given, so both transports
share one code path.
"""

from __future__ import annotations

import json
import time

import numpy as np
from fastapi import FastAPI, Request
from fastapi.encoders import jsonable_encoder
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from .. import __version__
from ..bench import (
    DEFAULT_TOL,
    RunConfig,
    parse_arithmetic,
    run_bench,
    run_omega_sweep,
)
from ..cyclemodel import ClockSpec, build_sor_schedule, cycles, model_time
from ..fixedpoint import FIXED_DEFAULT_TOL, solve_fixed
from ..poisson import manufactured_error, trig_problem
from ..splitting import SorParams
from ..stencil import solve_mesh
from . import schemas


def _resolve_tol(tol: float | None, arithmetic: str) -> float:
    if tol is not None:
        return tol
    kind, _ = parse_arithmetic(arithmetic)
    return FIXED_DEFAULT_TOL if kind == "fixed" else DEFAULT_TOL


def handle_solve(req: schemas.SolveRequest) -> schemas.SolveResponse:
    kind, frac = parse_arithmetic(req.arithmetic)
    tol = _resolve_tol(req.tol, req.arithmetic)
    problem = trig_problem(req.size)
    params = SorParams(req.omega, tol, req.max_sweeps, req.ordering)
    if req.seed is None:
        x0 = None
    else:
        rng = np.random.default_rng((req.seed, 0))
        x0 = rng.uniform(-1.0, 1.0, (req.size, req.size))
    t0 = time.perf_counter()
    try:
        if kind == "float":
            report = solve_mesh(problem, params, x0)
        else:
            report = solve_fixed(problem, params, frac_bits=frac, x0=x0)
        mesh = problem.mesh.with_interior(report.final)
        return schemas.SolveResponse(
            size=req.size,
            omega=req.omega,
            arithmetic=req.arithmetic,
            ordering=req.ordering,
            tol=tol,
            iterations=report.iterations,
            final_residual=float(report.residual_history[-1]),
            converged=report.converged,
            diverged=report.diverged,
            wall_time_s=report.wall_time,
            error_vs_exact=manufactured_error(mesh, problem.exact),
        )
    except (ArithmeticError, OverflowError):
        return schemas.SolveResponse(
            size=req.size,
            omega=req.omega,
            arithmetic=req.arithmetic,
            ordering=req.ordering,
            tol=tol,
            iterations=0,
            final_residual=float("inf"),
            converged=False,
            diverged=True,
            wall_time_s=time.perf_counter() - t0,
            error_vs_exact=float("inf"),
        )


def handle_bench(req: schemas.BenchRequest) -> schemas.BenchResponse:
    config = RunConfig(
        sizes=tuple(req.sizes),
        omega=req.omega,
        tol=req.tol,
        max_sweeps=req.max_sweeps,
        ordering=req.ordering,
        arithmetic=req.arithmetic,
        freq_hz=req.freq_hz,
        seed=req.seed,
        assigns_per_update=req.assigns_per_update,
    )
    rows = [schemas.BenchRow(**vars(r)) for r in run_bench(config)]
    return schemas.BenchResponse(rows=rows, all_converged=all(r.converged for r in rows))


def handle_omega_sweep(req: schemas.OmegaSweepRequest) -> schemas.OmegaSweepResponse:
    config = RunConfig(
        sizes=(req.size,),
        omega_range=(req.start, req.stop, req.step),
        tol=req.tol,
        max_sweeps=req.max_sweeps,
        ordering=req.ordering,
        arithmetic=req.arithmetic,
        seed=req.seed,
    )
    rows = [schemas.OmegaSweepRow(**vars(r)) for r in run_omega_sweep(config)]
    minimizer = next((r.omega for r in rows if r.is_minimizer), None)
    return schemas.OmegaSweepResponse(size=req.size, rows=rows, minimizer=minimizer)


def handle_cycles(req: schemas.CyclesRequest) -> schemas.CyclesResponse:
    clock = ClockSpec(req.freq_hz)
    seq = build_sor_schedule(req.size, "sequential", req.sweeps, req.assigns_per_update)
    rb = build_sor_schedule(req.size, "red_black", req.sweeps, req.assigns_per_update)
    cyc_seq = cycles(seq)
    cyc_rb = cycles(rb)
    return schemas.CyclesResponse(
        size=req.size,
        sweeps=req.sweeps,
        assigns_per_update=req.assigns_per_update,
        freq_hz=req.freq_hz,
        cycles_sequential=cyc_seq,
        cycles_red_black=cyc_rb,
        speedup=cyc_seq / cyc_rb if cyc_rb else None,
        time_sequential_s=model_time(seq, clock),
        time_red_black_s=model_time(rb, clock),
    )


class _LenientJSONResponse(JSONResponse):
    # Diverged runs carry inf residuals; stock JSONResponse refuses them.
    # Python's json module reads the Infinity/NaN literals back natively.
    def render(self, content) -> bytes:
        return json.dumps(
            content, ensure_ascii=False, allow_nan=True, separators=(",", ":")
        ).encode("utf-8")


app = FastAPI(
    title="sorkit",
    version=__version__,
    description="Successive over-relaxation solvers with a hardware cycle-cost model.",
    default_response_class=_LenientJSONResponse,
)


@app.exception_handler(RequestValidationError)
async def _validation_handler(request: Request, exc: RequestValidationError) -> JSONResponse:
    # Rejected values can themselves be nonfinite (omega=1e999); the stock
    # handler would crash re-encoding them into the error detail.
    return _LenientJSONResponse({"detail": jsonable_encoder(exc.errors())}, status_code=422)


@app.get("/health", response_model=schemas.HealthResponse)
def health() -> schemas.HealthResponse:
    return schemas.HealthResponse(status="ok", version=__version__)


@app.post("/solve", response_model=schemas.SolveResponse)
def solve_endpoint(req: schemas.SolveRequest) -> schemas.SolveResponse:
    return handle_solve(req)


@app.post("/bench", response_model=schemas.BenchResponse)
def bench_endpoint(req: schemas.BenchRequest) -> schemas.BenchResponse:
    return handle_bench(req)


@app.post("/omega-sweep", response_model=schemas.OmegaSweepResponse)
def omega_sweep_endpoint(req: schemas.OmegaSweepRequest) -> schemas.OmegaSweepResponse:
    return handle_omega_sweep(req)


@app.post("/cycles", response_model=schemas.CyclesResponse)
def cycles_endpoint(req: schemas.CyclesRequest) -> schemas.CyclesResponse:
    return handle_cycles(req)
