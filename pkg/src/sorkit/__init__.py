"""Successive over-relaxation solvers for 2D Poisson problems.

Matrix-form and matrix-free (stencil) SOR with lexicographic and red-black
orderings, a Q-format fixed-point arithmetic path, a clock-cycle cost model
for hardware-style schedules, and a benchmark harness.  An HTTP service
lives in ``sorkit.service``; the ``sorkit`` command drives everything.
"""

__version__ = "0.1.0"

from .cyclemodel import (
    Assign,
    ClockSpec,
    Loop,
    Par,
    Seq,
    build_sor_schedule,
    cycles,
    model_time,
    parse_text,
    to_text,
)
from .fixedpoint import (
    QFixed,
    QMesh2D,
    FixedPointOverflowError,
    decode,
    decode_mesh,
    encode,
    encode_mesh,
    q_add,
    q_div,
    q_mul,
    q_sub,
    solve_fixed,
    sweep_fixed,
)
from .poisson import (
    CsrMatrix,
    Mesh2D,
    PoissonProblem,
    SparseSystem,
    assemble_poisson,
    fold_rhs,
    linear_problem,
    manufactured_error,
    manufactured_residual,
    trig_problem,
)
from .splitting import (
    NonFiniteIterateError,
    SolveReport,
    SorParams,
    SplitParts,
    gauss_seidel_step,
    iteration_matrix,
    jacobi_step,
    relative_residual,
    solve,
    sor_offset,
    sor_step,
    spectral_radius,
    split,
)
from .stencil import solve_mesh, sweep_lexicographic, sweep_red_black
from .bench import (
    OmegaRow,
    ReportRow,
    RunConfig,
    format_csv,
    format_omega_csv,
    run_bench,
    run_omega_sweep,
    write_csv,
    write_omega_csv,
)

__all__ = [
    "__version__",
    "Assign", "ClockSpec", "Loop", "Par", "Seq",
    "build_sor_schedule", "cycles", "model_time", "parse_text", "to_text",
    "QFixed", "QMesh2D", "FixedPointOverflowError",
    "decode", "decode_mesh", "encode", "encode_mesh",
    "q_add", "q_div", "q_mul", "q_sub", "solve_fixed", "sweep_fixed",
    "CsrMatrix", "Mesh2D", "PoissonProblem", "SparseSystem",
    "assemble_poisson", "fold_rhs", "linear_problem",
    "manufactured_error", "manufactured_residual", "trig_problem",
    "NonFiniteIterateError", "SolveReport", "SorParams", "SplitParts",
    "gauss_seidel_step", "iteration_matrix", "jacobi_step",
    "relative_residual", "solve", "sor_offset", "sor_step",
    "spectral_radius", "split",
    "solve_mesh", "sweep_lexicographic", "sweep_red_black",
    "OmegaRow", "ReportRow", "RunConfig",
    "format_csv", "format_omega_csv",
    "run_bench", "run_omega_sweep", "write_csv", "write_omega_csv",
]
