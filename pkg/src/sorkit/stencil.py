"""Matrix-free SOR sweeps over a Poisson mesh.

The 5-point update for interior cell (i, j) is

    u_ij <- (1 - omega) u_ij + (omega / 4) (u_W + u_E + u_N + u_S + h^2 f_ij)

where already-visited neighbours contribute their updated values.  Two
orderings are provided: lexicographic (row-major) and red-black, which
relaxes all cells of one colour before the other.  Within one colour the
5-point neighbourhood contains no same-colour cell, so any visiting order
produces identical results.
"""

from __future__ import annotations

import math
import time

import numpy as np

from . import _kernels
from .poisson import Mesh2D, PoissonProblem, fold_rhs
from .splitting import NonFiniteIterateError, SolveReport, SorParams

_TINY = float(np.finfo(np.float64).tiny)


def _check_mesh(mesh: Mesh2D, problem: PoissonProblem) -> None:
    if mesh.n != problem.mesh.n:
        raise ValueError(f"mesh size {mesh.n} does not match problem size {problem.mesh.n}")


def _raise_nonfinite_cell(pad: np.ndarray) -> None:
    inner = pad[1:-1, 1:-1]
    bad = np.argwhere(~np.isfinite(inner))
    if bad.size:
        i, j = (int(v) for v in bad[0])
        raise NonFiniteIterateError((i, j), f"nonfinite value at interior cell ({i}, {j})")


def sweep_lexicographic(mesh: Mesh2D, problem: PoissonProblem, omega: float) -> Mesh2D:
    """One row-major SOR sweep; returns a new mesh, boundary untouched."""
    _check_mesh(mesh, problem)
    if not math.isfinite(omega):
        raise ValueError("omega must be finite")
    h = mesh.h
    hf = (h * h) * problem.forcing_grid()
    pad = mesh.padded()
    _kernels.sweep_lex(pad, hf, float(omega))
    _raise_nonfinite_cell(pad)
    return mesh.with_interior(pad[1:-1, 1:-1])


def sweep_red_black(mesh: Mesh2D, problem: PoissonProblem, omega: float) -> Mesh2D:
    """One red-black SOR sweep: all red cells first, then all black cells.

    Red cells are those with even interior index sum (i + j); their
    neighbours are all black, so each half-sweep is order independent.
    """
    _check_mesh(mesh, problem)
    if not math.isfinite(omega):
        raise ValueError("omega must be finite")
    h = mesh.h
    hf = (h * h) * problem.forcing_grid()
    pad = mesh.padded()
    _kernels.sweep_color(pad, hf, float(omega), 0)
    _kernels.sweep_color(pad, hf, float(omega), 1)
    _raise_nonfinite_cell(pad)
    return mesh.with_interior(pad[1:-1, 1:-1])


def solve_mesh(problem: PoissonProblem, params: SorParams, x0: np.ndarray | None = None) -> SolveReport:
    """Relax the mesh until the relative stencil residual meets ``params.tol``.

    The residual is evaluated directly from the 5-point stencil; no matrix
    is ever assembled.  The right-hand side, the residual accumulation
    order and the stopping rule all match the matrix-form ``solve``, so a
    lexicographic mesh solve reports the same iteration count.  ``final``
    holds the interior flattened row-major.
    """
    t0 = time.perf_counter()
    n = problem.mesh.n
    mesh = problem.mesh
    if x0 is None:
        pad = mesh.boundary.copy()
        pad[1:-1, 1:-1] = 0.0
    else:
        pad = mesh.boundary.copy()
        pad[1:-1, 1:-1] = np.asarray(x0, dtype=np.float64).reshape(n, n)
    h = mesh.h
    hf = (h * h) * problem.forcing_grid()
    b = fold_rhs(problem)
    bnorm = max(float(np.max(np.abs(b))), _TINY)
    invh2 = 1.0 / (h * h)
    omega = params.omega
    cap = params.resolved_max_sweeps(n * n)
    if params.ordering == "lex":
        passes = ((_kernels.sweep_lex, None),)
    else:
        passes = ((_kernels.sweep_color, 0), (_kernels.sweep_color, 1))

    history = [float(_kernels.mesh_residual_inf(pad, b, invh2)) / bnorm]
    converged = history[0] <= params.tol
    diverged = not math.isfinite(history[0])
    sweeps = 0
    while not converged and not diverged and sweeps < cap:
        for kernel, parity in passes:
            if parity is None:
                kernel(pad, hf, omega)
            else:
                kernel(pad, hf, omega, parity)
        sweeps += 1
        r = float(_kernels.mesh_residual_inf(pad, b, invh2)) / bnorm
        history.append(r)
        if not math.isfinite(r):
            diverged = True
        elif r <= params.tol:
            converged = True
    return SolveReport(
        iterations=sweeps,
        residual_history=np.array(history, dtype=np.float64),
        converged=converged,
        wall_time=time.perf_counter() - t0,
        final=pad[1:-1, 1:-1].ravel().copy(),
        diverged=diverged,
    )
