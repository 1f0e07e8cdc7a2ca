"""Matrix-form relaxation: splitting, SOR/Jacobi steps, and spectra.

The system matrix is split as A = D + L + U into its diagonal, strictly
lower and strictly upper parts.  One SOR step with relaxation factor omega
solves (D + omega L) by forward substitution:

    x_i <- (1 - omega) x_i + (omega / a_ii) (b_i - sum_{j<i} a_ij x_j^new
                                                  - sum_{j>i} a_ij x_j^old)

No inverse is ever formed; the triangular solve is implicit in the row
ordering.  omega = 1 reduces the step to Gauss-Seidel and the update with
both sums taken at the old iterate is Jacobi.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from . import _kernels
from .poisson import CsrMatrix, SparseSystem

ORDERINGS = ("lex", "rb")

_TINY = float(np.finfo(np.float64).tiny)


class NonFiniteIterateError(ArithmeticError):
    """An update produced a nonfinite value; carries the component position."""

    def __init__(self, position, message: str):
        super().__init__(message)
        self.position = position


@dataclass
class SorParams:
    """Iteration controls shared by the matrix and mesh solvers.

    ``max_sweeps=None`` resolves to ``100 * dim`` when the solve starts.
    ``ordering`` selects the sweep order for mesh solves ("lex" or "rb");
    matrix solves always relax rows in storage order.
    """

    omega: float
    tol: float = 1e-8
    max_sweeps: int | None = None
    ordering: str = "lex"

    def __post_init__(self) -> None:
        self.omega = float(self.omega)
        if not math.isfinite(self.omega):
            raise ValueError("omega must be finite")
        if not self.tol > 0.0:
            raise ValueError("tol must be positive")
        if self.max_sweeps is not None and self.max_sweeps < 1:
            raise ValueError("max_sweeps must be at least 1")
        if self.ordering not in ORDERINGS:
            raise ValueError(f"ordering must be one of {ORDERINGS}, got {self.ordering!r}")

    def resolved_max_sweeps(self, dim: int) -> int:
        return 100 * dim if self.max_sweeps is None else self.max_sweeps


@dataclass
class SolveReport:
    """Outcome of an iterative solve.

    ``residual_history[0]`` is the relative residual of the initial guess;
    one entry follows per sweep, so ``iterations == len(history) - 1``.
    ``final`` is the last iterate (flattened row-major for mesh solves).
    A run is ``diverged`` when an iterate went nonfinite; ``converged`` and
    ``diverged`` are never both true.
    """

    iterations: int
    residual_history: np.ndarray
    converged: bool
    wall_time: float
    final: np.ndarray
    diverged: bool = False


@dataclass
class SplitParts:
    """The (D, L, U) pieces of a square CSR matrix."""

    diag: np.ndarray
    lower: CsrMatrix
    upper: CsrMatrix

    @property
    def dim(self) -> int:
        return int(self.diag.shape[0])

    def reassemble(self) -> CsrMatrix:
        """Merge the parts back into one CSR matrix.

        Row contents come back in ascending column order (lower, diagonal,
        upper), so splitting an assembled matrix and reassembling it
        reproduces the original arrays exactly.
        """
        dim = self.dim
        nnz = self.lower.nnz + self.upper.nnz + dim
        indptr = np.zeros(dim + 1, dtype=np.int64)
        indices = np.empty(nnz, dtype=np.int64)
        data = np.empty(nnz, dtype=np.float64)
        pos = 0
        for i in range(dim):
            lsl = slice(self.lower.indptr[i], self.lower.indptr[i + 1])
            usl = slice(self.upper.indptr[i], self.upper.indptr[i + 1])
            ln = self.lower.indptr[i + 1] - self.lower.indptr[i]
            un = self.upper.indptr[i + 1] - self.upper.indptr[i]
            indices[pos : pos + ln] = self.lower.indices[lsl]
            data[pos : pos + ln] = self.lower.data[lsl]
            pos += ln
            indices[pos] = i
            data[pos] = self.diag[i]
            pos += 1
            indices[pos : pos + un] = self.upper.indices[usl]
            data[pos : pos + un] = self.upper.data[usl]
            pos += un
            indptr[i + 1] = pos
        return CsrMatrix(dim, indptr, indices, data)


def split(system: SparseSystem) -> SplitParts:
    """Split the system matrix into diagonal, lower and upper parts.

    Raises
    ------
    ValueError
        If any diagonal entry is missing or zero; the message names the
        first offending row.
    """
    m = system.matrix
    dim = m.dim
    diag = np.zeros(dim, dtype=np.float64)
    l_ptr = np.zeros(dim + 1, dtype=np.int64)
    u_ptr = np.zeros(dim + 1, dtype=np.int64)
    l_idx: list[int] = []
    l_val: list[float] = []
    u_idx: list[int] = []
    u_val: list[float] = []
    for i in range(dim):
        found = False
        for p in range(m.indptr[i], m.indptr[i + 1]):
            j = int(m.indices[p])
            v = float(m.data[p])
            if j < i:
                l_idx.append(j)
                l_val.append(v)
            elif j > i:
                u_idx.append(j)
                u_val.append(v)
            else:
                diag[i] = v
                found = True
        if not found or diag[i] == 0.0:
            raise ValueError(f"zero or missing diagonal entry in row {i}")
        l_ptr[i + 1] = len(l_idx)
        u_ptr[i + 1] = len(u_idx)
    lower = CsrMatrix(dim, l_ptr, np.array(l_idx, dtype=np.int64), np.array(l_val, dtype=np.float64))
    upper = CsrMatrix(dim, u_ptr, np.array(u_idx, dtype=np.int64), np.array(u_val, dtype=np.float64))
    return SplitParts(diag, lower, upper)


def _check_step_args(parts: SplitParts, x: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    x = np.ascontiguousarray(x, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    if x.shape != (parts.dim,) or b.shape != (parts.dim,):
        raise ValueError(f"vector shapes {x.shape}, {b.shape} do not match dim {parts.dim}")
    return x, b


def _raise_nonfinite(out: np.ndarray) -> None:
    bad = np.nonzero(~np.isfinite(out))[0]
    if bad.size:
        k = int(bad[0])
        raise NonFiniteIterateError(k, f"nonfinite update in component {k}")


def sor_step(parts: SplitParts, x: np.ndarray, b: np.ndarray, omega: float) -> np.ndarray:
    """One forward SOR sweep; returns the new iterate."""
    if not math.isfinite(omega):
        raise ValueError("omega must be finite")
    x, b = _check_step_args(parts, x, b)
    out = np.empty_like(x)
    _kernels.sor_step_parts(
        parts.lower.indptr, parts.lower.indices, parts.lower.data,
        parts.upper.indptr, parts.upper.indices, parts.upper.data,
        parts.diag, x, b, float(omega), out,
    )
    _raise_nonfinite(out)
    return out


def gauss_seidel_step(parts: SplitParts, x: np.ndarray, b: np.ndarray) -> np.ndarray:
    """One Gauss-Seidel sweep, identical to ``sor_step`` at omega = 1."""
    return sor_step(parts, x, b, 1.0)


def jacobi_step(parts: SplitParts, x: np.ndarray, b: np.ndarray) -> np.ndarray:
    """One Jacobi sweep: every row reads only the old iterate."""
    x, b = _check_step_args(parts, x, b)
    out = np.empty_like(x)
    _kernels.jacobi_step_parts(
        parts.lower.indptr, parts.lower.indices, parts.lower.data,
        parts.upper.indptr, parts.upper.indices, parts.upper.data,
        parts.diag, x, b, out,
    )
    _raise_nonfinite(out)
    return out


def relative_residual(system: SparseSystem, x: np.ndarray) -> float:
    """Max-norm of b - A x over max(max-norm of b, smallest positive float)."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.shape != (system.dim,):
        raise ValueError(f"vector length {x.shape} does not match dim {system.dim}")
    m = system.matrix
    num = _kernels.residual_inf_csr(m.indptr, m.indices, m.data, system.rhs, x)
    den = max(float(np.max(np.abs(system.rhs))) if system.dim else _TINY, _TINY)
    return float(num) / den


def solve(system: SparseSystem, params: SorParams, x0: np.ndarray | None = None) -> SolveReport:
    """Iterate SOR until the relative residual drops below ``params.tol``.

    The initial guess defaults to zero.  Stops early with ``diverged=True``
    when an iterate goes nonfinite; returns ``converged=False`` with the
    full history when the sweep cap is reached first.  ``params.ordering``
    is ignored here: matrix sweeps always follow row order.
    """
    t0 = time.perf_counter()
    parts = split(system)
    dim = system.dim
    if x0 is None:
        x = np.zeros(dim, dtype=np.float64)
    else:
        x = np.array(x0, dtype=np.float64).reshape(dim).copy()
    cap = params.resolved_max_sweeps(dim)
    omega = params.omega
    m = system.matrix

    history = [relative_residual(system, x)]
    converged = history[0] <= params.tol
    diverged = not math.isfinite(history[0])
    sweeps = 0
    out = np.empty_like(x)
    while not converged and not diverged and sweeps < cap:
        _kernels.sor_step_parts(
            parts.lower.indptr, parts.lower.indices, parts.lower.data,
            parts.upper.indptr, parts.upper.indices, parts.upper.data,
            parts.diag, x, system.rhs, omega, out,
        )
        x, out = out, x
        sweeps += 1
        r = float(_kernels.residual_inf_csr(m.indptr, m.indices, m.data, system.rhs, x))
        r /= max(float(np.max(np.abs(system.rhs))), _TINY)
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
        final=x.copy(),
        diverged=diverged,
    )


_DENSE_DIM_LIMIT = 64


def _dense_parts(parts: SplitParts, omega: float) -> tuple[np.ndarray, np.ndarray]:
    if parts.dim > _DENSE_DIM_LIMIT:
        raise ValueError(f"dense form limited to dim <= {_DENSE_DIM_LIMIT}, got {parts.dim}")
    d = np.diag(parts.diag)
    lhs = d + omega * parts.lower.to_dense()
    return d, lhs


def iteration_matrix(parts: SplitParts, omega: float) -> np.ndarray:
    """Dense SOR iteration matrix M with x_new = M x_old + c.

    M = (D + omega L)^{-1} ((1 - omega) D - omega U), formed by a
    triangular solve rather than an explicit inverse.  Limited to
    dim <= 64; it exists for spectral studies, not production solves.
    """
    d, lhs = _dense_parts(parts, omega)
    rhs = (1.0 - omega) * d - omega * parts.upper.to_dense()
    return solve_triangular(lhs, rhs, lower=True)


def sor_offset(parts: SplitParts, b: np.ndarray, omega: float) -> np.ndarray:
    """Affine offset c = omega (D + omega L)^{-1} b of the SOR update map."""
    _, lhs = _dense_parts(parts, omega)
    b = np.ascontiguousarray(b, dtype=np.float64)
    return omega * solve_triangular(lhs, b, lower=True)


def spectral_radius(m: np.ndarray, tol: float = 1e-8) -> float:
    """Spectral radius of a small dense matrix by normalised squaring.

    Repeatedly squares the matrix and accumulates the Frobenius norm in log
    space: ||M^(2^s)||^(2^-s) converges to the spectral radius from above.
    Unlike plain power iteration this needs no dominant real eigenvalue, so
    complex conjugate pairs and defective matrices are handled the same way.
    Accuracy is far inside ``tol`` for dim <= 64.
    """
    a = np.ascontiguousarray(np.asarray(m, dtype=np.float64))
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    dim = a.shape[0]
    if dim < 1 or dim > _DENSE_DIM_LIMIT:
        raise ValueError(f"dim must be in 1..{_DENSE_DIM_LIMIT}, got {dim}")
    if not np.isfinite(a).all():
        raise ValueError("matrix entries must be finite")
    if not tol > 0.0:
        raise ValueError("tol must be positive")
    norm = float(np.linalg.norm(a))
    if norm == 0.0:
        return 0.0
    log_rho = math.log2(norm)
    cur = a / norm
    for step in range(1, 61):
        cur = cur @ cur
        norm = float(np.linalg.norm(cur))
        if norm == 0.0:
            return 0.0
        delta = math.log2(norm) / (1 << step)
        log_rho += delta
        cur /= norm
        if abs(delta) < 1e-4 * tol:
            break
    return 2.0 ** log_rho
