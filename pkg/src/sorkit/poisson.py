"""2D Poisson model problems on the unit square with Dirichlet boundaries.

The continuous problem is -laplace(u) = f on (0, 1)^2 with u = g on the
boundary.  Discretisation uses the standard 5-point stencil on a uniform
grid of ``n`` by ``n`` interior points with spacing ``h = 1 / (n + 1)``.

Conventions used throughout the package:

* interior grids are ``(n, n)`` arrays, ``grid[i, j]`` approximating
  ``u((i + 1) h, (j + 1) h)``;
* padded grids are ``(n + 2, n + 2)`` arrays whose outer ring carries the
  Dirichlet samples, ``padded[p, q]`` sitting at ``(p h, q h)``;
* flattened unknowns are row-major, component ``k = i * n + j``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

ScalarField = Callable[[float, float], float]

# Manufactured data whose relative stencil residual exceeds this is rejected
# at assembly.  The bound is loose on purpose: it must pass the truncation
# error of a smooth solution on the coarse check grid while still catching
# sign errors and mismatched forcing, both of which score O(1).
MANUFACTURED_TOL = 0.25

_CHECK_GRID = 8


def _sample(n: int, fn: ScalarField) -> np.ndarray:
    h = 1.0 / (n + 1)
    out = np.empty((n, n), dtype=np.float64)
    for i in range(n):
        for j in range(n):
            out[i, j] = fn((i + 1) * h, (j + 1) * h)
    return out


def _sample_ring(n: int, fn: ScalarField) -> np.ndarray:
    h = 1.0 / (n + 1)
    ring = np.zeros((n + 2, n + 2), dtype=np.float64)
    for p in range(n + 2):
        ring[p, 0] = fn(p * h, 0.0)
        ring[p, n + 1] = fn(p * h, 1.0)
        ring[0, p] = fn(0.0, p * h)
        ring[n + 1, p] = fn(1.0, p * h)
    return ring


@dataclass
class Mesh2D:
    """Square grid of interior unknowns inside a fixed Dirichlet ring.

    Parameters
    ----------
    n : int
        Number of interior points per direction, at least 1.
    interior : ndarray
        ``(n, n)`` float64 values at the interior points.
    boundary : ndarray
        ``(n + 2, n + 2)`` float64 array; only the outer ring is read.

    Notes
    -----
    The boundary ring never changes during a solve.  ``padded`` builds the
    working array the sweep kernels operate on.
    """

    n: int
    interior: np.ndarray
    boundary: np.ndarray

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"mesh needs at least one interior point, got n={self.n}")
        self.interior = np.ascontiguousarray(self.interior, dtype=np.float64)
        self.boundary = np.ascontiguousarray(self.boundary, dtype=np.float64)
        if self.interior.shape != (self.n, self.n):
            raise ValueError(f"interior shape {self.interior.shape} does not match n={self.n}")
        if self.boundary.shape != (self.n + 2, self.n + 2):
            raise ValueError(f"boundary shape {self.boundary.shape} does not match n={self.n}")

    @property
    def h(self) -> float:
        """Grid spacing, 1 / (n + 1)."""
        return 1.0 / (self.n + 1)

    def padded(self) -> np.ndarray:
        """Return a fresh padded array: Dirichlet ring around the interior."""
        pad = self.boundary.copy()
        pad[1:-1, 1:-1] = self.interior
        return pad

    def with_interior(self, values: np.ndarray) -> "Mesh2D":
        """New mesh sharing this boundary ring with replaced interior values."""
        arr = np.asarray(values, dtype=np.float64)
        if arr.size == self.n * self.n:
            arr = arr.reshape(self.n, self.n)
        return Mesh2D(self.n, arr.copy(), self.boundary)

    @classmethod
    def zeros(cls, n: int) -> "Mesh2D":
        return cls(n, np.zeros((n, n)), np.zeros((n + 2, n + 2)))


@dataclass
class PoissonProblem:
    """A Poisson instance: a mesh plus the data functions that define it.

    Parameters
    ----------
    mesh : Mesh2D
        Carries the geometry and the sampled Dirichlet ring.
    forcing : callable
        Right-hand side f(x, y) of -laplace(u) = f.
    dirichlet : callable
        Boundary data g(x, y).
    exact : callable, optional
        Known solution u(x, y) for manufactured problems.  When present,
        assembly cross-checks that (f, g, u) are mutually consistent.
    """

    mesh: Mesh2D
    forcing: ScalarField
    dirichlet: ScalarField
    exact: ScalarField | None = None

    def __post_init__(self) -> None:
        if not callable(self.forcing) or not callable(self.dirichlet):
            raise TypeError("forcing and dirichlet must be callables of (x, y)")
        if self.exact is not None and not callable(self.exact):
            raise TypeError("exact must be a callable of (x, y) or None")

    @classmethod
    def build(
        cls,
        n: int,
        forcing: ScalarField,
        dirichlet: ScalarField,
        exact: ScalarField | None = None,
    ) -> "PoissonProblem":
        """Construct a problem on a zero-initialised mesh with g on the ring."""
        mesh = Mesh2D(n, np.zeros((n, n)), _sample_ring(n, dirichlet))
        return cls(mesh, forcing, dirichlet, exact)

    def forcing_grid(self) -> np.ndarray:
        """Interior samples of the forcing term, shape ``(n, n)``."""
        return _sample(self.mesh.n, self.forcing)

    def exact_grid(self) -> np.ndarray:
        """Interior samples of the exact solution; requires ``exact``."""
        if self.exact is None:
            raise ValueError("problem has no exact solution attached")
        return _sample(self.mesh.n, self.exact)


@dataclass
class CsrMatrix:
    """Minimal row-compressed sparse matrix (square, float64).

    ``indices`` within each row are strictly increasing, so the matvec
    accumulation order is the ascending-column order relied on elsewhere.
    """

    dim: int
    indptr: np.ndarray
    indices: np.ndarray
    data: np.ndarray

    def __post_init__(self) -> None:
        self.indptr = np.ascontiguousarray(self.indptr, dtype=np.int64)
        self.indices = np.ascontiguousarray(self.indices, dtype=np.int64)
        self.data = np.ascontiguousarray(self.data, dtype=np.float64)
        if self.indptr.shape != (self.dim + 1,):
            raise ValueError("indptr length must be dim + 1")
        if self.indptr[0] != 0 or self.indptr[-1] != self.indices.shape[0]:
            raise ValueError("indptr does not span the index array")
        if np.any(np.diff(self.indptr) < 0):
            raise ValueError("indptr must be nondecreasing")
        if self.indices.shape != self.data.shape:
            raise ValueError("indices and data lengths differ")
        for i in range(self.dim):
            row = self.indices[self.indptr[i] : self.indptr[i + 1]]
            if row.size and (row[0] < 0 or row[-1] >= self.dim):
                raise ValueError(f"column index out of range in row {i}")
            if np.any(np.diff(row) <= 0):
                raise ValueError(f"row {i} columns are not strictly increasing")

    @property
    def nnz(self) -> int:
        return int(self.indices.shape[0])

    @classmethod
    def from_dense(cls, a: np.ndarray) -> "CsrMatrix":
        """Compress a dense matrix, dropping exact zeros."""
        a = np.asarray(a, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("matrix must be square")
        dim = a.shape[0]
        mask = a != 0.0
        indptr = np.zeros(dim + 1, dtype=np.int64)
        np.cumsum(mask.sum(axis=1), out=indptr[1:])
        rows, cols = np.nonzero(mask)
        return cls(dim, indptr, cols.astype(np.int64), a[rows, cols])

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.dim, self.dim), dtype=np.float64)
        for i in range(self.dim):
            sl = slice(self.indptr[i], self.indptr[i + 1])
            out[i, self.indices[sl]] = self.data[sl]
        return out

    def matvec(self, x: np.ndarray) -> np.ndarray:
        from . import _kernels

        x = np.ascontiguousarray(x, dtype=np.float64)
        if x.shape != (self.dim,):
            raise ValueError(f"vector length {x.shape} does not match dim {self.dim}")
        out = np.empty(self.dim, dtype=np.float64)
        _kernels.csr_matvec(self.indptr, self.indices, self.data, x, out)
        return out

    def diagonal(self) -> np.ndarray:
        """Diagonal entries; absent entries read as zero."""
        out = np.zeros(self.dim, dtype=np.float64)
        for i in range(self.dim):
            sl = slice(self.indptr[i], self.indptr[i + 1])
            row = self.indices[sl]
            hit = np.searchsorted(row, i)
            if hit < row.size and row[hit] == i:
                out[i] = self.data[self.indptr[i] + hit]
        return out


@dataclass
class SparseSystem:
    """A linear system A x = b with A stored row-compressed."""

    dim: int
    matrix: CsrMatrix
    rhs: np.ndarray

    def __post_init__(self) -> None:
        self.rhs = np.ascontiguousarray(self.rhs, dtype=np.float64)
        if self.matrix.dim != self.dim:
            raise ValueError("matrix dimension does not match system dim")
        if self.rhs.shape != (self.dim,):
            raise ValueError("rhs length does not match system dim")

    @classmethod
    def from_dense(cls, a: np.ndarray, b: np.ndarray) -> "SparseSystem":
        m = CsrMatrix.from_dense(a)
        return cls(m.dim, m, np.asarray(b, dtype=np.float64))

    def validate(self) -> None:
        """Raise if any diagonal entry is missing or zero."""
        d = self.matrix.diagonal()
        bad = np.nonzero(d == 0.0)[0]
        if bad.size:
            raise ValueError(f"zero or missing diagonal entry in row {int(bad[0])}")


def fold_rhs(problem: PoissonProblem) -> np.ndarray:
    """Interior right-hand side with Dirichlet data folded in.

    Returns the ``(n, n)`` grid ``b = f + (boundary neighbours) / h^2``.
    Both the matrix assembly and the stencil solver obtain their right-hand
    side from this one function, so the two paths see identical floats.
    """
    mesh = problem.mesh
    invh2 = 1.0 / (mesh.h * mesh.h)
    b = problem.forcing_grid()
    ring = mesh.boundary
    b[0, :] += invh2 * ring[0, 1:-1]
    b[-1, :] += invh2 * ring[-1, 1:-1]
    b[:, 0] += invh2 * ring[1:-1, 0]
    b[:, -1] += invh2 * ring[1:-1, -1]
    return b


def manufactured_residual(problem: PoissonProblem, sample_n: int = _CHECK_GRID) -> float:
    """Relative stencil residual of the sampled exact solution.

    Evaluated on a coarse remesh (at most ``sample_n`` points per side) so
    the check stays cheap at any problem size.  For consistent smooth data
    this is pure truncation error; for mismatched data it is O(1).
    """
    if problem.exact is None:
        raise ValueError("manufactured check needs an exact solution")
    nc = min(problem.mesh.n, sample_n)
    coarse = PoissonProblem.build(nc, problem.forcing, problem.dirichlet, problem.exact)
    pad = coarse.mesh.boundary.copy()
    pad[1:-1, 1:-1] = coarse.exact_grid()
    invh2 = 1.0 / (coarse.mesh.h * coarse.mesh.h)
    # Discrete -laplace with the Dirichlet ring in place, compared against
    # the raw forcing; the folded rhs only sets the relative scale.
    stencil = 4.0 * pad[1:-1, 1:-1] - pad[:-2, 1:-1] - pad[2:, 1:-1] - pad[1:-1, :-2] - pad[1:-1, 2:]
    r = coarse.forcing_grid() - invh2 * stencil
    denom = max(float(np.max(np.abs(fold_rhs(coarse)))), float(np.finfo(np.float64).tiny))
    with np.errstate(over="ignore"):
        # inf is a legitimate verdict when the data is wildly inconsistent.
        return float(np.max(np.abs(r)) / denom)


def assemble_poisson(problem: PoissonProblem) -> SparseSystem:
    """Assemble the 5-point system for ``-laplace(u) = f`` on the problem mesh.

    Diagonal entries are ``4 / h^2``, off-diagonals ``-1 / h^2``, and the
    Dirichlet ring is folded into the right-hand side.  Rows are emitted in
    ascending column order.  When the problem carries an exact solution the
    data is cross-checked first and gross inconsistencies are rejected.

    Raises
    ------
    ValueError
        If the mesh is degenerate or manufactured data is inconsistent.
    """
    n = problem.mesh.n
    if n < 1:
        raise ValueError("cannot assemble a system without interior points")
    if problem.exact is not None:
        resid = manufactured_residual(problem)
        if not resid <= MANUFACTURED_TOL:
            raise ValueError(
                f"manufactured data inconsistent: relative stencil residual {resid:.3g} "
                f"exceeds {MANUFACTURED_TOL}"
            )
    h = problem.mesh.h
    invh2 = 1.0 / (h * h)
    diag = 4.0 * invh2
    off = -invh2
    dim = n * n

    indptr = np.zeros(dim + 1, dtype=np.int64)
    indices = np.empty(5 * dim, dtype=np.int64)
    data = np.empty(5 * dim, dtype=np.float64)
    pos = 0
    for i in range(n):
        for j in range(n):
            k = i * n + j
            if i > 0:
                indices[pos] = k - n
                data[pos] = off
                pos += 1
            if j > 0:
                indices[pos] = k - 1
                data[pos] = off
                pos += 1
            indices[pos] = k
            data[pos] = diag
            pos += 1
            if j < n - 1:
                indices[pos] = k + 1
                data[pos] = off
                pos += 1
            if i < n - 1:
                indices[pos] = k + n
                data[pos] = off
                pos += 1
            indptr[k + 1] = pos

    matrix = CsrMatrix(dim, indptr, indices[:pos].copy(), data[:pos].copy())
    return SparseSystem(dim, matrix, fold_rhs(problem).ravel())


def manufactured_error(mesh: Mesh2D, exact: ScalarField) -> float:
    """Max-norm difference between the mesh interior and exact samples."""
    return float(np.max(np.abs(mesh.interior - _sample(mesh.n, exact))))


def trig_problem(n: int) -> PoissonProblem:
    """Smooth manufactured problem u = sin(pi x) sin(pi y), zero boundary.

    The forcing is ``2 pi^2 sin(pi x) sin(pi y)``.  This is the default
    workload of the benchmark harness.
    """
    pi = np.pi

    def exact(x: float, y: float) -> float:
        return np.sin(pi * x) * np.sin(pi * y)

    def forcing(x: float, y: float) -> float:
        return 2.0 * pi * pi * np.sin(pi * x) * np.sin(pi * y)

    return PoissonProblem.build(n, forcing, lambda x, y: 0.0, exact)


def linear_problem(n: int) -> PoissonProblem:
    """Harmonic problem u = x + y: zero forcing, linear boundary data.

    Linear functions are reproduced exactly by the 5-point stencil, which
    makes this the standard exactness check.
    """

    def exact(x: float, y: float) -> float:
        return x + y

    return PoissonProblem.build(n, lambda x, y: 0.0, exact, exact)
