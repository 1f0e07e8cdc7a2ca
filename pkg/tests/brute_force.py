"""Slow reference implementations the tests compare the package against.

Everything here is written for clarity, not speed: plain Python loops,
exactly-rounded sums via math.fsum, rational arithmetic via Fraction.
None of it imports the package's kernels, so agreement between the two
is evidence rather than tautology.  The one exception is
``shuffled_color_sweep``, which deliberately reuses the per-cell update
expression of the production kernel: it exists to prove order
independence within a colour class, so the arithmetic must be identical
and only the visiting order may differ.
"""

import math
from fractions import Fraction

import numpy as np

from sorkit.cyclemodel import Assign, Loop, Par, Seq


def dense_sor_step(a, x, b, omega):
    """Componentwise SOR update straight from the defining recurrence."""
    a = np.asarray(a, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    dim = len(b)
    out = x.copy()
    for i in range(dim):
        behind = math.fsum(a[i, j] * out[j] for j in range(i) if a[i, j] != 0.0)
        ahead = math.fsum(a[i, j] * x[j] for j in range(i + 1, dim) if a[i, j] != 0.0)
        out[i] = (1.0 - omega) * x[i] + omega * (b[i] - behind - ahead) / a[i, i]
    return out


def dense_jacobi_step(a, x, b):
    a = np.asarray(a, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    dim = len(b)
    out = np.empty(dim)
    for i in range(dim):
        acc = math.fsum(a[i, j] * x[j] for j in range(dim) if j != i and a[i, j] != 0.0)
        out[i] = (b[i] - acc) / a[i, i]
    return out


def dense_assemble(n, forcing, dirichlet):
    """Dense 5-point system built cell by cell, boundary folded into b.

    Returns (a, b) with the same row-major unknown numbering the package
    uses: k = i * n + j for interior cell (i, j).
    """
    h = 1.0 / (n + 1)
    invh2 = 1.0 / (h * h)
    dim = n * n
    a = np.zeros((dim, dim))
    b = np.empty(dim)
    for i in range(n):
        for j in range(n):
            k = i * n + j
            a[k, k] = 4.0 * invh2
            terms = [forcing((i + 1) * h, (j + 1) * h)]
            if i > 0:
                a[k, k - n] = -invh2
            else:
                terms.append(invh2 * dirichlet(0.0, (j + 1) * h))
            if i < n - 1:
                a[k, k + n] = -invh2
            else:
                terms.append(invh2 * dirichlet(1.0, (j + 1) * h))
            if j > 0:
                a[k, k - 1] = -invh2
            else:
                terms.append(invh2 * dirichlet((i + 1) * h, 0.0))
            if j < n - 1:
                a[k, k + 1] = -invh2
            else:
                terms.append(invh2 * dirichlet((i + 1) * h, 1.0))
            b[k] = math.fsum(terms)
    return a, b


def random_spd_system(rng, max_dim=32):
    """A strictly diagonally dominant SPD matrix and right-hand side."""
    dim = int(rng.integers(2, max_dim + 1))
    m = rng.uniform(-1.0, 1.0, (dim, dim))
    a = m @ m.T + dim * np.eye(dim)
    b = rng.uniform(-1.0, 1.0, dim)
    return a, b


def integer_spd_system(rng, max_dim=32):
    """Integer-valued dominant system whose arithmetic is exact in floats.

    With integer entries, an integer solution vector and b = A x*, every
    product and partial sum in an SOR step is an exact float, so x* is a
    fixed point of the update up to the final (1 - omega) recombination.
    """
    dim = int(rng.integers(2, max_dim + 1))
    a = rng.integers(-4, 5, (dim, dim)).astype(np.float64)
    a = a + a.T
    np.fill_diagonal(a, 16.0 * dim)
    xstar = rng.integers(1, 9, dim).astype(np.float64)
    return a, xstar, a @ xstar


# ------------------------------------------------------------ cycle model


def _ticks(stmt):
    # One yield per clock cycle the statement occupies.
    if isinstance(stmt, Assign):
        yield None
    elif isinstance(stmt, Seq):
        for child in stmt.children:
            yield from _ticks(child)
    elif isinstance(stmt, Par):
        branches = [_ticks(c) for c in stmt.children]
        while True:
            alive = []
            for br in branches:
                try:
                    next(br)
                except StopIteration:
                    continue
                alive.append(br)
            if not alive:
                return
            yield None
            branches = alive
    elif isinstance(stmt, Loop):
        for _ in range(stmt.trips):
            yield from _ticks(stmt.body)
    else:
        raise TypeError(f"not a statement: {stmt!r}")


def simulate_cycles(stmt):
    """Cycle-by-cycle lockstep execution; counts ticks instead of folding."""
    return sum(1 for _ in _ticks(stmt))


def random_stmt(rng, depth=6):
    """Random statement tree with fanout and trip counts in 0..3."""
    if depth <= 0:
        return Assign()
    kind = int(rng.integers(0, 4))
    if kind == 0:
        return Assign()
    if kind == 3:
        return Loop(int(rng.integers(0, 4)), random_stmt(rng, depth - 1))
    children = tuple(random_stmt(rng, depth - 1) for _ in range(int(rng.integers(0, 4))))
    return Seq(children) if kind == 1 else Par(children)


# ------------------------------------------------------------ fixed point


def rne_round(num, den):
    """Round the exact rational num/den to the nearest integer, ties to even."""
    v = Fraction(num, den)
    floor = v.numerator // v.denominator
    frac = v - floor
    if frac > Fraction(1, 2):
        return floor + 1
    if frac < Fraction(1, 2):
        return floor
    return floor if floor % 2 == 0 else floor + 1


def reference_fixed_sweep(raw, hf_raw, omega_raw, frac_bits):
    """Big-integer mirror of one lexicographic fixed-point sweep.

    Per cell: s is the exact neighbour-plus-forcing sum, omega * s is
    rounded once with the division by four folded into the shift, and
    (2**f - omega_raw) * u is rounded at the plain shift.  Python ints
    never overflow, so this also bounds what the int64 kernel must match.
    """
    n = hf_raw.shape[0]
    work = [[int(v) for v in row] for row in raw]
    one_minus = (1 << frac_bits) - omega_raw
    for p in range(1, n + 1):
        for q in range(1, n + 1):
            s = work[p][q - 1] + work[p][q + 1] + work[p - 1][q] + work[p + 1][q]
            s += int(hf_raw[p - 1, q - 1])
            t = rne_round(omega_raw * s, 1 << (frac_bits + 2))
            v = rne_round(one_minus * work[p][q], 1 << frac_bits)
            work[p][q] = t + v
    return np.array(work, dtype=np.int64)


# ------------------------------------------------------------ stencil


def shuffled_color_sweep(mesh, problem, omega, rng):
    """Red-black sweep visiting each colour class in a random order.

    Per-cell arithmetic is kept identical to the production kernel (see
    module docstring); only the traversal order within a colour changes.
    """
    n = mesh.n
    h = mesh.h
    hf = (h * h) * problem.forcing_grid()
    u = mesh.padded()
    w4 = omega / 4.0
    omw = 1.0 - omega
    for parity in (0, 1):
        cells = [(i, j) for i in range(n) for j in range(n) if (i + j) % 2 == parity]
        order = rng.permutation(len(cells))
        for pos in order:
            i, j = cells[pos]
            p, q = i + 1, j + 1
            s = u[p, q - 1] + u[p, q + 1] + u[p - 1, q] + u[p + 1, q] + hf[i, j]
            u[p, q] = omw * u[p, q] + w4 * s
    return mesh.with_interior(u[1:-1, 1:-1])


def harmonic_integer_mesh(n):
    """Mesh whose values satisfy the zero-forcing stencil exactly in floats.

    u(p, q) = p + 2 q + 3 on padded indices is discrete harmonic, and the
    paired neighbour sums (u - a) + (u + a) are exact for small integers,
    so a sweep may move each cell by at most the rounding of the final
    (1 - omega) u + omega u recombination.
    """
    from sorkit.poisson import Mesh2D

    idx = np.arange(n + 2, dtype=np.float64)
    pad = idx[:, None] + 2.0 * idx[None, :] + 3.0
    boundary = pad.copy()
    boundary[1:-1, 1:-1] = 0.0
    return Mesh2D(n, pad[1:-1, 1:-1].copy(), boundary)
