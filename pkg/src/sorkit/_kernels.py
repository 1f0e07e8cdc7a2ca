"""Serial numba kernels for the mesh and matrix solvers. Internal module.

All mesh kernels work on padded ``(n+2, n+2)`` arrays whose outer ring holds
the Dirichlet values; only the interior block is ever written.  Kernels are
deliberately serial so results are reproducible bit for bit.
"""

import numba as nb
import numpy as np

# -------------------------------------------------------------- float mesh


@nb.njit(cache=True)
def sweep_lex(u, hf, omega):
    """One in-place lexicographic SOR sweep; hf holds h^2 * f."""
    n = hf.shape[0]
    w4 = omega / 4.0
    omw = 1.0 - omega
    for p in range(1, n + 1):
        for q in range(1, n + 1):
            s = u[p, q - 1] + u[p, q + 1] + u[p - 1, q] + u[p + 1, q] + hf[p - 1, q - 1]
            u[p, q] = omw * u[p, q] + w4 * s


@nb.njit(cache=True)
def sweep_color(u, hf, omega, parity):
    """In-place SOR half-sweep over cells with (i + j) % 2 == parity.

    Interior indices are 0-based, so parity 0 selects the red points and
    parity 1 the black ones.  A 5-point neighbourhood never contains a
    same-colour cell, so the update order within one colour cannot matter.
    """
    n = hf.shape[0]
    w4 = omega / 4.0
    omw = 1.0 - omega
    for p in range(1, n + 1):
        q0 = 1 + ((p - 1 + parity) & 1)
        for q in range(q0, n + 1, 2):
            s = u[p, q - 1] + u[p, q + 1] + u[p - 1, q] + u[p + 1, q] + hf[p - 1, q - 1]
            u[p, q] = omw * u[p, q] + w4 * s


@nb.njit(cache=True)
def mesh_residual_inf(u, b, invh2):
    """Max-norm residual of the 5-point system without forming the matrix.

    Accumulates each row in ascending-column order (north, west, centre,
    east, south) so the result matches the CSR matvec bit for bit.  NaN
    residuals propagate instead of being lost to the max comparison.
    """
    n = b.shape[0]
    diag = 4.0 * invh2
    off = -invh2
    rmax = 0.0
    for i in range(n):
        for j in range(n):
            p = i + 1
            q = j + 1
            acc = 0.0
            if i > 0:
                acc += off * u[p - 1, q]
            if j > 0:
                acc += off * u[p, q - 1]
            acc += diag * u[p, q]
            if j < n - 1:
                acc += off * u[p, q + 1]
            if i < n - 1:
                acc += off * u[p + 1, q]
            r = abs(b[i, j] - acc)
            if r != r:
                return r
            if r > rmax:
                rmax = r
    return rmax


# -------------------------------------------------------------- CSR matrix


@nb.njit(cache=True)
def csr_matvec(indptr, indices, data, x, out):
    for i in range(out.shape[0]):
        acc = 0.0
        for p in range(indptr[i], indptr[i + 1]):
            acc += data[p] * x[indices[p]]
        out[i] = acc


@nb.njit(cache=True)
def residual_inf_csr(indptr, indices, data, rhs, x):
    """Max-norm of rhs - A x, NaN-propagating."""
    rmax = 0.0
    for i in range(rhs.shape[0]):
        acc = 0.0
        for p in range(indptr[i], indptr[i + 1]):
            acc += data[p] * x[indices[p]]
        r = abs(rhs[i] - acc)
        if r != r:
            return r
        if r > rmax:
            rmax = r
    return rmax


@nb.njit(cache=True)
def sor_step_parts(lp, li, lx, up, ui, ux, diag, x, b, omega, out):
    """One SOR step from the (diag, lower, upper) splitting.

    Row i is solved by forward substitution: rows below i are finished, so
    lower entries read from `out` while upper entries read the old iterate.
    """
    omw = 1.0 - omega
    for i in range(diag.shape[0]):
        acc = 0.0
        for p in range(lp[i], lp[i + 1]):
            acc += lx[p] * out[li[p]]
        for p in range(up[i], up[i + 1]):
            acc += ux[p] * x[ui[p]]
        out[i] = omw * x[i] + (omega / diag[i]) * (b[i] - acc)


@nb.njit(cache=True)
def jacobi_step_parts(lp, li, lx, up, ui, ux, diag, x, b, out):
    for i in range(diag.shape[0]):
        acc = 0.0
        for p in range(lp[i], lp[i + 1]):
            acc += lx[p] * x[li[p]]
        for p in range(up[i], up[i + 1]):
            acc += ux[p] * x[ui[p]]
        out[i] = (b[i] - acc) / diag[i]


# -------------------------------------------------------------- fixed point


@nb.njit(cache=True, inline="always")
def _mulshift_rne(a, b, shift):
    # round(a * b / 2**shift) with ties to even; |a * b| must fit in int64.
    prod = a * b
    q = prod >> shift
    rem = prod - (q << shift)
    half = np.int64(1) << shift
    twice = rem + rem
    if twice > half or (twice == half and (q & np.int64(1)) != 0):
        q += 1
    return q


@nb.njit(cache=True)
def sweep_fixed_lex(raw, hfraw, omega_raw, one_minus_raw, frac_bits, s_limit, u_limit, raw_limit):
    """Fixed-point lexicographic sweep on int64 raw values.

    The stencil's division by four is folded into the product shift
    (frac_bits + 2), so each term is rounded exactly once.  Returns the
    0-based interior cell that would overflow, or (-1, -1) on success.
    """
    n = hfraw.shape[0]
    for p in range(1, n + 1):
        for q in range(1, n + 1):
            s = raw[p, q - 1] + raw[p, q + 1] + raw[p - 1, q] + raw[p + 1, q] + hfraw[p - 1, q - 1]
            old = raw[p, q]
            if abs(s) > s_limit or abs(old) > u_limit:
                return p - 1, q - 1
            t = _mulshift_rne(omega_raw, s, frac_bits + 2)
            v = _mulshift_rne(one_minus_raw, old, frac_bits)
            new = t + v
            if abs(new) > raw_limit:
                return p - 1, q - 1
            raw[p, q] = new
    return np.int64(-1), np.int64(-1)


@nb.njit(cache=True)
def sweep_fixed_color(raw, hfraw, omega_raw, one_minus_raw, frac_bits, s_limit, u_limit, raw_limit, parity):
    n = hfraw.shape[0]
    for p in range(1, n + 1):
        q0 = 1 + ((p - 1 + parity) & 1)
        for q in range(q0, n + 1, 2):
            s = raw[p, q - 1] + raw[p, q + 1] + raw[p - 1, q] + raw[p + 1, q] + hfraw[p - 1, q - 1]
            old = raw[p, q]
            if abs(s) > s_limit or abs(old) > u_limit:
                return p - 1, q - 1
            t = _mulshift_rne(omega_raw, s, frac_bits + 2)
            v = _mulshift_rne(one_minus_raw, old, frac_bits)
            new = t + v
            if abs(new) > raw_limit:
                return p - 1, q - 1
            raw[p, q] = new
    return np.int64(-1), np.int64(-1)
