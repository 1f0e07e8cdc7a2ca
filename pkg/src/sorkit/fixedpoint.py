"""Signed fixed-point (Q-format) arithmetic and fixed-point SOR sweeps.

A value is stored as an integer ``raw`` with ``value = raw / 2**frac_bits``
inside a signed word of ``word_bits`` bits.  The default format Q(47.16)
keeps 16 fractional bits in a 64-bit word.  Every rounding in this module
is round-to-nearest, ties to even.

The mesh sweep reserves headroom so the 5-term neighbour sum and both
products stay exact in 64-bit intermediates; the stencil's division by four
is folded into the multiply's right shift, costing a single rounding.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .poisson import Mesh2D, PoissonProblem, fold_rhs
from .splitting import SolveReport, SorParams

DEFAULT_FRAC_BITS = 16
DEFAULT_WORD_BITS = 64

# Residual floor of the quantised path; callers of solve_fixed default here.
FIXED_DEFAULT_TOL = 1e-3

_TINY = float(np.finfo(np.float64).tiny)


class FixedPointOverflowError(OverflowError):
    """A fixed-point result left the representable range."""

    def __init__(self, message: str, position=None):
        super().__init__(message)
        self.position = position


def _word_limit(word_bits: int) -> int:
    return (1 << (word_bits - 1)) - 1


def _check_format(frac_bits: int, word_bits: int) -> None:
    if not (1 <= frac_bits <= word_bits - 2):
        raise ValueError(f"frac_bits {frac_bits} does not fit word_bits {word_bits}")
    if word_bits > 64:
        raise ValueError("word_bits larger than 64 are not supported")


@dataclass(frozen=True)
class QFixed:
    """One fixed-point number: raw integer plus its format."""

    raw: int
    frac_bits: int = DEFAULT_FRAC_BITS
    word_bits: int = DEFAULT_WORD_BITS

    def __post_init__(self) -> None:
        _check_format(self.frac_bits, self.word_bits)
        if abs(self.raw) > _word_limit(self.word_bits):
            raise FixedPointOverflowError(
                f"raw value {self.raw} exceeds {self.word_bits}-bit range"
            )

    @property
    def value(self) -> float:
        return decode(self)


def _div_rne(num: int, den: int) -> int:
    # Correctly rounded num / den on exact integers, ties to even.
    if den < 0:
        num, den = -num, -den
    q, r = divmod(num, den)
    twice = 2 * r
    if twice > den or (twice == den and q & 1):
        q += 1
    return q


def rne_shift(value: int, shift: int) -> int:
    """Round value / 2**shift to the nearest integer, ties to even."""
    if shift < 0:
        raise ValueError("shift must be nonnegative")
    return _div_rne(value, 1 << shift)


def encode(x: float, frac_bits: int = DEFAULT_FRAC_BITS, word_bits: int = DEFAULT_WORD_BITS) -> QFixed:
    """Quantise a float to Q(word-frac-1 . frac); raises on overflow."""
    x = float(x)
    if not math.isfinite(x):
        raise ValueError("cannot encode a nonfinite value")
    scaled = x * float(1 << frac_bits)
    if not math.isfinite(scaled):
        raise FixedPointOverflowError(f"value {x} exceeds {word_bits}-bit range")
    return QFixed(round(scaled), frac_bits, word_bits)


def decode(q: QFixed) -> float:
    """Exact rational raw / 2**frac_bits, correctly rounded to float."""
    return q.raw / (1 << q.frac_bits)


def _same_format(a: QFixed, b: QFixed) -> None:
    if a.frac_bits != b.frac_bits or a.word_bits != b.word_bits:
        raise ValueError("operands have different fixed-point formats")


def q_add(a: QFixed, b: QFixed) -> QFixed:
    _same_format(a, b)
    return QFixed(a.raw + b.raw, a.frac_bits, a.word_bits)


def q_sub(a: QFixed, b: QFixed) -> QFixed:
    _same_format(a, b)
    return QFixed(a.raw - b.raw, a.frac_bits, a.word_bits)


def q_mul(a: QFixed, b: QFixed) -> QFixed:
    """Full-width product, then one even-rounded shift back to the format."""
    _same_format(a, b)
    return QFixed(_div_rne(a.raw * b.raw, 1 << a.frac_bits), a.frac_bits, a.word_bits)


def q_div(a: QFixed, b: QFixed) -> QFixed:
    _same_format(a, b)
    if b.raw == 0:
        raise ZeroDivisionError("fixed-point division by zero")
    return QFixed(_div_rne(a.raw << a.frac_bits, b.raw), a.frac_bits, a.word_bits)


@dataclass
class QMesh2D:
    """A mesh of raw fixed-point values, padded like the float meshes."""

    n: int
    frac_bits: int
    word_bits: int
    raw: np.ndarray

    def __post_init__(self) -> None:
        _check_format(self.frac_bits, self.word_bits)
        self.raw = np.ascontiguousarray(self.raw, dtype=np.int64)
        if self.raw.shape != (self.n + 2, self.n + 2):
            raise ValueError(f"raw shape {self.raw.shape} does not match n={self.n}")

    def decode_interior(self) -> np.ndarray:
        return self.raw[1:-1, 1:-1] / float(1 << self.frac_bits)


def _encode_grid(values: np.ndarray, frac_bits: int, word_bits: int) -> np.ndarray:
    scaled = np.rint(np.asarray(values, dtype=np.float64) * float(1 << frac_bits))
    if not np.isfinite(scaled).all() or np.abs(scaled).max(initial=0.0) > _word_limit(word_bits):
        raise FixedPointOverflowError("grid values exceed the fixed-point range")
    return scaled.astype(np.int64)


def encode_mesh(
    mesh: Mesh2D,
    frac_bits: int = DEFAULT_FRAC_BITS,
    word_bits: int = DEFAULT_WORD_BITS,
) -> QMesh2D:
    """Quantise interior and boundary ring into one padded raw array."""
    _check_format(frac_bits, word_bits)
    return QMesh2D(mesh.n, frac_bits, word_bits, _encode_grid(mesh.padded(), frac_bits, word_bits))


def decode_mesh(q: QMesh2D) -> Mesh2D:
    scale = float(1 << q.frac_bits)
    return Mesh2D(q.n, q.raw[1:-1, 1:-1] / scale, q.raw / scale)


def _sweep_limits(omega_raw: int, one_minus_raw: int, word_bits: int) -> tuple[int, int]:
    # Keep a * s and (2**f - a) * u inside 2**62 and the 5-term sum exact.
    s_limit = (1 << 62) // max(abs(omega_raw), 1)
    u_limit = min(
        _word_limit(word_bits),
        (1 << 62) // 5,
        (1 << 62) // max(abs(one_minus_raw), 1),
    )
    return s_limit, u_limit


def _fixed_operands(qmesh: QMesh2D, problem: PoissonProblem, omega: float):
    if qmesh.n != problem.mesh.n:
        raise ValueError(f"mesh size {qmesh.n} does not match problem size {problem.mesh.n}")
    f = qmesh.frac_bits
    w = qmesh.word_bits
    h = problem.mesh.h
    hfraw = _encode_grid((h * h) * problem.forcing_grid(), f, w)
    omega_q = encode(omega, f, w)
    one_minus_raw = (1 << f) - omega_q.raw
    s_limit, u_limit = _sweep_limits(omega_q.raw, one_minus_raw, w)
    if max(np.abs(qmesh.raw).max(initial=0), np.abs(hfraw).max(initial=0)) > u_limit:
        raise FixedPointOverflowError("mesh values exceed the sweep headroom")
    return hfraw, omega_q.raw, one_minus_raw, s_limit, u_limit


def sweep_fixed(qmesh: QMesh2D, problem: PoissonProblem, omega: float) -> QMesh2D:
    """One lexicographic SOR sweep carried out entirely on raw integers.

    Update per cell: s = u_W + u_E + u_N + u_S + hf (exact adds), then
    omega * s shifted right by frac_bits + 2 and (1 - omega) * u shifted by
    frac_bits, both ties-to-even, summed exactly.  Raises with the cell
    position on overflow.  Bit-identical across runs by construction.
    """
    hfraw, omega_raw, one_minus_raw, s_limit, u_limit = _fixed_operands(qmesh, problem, omega)
    work = qmesh.raw.copy()
    pi, pj = _kernels.sweep_fixed_lex(
        work, hfraw, omega_raw, one_minus_raw, qmesh.frac_bits, s_limit, u_limit, u_limit
    )
    if pi >= 0:
        raise FixedPointOverflowError(
            f"fixed-point overflow at interior cell ({int(pi)}, {int(pj)})",
            position=(int(pi), int(pj)),
        )
    return QMesh2D(qmesh.n, qmesh.frac_bits, qmesh.word_bits, work)


def solve_fixed(
    problem: PoissonProblem,
    params: SorParams,
    frac_bits: int = DEFAULT_FRAC_BITS,
    word_bits: int = DEFAULT_WORD_BITS,
    x0: np.ndarray | None = None,
) -> SolveReport:
    """Fixed-point mesh solve with the float stopping rule.

    Sweeps run on raw integers (ordering per ``params``); after each sweep
    the iterate is decoded and the usual relative stencil residual decides
    convergence, so reports are comparable with the float solvers.  Use
    tolerances no tighter than the quantisation floor (``FIXED_DEFAULT_TOL``
    for 16 fractional bits).  Overflow ends the run as diverged.
    """
    t0 = time.perf_counter()
    n = problem.mesh.n
    mesh = problem.mesh
    if x0 is not None:
        mesh = mesh.with_interior(np.asarray(x0, dtype=np.float64).reshape(n, n))
    else:
        mesh = mesh.with_interior(np.zeros((n, n)))
    qmesh = encode_mesh(mesh, frac_bits, word_bits)
    hfraw, omega_raw, one_minus_raw, s_limit, u_limit = _fixed_operands(qmesh, problem, params.omega)
    f = frac_bits
    work = qmesh.raw

    b = fold_rhs(problem)
    bnorm = max(float(np.max(np.abs(b))), _TINY)
    invh2 = 1.0 / (mesh.h * mesh.h)
    cap = params.resolved_max_sweeps(n * n)
    scale = float(1 << f)

    def residual() -> float:
        return float(_kernels.mesh_residual_inf(work / scale, b, invh2)) / bnorm

    history = [residual()]
    converged = history[0] <= params.tol
    diverged = False
    sweeps = 0
    while not converged and not diverged and sweeps < cap:
        if params.ordering == "lex":
            pi, pj = _kernels.sweep_fixed_lex(
                work, hfraw, omega_raw, one_minus_raw, f, s_limit, u_limit, u_limit
            )
        else:
            pi, pj = _kernels.sweep_fixed_color(
                work, hfraw, omega_raw, one_minus_raw, f, s_limit, u_limit, u_limit, 0
            )
            if pi < 0:
                pi, pj = _kernels.sweep_fixed_color(
                    work, hfraw, omega_raw, one_minus_raw, f, s_limit, u_limit, u_limit, 1
                )
        if pi >= 0:
            diverged = True
            history.append(float("inf"))
            sweeps += 1
            break
        sweeps += 1
        r = residual()
        history.append(r)
        if r <= params.tol:
            converged = True
    return SolveReport(
        iterations=sweeps,
        residual_history=np.array(history, dtype=np.float64),
        converged=converged,
        wall_time=time.perf_counter() - t0,
        final=(work[1:-1, 1:-1] / scale).ravel().copy(),
        diverged=diverged,
    )
