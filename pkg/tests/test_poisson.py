import numpy as np
import pytest

from sorkit.poisson import (
    MANUFACTURED_TOL,
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

from brute_force import dense_assemble

rng = np.random.default_rng(2024)


# ------------------------------------------------------------------ mesh


def test_mesh_spacing():
    assert Mesh2D.zeros(3).h == 0.25
    assert Mesh2D.zeros(1).h == 0.5


def test_mesh_shape_validation():
    with pytest.raises(ValueError, match="interior shape"):
        Mesh2D(3, np.zeros((2, 3)), np.zeros((5, 5)))
    with pytest.raises(ValueError, match="boundary shape"):
        Mesh2D(3, np.zeros((3, 3)), np.zeros((4, 4)))
    with pytest.raises(ValueError, match="at least one interior point"):
        Mesh2D(0, np.zeros((0, 0)), np.zeros((2, 2)))


def test_padded_combines_ring_and_interior():
    boundary = np.arange(16, dtype=float).reshape(4, 4)
    interior = np.full((2, 2), -1.0)
    pad = Mesh2D(2, interior, boundary).padded()
    assert np.array_equal(pad[1:-1, 1:-1], interior)
    pad_ring = pad.copy()
    pad_ring[1:-1, 1:-1] = boundary[1:-1, 1:-1]
    assert np.array_equal(pad_ring, boundary)


def test_padded_returns_a_copy():
    mesh = Mesh2D.zeros(2)
    pad = mesh.padded()
    pad[:] = 7.0
    assert np.all(mesh.interior == 0.0)
    assert np.all(mesh.boundary == 0.0)


def test_with_interior_accepts_flat_vectors_and_copies():
    mesh = Mesh2D.zeros(3)
    flat = np.arange(9, dtype=float)
    out = mesh.with_interior(flat)
    assert out.interior.shape == (3, 3)
    assert out.interior[1, 2] == 5.0
    flat[0] = 99.0
    assert out.interior[0, 0] == 0.0
    assert out.boundary is mesh.boundary


def test_boundary_ring_orientation():
    # padded[p, q] sits at (p h, q h); pin it with an asymmetric g.
    problem = PoissonProblem.build(3, lambda x, y: 0.0, lambda x, y: x + 2.0 * y)
    ring = problem.mesh.boundary
    h = problem.mesh.h
    assert ring[0, 2] == pytest.approx(2.0 * 2 * h, abs=1e-15)
    assert ring[2, 0] == pytest.approx(2 * h, abs=1e-15)
    assert ring[4, 4] == pytest.approx(1.0 + 2.0, abs=1e-15)
    assert np.all(ring[1:-1, 1:-1] == 0.0)


def test_problem_rejects_noncallable_data():
    with pytest.raises(TypeError, match="callables"):
        PoissonProblem(Mesh2D.zeros(2), 1.0, lambda x, y: 0.0)
    with pytest.raises(TypeError, match="exact"):
        PoissonProblem(Mesh2D.zeros(2), lambda x, y: 0.0, lambda x, y: 0.0, exact=3)


def test_exact_grid_requires_exact():
    problem = PoissonProblem.build(2, lambda x, y: 0.0, lambda x, y: 0.0)
    with pytest.raises(ValueError, match="no exact solution"):
        problem.exact_grid()


# ------------------------------------------------------------------- csr


def test_csr_round_trip_random_sparsity():
    for _ in range(20):
        dim = int(rng.integers(1, 12))
        a = rng.uniform(-1.0, 1.0, (dim, dim))
        a[rng.uniform(size=(dim, dim)) < 0.6] = 0.0
        m = CsrMatrix.from_dense(a)
        assert np.array_equal(m.to_dense(), a)
        assert m.nnz == np.count_nonzero(a)


def test_csr_matvec_matches_dense():
    for _ in range(20):
        dim = int(rng.integers(1, 12))
        a = rng.uniform(-1.0, 1.0, (dim, dim))
        a[rng.uniform(size=(dim, dim)) < 0.5] = 0.0
        x = rng.uniform(-1.0, 1.0, dim)
        got = CsrMatrix.from_dense(a).matvec(x)
        assert np.allclose(got, a @ x, rtol=1e-13, atol=1e-15)


def test_csr_matvec_rejects_bad_length():
    m = CsrMatrix.from_dense(np.eye(3))
    with pytest.raises(ValueError, match="does not match dim"):
        m.matvec(np.ones(4))


def test_csr_validation():
    with pytest.raises(ValueError, match="square"):
        CsrMatrix.from_dense(np.zeros((2, 3)))
    with pytest.raises(ValueError, match="indptr length"):
        CsrMatrix(2, np.array([0, 1]), np.array([0]), np.array([1.0]))
    with pytest.raises(ValueError, match="span"):
        CsrMatrix(2, np.array([0, 1, 3]), np.array([0, 1]), np.array([1.0, 2.0]))
    with pytest.raises(ValueError, match="strictly increasing"):
        CsrMatrix(2, np.array([0, 2, 2]), np.array([1, 0]), np.array([1.0, 2.0]))
    with pytest.raises(ValueError, match="out of range"):
        CsrMatrix(2, np.array([0, 1, 2]), np.array([0, 2]), np.array([1.0, 2.0]))
    with pytest.raises(ValueError, match="lengths differ"):
        CsrMatrix(2, np.array([0, 1, 2]), np.array([0, 1]), np.array([1.0]))


def test_csr_diagonal_reads_missing_entries_as_zero():
    a = np.array([[2.0, 1.0], [3.0, 0.0]])
    d = CsrMatrix.from_dense(a).diagonal()
    assert np.array_equal(d, [2.0, 0.0])


def test_system_validate_flags_zero_diagonal():
    system = SparseSystem.from_dense(np.array([[2.0, 1.0], [3.0, 0.0]]), np.zeros(2))
    with pytest.raises(ValueError, match="row 1"):
        system.validate()


# -------------------------------------------------------------- assembly


@pytest.mark.parametrize("n", [1, 2, 3, 5])
def test_assembly_matches_brute_force(n):
    """Matrix entries exact, folded rhs within a couple of roundings."""
    problem = trig_problem(n)
    system = assemble_poisson(problem)
    a_ref, b_ref = dense_assemble(n, problem.forcing, problem.dirichlet)
    assert np.array_equal(system.matrix.to_dense(), a_ref)
    scale = np.max(np.abs(b_ref))
    assert np.max(np.abs(system.rhs - b_ref)) <= 1e-14 * scale


def test_assembly_matches_brute_force_with_boundary_data():
    g = lambda x, y: 1.0 + x * x + 0.5 * y
    f = lambda x, y: -2.0
    problem = PoissonProblem.build(4, f, g)
    system = assemble_poisson(problem)
    a_ref, b_ref = dense_assemble(4, f, g)
    assert np.array_equal(system.matrix.to_dense(), a_ref)
    assert np.max(np.abs(system.rhs - b_ref)) <= 1e-14 * np.max(np.abs(b_ref))


def test_fold_rhs_constant_boundary():
    # n=2, g=1: every cell touches two boundary sides, so b = 2 / h^2 = 18.
    problem = PoissonProblem.build(2, lambda x, y: 0.0, lambda x, y: 1.0)
    assert np.array_equal(fold_rhs(problem), np.full((2, 2), 18.0))


def test_assembly_row_structure():
    system = assemble_poisson(trig_problem(3))
    m = system.matrix
    assert m.nnz == 5 * 9 - 4 * 3
    row4 = m.indices[m.indptr[4] : m.indptr[5]]
    assert np.array_equal(row4, [1, 3, 4, 5, 7])
    invh2 = 16.0
    assert np.array_equal(
        m.data[m.indptr[4] : m.indptr[5]],
        [-invh2, -invh2, 4.0 * invh2, -invh2, -invh2],
    )


def test_linear_solution_is_discretely_exact():
    """The 5-point stencil reproduces affine functions with no truncation."""
    problem = linear_problem(4)
    system = assemble_poisson(problem)
    exact = problem.exact_grid().ravel()
    x = np.linalg.solve(system.matrix.to_dense(), system.rhs)
    assert np.max(np.abs(x - exact)) <= 1e-12


def test_manufactured_residual_small_for_consistent_data():
    assert manufactured_residual(linear_problem(6)) <= 1e-12
    assert manufactured_residual(trig_problem(16)) <= 0.05


def test_manufactured_residual_large_for_wrong_sign():
    base = trig_problem(8)
    bad = PoissonProblem(base.mesh, lambda x, y: -base.forcing(x, y), base.dirichlet, base.exact)
    assert manufactured_residual(bad) > MANUFACTURED_TOL


def test_assemble_rejects_inconsistent_manufactured_data():
    base = trig_problem(8)
    bad = PoissonProblem(base.mesh, lambda x, y: 0.0, base.dirichlet, base.exact)
    with pytest.raises(ValueError, match="manufactured data inconsistent"):
        assemble_poisson(bad)


def test_manufactured_residual_needs_exact():
    problem = PoissonProblem.build(4, lambda x, y: 1.0, lambda x, y: 0.0)
    with pytest.raises(ValueError, match="needs an exact solution"):
        manufactured_residual(problem)


def test_manufactured_error_reports_max_deviation():
    problem = linear_problem(3)
    grid = problem.exact_grid()
    grid[1, 2] += 0.25
    mesh = problem.mesh.with_interior(grid)
    assert manufactured_error(mesh, problem.exact) == pytest.approx(0.25, abs=1e-12)


def test_trig_problem_truncation_error_scales_as_h_squared():
    # Frozen from the first verified build: err / h^2 measured 0.82.
    problem = trig_problem(16)
    system = assemble_poisson(problem)
    x = np.linalg.solve(system.matrix.to_dense(), system.rhs)
    err = np.max(np.abs(x - problem.exact_grid().ravel()))
    h = problem.mesh.h
    assert err <= 0.9 * h * h
