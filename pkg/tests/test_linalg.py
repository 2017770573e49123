import numpy as np
import pytest

from gradedfem import (
    GradingSpec,
    apply_grading,
    assemble_load,
    assemble_system,
    build_sector_domain,
    cg_solve,
    coarse_triangulation,
    csr_add,
    csr_from_coo,
    edge_rule,
    spmv,
    triangle_rule,
    uniform_refine,
)
from gradedfem.exceptions import NotSpdError, PreconditionerError
from gradedfem.linalg import SparseMatrixCSR


def csr_from_dense(dense, drop_tol=1e-300):
    n = dense.shape[0]
    rows, cols = np.nonzero(np.ones_like(dense, dtype=bool))
    return csr_from_coo(n, rows, cols, dense.ravel(), drop_tol=drop_tol)


def lshape_system(levels, mu=1.0):
    mesh = coarse_triangulation(build_sector_domain(1.5 * np.pi))
    for _ in range(levels):
        mesh = uniform_refine(mesh)
    mesh = apply_grading(mesh, GradingSpec(np.zeros(2), 1.0, mu))
    a = assemble_system(mesh)
    b = assemble_load(mesh, lambda p: np.ones(len(p)),
                      lambda p, n: np.zeros(len(p)),
                      triangle_rule(5), edge_rule(5))
    return mesh, a, b


class TestCsr:
    def test_duplicate_triplets_merge_deterministically(self):
        rows = np.array([0, 1, 0, 1, 0])
        cols = np.array([0, 1, 1, 1, 0])
        vals = np.array([1.0, 2.0, 3.0, 4.0, 5.0])
        a = csr_from_coo(2, rows, cols, vals)
        assert np.allclose(a.to_dense(), [[6.0, 3.0], [0.0, 6.0]])
        a.validate()

    def test_structural_invariants(self):
        _, a, _ = lshape_system(2)
        a.validate()
        assert a.row_offsets[0] == 0 and a.row_offsets[-1] == a.nnz
        # structural symmetry: (i, j) present iff (j, i) present
        rows = np.repeat(np.arange(a.n), np.diff(a.row_offsets))
        pattern = set(zip(rows.tolist(), a.col_indices.tolist()))
        assert all((j, i) in pattern for i, j in pattern)

    def test_tiny_entries_dropped(self):
        dense = np.array([[1.0, 1e-310], [1e-310, 2.0]])
        a = csr_from_dense(dense)
        assert a.nnz == 2

    def test_csr_add(self):
        x = np.array([[1.0, 2.0], [0.0, 3.0]])
        y = np.array([[0.5, 0.0], [1.0, -3.0]])
        s = csr_add(csr_from_dense(x), csr_from_dense(y))
        assert np.allclose(s.to_dense(), x + y)


class TestSpmv:
    def test_identity(self):
        eye = csr_from_dense(np.eye(5))
        x = np.array([3.0, -1.0, 2.0, 0.5, 9.0])
        assert np.array_equal(spmv(eye, x), x)

    def test_dimension_mismatch(self):
        eye = csr_from_dense(np.eye(3))
        with pytest.raises(ValueError):
            spmv(eye, np.ones(4))

    def test_symmetry_bilinear_identity(self):
        _, a, _ = lshape_system(3, mu=0.3)
        rng = np.random.default_rng(5)
        for _ in range(5):
            x = rng.standard_normal(a.n)
            y = rng.standard_normal(a.n)
            lhs = x @ spmv(a, y)
            rhs = y @ spmv(a, x)
            assert abs(lhs - rhs) <= 1e-13 * max(abs(lhs), abs(rhs), 1e-30)

    def test_matrix_times_ones_is_lumped_integrals(self):
        mesh, a, _ = lshape_system(2, mu=0.6)
        integrals = assemble_load(mesh, lambda p: np.ones(len(p)),
                                  lambda p, n: np.zeros(len(p)),
                                  triangle_rule(10), edge_rule(11))
        assert np.allclose(spmv(a, np.ones(a.n)), integrals, atol=1e-14)

    def test_deterministic_across_calls(self):
        _, a, b = lshape_system(3, mu=0.3)
        assert np.array_equal(spmv(a, b), spmv(a, b))


class TestCgSolve:
    def test_identity_single_iteration(self):
        eye = csr_from_dense(np.eye(4))
        b = np.array([1.0, -2.0, 4.0, 0.25])
        x, rep = cg_solve(eye, b, tol=1e-12)
        assert rep.converged and rep.iterations == 1
        assert np.allclose(x, b, atol=1e-14)

    def test_two_by_two_hand_inverted(self):
        a = csr_from_dense(np.array([[4.0, 1.0], [1.0, 3.0]]))
        x, rep = cg_solve(a, np.array([1.0, 2.0]), tol=1e-14)
        assert rep.converged
        assert np.allclose(x, [1.0 / 11.0, 7.0 / 11.0], atol=1e-13)

    def test_zero_rhs(self):
        a = csr_from_dense(np.array([[4.0, 1.0], [1.0, 3.0]]))
        x, rep = cg_solve(a, np.zeros(2))
        assert rep.converged and rep.relative_residual == 0.0
        assert np.array_equal(x, np.zeros(2))

    def test_converged_residual_is_reverified(self):
        _, a, b = lshape_system(3, mu=0.6)
        x, rep = cg_solve(a, b, tol=1e-12)
        assert rep.converged
        explicit = np.linalg.norm(b - spmv(a, x)) / np.linalg.norm(b)
        assert explicit <= 1e-12
        assert rep.relative_residual == pytest.approx(explicit, rel=1e-9)

    def test_patch_system_solution_is_ones(self):
        # A*1 = b holds exactly by the row-sum identity
        _, a, b = lshape_system(3, mu=0.3)
        x, rep = cg_solve(a, b, tol=1e-12)
        assert rep.converged
        assert np.max(np.abs(x - 1.0)) <= 10 * 1e-12

    def test_unattainable_tolerance_reports_failure(self):
        _, a, b = lshape_system(2)
        x, rep = cg_solve(a, b, tol=1e-30, max_iter=3000)
        assert not rep.converged
        assert rep.relative_residual < 1e-10  # still made good progress

    def test_nonpositive_diagonal_preconditioner_error(self):
        dense = np.array([[1.0, 0.5], [0.5, 0.0]])
        a = csr_from_dense(dense, drop_tol=0.0)
        with pytest.raises(PreconditionerError):
            cg_solve(a, np.ones(2))

    def test_indefinite_matrix_breakdown(self):
        a = csr_from_dense(np.array([[1.0, 2.0], [2.0, 1.0]]))
        with pytest.raises(NotSpdError):
            cg_solve(a, np.array([1.0, -1.0]))

    def test_iteration_growth_roughly_inverse_h(self):
        iters = []
        for levels in (2, 3, 4):
            _, a, b = lshape_system(levels, mu=0.6)
            _, rep = cg_solve(a, b, tol=1e-12)
            assert rep.converged
            iters.append(rep.iterations)
        ratios = [iters[i + 1] / iters[i] for i in range(2)]
        # halving h should roughly double the iteration count
        assert all(1.2 < r < 3.5 for r in ratios), (iters, ratios)

    def test_invalid_tolerance(self):
        a = csr_from_dense(np.eye(2))
        with pytest.raises(ValueError):
            cg_solve(a, np.ones(2), tol=0.0)


class TestReportContract:
    def test_converged_implies_tolerance(self):
        for mu in (0.3, 1.0):
            _, a, b = lshape_system(2, mu=mu)
            x, rep = cg_solve(a, b, tol=1e-11)
            assert rep.converged
            assert rep.relative_residual <= 1e-11
