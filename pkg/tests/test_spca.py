import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oracles import eig_oracle, finite_difference_grad, power_iterates, principal_angles, soft_threshold_loop
from rkspca.errors import InvalidInputError, OverShrinkageError
from rkspca.spca import (
    ComponentBasis, LoadingVector, Method, SolverConfig, default_step, deflate, fit_pca,
    fit_sparse_pca, g_value, grad_g, initial_vector, ista_step, objective, project, rk4_step,
    rk_coarse_step, soft_threshold, solve_component, sparse_rk_update,
)

ONE = np.array([[1.0]])
vec = arrays(float, st.integers(1, 12), elements=st.floats(-100, 100, allow_nan=False))


def seeded(n, p, seed):
    return np.random.default_rng(seed).standard_normal((n, p))


class TestGrad:
    def test_identity(self):
        assert grad_g(np.eye(2), [1.0, 0.0]).tolist() == [-2.0, 0.0]

    def test_zero_matrix(self):
        assert np.all(grad_g(np.zeros((3, 4)), np.ones(4)) == 0)

    def test_hand_computed(self):
        # D^T D = [[1,2],[2,5]]; -2 * D^T D [1,1] = -2 * [3, 7]
        assert grad_g([[1.0, 2.0], [0.0, 1.0]], [1.0, 1.0]).tolist() == [-6.0, -14.0]

    def test_dimension_mismatch(self):
        with pytest.raises(InvalidInputError):
            grad_g(np.eye(3), np.ones(2))

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_central_differences(self, seed):
        rng = np.random.default_rng(seed)
        D, x = rng.standard_normal((8, 5)), rng.standard_normal(5)
        fd = finite_difference_grad(lambda z: -np.sum((D @ z) ** 2), x)
        g = grad_g(D, x)
        assert np.linalg.norm(g - fd) / np.linalg.norm(g) < 1e-5

    def test_objective_is_g_plus_l1(self):
        D = np.array([[1.0, 2.0], [0.0, 1.0]])
        x = np.array([1.0, -1.0])
        assert g_value(D, x) == -(1.0 + 1.0)
        assert objective(D, x, 0.5) == -2.0 + 0.5 * 2.0


class TestSoftThreshold:
    def test_example(self):
        np.testing.assert_allclose(soft_threshold([3, -1, 0.2], 0.5), [2.5, -0.5, 0.0])

    def test_zero_threshold_is_identity(self):
        v = np.array([1.5, -2.0, 0.0])
        assert np.array_equal(soft_threshold(v, 0.0), v)

    def test_full_shrinkage(self):
        assert np.all(soft_threshold([0.3, -0.7], 0.7) == 0)

    def test_negative_threshold_rejected(self):
        with pytest.raises(InvalidInputError):
            soft_threshold([1.0], -0.1)

    @given(vec, st.floats(0, 200))
    def test_properties(self, v, theta):
        out = soft_threshold(v, theta)
        assert np.all(np.abs(out) <= np.abs(v))
        assert np.all(out * v >= 0)
        assert np.array_equal(out, soft_threshold_loop(v, theta))


class TestSteps:
    def test_ista_zero_lambda_is_gradient_step(self):
        rng = np.random.default_rng(3)
        D, x = rng.standard_normal((6, 4)), rng.standard_normal(4)
        out = ista_step(D, x, 0.3, 0.0)
        assert np.array_equal(out, x - 0.3 * grad_g(D, x))
        np.testing.assert_allclose(out, (np.eye(4) + 0.6 * D.T @ D) @ x, rtol=1e-13)

    def test_ista_zero_data(self):
        x = np.array([0.5, -0.05, 0.2])
        assert np.array_equal(ista_step(np.zeros((2, 3)), x, 0.1, 1.0), soft_threshold(x, 0.1))

    def test_ista_scalar(self):
        assert ista_step(ONE, [1.0], 0.25, 1.0).tolist() == [1.25]

    def test_coarse_zero_data(self):
        x = np.array([1.0, -2.0])
        assert np.array_equal(rk_coarse_step(np.zeros((3, 2)), x, 0.7), x)

    def test_coarse_stationary_point(self):
        # x in the null space of D: grad g(x) = 0
        D = np.array([[1.0, 0.0], [2.0, 0.0]])
        x = np.array([0.0, 3.0])
        assert np.array_equal(rk_coarse_step(D, x, 0.5), x)

    def test_coarse_scalar(self):
        assert rk_coarse_step(ONE, [1.0], 0.1)[0] == pytest.approx(1.24, abs=1e-15)

    @given(st.integers(0, 10_000), st.floats(1e-3, 1.0))
    def test_coarse_single_expression(self, seed, t):
        rng = np.random.default_rng(seed)
        D, x = rng.standard_normal((5, 4)), rng.standard_normal(4)
        assert np.array_equal(rk_coarse_step(D, x, t), x - t * grad_g(D, x - t * grad_g(D, x)))

    def test_rk4_zero_data(self):
        x = np.array([1.0, -2.0])
        assert np.array_equal(rk4_step(np.zeros((3, 2)), x, 0.7), x)

    def test_rk4_scalar(self):
        v = rk4_step(ONE, [1.0], 0.1)[0]
        assert v == pytest.approx(1.2214, abs=1e-12)
        assert abs(v - math.exp(0.2)) < 5e-6

    def test_rk4_order(self):
        errs = [abs(rk4_step(ONE, [1.0], t)[0] - math.exp(2 * t)) for t in (0.1, 0.05)]
        assert errs[0] / errs[1] >= 2 ** 4 * 0.8

    @given(st.integers(0, 10_000), st.floats(-5, 5))
    def test_rk4_homogeneous(self, seed, a):
        rng = np.random.default_rng(seed)
        D, x = rng.standard_normal((4, 3)), rng.standard_normal(3)
        np.testing.assert_allclose(rk4_step(D, a * x, 0.05), a * rk4_step(D, x, 0.05), rtol=1e-12, atol=1e-12)

    def test_rk4_is_quartic_taylor_polynomial_on_linear_flow(self):
        # dx/dt = A x with A = 2 D^T D: one RK4 step is sum_{k<=4} (tA)^k / k! applied to x
        rng = np.random.default_rng(8)
        D, x = rng.standard_normal((5, 3)), rng.standard_normal(3)
        t = 0.01
        tA = 2 * t * D.T @ D
        term, poly = np.eye(3), np.eye(3)
        for k in range(1, 5):
            term = term @ tA / k
            poly = poly + term
        np.testing.assert_allclose(rk4_step(D, x, t), poly @ x, rtol=1e-13)

    def test_sparse_rk_zero_lambda(self):
        rng = np.random.default_rng(2)
        D, x = rng.standard_normal((4, 3)), rng.standard_normal(3)
        assert np.array_equal(sparse_rk_update(D, x, 0.1, 0.0, "coarse"), rk_coarse_step(D, x, 0.1))
        assert np.array_equal(sparse_rk_update(D, x, 0.1, 0.0, "fourth"), rk4_step(D, x, 0.1))

    def test_sparse_rk_full_shrinkage(self):
        x = np.array([0.2, -0.3])
        assert np.all(sparse_rk_update(np.zeros((1, 2)), x, 0.5, 1.0, "fourth") == 0)

    def test_sparse_rk_scalar(self):
        assert sparse_rk_update(ONE, [1.0], 0.1, 1.0, "coarse")[0] == pytest.approx(1.14, abs=1e-15)

    def test_sparse_rk_bad_order(self):
        with pytest.raises(InvalidInputError):
            sparse_rk_update(ONE, [1.0], 0.1, 1.0, "third")

    @given(st.integers(0, 10_000), st.lists(st.floats(0, 50), min_size=2, max_size=6))
    def test_support_shrinks_with_lambda(self, seed, lams):
        rng = np.random.default_rng(seed)
        D, x = rng.standard_normal((6, 8)), rng.standard_normal(8)
        nnz = [np.count_nonzero(ista_step(D, x, 0.05, lam)) for lam in sorted(lams)]
        assert all(a >= b for a, b in zip(nnz, nnz[1:]))


class TestSolveComponent:
    def test_lambda_zero_recovers_leading_eigenvector(self):
        D = seeded(20, 10, 0)
        _, V = eig_oracle(D)
        v, _ = solve_component(D, SolverConfig(lam=0.0, tol=1e-12, max_iters=20_000))
        assert abs(v.values @ V[:, 0]) >= 1 - 1e-9
        assert abs(np.linalg.norm(v.values) - 1) < 1e-10

    @pytest.mark.parametrize("method", [Method.RK_COARSE, Method.RK4])
    def test_rk_methods_also_recover_it(self, method):
        D = seeded(20, 10, 0)
        _, V = eig_oracle(D)
        v, _ = solve_component(D, SolverConfig(method=method, lam=0.0, tol=1e-12, max_iters=20_000))
        assert abs(v.values @ V[:, 0]) >= 1 - 1e-9

    def test_power_iteration_equivalence(self):
        D = seeded(10, 6, 4)
        t = 0.01
        M = np.eye(6) + 2 * t * D.T @ D
        ref = power_iterates(M, initial_vector(6, 9), 25)
        for k, expected in enumerate(ref, start=1):
            v, tr = solve_component(D, SolverConfig(step_t=t, lam=0.0, tol=0.0, max_iters=k, seed=9))
            assert tr.iterations_used == k
            np.testing.assert_allclose(v.values, expected, rtol=0, atol=1e-12)

    def test_single_iteration(self):
        D = seeded(6, 4, 1)
        cfg = SolverConfig(step_t=0.05, lam=0.3, max_iters=1, seed=2)
        v, tr = solve_component(D, cfg)
        y = ista_step(D, initial_vector(4, 2), 0.05, 0.3)
        np.testing.assert_array_equal(v.values, y / np.linalg.norm(y))
        assert tr.iterations_used == 1 and tr.gradient_evals == 1

    def test_explicit_start_vector(self):
        D = seeded(6, 4, 1)
        x0 = np.array([1.0, 0.0, 0.0, 0.0])
        v, _ = solve_component(D, SolverConfig(step_t=0.05, lam=0.0, max_iters=1), x0=x0)
        y = x0 - 0.05 * grad_g(D, x0)
        np.testing.assert_array_equal(v.values, y / np.linalg.norm(y))

    @pytest.mark.parametrize("method", [Method.ISTA, Method.RK_COARSE, Method.RK4])
    def test_full_shrinkage_raises_on_first_iteration(self, method):
        D = seeded(7, 5, 3)
        t = 0.02
        x0 = initial_vector(5, 0)
        bound = np.abs((np.eye(5) + 2 * t * D.T @ D) @ x0).max()
        lam = 1.01 * bound / t
        if method is not Method.ISTA:
            # RK steps amplify more than (I + 2tD^T D); threshold against their own pre-prox vector
            order = "coarse" if method is Method.RK_COARSE else "fourth"
            pre = sparse_rk_update(D, x0, t, 0.0, order)
            lam = 1.01 * np.abs(pre).max() / t
        with pytest.raises(OverShrinkageError) as info:
            solve_component(D, SolverConfig(method=method, step_t=t, lam=lam))
        assert info.value.iteration == 1
        assert info.value.lambda_t == pytest.approx(lam * t)

    @pytest.mark.parametrize("method,per", [(Method.ISTA, 1), (Method.RK_COARSE, 2), (Method.RK4, 4)])
    def test_gradient_accounting(self, method, per):
        D = seeded(9, 6, 5)
        _, tr = solve_component(D, SolverConfig(method=method, lam=0.5, tol=0.0, max_iters=37))
        assert tr.iterations_used == 37
        assert tr.gradient_evals == 37 * per
        assert tr.wall_seconds >= 0

    def test_deterministic(self):
        D = seeded(12, 8, 6)
        cfg = SolverConfig(method=Method.RK4, lam=2.0, seed=3)
        a, ta = solve_component(D, cfg)
        b, tb = solve_component(D, cfg)
        assert np.array_equal(a.values, b.values)
        assert (ta.iterations_used, ta.gradient_evals) == (tb.iterations_used, tb.gradient_evals)

    def test_lambda_produces_sparsity(self):
        D = seeded(30, 40, 7)
        t = default_step(D)
        dense, _ = solve_component(D, SolverConfig(lam=0.0, step_t=t))
        sparse, _ = solve_component(D, SolverConfig(lam=0.1 / t, step_t=t))
        assert dense.nnz == 40
        assert 0 < sparse.nnz < 40

    def test_unnormalized_iterate_grows(self):
        D = seeded(5, 3, 0)
        v, _ = solve_component(D, SolverConfig(lam=0.0, normalize_each_iter=False, max_iters=10, tol=0.0))
        assert np.linalg.norm(v.values) > 1.0

    def test_pca_method_rejected(self):
        with pytest.raises(InvalidInputError):
            solve_component(np.eye(2), SolverConfig(method=Method.PCA_BASELINE))

    def test_zero_data_needs_explicit_step(self):
        with pytest.raises(InvalidInputError):
            solve_component(np.zeros((3, 2)), SolverConfig())

    @pytest.mark.parametrize("kwargs", [dict(step_t=0.0), dict(lam=-1.0), dict(max_iters=0), dict(tol=-1.0)])
    def test_config_validation(self, kwargs):
        with pytest.raises(InvalidInputError):
            SolverConfig(**kwargs)


class TestDefaultStep:
    def test_matches_top_eigenvalue(self):
        D = seeded(30, 10, 1)
        w, _ = eig_oracle(D)
        assert default_step(D) == pytest.approx(1 / (2 * w[0]), rel=1e-3)


class TestDeflate:
    def test_annihilates_direction(self):
        D = seeded(10, 6, 2)
        v = initial_vector(6, 1)
        assert np.linalg.norm(deflate(D, v) @ v) <= 1e-10 * np.linalg.norm(D)

    def test_coordinate(self):
        assert deflate(np.eye(2), np.array([1.0, 0.0])).tolist() == [[0.0, 0.0], [0.0, 1.0]]

    @given(st.integers(0, 10_000))
    def test_idempotent(self, seed):
        rng = np.random.default_rng(seed)
        D = rng.standard_normal((5, 4))
        v = rng.standard_normal(4)
        v /= np.linalg.norm(v)
        once = deflate(D, v)
        np.testing.assert_allclose(deflate(once, v), once, atol=1e-12)

    def test_non_unit_rejected(self):
        with pytest.raises(InvalidInputError):
            deflate(np.eye(2), np.array([1.0, 1.0]))


class TestFitSparsePca:
    def test_d1_equals_single_solve(self):
        D = seeded(10, 5, 3)
        cfg = SolverConfig(lam=1.0)
        B, tr = fit_sparse_pca(D, 1, cfg)
        v, tr1 = solve_component(D, SolverConfig(lam=1.0, step_t=default_step(D)))
        np.testing.assert_array_equal(B.matrix[:, 0], v.values / np.linalg.norm(v.values))
        assert tr.iterations_used == tr1.iterations_used

    @pytest.mark.parametrize("method", [Method.ISTA, Method.RK_COARSE, Method.RK4])
    def test_lambda_zero_spans_top_eigenspace(self, method):
        D = seeded(30, 15, 2)
        _, V = eig_oracle(D)
        B, _ = fit_sparse_pca(D, 3, SolverConfig(method=method, lam=0.0, tol=1e-13, max_iters=50_000))
        assert principal_angles(B.matrix, V[:, :3]).max() < 1e-6
        G = B.matrix.T @ B.matrix
        assert np.abs(G - np.eye(3)).max() <= 1e-6

    def test_d_out_of_range(self):
        with pytest.raises(InvalidInputError):
            fit_sparse_pca(np.eye(3), 4, SolverConfig())

    def test_over_shrinkage_names_component(self):
        D = seeded(6, 4, 0)
        with pytest.raises(OverShrinkageError) as info:
            fit_sparse_pca(D, 2, SolverConfig(lam=1e9))
        assert info.value.component == 0

    def test_trace_aggregates(self):
        D = seeded(12, 8, 1)
        _, tr = fit_sparse_pca(D, 4, SolverConfig(method=Method.RK4, lam=0.2, tol=0.0, max_iters=10))
        assert tr.component_iterations == [10] * 4
        assert tr.iterations_used == 40 and tr.gradient_evals == 160


class TestPca:
    def test_diagonal(self):
        B = fit_pca(np.array([[3.0, 0.0], [0.0, 1.0]]), 1)
        assert B.matrix[:, 0].tolist() == [1.0, 0.0]

    def test_sign_convention_and_order(self):
        D = seeded(12, 6, 3)
        B = fit_pca(D, 6)
        V = B.matrix
        idx = np.argmax(np.abs(V), axis=0)
        assert np.all(V[idx, np.arange(6)] > 0)
        var = np.sum((D @ V) ** 2, axis=0)
        assert np.all(np.diff(var) <= 1e-9)

    def test_matches_eigendecomposition(self):
        D = seeded(15, 5, 4)
        _, V = eig_oracle(D)
        B = fit_pca(D, 2)
        np.testing.assert_allclose(np.abs(B.matrix.T @ V[:, :2]), np.eye(2), atol=1e-10)

    def test_full_rank_round_trip(self):
        D = seeded(5, 5, 5)
        B = fit_pca(D, 5)
        np.testing.assert_allclose(project(D, B) @ B.matrix.T, D, atol=1e-8)

    def test_d_beyond_rank(self):
        D = seeded(3, 6, 0)
        B = fit_pca(D, 5)
        np.testing.assert_allclose(B.matrix.T @ B.matrix, np.eye(5), atol=1e-12)

    def test_d_too_large(self):
        with pytest.raises(InvalidInputError):
            fit_pca(np.eye(3), 4)


class TestProject:
    def test_coordinate_basis(self):
        X = seeded(4, 5, 0)
        B = ComponentBasis(np.eye(5)[:, :2])
        assert np.array_equal(project(X, B), X[:, :2])

    def test_zero(self):
        assert np.all(project(np.zeros((3, 4)), ComponentBasis(seeded(4, 2, 1))) == 0)

    def test_dot_product(self):
        x, v = np.array([[1.0, 2.0, 3.0]]), np.array([0.5, -1.0, 2.0])
        assert project(x, ComponentBasis.from_columns([LoadingVector(v)]))[0, 0] == x[0] @ v

    def test_mismatch(self):
        with pytest.raises(InvalidInputError):
            project(np.zeros((2, 3)), ComponentBasis(np.eye(4)[:, :1]))

    def test_loading_nnz(self):
        assert LoadingVector(np.array([0.0, 1.0, -2.0, 0.0])).nnz == 2
