import numpy as np
import pytest

from oracles import jacobi_eigenvalues, lasso_cd, slope_objective_cvxpy, subgradient_slope
from slopefdr.errors import DataError, DomainError, ShapeError
from slopefdr.seqgen import lambda_bh, lambda_constant
from slopefdr.solver import (
    Dataset,
    duality_gap,
    estimate_lipschitz,
    primal_objective,
    solve_slope,
    support,
)
from slopefdr.sorted_l1 import prox_sorted_l1


def gaussian_problem(rng, n, p, k=3, amp=4.0):
    X = rng.normal(size=(n, p)) / np.sqrt(n)
    b0 = np.zeros(p)
    b0[:k] = amp
    return Dataset(X, X @ b0 + rng.normal(size=n), b0, 1.0)


class TestDataset:
    def test_mismatched_rows_named(self):
        with pytest.raises(ShapeError, match="5 rows.*4 entries"):
            Dataset(np.ones((5, 2)), np.ones(4))

    def test_non_finite(self):
        X = np.ones((3, 2))
        X[0, 0] = np.nan
        with pytest.raises(DataError):
            Dataset(X, np.ones(3))

    def test_truth_length(self):
        with pytest.raises(ShapeError):
            Dataset(np.ones((3, 2)), np.ones(3), b0=np.ones(3))

    def test_noise_requires_truth(self):
        with pytest.raises(DataError):
            Dataset(np.ones((3, 2)), np.ones(3)).noise


class TestLipschitz:
    def test_identity(self):
        assert estimate_lipschitz(np.eye(7)) == pytest.approx(1.01, rel=1e-9)

    def test_scalar(self):
        assert estimate_lipschitz(np.array([[2.0]])) == pytest.approx(4.04, rel=1e-12)

    def test_zero_matrix(self):
        assert estimate_lipschitz(np.zeros((3, 4))) == 0.0

    def test_upper_bounds_jacobi_eigenvalue(self, rng):
        for _ in range(5):
            X = rng.normal(size=(50, 20))
            top = jacobi_eigenvalues(X.T @ X)[-1]
            L = estimate_lipschitz(X)
            assert L >= top
            assert L >= 0.999 * np.linalg.norm(X, 2) ** 2


class TestSupport:
    def test_examples(self):
        np.testing.assert_array_equal(support([0, 1e-12, 0.5], 1e-8), [2])
        assert support(np.zeros(4)).size == 0

    def test_negative_tolerance(self):
        with pytest.raises(DomainError):
            support([1.0], -1)

    def test_prox_zeros_are_exact(self, rng):
        for _ in range(1000):
            p = rng.integers(1, 40)
            v = rng.normal(size=p) * 3
            lam = np.sort(rng.exponential(size=p))[::-1]
            out = prox_sorted_l1(v, lam)
            np.testing.assert_array_equal(support(out, 0.0), support(out, 1e-8))


class TestSolve:
    def test_identity_design_is_prox(self, rng):
        for _ in range(20):
            y = rng.normal(size=30) * 3
            lam = lambda_bh(30, 0.2).values
            sol = solve_slope(Dataset(np.eye(30), y), lam, tol=1e-12)
            assert sol.converged
            np.testing.assert_allclose(sol.beta, prox_sorted_l1(y, lam), atol=1e-9)

    def test_zero_lambda_least_squares(self, rng):
        X = rng.normal(size=(8, 8)) + 3 * np.eye(8)
        y = rng.normal(size=8)
        sol = solve_slope(Dataset(X, y), np.zeros(8), tol=1e-14, max_iter=200_000)
        assert sol.converged
        np.testing.assert_allclose(sol.beta, np.linalg.solve(X, y), atol=1e-6)
        assert np.max(np.abs(X.T @ (y - X @ sol.beta))) < 1e-6

    def test_matches_conic_solver(self, rng):
        for _ in range(5):
            data = gaussian_problem(rng, 50, 20)
            lam = lambda_bh(20, 0.2).values
            sol = solve_slope(data, lam, tol=1e-10)
            ref, _ = slope_objective_cvxpy(data.X, data.y, lam)
            assert sol.objective == pytest.approx(ref, abs=1e-6)

    def test_not_beaten_by_subgradient(self, rng):
        data = gaussian_problem(rng, 50, 20)
        lam = lambda_bh(20, 0.2).values
        sol = solve_slope(data, lam, tol=1e-10)
        best = subgradient_slope(data.X, data.y, lam, iters=20_000)
        assert sol.objective <= best + 1e-9
        assert best - sol.objective < 0.1

    def test_certificate_and_objective(self, rng):
        data = gaussian_problem(rng, 40, 60)
        lam = lambda_bh(60, 0.2)
        sol = solve_slope(data, lam)
        assert sol.converged and sol.duality_gap <= sol.tol
        assert sol.objective == pytest.approx(primal_objective(data, sol.beta, lam), abs=1e-10)
        assert duality_gap(data, sol.beta, lam) == pytest.approx(sol.duality_gap, abs=1e-12)

    def test_objective_history_non_increasing(self, rng):
        data = gaussian_problem(rng, 60, 120, k=10)
        sol = solve_slope(data, lambda_bh(120, 0.2), tol=1e-12, record_history=True)
        hist = np.array(sol.history)
        assert np.all(np.diff(hist) <= 1e-12 * np.abs(hist[:-1]))

    def test_underestimated_lipschitz_recovers(self, rng):
        data = gaussian_problem(rng, 30, 20)
        lam = lambda_bh(20, 0.2)
        ref = solve_slope(data, lam, tol=1e-10)
        sol = solve_slope(data, lam, tol=1e-10, lipschitz=1e-3)
        assert sol.converged
        assert sol.objective == pytest.approx(ref.objective, abs=1e-8)

    def test_max_iter_exhausted(self, rng):
        data = gaussian_problem(rng, 40, 60)
        sol = solve_slope(data, lambda_bh(60, 0.2), tol=1e-14, max_iter=3)
        assert not sol.converged and sol.iterations == 3

    def test_zero_design(self):
        sol = solve_slope(Dataset(np.zeros((4, 3)), np.ones(4)), [1.0, 0.5, 0.1])
        assert sol.converged
        np.testing.assert_array_equal(sol.beta, 0)

    def test_warm_start(self, rng):
        data = gaussian_problem(rng, 40, 60)
        lam = lambda_bh(60, 0.2)
        cold = solve_slope(data, lam, tol=1e-10)
        warm = solve_slope(data, lam, tol=1e-10, beta0=cold.beta)
        assert warm.iterations <= 1

    @pytest.mark.parametrize("lam", [np.ones(3), np.ones(5)])
    def test_lambda_shape(self, lam):
        with pytest.raises(ShapeError):
            solve_slope(Dataset(np.ones((4, 4)), np.ones(4)), lam)

    def test_bad_tol(self):
        with pytest.raises(DomainError):
            solve_slope(Dataset(np.eye(2), np.ones(2)), [1, 1], tol=0)


def test_lasso_equivalence_with_coordinate_descent(rng):
    for _ in range(100):
        n = int(rng.integers(10, 101))
        p = int(rng.integers(2, 51))
        data = gaussian_problem(rng, n, p, k=min(3, p))
        lam = lambda_constant(p, 0.2)
        sol = solve_slope(data, lam, tol=1e-10)
        b_cd = lasso_cd(data.X, data.y, lam.values[0])
        ref = primal_objective(data, b_cd, lam)
        assert sol.objective == pytest.approx(ref, abs=1e-6)


def test_scaling_consistency(rng):
    # with N(0,1) columns the signal shrinks by n^-1/2; in the objective the
    # weights grow by n^1/2, i.e. coefficient-scale thresholds shrink by n^-1/2
    n, p = 60, 40
    Z = rng.normal(size=(n, p))
    b0 = np.zeros(p)
    b0[:4] = 5.0
    eps = rng.normal(size=n)
    lam = lambda_bh(p, 0.2).values
    small = solve_slope(Dataset(Z / np.sqrt(n), Z / np.sqrt(n) @ b0 + eps), lam, tol=1e-13)
    big = solve_slope(Dataset(Z, Z @ (b0 / np.sqrt(n)) + eps), lam * np.sqrt(n), tol=1e-13)
    np.testing.assert_allclose(big.beta * np.sqrt(n), small.beta, atol=1e-8)
