import math

import numpy as np
import pytest

from speccert.linalg import (
    HermitianMatrix,
    count_negative,
    eigenvalues_bisection,
    is_positive_definite,
    largest_singular_bound,
    ldl_hermitian,
    smallest_eigenvalue_bound,
    smallest_singular_bound,
)

from oracles import jacobi_eigenvalues, jacobi_singular_values, random_hermitian


def reconstruction_error(m):
    ldl = ldl_hermitian(m)
    arr = HermitianMatrix(m).array
    perm = ldl.permutation
    return np.abs(ldl.reconstruct() - arr[np.ix_(perm, perm)]).max()


class TestLDL:
    def test_one_by_one_identity(self):
        ldl = ldl_hermitian([[1.0]])
        assert np.allclose(ldl.lower, [[1.0]])
        assert np.allclose(ldl.blocks[0], [[1.0]])

    def test_offdiagonal_two_by_two_block(self):
        ldl = ldl_hermitian([[0.0, 1.0], [1.0, 0.0]])
        assert len(ldl.blocks) == 1
        blk = ldl.blocks[0]
        assert blk.shape == (2, 2)
        tr = blk[0, 0] + blk[1, 1]
        det = blk[0, 0] * blk[1, 1] - blk[0, 1] * blk[1, 0]
        assert abs(tr) < 1e-14
        assert abs(det + 1.0) < 1e-14
        inertia = count_negative([[0.0, 1.0], [1.0, 0.0]])
        assert (inertia.negative, inertia.positive) == (1, 1)

    def test_diagonal_is_own_factorization(self):
        ldl = ldl_hermitian(np.diag([2.0, -3.0, 5.0]))
        vals = sorted(float(b[0, 0]) for b in ldl.blocks)
        assert vals == [-3.0, 2.0, 5.0]
        assert np.allclose(ldl.lower, np.eye(3))

    def test_reconstruction_random(self):
        rng = np.random.default_rng(7)
        for n in (1, 2, 3, 5, 8, 13, 20):
            for complex_entries in (False, True):
                m = random_hermitian(rng, n, complex_entries)
                tol = 1e-10 * max(np.linalg.norm(m), 1.0) * n
                assert reconstruction_error(m) <= tol

    def test_singular_matrix(self):
        # rank-1 PSD matrix: inertia (0, 2, 1)
        v = np.array([1.0, 2.0, -1.0])
        m = np.outer(v, v)
        inertia = count_negative(m)
        assert (inertia.negative, inertia.zero, inertia.positive) == (0, 2, 1)

    def test_zero_matrix(self):
        inertia = count_negative(np.zeros((4, 4)))
        assert inertia.zero == 4


class TestInertia:
    def test_diagonal(self):
        inertia = count_negative(np.diag([1.0, -1.0, -2.0]))
        assert inertia.negative == 2

    def test_matches_oracle_on_random_matrices(self):
        rng = np.random.default_rng(123)
        for trial in range(200):
            n = int(rng.integers(1, 13))
            m = random_hermitian(rng, n, complex_entries=bool(trial % 2))
            ours = count_negative(m).negative
            oracle = int(np.sum(jacobi_eigenvalues(m) < 0.0))
            assert ours == oracle

    def test_sylvester_congruence_invariance(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            n = int(rng.integers(2, 9))
            m = random_hermitian(rng, n)
            s = np.eye(n) + 0.3 * (
                rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
            )
            congruent = s @ m @ s.conj().T
            a, b = count_negative(m), count_negative(congruent)
            assert (a.negative, a.positive) == (b.negative, b.positive)


class TestEigenvaluesBisection:
    def test_rejects_bad_eps(self):
        with pytest.raises(ValueError):
            eigenvalues_bisection(np.eye(2), 0.0)

    def test_diagonal(self):
        vals = eigenvalues_bisection(np.diag([3.0, 1.0, 2.0]), 1e-3)
        assert np.allclose(vals, [1.0, 2.0, 3.0], atol=1e-3)

    def test_two_by_two(self):
        vals = eigenvalues_bisection([[0.0, 1.0], [1.0, 0.0]], 1e-6)
        assert np.allclose(vals, [-1.0, 1.0], atol=1e-6)

    def test_chebyshev_tridiagonal(self):
        n = 5
        m = np.diag(np.ones(n - 1), 1) + np.diag(np.ones(n - 1), -1)
        expected = sorted(2.0 * math.cos(k * math.pi / (n + 1)) for k in range(1, n + 1))
        vals = eigenvalues_bisection(m, 1e-6)
        assert np.allclose(vals, expected, atol=1e-6)

    def test_sandwich_against_oracle(self):
        rng = np.random.default_rng(11)
        for eps in (1e-3, 1e-7):
            for _ in range(10):
                n = int(rng.integers(1, 9))
                m = random_hermitian(rng, n)
                ours = np.array(eigenvalues_bisection(m, eps))
                oracle = jacobi_eigenvalues(m)
                assert np.abs(ours - oracle).max() <= eps + 1e-9


class TestPositiveDefinite:
    def test_identity(self):
        assert is_positive_definite(np.eye(7))

    def test_zero_eigenvalue(self):
        assert not is_positive_definite(np.diag([1.0, 0.0]))

    def test_two_by_two(self):
        assert is_positive_definite([[2.0, 1.0], [1.0, 2.0]])

    def test_negative(self):
        assert not is_positive_definite(np.diag([1.0, -1e-6]))


class TestSmallestSingular:
    def test_rejects_bad_resolution(self):
        with pytest.raises(ValueError):
            smallest_singular_bound(np.eye(2), 0.0, 10.0)

    def test_square_diagonal(self):
        t = smallest_singular_bound(np.diag([5.0, 3.0]), 1e-4, 10.0)
        assert 3.0 <= t <= 3.0 + 1e-4 + 1e-9

    def test_rectangular_padded(self):
        b = np.array([[1.0, 0.0], [0.0, 2.0], [0.0, 0.0]])
        res = 1e-4
        t = smallest_singular_bound(b, res, 5.0)
        assert 1.0 <= t <= 1.0 + res + 1e-9

    def test_zero_column(self):
        b = np.array([[1.0, 0.0], [2.0, 0.0]])
        assert smallest_singular_bound(b, 1e-3, 3.0) <= 1e-3

    @pytest.mark.parametrize("strategy", ["gram", "augmented"])
    def test_monotone_bound_random(self, strategy):
        rng = np.random.default_rng(17)
        res = 1e-5
        for _ in range(40):
            rows = int(rng.integers(1, 9))
            cols = int(rng.integers(1, rows + 1))
            b = rng.standard_normal((rows, cols)) + 1j * rng.standard_normal(
                (rows, cols)
            )
            sigma = jacobi_singular_values(b)[0]
            t = smallest_singular_bound(b, res, strategy=strategy)
            assert t >= sigma - 1e-8
            assert t <= sigma + res + 1e-8

    def test_warm_start_bracket(self):
        b = np.diag([4.0, 2.5])
        t = smallest_singular_bound(b, 1e-6, upper=2.6, lower=2.4)
        assert 2.5 <= t <= 2.5 + 1e-6 + 1e-9
        # wrong hints are discarded, not trusted
        t = smallest_singular_bound(b, 1e-6, upper=1.0, lower=0.9)
        assert 2.5 <= t <= 2.5 + 1e-6 + 1e-9


class TestEigenvalueBound:
    def test_gram_smallest_eigenvalue(self):
        g = np.diag([0.09, 4.0, 1.0])
        t = smallest_eigenvalue_bound(g, 1e-6)
        assert 0.09 <= t <= 0.09 + 1e-6 + 1e-12

    def test_clamps_negative(self):
        g = np.diag([-1.0, 2.0])
        assert smallest_eigenvalue_bound(g, 1e-4) <= 1e-4


class TestLargestSingular:
    def test_overestimates_by_at_most_slack(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            b = rng.standard_normal((6, 4))
            smax = jacobi_singular_values(b)[-1]
            t = largest_singular_bound(b, slack=0.5)
            assert smax - 1e-9 <= t <= smax + 0.5 + 1e-9
