import numpy as np
import pytest

from speccert.operator import DiagonalOracle, Periodic, Reciprocal, zoo
from speccert.resolvent import dist_spec, gamma_monotone, gamma_over_points


def diag_gamma(entries_closure, z):
    """Closed-form gamma(z, A) = dist(z, closure of diagonal entries)."""
    return min(abs(z - d) for d in entries_closure)


def diag_section_sigma(values_fn, n, z):
    """Exact sigma_1 of the rectangular truncation of a diagonal oracle."""
    return min(abs(values_fn(k) - z) for k in range(1, n + 1))


class TestDistSpec:
    def test_diagonal_counting_at_zero(self):
        A = DiagonalOracle(lambda k: float(k), name="diag_k")
        est = dist_spec(A, 10, 0.0)
        assert 1.0 <= est.raw <= 1.1 + 1e-12
        assert est.value == pytest.approx(est.raw + 0.1)

    def test_diagonal_eigenvalue_hit(self):
        A = DiagonalOracle(lambda k: float(k), name="diag_k")
        est = dist_spec(A, 10, 1.0)
        assert est.raw <= 0.1 + 1e-12

    def test_laplacian_exterior_point(self):
        A = zoo("discrete_laplacian_1d")
        for n in (50, 150, 400):
            est = dist_spec(A, n, 3.0, resolution=1e-4)
            assert est.value >= 1.0  # never undershoots dist(3, [-2, 2])
        assert dist_spec(A, 400, 3.0, resolution=1e-4).value <= 1.0 + 0.05

    def test_rejects_bad_n(self):
        with pytest.raises(ValueError):
            dist_spec(zoo("diag_reciprocal"), 0, 0.0)

    def test_value_dominates_closed_form_gamma(self):
        A = zoo("diag_reciprocal")
        closure = [0.0] + [1.0 / k for k in range(1, 400)]
        rng = np.random.default_rng(1)
        for _ in range(60):
            z = complex(rng.uniform(-2, 2), rng.uniform(-2, 2))
            n = int(rng.integers(2, 25))
            est = dist_spec(A, n, z)
            assert est.value >= diag_gamma(closure, z) - 1e-12

    def test_convergence_window(self):
        # |value - gamma| <= c_n + 2 res + section gap on diagonal operators
        A = zoo("diag_reciprocal")
        closure = [0.0] + [1.0 / k for k in range(1, 2000)]
        rng = np.random.default_rng(2)
        for _ in range(40):
            z = complex(rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5))
            n = int(rng.integers(2, 30))
            est = dist_spec(A, n, z)
            gamma = diag_gamma(closure, z)
            gap = diag_section_sigma(Reciprocal(), n, z) - gamma
            assert abs(est.value - gamma) <= 2.0 / n + gap + 1e-12

    def test_one_sided_components_agree_for_symmetric(self):
        A = zoo("discrete_laplacian_1d")
        A.is_self_adjoint = False  # force both sides to be computed
        for z in (0.5, -1.25, 2.0):
            est = dist_spec(A, 30, z, resolution=1e-3)
            assert abs(est.components[0] - est.components[1]) <= 1e-3 + 1e-12

    def test_strategies_agree(self):
        A = zoo("discrete_laplacian_1d")
        for z in (0.3 + 0.2j, 2.5):
            g1 = dist_spec(A, 25, z, resolution=1e-4, strategy="gram")
            g2 = dist_spec(A, 25, z, resolution=1e-4, strategy="augmented")
            assert g1.value == pytest.approx(g2.value, abs=2e-4)

    def test_warm_bracket_consistency(self):
        A = zoo("discrete_laplacian_1d")
        cold = dist_spec(A, 30, 2.5, resolution=1e-5)
        warm = dist_spec(
            A, 30, 2.5, resolution=1e-5, bracket=(cold.raw - 0.01, cold.raw + 0.01)
        )
        assert warm.value == pytest.approx(cold.value, abs=2e-5)


class TestGammaMonotone:
    def test_first_level_equals_dist_spec(self):
        A = zoo("diag_reciprocal")
        cache = {}
        v = gamma_monotone(A, 1, 0.7, cache)
        assert v == pytest.approx(dist_spec(A, 1, 0.7).value)

    def test_nonincreasing_in_n(self):
        A = zoo("diag_reciprocal")
        cache = {}
        vals = [gamma_monotone(A, n, 0.0, cache) for n in range(1, 12)]
        assert all(b <= a + 1e-15 for a, b in zip(vals, vals[1:]))

    def test_monotone_witness_random_points(self):
        rng = np.random.default_rng(3)
        for op in (zoo("diag_reciprocal"), zoo("discrete_laplacian_1d")):
            for _ in range(25):
                z = complex(rng.uniform(-2, 2), rng.uniform(-2, 2))
                cache = {}
                v10 = gamma_monotone(op, 10, z, cache)
                v20 = gamma_monotone(op, 20, z, cache)
                assert v20 <= v10 + 1e-15


class TestSweep:
    def test_matches_pointwise_evaluation(self):
        A = DiagonalOracle(Periodic((0.0, 1.0)), name="diag01")
        pts = [complex(x, 0.1) for x in np.linspace(-0.5, 1.5, 21)]
        swept = gamma_over_points(A, pts, 12)
        for z in pts:
            solo = dist_spec(A, 12, z)
            assert swept[z].value == pytest.approx(solo.value, abs=2.0 / 12)
            assert swept[z].raw >= solo.raw - 1.0 / 12 - 1e-12
