import numpy as np
import pytest

from speccert import decision
from speccert.decision import CompactSetApprox, spec_class, spec_gap

intersects_spectrum = decision.test_spec
intersects_pseudospectrum = decision.test_pseudo_spec
from speccert.operator import DiagonalOracle, ListThenConstant, Periodic, zoo


def K(level, *pts):
    return CompactSetApprox(level=level, points=tuple(complex(p) for p in pts))


class TestTestSpec:
    def test_far_singleton_is_empty(self):
        A = zoo("diag_reciprocal")
        out = intersects_spectrum(A, K(3, 5.0), n1=6, n2=3)
        assert out.value is True
        assert all(v is True for v in out.trace)

    def test_accumulation_point_intersects(self):
        # 0 is in the closure of {1/k}; the grid point is exactly 0
        A = zoo("diag_reciprocal")
        # gamma_n carries a 3/n floor at 0, so the hit needs n1 > 3 * 2^n2
        out = intersects_spectrum(A, K(4, 0.0), n1=110, n2=4)
        assert out.value is False
        assert out.stabilized()

    def test_eigenvalue_hit(self):
        A = DiagonalOracle(Periodic((1.0,)), name="diag_one")
        # the 2/n floor of gamma_n at an exact eigenvalue needs n1 > 2^(n2+1)
        for n2, n1 in ((2, 12), (5, 80)):
            out = intersects_spectrum(A, K(n2, 1.0), n1=n1, n2=n2)
            assert out.value is False

    def test_trace_shape(self):
        A = zoo("diag_reciprocal")
        out = intersects_spectrum(A, K(2, 0.3), n1=7, n2=2)
        assert len(out.trace) == 7
        assert out.value == out.trace[-1]


class TestTestPseudoSpec:
    def test_point_within_eps(self):
        A = DiagonalOracle(Periodic((0.0,)), name="diag0")
        out = intersects_pseudospectrum(A, K(3, 0.3), n1=10, n2=3, eps=0.5)
        assert out.value is False  # gamma(0.3) = 0.3 < 0.5 + 2^-3

    def test_point_beyond_eps(self):
        A = DiagonalOracle(Periodic((0.0,)), name="diag0")
        out = intersects_pseudospectrum(A, K(2, 2.0), n1=12, n2=2, eps=0.5)
        assert out.value is True  # gamma(2) = 2 >= 0.5 + 0.25

    def test_eigenvalue_always_intersects(self):
        A = DiagonalOracle(Periodic((1.0,)), name="diag_one")
        out = intersects_pseudospectrum(A, K(4, 1.0), n1=24, n2=4, eps=0.1)
        assert out.value is False

    def test_rejects_bad_eps(self):
        with pytest.raises(ValueError):
            intersects_pseudospectrum(zoo("diag_reciprocal"), K(2, 0.0), 4, 2, eps=0.0)


class TestSpecGap:
    def test_gapped_diagonal(self):
        A = DiagonalOracle(ListThenConstant((0.0,), 1.0), name="diag_gapped")
        for n2 in (4, 8):
            out = spec_gap(A, 24, n2)
            assert out.value == 1
            assert out.stabilized()

    def test_level_one_convention(self):
        A = DiagonalOracle(ListThenConstant((0.0,), 1.0), name="diag_gapped")
        assert spec_gap(A, 1, 4).value == 1

    def test_dense_diagonal_gapless(self):
        A = zoo("diag_dyadic")
        for n2 in (4, 8):
            out = spec_gap(A, 40, n2)
            assert out.value == 0
            assert out.stabilized()

    def test_two_point_padded(self):
        # diagonal(0, 1) padded with values >= 1: section gaps equal 1
        A = DiagonalOracle(ListThenConstant((0.0, 1.0), 1.5), name="diag01pad")
        out = spec_gap(A, 20, 6)
        assert out.value == 1

    def test_interval_disjointness(self):
        for n2 in (1, 3, 9):
            assert 1.0 / (2 * n2) < 1.0 / n2

    def test_rejects_non_self_adjoint(self):
        A = zoo("diag_reciprocal")
        A.is_self_adjoint = False
        with pytest.raises(ValueError):
            spec_gap(A, 4, 2)

    def test_sigma2_one_sidedness(self):
        # stabilized value 1 must only occur on truly gapped fixtures
        gapped = DiagonalOracle(ListThenConstant((0.0,), 1.0), name="g")
        dense = zoo("diag_dyadic")
        for fixture, truth in ((gapped, 1), (dense, 0)):
            out = spec_gap(fixture, 32, 8)
            if out.stabilized() and out.value == 1:
                assert truth == 1


class _ZerosThenIsolated:
    """diag(1, 2, 0, 0, 0, ...): min of spectrum 0 in the essential part."""

    def __call__(self, i):
        if i == 1:
            return 1.0
        if i == 2:
            return 2.0
        return 0.0


class TestSpecClass:
    def test_class1_simple_isolated(self):
        A = DiagonalOracle(ListThenConstant((0.0,), 1.0), name="c1")
        out = spec_class(A, 20, 8)
        assert out.value == 1
        assert out.stabilized()

    def test_class2_multiplicity_two(self):
        A = DiagonalOracle(ListThenConstant((0.0, 0.0), 1.0), name="c2")
        out = spec_class(A, 20, 8)
        assert out.value == 2
        assert out.stabilized()

    def test_class3_isolated_essential(self):
        A = DiagonalOracle(_ZerosThenIsolated(), name="c3")
        out = spec_class(A, 24, 8, real_window=(-1.0, 3.0))
        assert out.value == 3
        assert out.stabilized()

    def test_class4_cluster_point(self):
        A = zoo("diag_reciprocal")
        out = spec_class(A, 56, 8, real_window=(-1.0, 1.2))
        assert out.value == 4
        tail = out.trace[len(out.trace) // 2 :]
        assert all(v == 4 for v in tail)

    def test_small_levels_default_to_one(self):
        A = DiagonalOracle(ListThenConstant((0.0,), 1.0), name="c1")
        out = spec_class(A, 5, 8)
        assert out.value == 1  # n1 <= n2 convention

    def test_pi2_partial_converses(self):
        # value 2 implies true class in {1, 2}; value 3 implies {1, 2, 3}
        fixtures = [
            (DiagonalOracle(ListThenConstant((0.0,), 1.0), name="c1"), 1),
            (DiagonalOracle(ListThenConstant((0.0, 0.0), 1.0), name="c2"), 2),
            (DiagonalOracle(_ZerosThenIsolated(), name="c3"), 3),
            (zoo("diag_reciprocal"), 4),
        ]
        for fixture, truth in fixtures:
            out = spec_class(fixture, 30, 8, real_window=(-1.0, 3.0))
            if out.stabilized():
                if out.value == 1:
                    assert truth == 1
                elif out.value == 2:
                    assert truth in (1, 2)
                elif out.value == 3:
                    assert truth in (1, 2, 3)

    def test_rejects_non_self_adjoint(self):
        A = zoo("diag_reciprocal")
        A.is_self_adjoint = False
        with pytest.raises(ValueError):
            spec_class(A, 4, 2)
