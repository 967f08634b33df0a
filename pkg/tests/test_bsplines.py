"""B-spline basis: partition of unity, known shapes, exact integrals."""

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.integrate import quad

from msep.bsplines import SplineBasis, bspline_basis_eval, bspline_basis_integrals


class TestEvaluation:
    def test_order1_indicator(self):
        """Order 1, uniform knots on [0, 1], k = 2: indicator functions."""
        basis = SplineBasis.uniform(order=1, k=2, length=1.0)
        row = bspline_basis_eval(basis, 0.25)[0]
        assert_allclose(row, [1.0, 0.0])
        row = bspline_basis_eval(basis, 0.75)[0]
        assert_allclose(row, [0.0, 1.0])

    def test_partition_of_unity_cubic(self):
        basis = SplineBasis.geometric(order=4, k=12, length=1000.0)
        ts = np.concatenate(([0.0, 1000.0], np.geomspace(1e-3, 999.0, 200)))
        rows = basis.evaluate(ts)
        assert_allclose(rows.sum(axis=1), np.ones(ts.size), atol=1e-12)

    def test_partition_of_unity_orders(self):
        for order in (1, 2, 3, 4, 5):
            basis = SplineBasis.uniform(order=order, k=order + 3, length=7.0)
            ts = np.linspace(0.0, 7.0, 101)
            rows = basis.evaluate(ts)
            assert_allclose(rows.sum(axis=1), np.ones(ts.size), atol=1e-12,
                            err_msg=f"order={order}")

    def test_nonnegative(self):
        basis = SplineBasis.geometric(order=4, k=9, length=500.0)
        rows = basis.evaluate(np.linspace(0, 500, 400))
        assert rows.min() >= 0.0

    def test_outside_span_rejected(self):
        basis = SplineBasis.uniform(order=2, k=4, length=1.0)
        with pytest.raises(ValueError):
            basis.evaluate(-0.5)
        with pytest.raises(ValueError):
            basis.evaluate(1.5)

    def test_local_support(self):
        """Basis j vanishes off [knots[j], knots[j+order]]."""
        basis = SplineBasis.uniform(order=3, k=8, length=10.0)
        ts = np.linspace(0, 10, 301)
        rows = basis.evaluate(ts)
        for j in range(basis.k):
            lo, hi = basis.knots[j], basis.knots[j + basis.order]
            outside = (ts < lo - 1e-12) | (ts > hi + 1e-12)
            assert np.all(rows[outside, j] == 0.0)

    def test_invalid_construction(self):
        with pytest.raises(ValueError):
            SplineBasis(order=0, knots=np.array([0.0, 1.0]))
        with pytest.raises(ValueError):
            SplineBasis(order=2, knots=np.array([0.0, 1.0, 0.5, 2.0]))
        with pytest.raises(ValueError):
            SplineBasis.geometric(order=4, k=3, length=10.0)


class TestIntegrals:
    def test_sum_of_full_integrals_is_span_length(self):
        for order in (1, 2, 4):
            L = 250.0
            basis = SplineBasis.geometric(order=order, k=order + 6, length=L)
            ints = bspline_basis_integrals(basis, L)
            assert np.sum(ints) == pytest.approx(L, rel=1e-12)

    def test_against_quadrature(self):
        basis = SplineBasis.geometric(order=4, k=8, length=100.0)
        upper = 37.0
        ints = bspline_basis_integrals(basis, upper)
        for j in range(basis.k):
            val, _ = quad(lambda s, j=j: basis.evaluate(s)[0, j], 0.0, upper,
                          points=list(basis.breakpoints[basis.breakpoints < upper]),
                          limit=200)
            assert ints[j] == pytest.approx(val, abs=1e-10)

    def test_zero_upper(self):
        basis = SplineBasis.uniform(order=3, k=5, length=4.0)
        assert_allclose(bspline_basis_integrals(basis, 0.0), np.zeros(5))

    def test_monotone_in_upper(self):
        basis = SplineBasis.geometric(order=4, k=10, length=600.0)
        prev = np.zeros(basis.k)
        for u in [1.0, 10.0, 120.0, 599.0, 600.0]:
            cur = bspline_basis_integrals(basis, u)
            assert np.all(cur >= prev - 1e-14)
            prev = cur

    def test_out_of_span_rejected(self):
        basis = SplineBasis.uniform(order=2, k=4, length=1.0)
        with pytest.raises(ValueError):
            bspline_basis_integrals(basis, 2.0)
