"""
Tests for error-free transformations and compensated sums.
"""

from fractions import Fraction

import mpmath
import numpy as np
import pytest

from src.utils.precision import compensated_sum, neumaier_sum, reduced_phase, two_product, two_sum


class TestErrorFree:
    def test_two_sum_is_exact(self):
        rng = np.random.default_rng(0)
        a = rng.normal(size=200) * 1e8
        b = rng.normal(size=200) * 1e-8
        s, e = two_sum(a, b)
        for ai, bi, si, ei in zip(a, b, s, e):
            assert Fraction(float(ai)) + Fraction(float(bi)) == Fraction(float(si)) + Fraction(float(ei))

    def test_two_product_is_exact(self):
        rng = np.random.default_rng(1)
        a = rng.uniform(-1e3, 1e3, 200)
        b = rng.uniform(-1e3, 1e3, 200)
        p, e = two_product(a, b)
        for ai, bi, pi, ei in zip(a, b, p, e):
            assert Fraction(float(ai)) * Fraction(float(bi)) == Fraction(float(pi)) + Fraction(float(ei))


class TestReducedPhase:
    def test_matches_extended_precision(self):
        t = 123456.789
        k = np.array([1.0, np.sqrt(2.0), np.e, 987.654321])
        phase = reduced_phase(t, 0.0, k)
        with mpmath.workdps(50):
            for ki, fi in zip(k, phase):
                exact = mpmath.mpf(t) * mpmath.mpf(float(ki))
                exact = float(exact - mpmath.floor(exact))
                assert abs(fi - exact) <= 1e-15

    def test_low_order_term_shifts_phase(self):
        base = reduced_phase(10.0, 0.0, np.array([0.5]))
        shifted = reduced_phase(10.0, 0.25, np.array([0.5]))
        assert base[0] == 0.0
        assert shifted[0] == 0.125

    def test_range(self):
        phase = reduced_phase(np.linspace(1.0, 1e6, 50)[:, None], 0.0, np.linspace(0.1, 300.0, 40)[None, :])
        assert phase.shape == (50, 40)
        assert np.all((phase >= 0.0) & (phase < 1.0))


class TestCompensatedSum:
    def test_cancellation(self):
        assert compensated_sum(np.array([1e16, 1.0, -1e16]), block=1) == 1.0

    def test_axis(self):
        values = np.arange(12.0).reshape(3, 4)
        np.testing.assert_array_equal(compensated_sum(values, axis=1), values.sum(axis=1))
        np.testing.assert_array_equal(compensated_sum(values, axis=0), values.sum(axis=0))

    def test_empty(self):
        assert compensated_sum(np.array([])) == 0.0

    def test_neumaier(self):
        assert neumaier_sum([1.0, 1e100, 1.0, -1e100]) == 2.0
        assert neumaier_sum([]) == 0.0

    def test_close_to_exact_sum(self):
        values = np.random.default_rng(3).normal(size=10_000) * 10.0 ** np.arange(-5, 5).repeat(1000)
        exact = float(sum(Fraction(float(v)) for v in values))
        assert compensated_sum(values, block=64) == pytest.approx(exact, rel=1e-12, abs=1e-9)
