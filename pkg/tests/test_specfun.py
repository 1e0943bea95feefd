"""Special functions: Bessel I1, normal CDF, Mittag-Leffler survival tail.

Reference values are frozen from 40-digit extended-precision evaluation.
"""

from __future__ import annotations

import math

import pytest

from parisruin.specfun import bessel_i1, bessel_i1_scaled, ml_tail, normal_cdf


class TestBessel:
    # (x, I1(x), exp(-x) I1(x))
    CASES = (
        (0.5, 0.25789430539089631636, 0.15642080318487169714),
        (3.0, 3.9533702174026093965, 0.19682671329730085363),
        (12.0, 18141.348781638831601, 0.11146429929018097642),
        (80.0, 2.459659579567540863e33, 0.044393200058097465141),
    )

    @pytest.mark.parametrize("x, plain, scaled", CASES)
    def test_values(self, x, plain, scaled):
        assert bessel_i1(x) == pytest.approx(plain, rel=1e-13)
        assert bessel_i1_scaled(x) == pytest.approx(scaled, rel=1e-13)

    def test_scaled_survives_huge_argument(self):
        # the plain value overflows around x ~ 713; the scaled one must not
        assert 0.0 < bessel_i1_scaled(5000.0) < 1.0
        assert math.isfinite(bessel_i1_scaled(5000.0))

    def test_small_argument_series(self):
        # I1(x) ~ x/2 + x^3/16 as x -> 0
        x = 1e-6
        assert bessel_i1(x) == pytest.approx(x / 2, rel=1e-10)


class TestNormalCdf:
    CASES = (
        (-1.3, 0.096800484585610333152),
        (0.4, 0.65542174161032416674),
        (2.5, 0.99379033467422386483),
    )

    @pytest.mark.parametrize("x, expected", CASES)
    def test_values(self, x, expected):
        assert normal_cdf(x) == pytest.approx(expected, rel=1e-14)

    def test_symmetry(self):
        assert normal_cdf(1.7) + normal_cdf(-1.7) == pytest.approx(1.0, abs=1e-15)


class TestMittagLefflerTail:
    # survival factor for the stable first-passage series:
    # (p_over_c, alpha, x, expected)
    CASES = (
        (20.0 / 3.0, 1.9, 0.5, 0.061566805269449246199),
        (20.0 / 3.0, 1.9, 1.0, 0.022044142473058945028),
        (20.0 / 3.0, 1.9, 2.0, 0.0098463919050745363721),
        (20.0 / 3.0, 1.9, 20.0, 0.0010819806779015795889),
        (2.0, 1.5, 1.0, 0.25539567631050574387),
    )

    @pytest.mark.parametrize("p, alpha, x, expected", CASES)
    def test_values(self, p, alpha, x, expected):
        # abs floor matches the float-path cancellation budget (~1e-8) the
        # implementation advertises before switching to extended precision
        assert ml_tail(p, alpha, x) == pytest.approx(expected, rel=1e-10, abs=5e-8)

    def test_zero_limit(self):
        assert ml_tail(2.0, 1.9, 0.0) == pytest.approx(1.0, abs=1e-14)

    def test_probability_range_under_cancellation(self):
        # large arguments make the alternating series cancel violently; the
        # extended-precision fallback must still return a probability
        for x in (50.0, 200.0):
            v = ml_tail(5.0, 1.8, x)
            assert 0.0 <= v <= 1.0

    def test_monotone_in_x(self):
        values = [ml_tail(2.0, 1.7, x) for x in (0.1, 0.5, 1.0, 5.0, 25.0)]
        assert all(a > b for a, b in zip(values, values[1:]))
