"""Laplace inversion and semi-infinite quadrature against closed-form pairs."""

from __future__ import annotations

import math

import mpmath
import pytest

from parisruin.laplace import (
    InversionConfig,
    InversionError,
    QuadratureConfig,
    integrate_semiinf,
    invert,
)

GS = InversionConfig(method="gaver-stehfest", n_terms=20)
TALBOT = InversionConfig(method="talbot", talbot_nodes=48)


# ---------------------------------------------------------------------------
# transform/original pairs with closed forms on both sides
# ---------------------------------------------------------------------------

BESSEL_A, BESSEL_B = 2.0, 1.5


def _sqrt(w):
    if isinstance(w, (mpmath.mpf, mpmath.mpc)):
        return mpmath.sqrt(w)
    if isinstance(w, complex):
        return complex(w) ** 0.5
    return math.sqrt(w)


def bessel_transform(theta):
    # sqrt(u-b)*sqrt(u+b) rather than sqrt(u^2-b^2): the latter picks up
    # spurious branch cuts on complex inversion contours
    u = theta + BESSEL_A
    return (u - _sqrt(u - BESSEL_B) * _sqrt(u + BESSEL_B)) / BESSEL_B


# f(t) = exp(-a t) I1(b t)/t evaluated at 30 digits and frozen
BESSEL_VALUES = {
    0.1: 0.61577669482195965715,
    1.0: 0.13285410415546514686,
    10.0: 6.763158715312600438e-5,
}

ROUND_TRIP = [
    ("exponential", lambda th: 1.0 / (th + 1.0), lambda t: math.exp(-t)),
    ("ramp", lambda th: 1.0 / th**2, lambda t: t),
    (
        "shifted exponential",
        lambda th: 0.3 / th + 0.7 / (th + 2.0),
        lambda t: 0.3 + 0.7 * math.exp(-2.0 * t),
    ),
    ("bessel pair", bessel_transform, BESSEL_VALUES.get),
]


class TestInvertExamples:
    def test_constant(self):
        value, _ = invert(lambda th: 1.0 / th, 1.0, GS)
        assert value == pytest.approx(1.0, abs=1e-8)

    def test_exponential(self):
        value, _ = invert(lambda th: 1.0 / (th + 1.0), 1.0, GS)
        assert value == pytest.approx(0.3678794411714423216, rel=1e-8)

    def test_ramp(self):
        value, _ = invert(lambda th: 1.0 / th**2, 2.5, GS)
        assert value == pytest.approx(2.5, rel=1e-8)


class TestRoundTrip:
    @pytest.mark.parametrize("name,transform,original", ROUND_TRIP, ids=lambda v: None)
    @pytest.mark.parametrize("t", [0.1, 1.0, 10.0])
    @pytest.mark.parametrize("cfg", [GS, TALBOT], ids=["gs", "talbot"])
    def test_within_error_estimate(self, name, transform, original, t, cfg):
        value, err = invert(transform, t, cfg)
        assert abs(value - original(t)) <= 10.0 * max(err, 1e-14)

    @pytest.mark.parametrize("t", [0.1, 1.0, 10.0])
    def test_methods_agree_on_smooth_transforms(self, t):
        # agreement relative to the inversion scale max(1, |value|), the same
        # normalization the error ceiling uses
        for name, transform, _ in ROUND_TRIP:
            gs_value, _ = invert(transform, t, GS)
            tb_value, _ = invert(transform, t, TALBOT)
            scale = max(1.0, abs(gs_value), abs(tb_value))
            assert abs(gs_value - tb_value) <= 1e-6 * scale, name

    def test_linearity(self):
        f = lambda th: 1.0 / (th + 1.0)
        g = lambda th: 1.0 / th**2
        combined, err_c = invert(lambda th: 2.0 * f(th) - 0.5 * g(th), 1.0, GS)
        vf, err_f = invert(f, 1.0, GS)
        vg, err_g = invert(g, 1.0, GS)
        budget = err_c + 2.0 * err_f + 0.5 * err_g + 1e-12
        assert abs(combined - (2.0 * vf - 0.5 * vg)) <= 10.0 * budget


class TestInvertContracts:
    def test_rejects_nonpositive_time(self):
        with pytest.raises(ValueError, match="positive"):
            invert(lambda th: 1.0 / th, 0.0, GS)
        with pytest.raises(ValueError, match="positive"):
            invert(lambda th: 1.0 / th, -2.0, GS)

    def test_nonfinite_value_raises(self):
        with pytest.raises(InversionError):
            invert(lambda th: float("nan"), 1.0, GS)

    def test_rough_transform_fails_error_ceiling(self):
        # exp(-theta)/theta is a unit step at t = 1; the approximants cannot
        # settle at the discontinuity and the error contract must trip
        with pytest.raises(InversionError, match="error estimate"):
            invert(lambda th: math.exp(-th) / th, 1.0, GS)

    def test_real_only_transform_falls_back_to_gs(self):
        def real_only(th):
            return 1.0 / (math.log1p(math.expm1(th)) + 1.0)  # rejects complex

        diag = {}
        value, _ = invert(real_only, 1.0, TALBOT, diagnostics=diag)
        assert diag.get("talbot_fallback")
        assert value == pytest.approx(math.exp(-1.0), rel=1e-6)

    def test_cross_check_folds_method_gap(self):
        cfg = InversionConfig(method="gaver-stehfest", n_terms=16, cross_check=True)
        diag = {}
        value, err = invert(lambda th: 1.0 / (th + 1.0), 1.0, cfg, diagnostics=diag)
        assert abs(value - math.exp(-1.0)) <= 10.0 * err
        assert 0.0 <= err < 1e-3
        assert diag["cross_check_gap"] < 1e-6


class TestConfigValidation:
    def test_gs_term_count_bounds(self):
        for bad in (15, 6, 22):
            with pytest.raises(ValueError, match="n_terms"):
                InversionConfig(n_terms=bad)

    def test_unknown_method(self):
        with pytest.raises(ValueError, match="method"):
            InversionConfig(method="bromwich")

    def test_talbot_node_bounds(self):
        for bad in (8, 128):
            with pytest.raises(ValueError, match="talbot_nodes"):
                InversionConfig(method="talbot", talbot_nodes=bad)

    def test_quadrature_bounds(self):
        with pytest.raises(ValueError, match="rel_tol"):
            QuadratureConfig(rel_tol=0.0)
        with pytest.raises(ValueError, match="abs_tol"):
            QuadratureConfig(abs_tol=0.0)
        with pytest.raises(ValueError, match="max_subdivisions"):
            QuadratureConfig(max_subdivisions=20)


class TestIntegrateSemiinf:
    def test_plain_exponential(self):
        value, err = integrate_semiinf(lambda z: math.exp(-z), 0.0)
        assert value == pytest.approx(1.0, abs=1e-10)
        assert err < 1e-8

    def test_damped_ramp_with_exp_hint(self):
        value, _ = integrate_semiinf(
            lambda z: z * math.exp(0.5 * z) * math.exp(-z), 0.0, tail=("exp", 0.5)
        )
        assert value == pytest.approx(4.0, rel=1e-10)

    def test_power_tail_with_hint(self):
        value, _ = integrate_semiinf(lambda z: z**-2.5, 1.0, tail=("power", 2.5))
        assert value == pytest.approx(1.0 / 1.5, rel=1e-8)

    def test_bad_hints_rejected(self):
        with pytest.raises(ValueError, match="rate"):
            integrate_semiinf(lambda z: math.exp(-z), 0.0, tail=("exp", -1.0))
        with pytest.raises(ValueError, match="exponent"):
            integrate_semiinf(lambda z: z**-2.5, 1.0, tail=("power", 1.0))
        with pytest.raises(ValueError, match="hint"):
            integrate_semiinf(lambda z: math.exp(-z), 0.0, tail=("cauchy", 1.0))
