"""Scale functions, ruin probabilities, and deficit transforms."""

from __future__ import annotations

import math

import pytest
from scipy.integrate import quad

from parisruin.laplace import InversionConfig
from parisruin.model import RiskModel
from parisruin.scale import (
    ScaleContext,
    _w_numeric,
    classical_ruin,
    classical_ruin_pk,
    deficit_mgf,
    inf_at_exp_time_atom,
    inf_at_exp_time_density,
    phi_inverse,
    ruin_time_lt,
    scale_w,
    scale_z,
)

RUIN_EXP_1 = 0.5 * math.exp(-0.5)  # classical ruin of (p=2, lam=1, Exp(1)) at x=1

CATALOG = [
    "cl_exp", "cl_mixture", "cl_pareto", "pure_bm",
    "bm_exp", "pure_stable", "stable_exp",
]


def all_contexts(request):
    get = request.getfixturevalue("ctx_for")
    return [(n, get(request.getfixturevalue(n))) for n in CATALOG]


@pytest.fixture
def bm_var2():
    return ScaleContext(RiskModel(premium=1.0, sigma=math.sqrt(2.0)))


@pytest.fixture
def exp_ctx(ctx_for, cl_exp):
    return ctx_for(cl_exp)


@pytest.fixture
def bm_ctx(ctx_for, pure_bm):
    return ctx_for(pure_bm)


@pytest.fixture
def mixture_ctx(ctx_for, cl_mixture):
    return ctx_for(cl_mixture)


class TestPhiInverse:
    def test_quadratic_closed_form(self, bm_var2):
        assert phi_inverse(bm_var2, 1.0) == pytest.approx(
            (math.sqrt(5.0) - 1.0) / 2.0, rel=1e-13
        )

    def test_zero_maps_to_zero(self, request):
        for name, ctx in all_contexts(request):
            assert phi_inverse(ctx, 0.0) == 0.0, name

    def test_exponential_round_trip(self, exp_ctx):
        assert phi_inverse(exp_ctx, 1.5) == pytest.approx(1.0, rel=1e-12)

    def test_identity_across_catalog(self, request):
        for name, ctx in all_contexts(request):
            for theta in (0.01, 0.1, 1.0, 10.0, 100.0):
                root = phi_inverse(ctx, theta)
                resid = abs(ctx.model.laplace_exponent(root) - theta)
                assert resid <= 1e-12 * max(1.0, theta), (name, theta)

    def test_negative_rejected(self, exp_ctx):
        with pytest.raises(ValueError, match=">= 0"):
            phi_inverse(exp_ctx, -0.5)


class TestScaleW:
    def test_brownian_closed_form(self, bm_var2):
        assert scale_w(bm_var2, 1.0) == pytest.approx(1.0 - math.exp(-1.0), rel=1e-12)

    def test_zero_below_support(self, request):
        for name, ctx in all_contexts(request):
            assert scale_w(ctx, -1.0) == 0.0, name
            assert scale_w(ctx, -1.0, 1.0) == 0.0, name

    def test_exponential_value(self, exp_ctx):
        assert scale_w(exp_ctx, 1.0) == pytest.approx(1.0 - RUIN_EXP_1, rel=1e-12)

    def test_boundary_dichotomy(self, request):
        for name, ctx in all_contexts(request):
            expect = 1.0 / ctx.model.premium if ctx.model.is_bounded_variation() else 0.0
            assert scale_w(ctx, 0.0) == expect, name

    def test_numeric_route_matches_rational(self, exp_ctx, bm_ctx, mixture_ctx):
        talbot = InversionConfig(method="talbot", talbot_nodes=48)
        for ctx in (exp_ctx, bm_ctx, mixture_ctx):
            forced = ScaleContext(ctx.model, inversion=talbot)
            for q in (0.0, 1.0):
                for x in (0.5, 2.0, 8.0):
                    ref = scale_w(ctx, x, q)
                    assert _w_numeric(forced, x, q) == pytest.approx(ref, rel=1e-9)
                    assert _w_numeric(ctx, x, q) == pytest.approx(ref, rel=1e-5)

    def test_monotone_in_x(self, request):
        for name, ctx in all_contexts(request):
            values = [scale_w(ctx, x, 0.5) for x in (0.1, 0.5, 1.0, 2.0, 5.0)]
            assert all(a < b for a, b in zip(values, values[1:])), name

    def test_transform_identity(self, request):
        # int_0^inf exp(-theta x) W(x) dx = 1/phi(theta) at theta = 1
        for name, ctx in all_contexts(request):
            value, _ = quad(
                lambda x: math.exp(-x) * scale_w(ctx, x), 0.0, 60.0, limit=120
            )
            target = 1.0 / ctx.model.laplace_exponent(1.0)
            assert value == pytest.approx(target, rel=1e-6), name


class TestScaleZ:
    def test_trivial_values(self, exp_ctx, bm_ctx):
        assert scale_z(exp_ctx, 3.0, 0.0) == 1.0
        assert scale_z(exp_ctx, 0.0, 1.0) == 1.0
        assert scale_z(bm_ctx, -2.0, 1.0) == 1.0

    def test_quadrature_oracle(self, exp_ctx, mixture_ctx):
        for ctx in (exp_ctx, mixture_ctx):
            integral, _ = quad(lambda y: scale_w(ctx, y, 1.0), 0.0, 1.0, limit=100)
            assert scale_z(ctx, 1.0, 1.0) == pytest.approx(1.0 + integral, rel=1e-8)


class TestClassicalRuin:
    def test_exponential_value(self, exp_ctx):
        assert classical_ruin(exp_ctx, 1.0) == pytest.approx(RUIN_EXP_1, rel=1e-12)

    def test_at_zero(self, request, exp_ctx):
        assert classical_ruin(exp_ctx, 0.0) == pytest.approx(0.5, rel=1e-12)
        get = request.getfixturevalue("ctx_for")
        for name in ("pure_bm", "bm_exp", "stable_exp"):
            ctx = get(request.getfixturevalue(name))
            assert classical_ruin(ctx, 0.0) == 1.0, name

    def test_monotone_and_bounded(self, request):
        for name, ctx in all_contexts(request):
            values = [classical_ruin(ctx, x) for x in (0.0, 0.5, 1.0, 2.0, 5.0)]
            assert all(0.0 <= v <= 1.0 for v in values), name
            assert all(a >= b for a, b in zip(values, values[1:])), name


class TestClassicalRuinPK:
    def test_matches_scale_route_exponential(self, exp_ctx, mixture_ctx):
        for ctx in (exp_ctx, mixture_ctx):
            for x in (0.5, 1.0, 3.0):
                value, bound = classical_ruin_pk(ctx, x)
                assert bound < 1e-6
                assert value == pytest.approx(classical_ruin(ctx, x), abs=1e-4)

    def test_origin_is_claim_load(self, exp_ctx):
        # the origin bin smears a half-step of equilibrium mass: O(h) error
        value, _ = classical_ruin_pk(exp_ctx, 0.0)
        assert value == pytest.approx(0.5, abs=5e-4)

    def test_brownian_kernel(self, bm_ctx):
        value, _ = classical_ruin_pk(bm_ctx, 1.0)
        assert value == pytest.approx(classical_ruin(bm_ctx, 1.0), abs=1e-4)


class TestRuinTimeLT:
    def test_small_q_recovers_ruin(self, ctx_for, cl_exp, bm_exp):
        for model in (cl_exp, bm_exp):
            ctx = ctx_for(model)
            value = ruin_time_lt(ctx, 1.0, 1e-9)
            assert value == pytest.approx(classical_ruin(ctx, 1.0), rel=1e-6)

    def test_bounded_variation_origin_identity(self, exp_ctx):
        q = 1.0
        root = phi_inverse(exp_ctx, q)
        expect = 1.0 - q / (root * exp_ctx.model.premium)
        assert ruin_time_lt(exp_ctx, 0.0, q) == pytest.approx(expect, rel=1e-12)

    def test_monotone_decreasing_in_q(self, exp_ctx):
        values = [ruin_time_lt(exp_ctx, 1.0, q) for q in (0.1, 0.5, 1.0, 2.0)]
        assert all(a > b for a, b in zip(values, values[1:]))


class TestDeficitMgf:
    def test_small_v_recovers_ruin(self, request):
        for name, ctx in all_contexts(request):
            value = deficit_mgf(ctx, 1.0, 1e-8)
            assert value == pytest.approx(classical_ruin(ctx, 1.0), rel=1e-5), name

    def test_memoryless_deficit(self, exp_ctx):
        # exponential claims leave an Exp(xi) deficit, so the mgf factors
        assert deficit_mgf(exp_ctx, 1.0, 1.0) == pytest.approx(
            RUIN_EXP_1 / 2.0, rel=1e-10
        )

    def test_brownian_creep(self, bm_ctx):
        # continuous paths cross by creeping: the deficit is identically zero
        for v in (0.5, 1.0, 4.0):
            assert deficit_mgf(bm_ctx, 1.0, v) == pytest.approx(
                classical_ruin(bm_ctx, 1.0), rel=1e-9
            )

    def test_dominated_by_ruin_and_monotone(self, request):
        for name, ctx in all_contexts(request):
            ruin_x = classical_ruin(ctx, 1.0)
            values = [deficit_mgf(ctx, 1.0, v) for v in (0.25, 1.0, 4.0)]
            assert all(v <= ruin_x + 1e-12 for v in values), name
            assert all(a >= b - 1e-12 for a, b in zip(values, values[1:])), name

    def test_generic_route_matches_rational(self, cl_mixture, monkeypatch):
        rational_ctx = ScaleContext(cl_mixture)
        expected = [
            deficit_mgf(rational_ctx, x, v) for x, v in ((0.5, 1.0), (2.0, 0.7))
        ]
        monkeypatch.setattr(ScaleContext, "is_rational", property(lambda self: False))
        generic_ctx = ScaleContext(cl_mixture)
        got = [deficit_mgf(generic_ctx, x, v) for x, v in ((0.5, 1.0), (2.0, 0.7))]
        # the generic route integrates differences of numerically inverted W
        # values, whose truncation floor caps the achievable agreement
        assert got == pytest.approx(expected, rel=1e-4)


class TestInfimumLaw:
    def test_total_mass(self, exp_ctx, bm_ctx):
        for ctx, omega in ((exp_ctx, 1.0), (bm_ctx, 2.0)):
            density, _ = quad(
                lambda z: inf_at_exp_time_density(ctx, z, omega), 0.0, 80.0, limit=150
            )
            assert density + inf_at_exp_time_atom(ctx, omega) == pytest.approx(
                1.0, abs=1e-4
            )

    def test_atom_values(self, exp_ctx, bm_ctx):
        # bounded variation: mass q/(Phi(q) p) at zero; diffusion: none
        q = 1.0
        expect = q / (phi_inverse(exp_ctx, q) * exp_ctx.model.premium)
        assert inf_at_exp_time_atom(exp_ctx, q) == pytest.approx(expect, rel=1e-10)
        assert inf_at_exp_time_atom(bm_ctx, q) == pytest.approx(0.0, abs=1e-10)

    def test_brownian_density_finite_at_origin(self, bm_ctx):
        assert 0.0 < inf_at_exp_time_density(bm_ctx, 1e-6, 1.0) < math.inf

    def test_transform_identity(self, exp_ctx):
        beta, omega = 2.0, 1.0
        pb, po = phi_inverse(exp_ctx, beta), phi_inverse(exp_ctx, omega)
        target = omega * (pb - po) / (po * (beta - omega))
        value, _ = quad(
            lambda z: math.exp(-pb * z) * inf_at_exp_time_density(exp_ctx, z, omega),
            0.0,
            80.0,
            limit=150,
        )
        assert value + inf_at_exp_time_atom(exp_ctx, omega) == pytest.approx(
            target, rel=1e-6
        )
