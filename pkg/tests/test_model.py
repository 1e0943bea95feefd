"""Model construction, Laplace exponents, jump tails, and serialization."""

from __future__ import annotations

import math

import pytest
from scipy.integrate import quad

from parisruin.model import (
    DomainError,
    Exponential,
    MixtureOfExponentials,
    Pareto,
    RiskModel,
    StableComponent,
    model_from_dict,
    model_to_dict,
)


class TestConstruction:
    def test_net_profit_enforced(self):
        with pytest.raises(ValueError, match="net profit"):
            RiskModel(premium=1.0, claim_intensity=2.0, claims=Exponential(1.0))

    def test_claims_require_intensity(self):
        with pytest.raises(ValueError, match="claims"):
            RiskModel(premium=1.0, claims=Exponential(1.0))
        with pytest.raises(ValueError, match="claims"):
            RiskModel(premium=1.0, claim_intensity=1.0)

    def test_sigma_stable_exclusive(self):
        with pytest.raises(ValueError, match="mutually exclusive"):
            RiskModel(premium=1.0, sigma=1.0, stable=StableComponent(c=0.5, alpha=1.5))

    def test_mixture_weights_validated(self):
        with pytest.raises(ValueError, match="sum to 1"):
            MixtureOfExponentials(weights=(0.5, 0.6), rates=(1.0, 2.0))

    def test_pareto_needs_finite_mean(self):
        with pytest.raises(ValueError, match="shape"):
            Pareto(shape=1.0, scale=1.0)

    def test_stable_index_range(self):
        for alpha in (1.0, 2.0, 0.5):
            with pytest.raises(ValueError, match="alpha"):
                StableComponent(c=1.0, alpha=alpha)

    def test_variation_predicates(self, cl_exp, pure_bm, pure_stable):
        assert cl_exp.is_bounded_variation()
        assert not pure_bm.is_bounded_variation()
        assert not pure_stable.is_bounded_variation()
        assert cl_exp.has_rational_exponent()
        assert pure_bm.has_rational_exponent()
        assert not pure_stable.has_rational_exponent()


class TestLaplaceExponent:
    def test_compound_poisson_closed_value(self, cl_exp):
        # phi(b) = p*b - lam*(1 - xi/(xi+b)) = 2b - b/(1+b)
        for b in (0.5, 1.0, 3.0):
            assert cl_exp.laplace_exponent(b) == pytest.approx(
                2 * b - b / (1 + b), rel=1e-14
            )

    def test_brownian_closed_value(self, pure_bm):
        assert pure_bm.laplace_exponent(2.0) == pytest.approx(2.0 + 2.0, rel=1e-14)

    def test_stable_closed_value(self, pure_stable):
        assert pure_stable.laplace_exponent(1.5) == pytest.approx(
            2 * 1.5 + 0.3 * 1.5**1.9, rel=1e-14
        )

    def test_derivative_matches_finite_difference(self, cl_mixture):
        h = 1e-6
        for b in (0.3, 1.0, 2.5):
            fd = (
                cl_mixture.laplace_exponent(b + h) - cl_mixture.laplace_exponent(b - h)
            ) / (2 * h)
            assert cl_mixture.laplace_exponent_deriv(b) == pytest.approx(fd, rel=1e-8)

    def test_mean_drift_is_derivative_at_zero(self, cl_mixture):
        # phi(0) = 0 exactly, so phi(h)/h is the one-sided difference quotient
        h = 1e-6
        fd = cl_mixture.laplace_exponent(h) / h
        assert cl_mixture.mean_drift() == pytest.approx(fd, rel=1e-4)

    def test_negative_argument_rejected(self, cl_mixture, cl_pareto):
        for model in (cl_mixture, cl_pareto):
            with pytest.raises(DomainError):
                model.laplace_exponent(-1e-7)
            with pytest.raises(DomainError):
                model.laplace_exponent_deriv(-1e-7)

    def test_pareto_transform_by_quadrature(self, cl_pareto):
        claims = cl_pareto.claims
        direct, _ = quad(
            lambda z: math.exp(-0.7 * z) * 3.0 * (1.0 + z) ** -4.0, 0.0, math.inf
        )
        assert claims.transform(0.7) == pytest.approx(direct, rel=1e-9)

    def test_domain_guard_below_abscissa(self, cl_exp):
        with pytest.raises(DomainError):
            cl_exp.laplace_exponent(-1.0)  # at the exponential pole
        with pytest.raises(DomainError):
            cl_exp.laplace_exponent(-1.5)

    def test_stable_domain_is_nonnegative(self, pure_stable):
        with pytest.raises(DomainError):
            pure_stable.laplace_exponent(-0.1)

    def test_tilted_exponent_identity(self, cl_exp):
        # phi_g(b) = phi(b + g) - phi(g) with g inside the domain
        g = 0.5
        for b in (0.2, 1.0):
            expected = cl_exp.laplace_exponent(b + g) - cl_exp.laplace_exponent(g)
            assert cl_exp.tilted_exponent(b, g) == pytest.approx(expected, rel=1e-13)


class TestJumpTail:
    def test_compound_poisson_tail(self, cl_exp):
        assert cl_exp.jump_tail(0.7) == pytest.approx(math.exp(-0.7), rel=1e-14)

    def test_mixture_tail(self, cl_mixture):
        z = 0.4
        expected = 1.5 * (0.4 * math.exp(-2 * z) + 0.6 * math.exp(-5 * z))
        assert cl_mixture.jump_tail(z) == pytest.approx(expected, rel=1e-14)

    def test_stable_tail_consistent_with_exponent(self, pure_stable):
        # Pi(z, inf) = c*(alpha-1)*z**-alpha/Gamma(2-alpha): integrating
        # z * Pi(dz) over (0, 1] plus the compensated tail must reproduce the
        # curvature of phi; check the closed tail against the density integral
        s = pure_stable.stable
        k = s.levy_constant
        tail_quad, _ = quad(lambda y: k * y ** (-1 - s.alpha), 2.0, math.inf)
        assert pure_stable.jump_tail(2.0) == pytest.approx(tail_quad, rel=1e-10)

    def test_gaussian_limit_kills_jumps(self):
        # as alpha -> 2 the stable component degenerates to Brownian motion
        heavy = StableComponent(c=0.5, alpha=1.999)
        assert heavy.levy_constant < 0.002


class TestSerialization:
    def test_round_trip_all_kinds(self, cl_exp, cl_mixture, cl_pareto, pure_bm, stable_exp):
        for m in (cl_exp, cl_mixture, cl_pareto, pure_bm, stable_exp):
            assert model_from_dict(model_to_dict(m)) == m

    def test_missing_premium_rejected(self):
        with pytest.raises(ValueError, match="premium"):
            model_from_dict({"claim_intensity": 0.0})

    def test_unknown_claim_kind_rejected(self):
        with pytest.raises(ValueError, match="kind"):
            model_from_dict({"premium": 1.0, "claim_intensity": 1.0, "claims": {"kind": "gamma"}})
