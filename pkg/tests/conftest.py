"""Shared fixtures: the model catalog used across the test modules."""

from __future__ import annotations

import pytest

from parisruin.model import (
    Exponential,
    MixtureOfExponentials,
    Pareto,
    RiskModel,
    StableComponent,
)
from parisruin.scale import ScaleContext

_CONTEXTS: dict[int, ScaleContext] = {}


@pytest.fixture
def ctx_for():
    """Map a catalog model to a ScaleContext, reusing memoized caches."""

    def get(model: RiskModel) -> ScaleContext:
        key = id(model)
        if key not in _CONTEXTS:
            _CONTEXTS[key] = ScaleContext(model)
        return _CONTEXTS[key]

    return get


@pytest.fixture(scope="session")
def cl_exp() -> RiskModel:
    """Compound Poisson with exponential claims: premium 2, rate 1, Exp(1)."""
    return RiskModel(premium=2.0, claim_intensity=1.0, claims=Exponential(1.0))


@pytest.fixture(scope="session")
def cl_mixture() -> RiskModel:
    """Compound Poisson with a two-term exponential mixture."""
    return RiskModel(
        premium=2.0,
        claim_intensity=1.5,
        claims=MixtureOfExponentials(weights=(0.4, 0.6), rates=(2.0, 5.0)),
    )


@pytest.fixture(scope="session")
def cl_pareto() -> RiskModel:
    """Compound Poisson with Pareto claims (mean 0.5)."""
    return RiskModel(premium=2.0, claim_intensity=1.0, claims=Pareto(shape=3.0, scale=1.0))


@pytest.fixture(scope="session")
def pure_bm() -> RiskModel:
    """Drifted Brownian motion: premium 1, volatility 1."""
    return RiskModel(premium=1.0, sigma=1.0)


@pytest.fixture(scope="session")
def bm_exp() -> RiskModel:
    """Diffusion plus exponential claims: premium 1, sigma 1, rate 1/2, Exp(1)."""
    return RiskModel(premium=1.0, claim_intensity=0.5, claims=Exponential(1.0), sigma=1.0)


@pytest.fixture(scope="session")
def pure_stable() -> RiskModel:
    """Spectrally negative stable: premium 2, c=0.3, alpha=1.9."""
    return RiskModel(premium=2.0, stable=StableComponent(c=0.3, alpha=1.9))


@pytest.fixture(scope="session")
def stable_exp() -> RiskModel:
    """Stable component plus exponential claims."""
    return RiskModel(
        premium=2.0,
        claim_intensity=1.0,
        claims=Exponential(2.0),
        stable=StableComponent(c=0.3, alpha=1.9),
    )
