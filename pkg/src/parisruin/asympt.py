"""Large-``x`` asymptotics of the Parisian ruin probability.

Two regimes are covered.  Under a Cramér condition (a positive root ``gamma``
of ``phi(-gamma) = 0``) the probability decays exponentially,

    P_x(parisian ruin) ~ C(zeta) * exp(-gamma x),

with ``C(zeta) = P * phi'(0+)/(gamma mu) + (1 - P) * f_c(zeta)`` splitting the
limit over the two terms of the excursion representation (``P`` is the
Parisian constant, ``mu`` the tilted ladder-height mean).  For heavy,
convolution-equivalent jump tails of class parameter ``alpha_c >= 0`` the
decay is driven by the integrated jump tail instead, with a window correction
``f_e`` averaging the up-crossing time over the asymptotic overshoot density
``B``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

from scipy import optimize

from .laplace import InversionConfig, integrate_semiinf, invert
from .model import DomainError, Exponential, MixtureOfExponentials, Pareto, RiskModel
from .scale import ScaleContext, phi_inverse

__all__ = [
    "CramerData",
    "ConvEqData",
    "cramer_gamma",
    "cramer_mu",
    "cramer_mu_quadrature",
    "f_c",
    "cramer_constant",
    "b_density",
    "f_e",
    "conv_asympt",
    "classical_tail_asymptote",
    "integrated_jump_tail",
]

logger = logging.getLogger(__name__)


@dataclass
class CramerData:
    """Adjustment coefficient, tilted ladder mean, and the limit constant."""

    gamma: float
    mu: float
    constant: float
    f_c_at_zeta: float
    diagnostics: dict = field(default_factory=dict)


@dataclass
class ConvEqData:
    """Convolution-equivalent class data and the window bracket at ``zeta``."""

    alpha_c: float
    f_e_at_zeta: float
    bracket: float
    condition_flags: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# Cramér regime
# ---------------------------------------------------------------------------


def cramer_gamma(ctx: ScaleContext) -> float:
    """Adjustment coefficient: the positive root of ``phi(-gamma) = 0``.

    Exists for light-tailed claims (exponential/mixture, optionally with a
    Brownian part) and for pure Brownian models; heavy tails (Pareto claims
    or a stable component) admit no positive tilt and raise ``DomainError``.
    """
    m = ctx.model
    if m.stable is not None:
        raise DomainError("no adjustment coefficient: stable jumps have a heavy tail")
    if isinstance(m.claims, Pareto):
        raise DomainError("no adjustment coefficient: Pareto claims have infinite "
                          "exponential moments for every positive tilt")
    if m.claim_intensity == 0.0:
        # phi(-g) = -p g + sigma^2 g^2 / 2
        return 2.0 * m.premium / m.sigma**2
    if isinstance(m.claims, Exponential) and m.sigma == 0.0:
        return m.claims.rate - m.claim_intensity / m.premium
    rate_cap = (
        m.claims.rate if isinstance(m.claims, Exponential) else min(m.claims.rates)
    )

    def neg_exponent(g: float) -> float:
        return m._phi(-g)

    lo = 1e-12
    hi = rate_cap * (1.0 - 1e-12)
    f_lo = neg_exponent(lo)
    if f_lo >= 0.0:  # pragma: no cover - excluded by net-profit validation
        raise DomainError("phi(-g) not negative near 0; check the net profit condition")
    # expand toward the pole until the sign flips
    g = rate_cap * 0.5
    while neg_exponent(g) < 0.0:
        g = 0.5 * (g + hi)
        if hi - g < 1e-15 * rate_cap:
            raise DomainError("no adjustment coefficient below the smallest claim rate")
    root = optimize.brentq(neg_exponent, lo, g, xtol=1e-15, rtol=8.9e-16)
    # one Newton step to push |phi(-gamma)| to the 1e-12 scale
    deriv = -m._phi_deriv(-root)
    if deriv != 0.0:
        root -= neg_exponent(root) / deriv
    return root


def cramer_mu(ctx: ScaleContext, gamma: float | None = None) -> float:
    """Tilted ladder-height mean ``mu = -phi'(-gamma)/gamma``."""
    g = cramer_gamma(ctx) if gamma is None else gamma
    return -ctx.model._phi_deriv(-g) / g


def cramer_mu_quadrature(ctx: ScaleContext, gamma: float | None = None) -> float:
    """The same ``mu`` from the claim-tail integral ``lam int y e^{gy} tail(y) dy``.

    Valid for models without a Brownian part; equals :func:`cramer_mu` by an
    integration by parts using ``lam E[e^{gY}] = lam + p g``.
    """
    m = ctx.model
    if m.sigma > 0.0:
        raise ValueError("the tail-integral route applies to sigma = 0 models")
    g = cramer_gamma(ctx) if gamma is None else gamma
    claims = m.claims
    rate_min = claims.rate if isinstance(claims, Exponential) else min(claims.rates)

    def integrand(y: float) -> float:
        return y * math.exp(g * y) * claims.tail(y)

    value, _ = integrate_semiinf(integrand, 0.0, ctx.quadrature, tail=("exp", rate_min - g))
    return m.claim_intensity * value


def f_c(
    ctx: ScaleContext,
    gamma: float,
    mu: float,
    zeta: float,
    inversion: InversionConfig | None = None,
) -> float:
    """Window correction ``f_c(zeta)`` of the Cramér limit.

    Inverts ``phi'(0+)/(gamma mu theta) - 1/(Phi(theta)(gamma + Phi(theta)) mu)``
    at ``zeta``.  The two terms cancel as ``theta -> 0`` (so ``f_c`` vanishes at
    large ``zeta``) and the first dominates as ``theta -> inf`` (so
    ``f_c(0+) = phi'(0+)/(gamma mu)``, the classical Cramér constant).
    """
    if not zeta > 0.0:
        raise ValueError(f"window must be positive, got {zeta}")
    drift = ctx.model.mean_drift()

    def transform(theta):
        theta = theta if isinstance(theta, complex) else float(theta)
        v = phi_inverse(ctx, theta)
        return drift / (gamma * mu * theta) - 1.0 / (v * (gamma + v) * mu)

    # the Cramér regime implies light tails, so the transform extends to the
    # complex contour, whose convergence beats the real-axis truncation floor
    cfg = inversion or InversionConfig(method="talbot")
    value, _ = invert(transform, zeta, cfg)
    return value


def cramer_constant(
    ctx: ScaleContext,
    zeta: float,
    constant: float,
    inversion: InversionConfig | None = None,
) -> CramerData:
    """The limit ``C(zeta)`` of ``e^{gamma x} P_x(parisian ruin)`` as ``x -> inf``.

    Args:
        ctx: scale context.
        zeta: window length.
        constant: the Parisian constant ``P(tau^zeta < inf)`` (from
            ``parisian_constant`` or a simulation estimate).
        inversion: configuration for the ``f_c`` inversion.
    """
    g = cramer_gamma(ctx)
    mu = cramer_mu(ctx, g)
    fc = f_c(ctx, g, mu, zeta, inversion)
    drift = ctx.model.mean_drift()
    value = constant * drift / (g * mu) + (1.0 - constant) * fc
    diag = {"classical_prefactor": drift / (g * mu)}
    if ctx.model.sigma == 0.0 and ctx.model.claim_intensity > 0.0:
        diag["mu_quadrature"] = cramer_mu_quadrature(ctx, g)
    return CramerData(g, mu, value, fc, diag)


# ---------------------------------------------------------------------------
# convolution-equivalent regime
# ---------------------------------------------------------------------------


def _check_alpha(ctx: ScaleContext, alpha_c: float) -> None:
    if alpha_c < 0.0:
        raise ValueError(f"class parameter must be nonnegative, got {alpha_c}")
    if alpha_c == 0.0:
        return
    m = ctx.model
    if m.stable is not None or isinstance(m.claims, Pareto):
        raise DomainError(
            "alpha_c > 0 requires exponential moments of the jump tail; "
            "stable/Pareto tails only support alpha_c = 0"
        )
    value = m._phi(-alpha_c)
    if value >= 0.0:
        raise DomainError(
            f"tilt condition violated: phi(-alpha_c) = {value} must be negative"
        )


def b_density(ctx: ScaleContext, alpha_c: float, z: float) -> float:
    """Asymptotic overshoot density ``B(z)`` of the class-``alpha_c`` regime.

    ``B(z) = e^{-alpha z}/EX1 * (-phi(-alpha) + alpha int_z^inf e^{alpha y} jump_tail(y) dy)``;
    integrates to 1 for sigma = 0 models.  ``alpha_c = 0`` returns 0 (the
    conditional overshoot escapes to infinity; see :func:`f_e`).
    """
    _check_alpha(ctx, alpha_c)
    if z < 0.0:
        raise ValueError(f"overshoot argument must be nonnegative, got {z}")
    if alpha_c == 0.0:
        return 0.0
    m = ctx.model
    claims = m.claims
    rate_min = claims.rate if isinstance(claims, Exponential) else min(claims.rates)

    def integrand(y: float) -> float:
        return math.exp(alpha_c * y) * m.jump_tail(y)

    tail_int, _ = integrate_semiinf(
        integrand, z, ctx.quadrature, tail=("exp", rate_min - alpha_c)
    )
    drift = m.mean_drift()
    return math.exp(-alpha_c * z) / drift * (
        -m._phi(-alpha_c) + alpha_c * tail_int
    )


def f_e(
    ctx: ScaleContext,
    alpha_c: float,
    zeta: float,
    inversion: InversionConfig | None = None,
) -> float:
    """Window factor ``f_e(zeta)``: the ``B``-average of ``P(T_z^+ > zeta)``.

    Inverts ``(1/theta) int_0^inf (1 - e^{-Phi(theta) z}) B(z) dz`` at ``zeta``
    for ``alpha_c > 0``.  For ``alpha_c = 0`` the overshoot escapes to
    infinity, every climb outlasts the window, and ``f_e`` is identically 1.
    """
    _check_alpha(ctx, alpha_c)
    if not zeta > 0.0:
        raise ValueError(f"window must be positive, got {zeta}")
    if alpha_c == 0.0:
        return 1.0
    m = ctx.model

    def transform(theta: float) -> float:
        theta = float(theta)
        v = phi_inverse(ctx, theta)

        def integrand(z: float) -> float:
            return -math.expm1(-v * z) * b_density(ctx, alpha_c, z)

        value, _ = integrate_semiinf(integrand, 0.0, ctx.quadrature, tail=("exp", alpha_c))
        return value / theta

    cfg = inversion or InversionConfig(n_terms=12)
    value, _ = invert(transform, zeta, cfg)
    return min(1.0, max(0.0, value))


def integrated_jump_tail(ctx: ScaleContext, x: float) -> float:
    """``int_x^inf jump_tail(y) dy`` in closed form for the claim catalog."""
    if x < 0.0:
        raise ValueError(f"level must be nonnegative, got {x}")
    m = ctx.model
    total = 0.0
    lam = m.claim_intensity
    claims = m.claims
    if lam > 0.0:
        if isinstance(claims, Exponential):
            total += lam * math.exp(-claims.rate * x) / claims.rate
        elif isinstance(claims, MixtureOfExponentials):
            total += lam * sum(
                w / r * math.exp(-r * x) for w, r in zip(claims.weights, claims.rates)
            )
        else:
            a, s = claims.shape, claims.scale
            total += lam * s**a * (s + x) ** (1.0 - a) / (a - 1.0)
    if m.stable is not None:
        if x == 0.0:
            raise ValueError("the stable tail integral diverges at x = 0")
        st = m.stable
        total += st.c * x ** (1.0 - st.alpha) / math.gamma(2.0 - st.alpha)
    return total


def classical_tail_asymptote(ctx: ScaleContext, alpha_c: float, x: float) -> float:
    """Asymptote of the classical ruin probability in the class-``alpha_c`` regime.

    ``EX1 (alpha/phi(-alpha))^2 int_x^inf jump_tail`` for ``alpha_c > 0``;
    the limiting factor is ``(1/EX1)^2`` at ``alpha_c = 0``.
    """
    _check_alpha(ctx, alpha_c)
    drift = ctx.model.mean_drift()
    if alpha_c == 0.0:
        prefactor = 1.0 / drift
    else:
        prefactor = drift * (alpha_c / ctx.model._phi(-alpha_c)) ** 2
    return prefactor * integrated_jump_tail(ctx, x)


def conv_asympt(
    ctx: ScaleContext,
    alpha_c: float,
    x: float,
    zeta: float,
    constant: float,
    inversion: InversionConfig | None = None,
) -> float:
    """Convolution-equivalent asymptote of the Parisian ruin probability.

    ``classical_tail_asymptote(x) * (P + (1 - P) f_e(zeta))`` with ``P`` the
    Parisian constant.  Class membership of the jump tail is declared by the
    caller, not verified.  At ``alpha_c = 0`` the bracket collapses to 1 and
    the result is the classical subexponential asymptote, window-free.
    """
    data = conv_data(ctx, alpha_c, zeta, constant, inversion)
    return classical_tail_asymptote(ctx, alpha_c, x) * data.bracket


def conv_data(
    ctx: ScaleContext,
    alpha_c: float,
    zeta: float,
    constant: float,
    inversion: InversionConfig | None = None,
) -> ConvEqData:
    """The window bracket ``P + (1-P) f_e(zeta)`` and its class data."""
    fe = f_e(ctx, alpha_c, zeta, inversion)
    bracket = constant + (1.0 - constant) * fe
    flags = {
        "declared_class_parameter": alpha_c,
        "tilt_condition_checked": alpha_c > 0.0,
    }
    if alpha_c > 0.0:
        flags["phi_at_minus_alpha"] = ctx.model._phi(-alpha_c)
    return ConvEqData(alpha_c, fe, bracket, flags)
