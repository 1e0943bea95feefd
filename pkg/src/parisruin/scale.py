"""Scale functions and first-passage functionals of the surplus process.

Everything here is driven by the Laplace exponent ``phi`` of a
:class:`~parisruin.model.RiskModel`:

* ``phi_inverse`` — the right inverse ``Phi(q)`` (largest root of ``phi = q``);
* ``scale_w``/``scale_z`` — the q-scale functions ``W^(q)``, ``Z^(q)`` with
  ``int_0^inf exp(-b x) W^(q)(x) dx = 1/(phi(b)-q)``;
* classical ruin, the ruin-time transform, the law of the running infimum at
  an exponential horizon, and the Laplace transform of the deficit at ruin.

Models whose exponent is a rational function (exponential or mixture claims,
optional Brownian part) get exact residue expansions ``W^(q)(x) =
sum_k exp(theta_k x)/phi'(theta_k)`` over the real roots of ``phi = q``.
Everything else (Pareto claims, stable component) inverts the *tilted*
transform ``1/(phi(. + Phi(q)) - q)`` numerically — the tilt removes the pole
at ``Phi(q)`` so the integrand is completely monotone and Gaver–Stehfest
converges cleanly — and multiplies back ``exp(Phi(q) x)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, interpolate, optimize, signal

from .laplace import InversionConfig, NumericalError, QuadratureConfig, integrate_semiinf, invert
from .model import DomainError, Exponential, MixtureOfExponentials, Pareto, RiskModel
from .specfun import ml_tail

__all__ = [
    "ScaleContext",
    "phi_inverse",
    "scale_w",
    "scale_w_deriv",
    "scale_z",
    "classical_ruin",
    "classical_ruin_pk",
    "deficit_mgf",
    "ruin_time_lt",
    "inf_at_exp_time_density",
    "inf_at_exp_time_atom",
]

_PHI_TOL = 1e-13


@dataclass
class ScaleContext:
    """A model plus numerical policy and memoized root/transform data."""

    model: RiskModel
    inversion: InversionConfig = field(default_factory=lambda: InversionConfig(n_terms=20))
    quadrature: QuadratureConfig = field(default_factory=QuadratureConfig)
    _roots: dict = field(default_factory=dict, repr=False)
    _phi_inv: dict = field(default_factory=dict, repr=False)
    _w_curve: list = field(default_factory=lambda: [0.0, None], repr=False)

    @property
    def is_rational(self) -> bool:
        return self.model.has_rational_exponent()


# ---------------------------------------------------------------------------
# right inverse of the exponent
# ---------------------------------------------------------------------------


def phi_inverse(ctx: ScaleContext, q) -> float | complex:
    """Largest root ``Phi(q)`` of ``phi(beta) = q`` for ``q >= 0``.

    Satisfies ``|phi(Phi(q)) - q| <= 1e-13 * max(1, q)``.  Complex ``q``
    (off the negative real axis, as on inversion contours) is supported for
    rational models only, where the analytic continuation of the ``q > 0``
    branch is the root of largest real part.
    """
    if isinstance(q, complex):
        if q.imag == 0.0:
            return phi_inverse(ctx, q.real)
        return _phi_inverse_complex(ctx, q)
    q = float(q)
    if q < 0.0:
        raise ValueError(f"phi_inverse requires q >= 0, got {q}")
    if q == 0.0:
        return 0.0  # net profit condition makes 0 the largest root
    hit = ctx._phi_inv.get(q)
    if hit is not None:
        return hit
    m = ctx.model
    phi = m.laplace_exponent
    drift = m.mean_drift()
    hi = q / drift + 1.0
    while phi(hi) < q:
        hi *= 2.0
        if hi > 1e150:
            raise NumericalError(f"phi_inverse bracket growth failed at q={q}")
    root = optimize.brentq(lambda s: phi(s) - q, 0.0, hi, xtol=1e-14, rtol=8.9e-16)
    # Newton polish: brentq terminates on interval width, not residual
    for _ in range(3):
        resid = phi(root) - q
        if abs(resid) <= _PHI_TOL * max(1.0, q):
            break
        root -= resid / m.laplace_exponent_deriv(root)
    ctx._phi_inv[q] = root
    return root


def _phi_inverse_complex(ctx: ScaleContext, q: complex) -> complex:
    """Analytic continuation of ``Phi`` to complex ``q`` (rational models).

    The branch points of ``Phi`` sit on the negative real axis, so continuing
    along the segment from the real anchor ``|q|`` to ``q`` (which stays off
    that axis for ``Im q != 0``) is unambiguous.  A Newton homotopy tracks the
    root along the segment; fixed root-ordering rules (e.g. largest real part)
    are wrong on parts of inversion contours and are not used.
    """
    m = ctx.model
    if not m.has_rational_exponent():
        raise TypeError(
            "complex inversion contours require a rational Laplace exponent"
        )
    anchor = abs(q)
    beta = complex(phi_inverse(ctx, anchor), 0.0)
    u, step = 0.0, 0.25
    while u < 1.0:
        step = min(step, 1.0 - u)
        target = anchor + (u + step) * (q - anchor)
        cand = beta
        for _ in range(8):
            val, deriv = _rational_phi(m, cand)
            resid = val - target
            if abs(resid) <= 1e-12 * max(1.0, abs(target)):
                break
            if deriv == 0.0:
                break
            cand -= resid / deriv
        else:
            pass
        val, _ = _rational_phi(m, cand)
        if abs(val - target) <= 1e-9 * max(1.0, abs(target)):
            beta, u = cand, u + step
            step *= 2.0
        else:
            step *= 0.5
            if step < 1e-6:
                raise NumericalError(
                    f"phi continuation stalled at q={q} (u={u})"
                )
    return complex(beta)


# ---------------------------------------------------------------------------
# rational-model residue machinery
# ---------------------------------------------------------------------------


def _rational_poly(m: RiskModel, q: float) -> np.ndarray:
    """Coefficients (numpy order) of the numerator polynomial of ``phi - q``."""
    # phi(b) - q = p b - lam - q + s2/2 b^2 + lam * sum w_i xi_i/(xi_i + b)
    # multiplied by prod_i (xi_i + b).
    if isinstance(m.claims, Exponential):
        weights, rates = (1.0,), (m.claims.rate,)
    elif isinstance(m.claims, MixtureOfExponentials):
        weights, rates = m.claims.weights, m.claims.rates
    else:
        weights, rates = (), ()
    base = [m.premium, -(m.claim_intensity + q)]
    if m.sigma > 0.0:
        base = [0.5 * m.sigma**2] + base
    poly = np.array(base, dtype=complex if isinstance(q, complex) else float)
    denom = np.array([1.0])
    for r in rates:
        denom = np.polymul(denom, np.array([1.0, r]))
    poly = np.polymul(poly, denom)
    for i, (w, r) in enumerate(zip(weights, rates)):
        others = np.array([1.0])
        for j, r2 in enumerate(rates):
            if j != i:
                others = np.polymul(others, np.array([1.0, r2]))
        poly = np.polyadd(poly, m.claim_intensity * w * r * others)
    return poly


def _rational_phi(m: RiskModel, beta: float) -> tuple[float, float]:
    """``(phi(beta), phi'(beta))`` as the rational continuation (no domain check).

    The residue expansion needs the exponent's meromorphic continuation at
    roots below the probabilistic finiteness domain (between claim-rate poles).
    """
    phi = m.premium * beta + 0.5 * m.sigma**2 * beta * beta
    dphi = m.premium + m.sigma**2 * beta
    if m.claim_intensity > 0.0:
        if isinstance(m.claims, Exponential):
            pairs = ((1.0, m.claims.rate),)
        else:
            pairs = tuple(zip(m.claims.weights, m.claims.rates))
        phi -= m.claim_intensity
        for w, r in pairs:
            phi += m.claim_intensity * w * r / (r + beta)
            dphi -= m.claim_intensity * w * r / (r + beta) ** 2
    return phi, dphi


def _rational_roots(ctx: ScaleContext, q: float) -> tuple[np.ndarray, np.ndarray]:
    """Roots ``theta_k`` of ``phi = q`` and residues ``A_k = 1/phi'(theta_k)``."""
    key = float(q)
    hit = ctx._roots.get(key)
    if hit is not None:
        return hit
    m = ctx.model
    poly = _rational_poly(m, q)
    raw = np.roots(poly)
    if np.max(np.abs(raw.imag)) > 1e-6 * max(1.0, np.max(np.abs(raw.real))):
        raise NumericalError(f"complex roots in rational scale expansion at q={q}: {raw}")
    roots = np.sort(raw.real)
    # Newton polish on phi itself (the polynomial multiply dilutes precision)
    for _ in range(3):
        for i, t in enumerate(roots):
            val, der = _rational_phi(m, t)
            roots[i] = t - (val - q) / der
    roots = np.sort(roots)
    if q == 0.0:
        # the top root is exactly Phi(0) = 0
        roots[-1] = 0.0
    gaps = np.diff(roots)
    if len(roots) > 1 and np.min(gaps) < 1e-9 * max(1.0, np.max(np.abs(roots))):
        raise NumericalError(f"nearly multiple roots in scale expansion at q={q}")
    residues = np.array([1.0 / _rational_phi(m, t)[1] for t in roots])
    ctx._roots[key] = (roots, residues)
    return roots, residues


# ---------------------------------------------------------------------------
# scale functions
# ---------------------------------------------------------------------------


def _w_numeric(ctx: ScaleContext, x: float, q: float) -> float:
    m = ctx.model
    shift = phi_inverse(ctx, q)
    # The shifted transform 1/(phi(beta+Phi(q))-q) has a simple pole at
    # beta = 0 with residue 1/phi'(Phi(q)) — the e^{Phi(q)x} mode of W.
    # Subtracting it and adding the mode back analytically leaves a decaying
    # remainder, which the inversion handles accurately at any x (sampling
    # near a pole at large x is what degrades the raw form).
    lead = 1.0 / m._phi_deriv(shift)

    def transform(beta):
        return 1.0 / (m.laplace_exponent(beta + shift) - q) - lead / beta

    value, _ = invert(transform, x, ctx.inversion)
    return math.exp(shift * x) * (value + lead)


def scale_w(ctx: ScaleContext, x: float, q: float = 0.0) -> float:
    """q-scale function ``W^(q)(x)`` (0 for x < 0).

    At ``x = 0`` the exact boundary value is returned: ``1/p`` for bounded
    variation, 0 otherwise.
    """
    if q < 0.0:
        raise ValueError(f"scale_w requires q >= 0, got {q}")
    m = ctx.model
    if x < 0.0:
        return 0.0
    if x == 0.0:
        return 1.0 / m.premium if m.is_bounded_variation() else 0.0
    if ctx.is_rational:
        roots, residues = _rational_roots(ctx, q)
        return float(np.sum(residues * np.exp(roots * x)))
    return _w_numeric(ctx, x, q)


def scale_w_deriv(ctx: ScaleContext, x: float, q: float = 0.0) -> float:
    """Derivative ``W^(q)'(x)`` for ``x > 0``.

    Analytic for rational models; central difference (step ``1e-6*max(1,x)``)
    on the numeric route.
    """
    if not x > 0.0:
        raise ValueError(f"scale_w_deriv requires x > 0, got {x}")
    if ctx.is_rational:
        roots, residues = _rational_roots(ctx, q)
        return float(np.sum(residues * roots * np.exp(roots * x)))
    h = 1e-6 * max(1.0, x)
    h = min(h, 0.5 * x)
    return (scale_w(ctx, x + h, q) - scale_w(ctx, x - h, q)) / (2.0 * h)


def scale_z(ctx: ScaleContext, x: float, q: float) -> float:
    """``Z^(q)(x) = 1 + q * int_0^x W^(q)(y) dy`` (1 for x <= 0)."""
    if q < 0.0:
        raise ValueError(f"scale_z requires q >= 0, got {q}")
    if x <= 0.0 or q == 0.0:
        return 1.0
    if ctx.is_rational:
        roots, residues = _rational_roots(ctx, q)
        acc = 0.0
        for t, a in zip(roots, residues):
            acc += a * x if t == 0.0 else a * math.expm1(t * x) / t
        return 1.0 + q * acc
    value, _ = integrate.quad(
        lambda y: scale_w(ctx, y, q), 0.0, x,
        epsabs=ctx.quadrature.abs_tol, epsrel=max(ctx.quadrature.rel_tol, 1e-9),
        limit=ctx.quadrature.max_subdivisions,
    )
    return 1.0 + q * value


# ---------------------------------------------------------------------------
# ruin functionals
# ---------------------------------------------------------------------------


def classical_ruin(ctx: ScaleContext, x: float) -> float:
    """``P_x(tau_0^- < infinity) = 1 - phi'(0+) W(x)`` (1 for x < 0)."""
    if x < 0.0:
        return 1.0
    value = 1.0 - ctx.model.mean_drift() * scale_w(ctx, x, 0.0)
    return min(1.0, max(0.0, value))


def ruin_time_lt(ctx: ScaleContext, x: float, q: float) -> float:
    """``E_x[exp(-q tau_0^-); tau_0^- < infinity]`` for ``q > 0``."""
    if not q > 0.0:
        raise ValueError(f"ruin_time_lt requires q > 0, got {q}")
    if x < 0.0:
        return 1.0
    value = scale_z(ctx, x, q) - q / phi_inverse(ctx, q) * scale_w(ctx, x, q)
    return min(1.0, max(0.0, value))


def deficit_mgf(ctx: ScaleContext, x: float, v: float) -> float:
    """``E_x[exp(v * X_{tau_0^-}); tau_0^- < infinity]`` for ``v > 0``.

    ``X_{tau_0^-} <= 0`` is the (negated) deficit at ruin, so the value lies in
    ``[0, classical_ruin(x)]`` and decreases in ``v``.  Evaluated in a
    cancellation-free form: with ``W = W^(0)``,

        deficit_mgf(x, v) = phi(v) * int_0^inf exp(-v u) (W(x+u) - W(x)) du,

    which for rational models collapses to the residue sum
    ``(phi(v)/v) * sum_k A_k theta_k exp(theta_k x)/(v - theta_k)``.
    """
    is_complex = isinstance(v, complex) and v.imag != 0.0
    if not is_complex and not v.real > 0.0:
        raise ValueError(f"deficit_mgf requires Re v > 0, got {v}")
    if x < 0.0:
        raise ValueError(f"deficit_mgf requires x >= 0, got {x}")
    m = ctx.model
    # the contour continuation can leave the probabilistic finiteness domain;
    # phi is meromorphic there, so use the rational continuation for complex v
    phi_v = _rational_phi(m, v)[0] if is_complex else m.laplace_exponent(v)
    if ctx.is_rational:
        roots, residues = _rational_roots(ctx, 0.0)
        acc = 0j if is_complex else 0.0
        for t, a in zip(roots, residues):
            if t == 0.0:
                continue
            acc += a * t * math.exp(t * x) / (v - t)
        value = phi_v / v * acc
        if is_complex:
            return value
        return min(1.0, max(0.0, value))
    if is_complex:
        raise TypeError("complex deficit transform requires a rational model")
    v = float(v)
    curve = _w_zero_curve(ctx, x + 45.0 / v + 1.0)
    w_x = float(curve(x))
    value, _ = integrate_semiinf(
        lambda u: math.exp(-v * u) * (float(curve(x + u)) - w_x),
        0.0,
        ctx.quadrature,
        tail=("exp", v),
    )
    return min(1.0, max(0.0, phi_v * value))


def _w_zero_curve(ctx: ScaleContext, upper: float):
    """Cached dense interpolant of ``W^(0)`` on ``[0, upper]`` (non-rational models).

    The deficit transform integrates differences of ``W`` against
    ``e^{-v u}`` over ranges of a hundred units and is itself re-inverted at
    every transform node, so a single evaluation would otherwise trigger
    thousands of scale-function inversions.  A one-time cubic interpolant
    over a geometric grid (dense near 0 where ``W`` bends, sparse in the
    flat tail) replaces them with table lookups; the grid is rebuilt when a
    wider range is requested.
    """
    built_upper, interp = ctx._w_curve
    if interp is not None and built_upper >= upper:
        return interp
    hi = max(1.25 * upper, 8.0)
    grid = np.concatenate([[0.0], np.geomspace(1e-4, hi, 640)])
    values = np.array([scale_w(ctx, float(s), 0.0) for s in grid])
    interp = interpolate.CubicSpline(grid, values)
    ctx._w_curve[:] = [hi, interp]
    return interp


# ---------------------------------------------------------------------------
# running infimum at an exponential horizon
# ---------------------------------------------------------------------------


def inf_at_exp_time_density(ctx: ScaleContext, z: float, omega: float) -> float:
    """Density at ``z > 0`` of ``-inf X`` over an independent Exp(omega) horizon.

    From level 0:  ``(omega/Phi(omega)) W^(omega)'(z) - omega W^(omega)(z)``.
    For bounded variation there is an extra atom at 0, see
    :func:`inf_at_exp_time_atom`.
    """
    if not z > 0.0:
        raise ValueError(f"density argument must be positive, got {z}")
    if not omega > 0.0:
        raise ValueError(f"omega must be positive, got {omega}")
    phi_q = phi_inverse(ctx, omega)
    if ctx.is_rational:
        # The coefficient of the growing exp(Phi(omega) z) mode cancels
        # identically ((omega/Phi)Phi - omega = 0 against residue 1/phi'),
        # so drop that root exactly instead of losing the cancellation to
        # rounding at large z.
        roots, residues = _rational_roots(ctx, omega)
        total = 0.0
        for t, a in zip(roots, residues):
            if abs(t - phi_q) <= 1e-8 * (1.0 + abs(phi_q)):
                continue
            total += a * math.exp(t * z) * (omega / phi_q * t - omega)
        return total
    w = scale_w(ctx, z, omega)
    wd = scale_w_deriv(ctx, z, omega)
    return omega / phi_q * wd - omega * w


def inf_at_exp_time_atom(ctx: ScaleContext, omega: float) -> float:
    """Mass at 0 of the law of ``-inf X`` over an Exp(omega) horizon."""
    if not omega > 0.0:
        raise ValueError(f"omega must be positive, got {omega}")
    return 1.0 - ruin_time_lt(ctx, 0.0, omega)


# ---------------------------------------------------------------------------
# Pollaczek–Khinchine cross-route
# ---------------------------------------------------------------------------


def _ladder_factor_pmf(m: RiskModel, grid: np.ndarray, h: float) -> np.ndarray:
    """PMF on the grid of the claim-free ladder factor K (transform p b/phi_0(b))."""
    pmf = np.zeros_like(grid)
    if m.sigma > 0.0:
        rate = 2.0 * m.premium / m.sigma**2
        upper = np.minimum(1.0, -np.expm1(-rate * (grid + 0.5 * h)))
        lower = np.concatenate(([0.0], upper[:-1]))
        pmf = upper - lower
    elif m.stable is not None:
        rate = m.premium / m.stable.c
        tail_hi = np.array(
            [ml_tail(rate, m.stable.alpha, g + 0.5 * h) for g in grid]
        )
        tail_lo = np.concatenate(([1.0], tail_hi[:-1]))
        pmf = tail_lo - tail_hi
    else:
        pmf[0] = 1.0
    return pmf


def _integrated_tail_cdf(claims, z: np.ndarray) -> np.ndarray:
    """CDF of the claim equilibrium distribution (density tail/mean)."""
    nu = claims.mean()
    if isinstance(claims, Exponential):
        return -np.expm1(-claims.rate * z)
    if isinstance(claims, MixtureOfExponentials):
        acc = np.zeros_like(z)
        for w, r in zip(claims.weights, claims.rates):
            acc += w / r * -np.expm1(-r * z)
        return acc / nu
    if isinstance(claims, Pareto):
        a, s = claims.shape, claims.scale
        return 1.0 - (s / (s + z)) ** (a - 1.0)
    raise TypeError(f"unsupported claim distribution {claims!r}")


def classical_ruin_pk(
    ctx: ScaleContext, x: float, h: float = 1e-3, n_max: int = 40
) -> tuple[float, float]:
    """Classical ruin by the compound-geometric (Pollaczek–Khinchine) series.

    The ruin probability is assembled as
    ``1 - (1-rho) sum_n rho^n (K^{(n+1)*} * M^{n*})(x)`` with ``rho`` the claim
    load, ``M`` the claim equilibrium distribution, and ``K`` the ladder factor
    of the claim-free part (a point mass for bounded variation, exponential
    for a Brownian part, Mittag-Leffler for a stable part).  Distributions are
    discretized to step ``h`` and convolved; the series is truncated after
    ``n_max`` terms.

    Returns:
        ``(value, series_bound)`` where ``series_bound = rho**(n_max+1)`` wraps
        the discarded geometric mass.
    """
    if x < 0.0:
        return 1.0, 0.0
    m = ctx.model
    rho = m.claim_intensity * (m.claims.mean() if m.claims else 0.0) / m.premium
    n_bins = int(round(x / h)) + 1
    grid = np.arange(n_bins) * h

    def cdf_at_x(pmf: np.ndarray) -> float:
        # bins are centered on the grid, so the last one straddles x; counting
        # half of it evaluates the cdf at x instead of at the bin edge x+h/2
        # (at x = 0 the single bin holds the bounded-variation atom — keep it)
        if n_bins == 1:
            return float(np.sum(pmf))
        return float(np.sum(pmf[:-1]) + 0.5 * pmf[-1])

    k_pmf = _ladder_factor_pmf(m, grid, h)
    if rho == 0.0:
        return float(min(1.0, max(0.0, 1.0 - cdf_at_x(k_pmf)))), 0.0
    edges_hi = grid + 0.5 * h
    m_cdf_hi = _integrated_tail_cdf(m.claims, edges_hi)
    m_pmf = np.diff(np.concatenate(([0.0], m_cdf_hi)))
    step = signal.fftconvolve(k_pmf, m_pmf)[:n_bins]
    current = k_pmf
    series = cdf_at_x(current)
    rho_pow = 1.0
    for _ in range(1, n_max + 1):
        current = signal.fftconvolve(current, step)[:n_bins]
        rho_pow *= rho
        series += rho_pow * cdf_at_x(current)
    value = 1.0 - (1.0 - rho) * series
    bound = rho_pow * rho
    return float(min(1.0, max(0.0, value))), float(bound)
