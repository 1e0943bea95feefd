"""Special functions backing the closed forms and asymptotic constants.

``bessel_i1``/``bessel_i1_scaled`` and ``normal_cdf`` delegate to scipy's
vetted implementations (they are infrastructure, and the tests pin them
against independent series/asymptotic oracles).  ``ml_tail`` — the
Mittag-Leffler survival tail that appears in the first-passage kernel of the
stable model — is authored here: it is evaluated by its power series in
double precision while safe, and re-summed in arbitrary precision when the
alternating terms grow beyond what float64 cancellation can support.
"""

from __future__ import annotations

import logging
import math

import mpmath
from scipy import special as _sp

__all__ = ["bessel_i1", "bessel_i1_scaled", "normal_cdf", "ml_tail", "NonConvergenceError"]

logger = logging.getLogger(__name__)

# float64 cancellation budget: largest series term allowed before switching to
# arbitrary precision (max_term * eps ~ 1e-8 absolute error at the limit).
_FLOAT_MAX_TERM_LOG10 = 8.0
_SERIES_MAX_TERMS = 20000


class NonConvergenceError(RuntimeError):
    """A series failed to converge even after the extended-precision retry."""


def bessel_i1(x: float) -> float:
    """Modified Bessel function of the first kind, order 1."""
    return float(_sp.i1(x))


def bessel_i1_scaled(x: float) -> float:
    """``exp(-|x|) * I1(x)`` — overflow-safe form for large arguments."""
    return float(_sp.i1e(x))


def normal_cdf(x: float) -> float:
    """Standard normal distribution function."""
    return float(_sp.ndtr(x))


# ---------------------------------------------------------------------------
# Mittag-Leffler survival tail
# ---------------------------------------------------------------------------


def _ml_peak_log10(y: float, a: float) -> float:
    """log10 of the largest series term of ``E_a(-y)`` (Stirling estimate)."""
    if y <= 1.0:
        return 0.0
    n_peak = max(0.0, (y ** (1.0 / a) - 1.0) / a)
    if n_peak < 1.0:
        return 0.0
    return (n_peak * math.log(y) - math.lgamma(1.0 + a * n_peak)) / math.log(10.0)


def _ml_series_float(y: float, a: float) -> float:
    acc = 1.0
    prev = 1.0
    log_y = math.log(y)
    for n in range(1, _SERIES_MAX_TERMS):
        t = math.exp(n * log_y - math.lgamma(1.0 + a * n))
        acc += -t if n % 2 else t
        if t < 1e-18 and t <= prev:
            return acc
        prev = t
    raise NonConvergenceError(f"Mittag-Leffler series did not converge (y={y}, a={a})")


def _ml_series_mp(y: float, a: float, peak_log10: float) -> float:
    with mpmath.workdps(int(30 + max(0.0, peak_log10) * 1.2)):
        ym = mpmath.mpf(y)
        am = mpmath.mpf(a)
        acc = mpmath.mpf(1)
        prev = mpmath.mpf(1)
        tiny = mpmath.mpf(10) ** (-(mpmath.mp.dps - 5))
        for n in range(1, _SERIES_MAX_TERMS):
            t = ym**n / mpmath.gamma(1 + am * n)
            acc += -t if n % 2 else t
            if t < tiny and t <= prev:
                return float(acc)
            prev = t
        raise NonConvergenceError(
            f"Mittag-Leffler series did not converge in extended precision (y={y}, a={a})"
        )


def ml_tail(p: float, alpha: float, x: float) -> float:
    """Survival tail ``E_{alpha-1}(-p * x**(alpha-1))`` for the stable kernel.

    This is the complementary distribution function of the first-passage
    kernel whose transform is ``1/(1 + p**-1 ... )`` — the caller supplies the
    rate ``p`` already normalized.  ``alpha`` in (1, 2]; ``alpha == 2``
    degenerates to ``exp(-p*x)``.  The value is a probability and is clamped
    to [0, 1]; a raw value escaping by more than 1e-8 indicates a summation
    problem and is logged as a diagnostic.

    Raises:
        NonConvergenceError: if the series fails even in extended precision.
    """
    if p < 0.0:
        raise ValueError(f"rate p must be nonnegative, got {p}")
    if not 1.0 < alpha <= 2.0:
        raise ValueError(f"alpha must lie in (1, 2], got {alpha}")
    if x < 0.0:
        raise ValueError(f"x must be nonnegative, got {x}")
    if x == 0.0 or p == 0.0:
        return 1.0
    if alpha == 2.0:
        return math.exp(-p * x)
    a = alpha - 1.0
    y = p * x**a
    peak = _ml_peak_log10(y, a)
    if peak <= _FLOAT_MAX_TERM_LOG10:
        raw = _ml_series_float(y, a)
    else:
        raw = _ml_series_mp(y, a, peak)
    if raw < -1e-8 or raw > 1.0 + 1e-8:
        logger.warning(
            "ml_tail(p=%g, alpha=%g, x=%g) outside [0,1] by %.3e before clamping",
            p, alpha, x, max(-raw, raw - 1.0),
        )
    return min(1.0, max(0.0, raw))
