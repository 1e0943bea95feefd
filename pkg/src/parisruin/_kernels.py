"""Compiled simulation kernels.

Every path draws from its own counter-based stream (splitmix64 keyed by the
absolute path index), so results are bit-identical for a fixed seed no matter
how paths are chunked across workers.  Kernels process one chunk of paths and
return plain counters; all merging/statistics happen in :mod:`parisruin.mc`.

Conventions shared by the kernels:

- ruin verdicts are grid verdicts: a path is "below" when its level at a
  check time is ``< 0``; Parisian ruin triggers when the time since the
  excursion's first below-check reaches ``zeta`` without an intervening
  check ``>= 0``; ``zeta = 0`` means classical ruin (first below-check).
- paths are killed (censored) when a check at or above level ``barrier``
  occurs outside an excursion; the caller converts kill/timeout counts into
  a truncation bound.
- ``claim_kind``: 0 exponential (a[0] = rate), 1 mixture (a = cumulative
  weights, b = rates), 2 Pareto (a[0] = shape, b[0] = scale).
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

U64 = np.uint64
_GOLDEN = U64(0x9E3779B97F4A7C15)
_MIX1 = U64(0xBF58476D1CE4E5B9)
_MIX2 = U64(0x94D049BB133111EB)
_INV_2_53 = 1.0 / 9007199254740992.0
_TWO_PI = 6.283185307179586


@njit(inline="always")
def _mix64(z):
    z = (z ^ (z >> U64(30))) * _MIX1
    z = (z ^ (z >> U64(27))) * _MIX2
    return z ^ (z >> U64(31))


@njit(inline="always")
def _stream_state(seed, path_id):
    return _mix64(_mix64(U64(seed)) + U64(path_id) * _GOLDEN)


@njit(inline="always")
def _next_u64(state):
    state = state + _GOLDEN
    return state, _mix64(state)


@njit(inline="always")
def _uniform(state):
    state, z = _next_u64(state)
    return state, (np.float64(z >> U64(11)) + 0.5) * _INV_2_53


@njit(inline="always")
def _exponential(state, rate):
    state, u = _uniform(state)
    return state, -math.log(u) / rate


@njit(inline="always")
def _normal_pair(state):
    state, u1 = _uniform(state)
    state, u2 = _uniform(state)
    r = math.sqrt(-2.0 * math.log(u1))
    a = _TWO_PI * u2
    return state, r * math.cos(a), r * math.sin(a)


@njit(inline="always")
def _claim(state, kind, a, b):
    state, u = _uniform(state)
    if kind == 0:
        return state, -math.log(u) / a[0]
    if kind == 1:
        state, uc = _uniform(state)
        i = 0
        while uc > a[i] and i < a.shape[0] - 1:
            i += 1
        return state, -math.log(u) / b[i]
    return state, b[0] * (u ** (-1.0 / a[0]) - 1.0)


@njit(inline="always")
def _poisson(state, mean):
    # Knuth inversion; step sizes keep the mean small
    limit = math.exp(-mean)
    k = 0
    prod = 1.0
    while True:
        state, u = _uniform(state)
        prod *= u
        if prod <= limit:
            return state, k
        k += 1


@njit(inline="always")
def _stable_standard(state, alpha, b_ang, s_scale):
    # Chambers-Mallows-Stuck: totally right-skewed standard stable variate
    state, u1 = _uniform(state)
    state, u2 = _uniform(state)
    u = math.pi * (u1 - 0.5)
    w = -math.log(u2)
    t1 = math.sin(alpha * (u + b_ang)) / math.cos(u) ** (1.0 / alpha)
    t2 = (math.cos(u - alpha * (u + b_ang)) / w) ** ((1.0 - alpha) / alpha)
    return state, s_scale * t1 * t2


@njit(inline="always")
def _censor_bound(level, amp_exp, rate_exp, amp_pow, pow_exp):
    bound = amp_exp * math.exp(-rate_exp * level)
    if amp_pow > 0.0:
        bound += amp_pow * max(level, 1.0) ** (-pow_exp)
    return min(1.0, bound)


# ---------------------------------------------------------------------------
# bounded variation: exact event-driven paths
# ---------------------------------------------------------------------------


@njit(cache=True, nogil=True)
def run_bv_chunk(
    seed,
    path_start,
    n_paths,
    x,
    zeta,
    premium,
    lam,
    claim_kind,
    claim_a,
    claim_b,
    barrier,
    max_time,
    amp_exp,
    rate_exp,
    amp_pow,
    pow_exp,
):
    """Exact simulation between claim epochs (no time discretization)."""
    n_ruined = np.int64(0)
    n_killed = np.int64(0)
    n_timeout = np.int64(0)
    timeout_bound = 0.0
    for i in range(n_paths):
        state = _stream_state(seed, path_start + i)
        t = 0.0
        lvl = x
        status = 0  # 0 running, 1 ruined, 2 killed, 3 timeout
        while status == 0:
            state, w = _exponential(state, lam)
            time_left = max_time - t
            cross = (barrier - lvl) / premium
            if cross <= w and cross <= time_left:
                status = 2
                break
            if time_left <= w:
                status = 3
                timeout_bound += _censor_bound(
                    lvl + premium * time_left, amp_exp, rate_exp, amp_pow, pow_exp
                )
                break
            t += w
            lvl += premium * w
            state, c = _claim(state, claim_kind, claim_a, claim_b)
            lvl -= c
            if lvl >= 0.0:
                continue
            if zeta == 0.0:
                status = 1
                break
            # excursion below zero; linear climb makes recovery deterministic
            exc_start = t
            while status == 0:
                recovery = t + (-lvl) / premium
                if recovery - exc_start >= zeta:
                    status = 1
                    break
                state, w2 = _exponential(state, lam)
                if t + w2 >= max_time:
                    status = 3
                    if recovery <= max_time:
                        # recovers before the horizon with no further claims
                        timeout_bound += _censor_bound(
                            premium * (max_time - recovery),
                            amp_exp,
                            rate_exp,
                            amp_pow,
                            pow_exp,
                        )
                    else:
                        timeout_bound += 1.0
                    break
                if t + w2 < recovery:
                    t += w2
                    lvl += premium * w2
                    state, c2 = _claim(state, claim_kind, claim_a, claim_b)
                    lvl -= c2
                    continue
                # recovers before the next claim; excursion was short enough
                t += w2
                lvl += premium * w2
                if lvl >= barrier:
                    status = 2
                    break
                state, c2 = _claim(state, claim_kind, claim_a, claim_b)
                lvl -= c2
                if lvl < 0.0:
                    exc_start = t
                else:
                    break
        if status == 1:
            n_ruined += 1
        elif status == 2:
            n_killed += 1
        elif status == 3:
            n_timeout += 1
    return n_ruined, n_killed, n_timeout, timeout_bound


# ---------------------------------------------------------------------------
# graded-grid kernels (Brownian part / stable part)
# ---------------------------------------------------------------------------


@njit(inline="always")
def _detector_update(below, exc_start, status, lvl, t, zeta, barrier):
    """One grid check of the Parisian automaton.  Returns the new state."""
    if status != 0:
        return below, exc_start, status
    if below:
        if lvl >= 0.0:
            below = False
        elif t - exc_start >= zeta:
            status = 1
    else:
        if lvl < 0.0:
            if zeta == 0.0:
                status = 1
            else:
                below = True
                exc_start = t
        elif lvl >= barrier:
            status = 2
    return below, exc_start, status


@njit(cache=True, nogil=True)
def run_gauss_chunk(
    seed,
    path_start,
    n_paths,
    x,
    zeta,
    premium,
    sigma,
    lam,
    claim_kind,
    claim_a,
    claim_b,
    barrier,
    max_time,
    dt,
    band_width,
    cap_above,
    cap_below,
    richardson,
    amp_exp,
    rate_exp,
    amp_pow,
    pow_exp,
):
    """Graded Euler grid for models with a Brownian part.

    Steps are exact in distribution (Gaussian + compound Poisson over the
    step), so the only discretization effect is where the level is *checked*.
    Near the boundary the check spacing is ``dt``; away from it steps grow
    quadratically while keeping the boundary ``band_width`` standard
    deviations away, capped at ``cap_above``/``cap_below`` and at half the
    drift distance to the boundary.

    With ``richardson`` the base grid is ``dt/2`` and two detector automata
    share every increment: the fine one checks each substep, the coarse one
    every second substep, yielding coupled estimates at ``dt/2`` and ``dt``.
    """
    base_dt = dt / 2.0 if richardson == 1 else dt
    counts = np.zeros(11, dtype=np.float64)
    # 0 ruin_f, 1 kill_f, 2 timeout_f, 3 bound_f, 4 ruin_c, 5 kill_c,
    # 6 timeout_c, 7 bound_c, 8 ruin_both, 9 steps, 10 unused
    for i in range(n_paths):
        state = _stream_state(seed, path_start + i)
        t = 0.0
        lvl = x
        below_f = False
        exc_f = 0.0
        status_f = 0
        below_c = False
        exc_c = 0.0
        status_c = 0 if richardson == 1 else 2_000_000
        parity = 0
        have_spare = False
        spare = 0.0
        while status_f == 0 or (richardson == 1 and status_c == 0):
            dist = abs(lvl)
            grow = dist / band_width
            h = base_dt
            if grow > 1.0:
                h = base_dt * grow * grow
            cap = cap_below if (lvl < 0.0 or below_f or below_c) else cap_above
            if h > cap:
                h = cap
            drift_cap = 0.5 * dist / premium
            if dist > band_width and h > drift_cap:
                h = max(base_dt, drift_cap)
            paired = richardson == 1 and h < 2.0 * base_dt
            if paired:
                h = base_dt
            elif richardson == 1 and parity == 1:
                # close the open pair before taking a far step
                h = base_dt
                paired = True
            if t + h >= max_time:
                if status_f == 0:
                    status_f = 3
                    counts[3] += 1.0 if below_f else _censor_bound(
                        lvl, amp_exp, rate_exp, amp_pow, pow_exp
                    )
                if richardson == 1 and status_c == 0:
                    status_c = 3
                    counts[7] += 1.0 if below_c else _censor_bound(
                        lvl, amp_exp, rate_exp, amp_pow, pow_exp
                    )
                break
            # exact-in-distribution increment over h
            if have_spare:
                g = spare
                have_spare = False
            else:
                state, g, spare = _normal_pair(state)
                have_spare = True
            inc = premium * h + sigma * math.sqrt(h) * g
            if lam > 0.0:
                state, k = _poisson(state, lam * h)
                for _ in range(k):
                    state, c = _claim(state, claim_kind, claim_a, claim_b)
                    inc -= c
            lvl += inc
            t += h
            counts[9] += 1.0
            below_f, exc_f, status_f = _detector_update(
                below_f, exc_f, status_f, lvl, t, zeta, barrier
            )
            if richardson == 1:
                if paired:
                    parity ^= 1
                    if parity == 0:
                        below_c, exc_c, status_c = _detector_update(
                            below_c, exc_c, status_c, lvl, t, zeta, barrier
                        )
                else:
                    below_c, exc_c, status_c = _detector_update(
                        below_c, exc_c, status_c, lvl, t, zeta, barrier
                    )
        if status_f == 1:
            counts[0] += 1.0
        elif status_f == 2:
            counts[1] += 1.0
        elif status_f == 3:
            counts[2] += 1.0
        if richardson == 1:
            if status_c == 1:
                counts[4] += 1.0
            elif status_c == 2:
                counts[5] += 1.0
            elif status_c == 3:
                counts[6] += 1.0
            if status_f == 1 and status_c == 1:
                counts[8] += 1.0
    return counts


@njit(cache=True, nogil=True)
def run_stable_chunk(
    seed,
    path_start,
    n_paths,
    x,
    zeta,
    premium,
    stable_c,
    alpha,
    lam,
    claim_kind,
    claim_a,
    claim_b,
    barrier,
    max_time,
    dt,
    band_width,
    cap_above,
    cap_below,
    linear_grading,
    amp_exp,
    rate_exp,
    amp_pow,
    pow_exp,
):
    """Graded grid for models with a spectrally negative stable component.

    Increments over ``h`` are exact in distribution: drift + scaled
    Chambers-Mallows-Stuck stable draw + compound Poisson claims.  Classical
    runs (``zeta = 0``) use linear step grading (heavy tails make distant
    jump-crossings common, and recovery misses must stay ``O(dt)``); Parisian
    runs grade with the ``alpha`` power matching the increment scale.
    """
    cos_factor = abs(math.cos(math.pi * alpha / 2.0))
    b_ang = math.atan(math.tan(math.pi * alpha / 2.0)) / alpha
    s_scale = (1.0 + math.tan(math.pi * alpha / 2.0) ** 2) ** (1.0 / (2.0 * alpha))
    counts = np.zeros(11, dtype=np.float64)
    for i in range(n_paths):
        state = _stream_state(seed, path_start + i)
        t = 0.0
        lvl = x
        below = False
        exc_start = 0.0
        status = 0
        while status == 0:
            dist = abs(lvl)
            grow = dist / band_width
            h = dt
            if grow > 1.0:
                if linear_grading == 1:
                    h = dt * grow
                else:
                    h = dt * grow**alpha
            cap = cap_below if lvl < 0.0 else cap_above
            if h > cap:
                h = cap
            drift_cap = 0.5 * dist / premium
            if dist > band_width and h > drift_cap:
                h = max(dt, drift_cap)
            if t + h >= max_time:
                status = 3
                counts[3] += 1.0 if below else _censor_bound(
                    lvl, amp_exp, rate_exp, amp_pow, pow_exp
                )
                break
            state, v = _stable_standard(state, alpha, b_ang, s_scale)
            inc = premium * h - (stable_c * h * cos_factor) ** (1.0 / alpha) * v
            if lam > 0.0:
                state, k = _poisson(state, lam * h)
                for _ in range(k):
                    state, c = _claim(state, claim_kind, claim_a, claim_b)
                    inc -= c
            lvl += inc
            t += h
            counts[9] += 1.0
            below, exc_start, status = _detector_update(
                below, exc_start, status, lvl, t, zeta, barrier
            )
        if status == 1:
            counts[0] += 1.0
        elif status == 2:
            counts[1] += 1.0
        elif status == 3:
            counts[2] += 1.0
    return counts


# ---------------------------------------------------------------------------
# running infimum at an exponential horizon (uniform grid)
# ---------------------------------------------------------------------------


@njit(cache=True, nogil=True)
def run_inf_chunk(
    seed,
    path_start,
    n_paths,
    omega,
    premium,
    sigma,
    lam,
    claim_kind,
    claim_a,
    claim_b,
    dt,
    out,
):
    """Samples of ``-inf X`` over an independent Exp(omega) horizon, from 0.

    Uniform grid: the infimum is tracked over level checks every ``dt`` plus
    the exact horizon endpoint.  Writes into ``out[i]`` for path ``i``.
    """
    for i in range(n_paths):
        state = _stream_state(seed, path_start + i)
        state, horizon = _exponential(state, omega)
        t = 0.0
        lvl = 0.0
        lowest = 0.0
        have_spare = False
        spare = 0.0
        while t < horizon:
            h = dt if t + dt <= horizon else horizon - t
            if have_spare and h == dt:
                g = spare
                have_spare = False
            else:
                state, g, s2 = _normal_pair(state)
                if h == dt:
                    spare = s2
                    have_spare = True
            inc = premium * h + sigma * math.sqrt(h) * g
            if lam > 0.0:
                state, k = _poisson(state, lam * h)
                for _ in range(k):
                    state, c = _claim(state, claim_kind, claim_a, claim_b)
                    inc -= c
            lvl += inc
            t += h
            if lvl < lowest:
                lowest = lvl
        out[i] = -lowest
    return 0


# ---------------------------------------------------------------------------
# vectorized stable increment sampler (wrapped by mc.sample_stable_increment)
# ---------------------------------------------------------------------------


@njit(cache=True, nogil=True)
def _fill_stable(seed, n, c, alpha, dt, out):
    cos_factor = abs(math.cos(math.pi * alpha / 2.0))
    b_ang = math.atan(math.tan(math.pi * alpha / 2.0)) / alpha
    s_scale = (1.0 + math.tan(math.pi * alpha / 2.0) ** 2) ** (1.0 / (2.0 * alpha))
    scale = (c * dt * cos_factor) ** (1.0 / alpha)
    for i in range(n):
        state = _stream_state(seed, i)
        state, v = _stable_standard(state, alpha, b_ang, s_scale)
        out[i] = -scale * v
    return 0
