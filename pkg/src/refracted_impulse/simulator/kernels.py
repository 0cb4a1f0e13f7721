"""Compiled path simulators.

Both kernels simulate the refracted surplus under an impulse policy (value
mode) or uncontrolled until it reaches a level ``c`` (exit mode).

Status codes of a finished path:

* ``HORIZON``: the independent exp(q) discount clock rang (value mode),
* ``PARISIAN``: an excursion below 0 outlived its exp(m) clock,
* ``BANKRUPT``: the surplus went below ``-l``,
* ``REACHED``: the level ``c`` was reached (exit mode),
* ``TRUNCATED``: the hard cap ``t_max`` was hit.
"""

from __future__ import annotations

import math

import numba as nb
import numpy as np

from .rng import LANE_CLOCK, LANE_HORIZON, LANE_NOISE, exp_from_uniform, normals_from_uniforms, philox_block

HORIZON = 0
PARISIAN = 1
BANKRUPT = 2
REACHED = 3
TRUNCATED = 4

MODE_VALUE = 0
MODE_EXIT = 1
EST_CLOCK = 0
EST_KILLING = 1

_INF = math.inf

# -zeta(1/2) / sqrt(2 pi): expected overshoot of a Gaussian random walk, in
# units of one step's standard deviation
SHIFT_CONSTANT = 0.5825971579390107


@nb.njit(cache=True)
def _horizon(mode, q, t_max, path, k0, k1):
    """Stopping horizon and whether reaching it counts as truncation."""
    if mode == MODE_VALUE and q > 0.0:
        u, _ = philox_block(0, LANE_HORIZON, path, k0, k1)
        eq = exp_from_uniform(u, q)
        if eq < t_max:
            return eq, False
    return t_max, True


@nb.njit(cache=True)
def _clock(m, ctr, path, k0, k1):
    if m <= 0.0:
        return _INF
    u, _ = philox_block(ctr, LANE_CLOCK, path, k0, k1)
    return exp_from_uniform(u, m)


@nb.njit(cache=True)
def cl_path(mu, eta, alpha, delta, b, m, l, q, beta, c1, c2, x0, mode, est, t_max, path, k0, k1):
    """Exact event-driven Cramer-Lundberg path.

    Between claims the surplus moves linearly with slope ``mu`` below ``b``
    and ``mu - delta`` at or above it; level crossings inside a drift
    segment are solved exactly.  In exit mode ``c2`` is the target level.

    Returns ``(payoff, status, t_end, n_dividends)``.
    """
    horizon, trunc = _horizon(mode, q, t_max, path, k0, k1)
    x = x0
    t = 0.0
    L = 0.0
    payoff = 0.0
    n_div = 0
    if x < -l:
        return 0.0, BANKRUPT, 0.0, 0
    if mode == MODE_VALUE:
        if x >= c2:
            payoff += x - c1 - beta
            n_div += 1
            x = c1
    elif x >= c2:
        return 1.0, REACHED, 0.0, 0
    ctr_noise = 0
    ctr_clock = 0
    clock = _INF
    if x < 0.0 and est == EST_CLOCK:
        clock = _clock(m, ctr_clock, path, k0, k1)
        ctr_clock += 1
    while True:
        u1, u2 = philox_block(ctr_noise, LANE_NOISE, path, k0, k1)
        ctr_noise += 1
        t_claim = t + exp_from_uniform(u1, eta)
        jump = exp_from_uniform(u2, alpha)
        # drift until the claim, the horizon, or a level
        while True:
            if x < 0.0:
                slope = mu
                target = 0.0
            elif x < b:
                slope = mu
                target = b
            else:
                slope = mu - delta
                target = _INF
            is_barrier = False
            if c2 <= target:
                target = c2
                is_barrier = True
            t_stop = t_claim if t_claim < horizon else horizon
            avail = t_stop - t
            if slope > 0.0 and target < _INF:
                need = (target - x) / slope
            else:
                need = _INF
            hit = need <= avail
            step = need if hit else avail
            if x < 0.0:
                if est == EST_CLOCK:
                    if clock <= step:
                        return payoff, PARISIAN, t + clock, n_div
                    clock -= step
                else:
                    L += m * step
            t += step
            if hit:
                x = target
                if is_barrier:
                    w = math.exp(-L) if est == EST_KILLING else 1.0
                    if mode == MODE_VALUE:
                        payoff += w * (c2 - c1 - beta)
                        n_div += 1
                        x = c1
                    else:
                        return w * math.exp(-q * t), REACHED, t, 0
            else:
                x += slope * step
                break
        if t >= horizon:
            return payoff, TRUNCATED if trunc else HORIZON, t, n_div
        before = x
        x -= jump
        if x < -l:
            return payoff, BANKRUPT, t, n_div
        if x < 0.0 <= before and est == EST_CLOCK:
            clock = _clock(m, ctr_clock, path, k0, k1)
            ctr_clock += 1


@nb.njit(cache=True)
def brownian_path(mu, sigma, delta, b, m, l, q, beta, c1, c2, x0, mode, est, t_max, dt, shift, path, k0, k1):
    """Euler path of the refracted Brownian surplus with step ``dt``.

    Levels are monitored on the time grid.  On reaching ``c2`` in value mode
    the dividend ``c2 - c1 - beta`` is paid and the overshoot is kept above
    ``c1``.  ``shift`` moves the monitored levels toward the interior
    (``c2 - shift`` and ``-l + shift``), the usual continuity correction for
    discretely monitored barriers.  Returns ``(payoff, status, t_end,
    n_dividends)``.
    """
    horizon, trunc = _horizon(mode, q, t_max, path, k0, k1)
    x = x0
    t = 0.0
    L = 0.0
    payoff = 0.0
    n_div = 0
    if x <= -l:
        return 0.0, BANKRUPT, 0.0, 0
    if mode == MODE_VALUE:
        if x >= c2:
            payoff += x - c1 - beta
            n_div += 1
            x = c1
    elif x >= c2:
        return 1.0, REACHED, 0.0, 0
    ctr_noise = 0
    ctr_clock = 0
    clock = _INF
    if x < 0.0 and est == EST_CLOCK:
        clock = _clock(m, ctr_clock, path, k0, k1)
        ctr_clock += 1
    sq = sigma * math.sqrt(dt)
    lo_bar = -l + shift
    hi_bar = c2 - shift
    spare = 0.0
    have_spare = False
    while True:
        tn = t + dt
        if tn > horizon:
            return payoff, TRUNCATED if trunc else HORIZON, t, n_div
        if have_spare:
            z = spare
            have_spare = False
        else:
            u1, u2 = philox_block(ctr_noise, LANE_NOISE, path, k0, k1)
            ctr_noise += 1
            z, spare = normals_from_uniforms(u1, u2)
            have_spare = True
        drift = mu - delta if x >= b else mu
        if x < 0.0:
            if est == EST_CLOCK:
                if clock <= dt:
                    return payoff, PARISIAN, t + clock, n_div
                clock -= dt
            else:
                L += m * dt
        xn = x + drift * dt + sq * z
        t = tn
        if xn < lo_bar:
            return payoff, BANKRUPT, t, n_div
        if xn >= hi_bar:
            w = math.exp(-L) if est == EST_KILLING else 1.0
            if mode == MODE_VALUE:
                payoff += w * (c2 - c1 - beta)
                n_div += 1
                xn = c1 + (xn - c2)
            else:
                return w * math.exp(-q * t), REACHED, t, 0
        elif xn < 0.0 <= x and est == EST_CLOCK:
            clock = _clock(m, ctr_clock, path, k0, k1)
            ctr_clock += 1
        x = xn


@nb.njit(cache=True)
def cl_batch(mu, eta, alpha, delta, b, m, l, q, beta, c1, c2, x0, mode, est, t_max, n, offset, k0, k1):
    pay = np.empty(n)
    status = np.empty(n, np.int8)
    tend = np.empty(n)
    ndiv = np.empty(n, np.int64)
    for i in range(n):
        p, s, te, nd = cl_path(mu, eta, alpha, delta, b, m, l, q, beta, c1, c2, x0, mode, est, t_max,
                               offset + i, k0, k1)
        pay[i] = p
        status[i] = s
        tend[i] = te
        ndiv[i] = nd
    return pay, status, tend, ndiv


@nb.njit(cache=True)
def brownian_batch(mu, sigma, delta, b, m, l, q, beta, c1, c2, x0, mode, est, t_max, dt, shift, n, offset, k0, k1):
    pay = np.empty(n)
    status = np.empty(n, np.int8)
    tend = np.empty(n)
    ndiv = np.empty(n, np.int64)
    for i in range(n):
        p, s, te, nd = brownian_path(mu, sigma, delta, b, m, l, q, beta, c1, c2, x0, mode, est, t_max, dt,
                                     shift, offset + i, k0, k1)
        pay[i] = p
        status[i] = s
        tend[i] = te
        ndiv[i] = nd
    return pay, status, tend, ndiv
