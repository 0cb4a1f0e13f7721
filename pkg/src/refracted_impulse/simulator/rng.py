"""Philox4x32-10 counter-based generator.

Every draw is a pure function of ``(key, counter)``.  The key holds the
64-bit seed; the counter is ``(draw index, lane, path_lo, path_hi)``, so
each path owns independent lanes (driving noise, Parisian clocks, discount
horizon) and paths can be simulated in any order with identical results.

Two implementations are provided: a numba kernel used inside the
simulators, and a vectorized numpy version used as a cross-check.
"""

from __future__ import annotations

import math

import numba as nb
import numpy as np

MASK32 = 0xFFFFFFFF
_M0 = 0xD2511F53
_M1 = 0xCD9E8D57
_W0 = 0x9E3779B9
_W1 = 0xBB67AE85

LANE_NOISE = 0
LANE_CLOCK = 1
LANE_HORIZON = 2

_TWO_M53 = 1.0 / 9007199254740992.0


def split_seed(seed: int) -> tuple[int, int]:
    """Low and high 32-bit halves of a 64-bit seed."""
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise ValueError("seed must be an unsigned 64-bit integer")
    return seed & MASK32, (seed >> 32) & MASK32


# ---------------------------------------------------------------------------
# numpy reference


def philox4x32_np(counters, key) -> np.ndarray:
    """Philox4x32-10 on an ``(n, 4)`` array of 32-bit counters."""
    c = np.array(counters, dtype=np.uint64).reshape(-1, 4) & MASK32
    k0 = np.uint64(int(key[0]) & MASK32)
    k1 = np.uint64(int(key[1]) & MASK32)
    c0, c1, c2, c3 = c[:, 0], c[:, 1], c[:, 2], c[:, 3]
    m0, m1, mask = np.uint64(_M0), np.uint64(_M1), np.uint64(MASK32)
    s32 = np.uint64(32)
    for _ in range(10):
        p0 = m0 * c0
        p1 = m1 * c2
        c0, c1, c2, c3 = (p1 >> s32) ^ c1 ^ k0, p1 & mask, (p0 >> s32) ^ c3 ^ k1, p0 & mask
        k0 = (k0 + np.uint64(_W0)) & mask
        k1 = (k1 + np.uint64(_W1)) & mask
    return np.stack([c0, c1, c2, c3], axis=1).astype(np.uint32)


def uniforms_np(seed: int, path: int, lane: int, start: int, n: int) -> np.ndarray:
    """``2n`` doubles in ``[0, 1)``: two per counter, counters ``start..start+n-1``."""
    k = split_seed(seed)
    idx = np.arange(start, start + n, dtype=np.uint64)
    ctr = np.stack(
        [idx, np.full(n, lane, np.uint64), np.full(n, path & MASK32, np.uint64),
         np.full(n, (path >> 32) & MASK32, np.uint64)], axis=1)
    w = philox4x32_np(ctr, k).astype(np.uint64)
    a = ((w[:, 0] >> np.uint64(5)) * np.uint64(67108864) + (w[:, 1] >> np.uint64(6))).astype(float) * _TWO_M53
    b = ((w[:, 2] >> np.uint64(5)) * np.uint64(67108864) + (w[:, 3] >> np.uint64(6))).astype(float) * _TWO_M53
    return np.stack([a, b], axis=1).ravel()


# ---------------------------------------------------------------------------
# numba kernels

_U_M0 = np.uint64(_M0)
_U_M1 = np.uint64(_M1)
_U_W0 = np.uint64(_W0)
_U_W1 = np.uint64(_W1)
_U_MASK = np.uint64(MASK32)
_U_32 = np.uint64(32)
_U_5 = np.uint64(5)
_U_6 = np.uint64(6)
_U_2_26 = np.uint64(67108864)


@nb.njit(cache=True, inline="always")
def philox4x32(c0, c1, c2, c3, k0, k1):
    """One Philox4x32-10 block; all arguments are uint64 holding 32-bit values."""
    for _ in range(10):
        p0 = _U_M0 * c0
        p1 = _U_M1 * c2
        n0 = (p1 >> _U_32) ^ c1 ^ k0
        n1 = p1 & _U_MASK
        n2 = (p0 >> _U_32) ^ c3 ^ k1
        n3 = p0 & _U_MASK
        c0, c1, c2, c3 = n0, n1, n2, n3
        k0 = (k0 + _U_W0) & _U_MASK
        k1 = (k1 + _U_W1) & _U_MASK
    return c0, c1, c2, c3


@nb.njit(cache=True)
def philox_block(ctr, lane, path, k0, k1):
    """Two uniforms in ``[0, 1)`` from counter ``(ctr, lane, path_lo, path_hi)``."""
    w0, w1, w2, w3 = philox4x32(
        np.uint64(ctr) & _U_MASK,
        np.uint64(lane),
        np.uint64(path) & _U_MASK,
        (np.uint64(path) >> _U_32) & _U_MASK,
        k0,
        k1,
    )
    a = float((w0 >> _U_5) * _U_2_26 + (w1 >> _U_6)) * _TWO_M53
    b = float((w2 >> _U_5) * _U_2_26 + (w3 >> _U_6)) * _TWO_M53
    return a, b


@nb.njit(cache=True)
def philox_raw(c0, c1, c2, c3, k0, k1):
    """Raw 32-bit output words (for known-answer tests)."""
    return philox4x32(np.uint64(c0), np.uint64(c1), np.uint64(c2), np.uint64(c3), np.uint64(k0), np.uint64(k1))


@nb.njit(cache=True)
def exp_from_uniform(u, rate):
    """Exponential variate by inversion; ``u`` in ``[0, 1)``."""
    return -math.log1p(-u) / rate


@nb.njit(cache=True)
def normals_from_uniforms(u1, u2):
    """Box-Muller pair."""
    r = math.sqrt(-2.0 * math.log1p(-u1))
    t = 2.0 * math.pi * u2
    return r * math.cos(t), r * math.sin(t)
