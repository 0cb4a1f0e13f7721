"""Small numerical toolkit: adaptive Simpson, piecewise integration, bisection."""

from __future__ import annotations

import math
from typing import Callable, Iterable, Sequence

from scipy import integrate as _integrate

from .errors import NonConvergenceError

_ROUND = 64 * 2.220446049250313e-16


def adaptive_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = 1e-10,
    max_depth: int = 40,
) -> float:
    """Integrate ``f`` over ``[a, b]`` with recursive Simpson refinement.

    Uses the standard Richardson-corrected acceptance test
    ``|S_left + S_right - S| <= 15 * tol`` on every panel, halving the
    tolerance with each split.  Recursion is explicit (a stack), so
    ``max_depth`` bounds the panel count rather than Python's call stack.
    A panel is also accepted once its correction is at rounding level, so
    a tolerance below machine precision cannot trigger runaway splitting.
    """
    if a == b:
        return 0.0
    sign = 1.0
    if b < a:
        a, b, sign = b, a, -1.0
    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = (b - a) * (fa + 4 * fm + fb) / 6.0
    total = 0.0
    stack = [(a, b, fa, fm, fb, whole, tol, 0)]
    while stack:
        lo, hi, flo, fmid, fhi, s, eps, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        lm, rm = 0.5 * (lo + mid), 0.5 * (mid + hi)
        flm, frm = f(lm), f(rm)
        left = (mid - lo) * (flo + 4 * flm + fmid) / 6.0
        right = (hi - mid) * (fmid + 4 * frm + fhi) / 6.0
        delta = left + right - s
        if depth >= max_depth or abs(delta) <= max(15.0 * eps, _ROUND * (abs(left) + abs(right))):
            total += left + right + delta / 15.0
        else:
            stack.append((lo, mid, flo, flm, fmid, left, 0.5 * eps, depth + 1))
            stack.append((mid, hi, fmid, frm, fhi, right, 0.5 * eps, depth + 1))
    return sign * total


def _panels(a: float, b: float, breaks: Iterable[float]) -> list[float]:
    inner = sorted({p for p in breaks if a < p < b})
    return [a, *inner, b]


def simpson_piecewise(
    f: Callable[[float], float],
    a: float,
    b: float,
    breaks: Sequence[float] = (),
    tol: float = 1e-10,
    max_depth: int = 40,
) -> float:
    """Adaptive Simpson with kinks of ``f`` placed on panel boundaries."""
    if b <= a:
        return -simpson_piecewise(f, b, a, breaks, tol, max_depth) if b < a else 0.0
    pts = _panels(a, b, breaks)
    share = tol / (len(pts) - 1)
    return sum(adaptive_simpson(f, lo, hi, share, max_depth) for lo, hi in zip(pts[:-1], pts[1:]))


def quad_piecewise(
    f: Callable[[float], float],
    a: float,
    b: float,
    breaks: Sequence[float] = (),
    epsabs: float = 1e-13,
    epsrel: float = 1e-12,
) -> float:
    """Gauss-Kronrod (QUADPACK) integration split at ``breaks``.

    Used for nested integrals, where adaptive Simpson would need too many
    integrand evaluations.
    """
    if b <= a:
        return -quad_piecewise(f, b, a, breaks, epsabs, epsrel) if b < a else 0.0
    pts = _panels(a, b, breaks)
    total = 0.0
    for lo, hi in zip(pts[:-1], pts[1:]):
        val, _err = _integrate.quad(f, lo, hi, epsabs=epsabs, epsrel=epsrel, limit=200)
        total += val
    return total


def bisect(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    xtol: float = 1e-12,
    max_iter: int = 400,
) -> float:
    """Root of ``f`` on ``[lo, hi]`` given a sign change; returns the midpoint
    of the final bracket."""
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if math.copysign(1.0, flo) == math.copysign(1.0, fhi):
        raise ValueError(f"no sign change on [{lo}, {hi}]: f={flo}, {fhi}")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if hi - lo <= xtol or mid in (lo, hi):
            return mid
        fm = f(mid)
        if fm == 0:
            return mid
        if math.copysign(1.0, fm) == math.copysign(1.0, flo):
            lo, flo = mid, fm
        else:
            hi = mid
    raise NonConvergenceError(f"bisection did not reach xtol={xtol} in {max_iter} steps")
