"""Parisian refracted scale function and its monotonicity structure.

``theta(x)`` below is ``vartheta^(q+m,q)(x, -l)``.  On each of the three
segments ``[-l, 0)``, ``[0, b)`` and ``[b, inf)`` it is a finite combination
of exponentials (and exponential convolutions), so values and derivatives are
evaluated in closed form.  With ``E_k`` collecting the Parisian correction::

    E_k = exp(lam_k l) * (1 + m * sum_i C*_i int_0^l exp(lam*_i (l-s) + lam_k s) ds)

the segments read

* ``[-l, 0)``: ``W^(q+m)(x + l)``
* ``[0, b)``:  ``sum_k C_k E_k exp(lam_k x)``
* ``[b, inf)``: ``sum_k E_k (C_k exp(lam_k x)
  + delta C_k lam_k exp(lam_k b) sum_j D_j J_jk(x - b))``

where ``(C, lam)`` is the basis of ``W^(q)``, ``(C*, lam*)`` that of
``W^(q+m)``, ``(D, mu)`` that of ``WW^(q)`` and ``J_jk = conv_exp(mu_j, lam_k, .)``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, KinkError
from .models import ProblemSpec
from .quadrature import bisect, quad_piecewise
from .scale import (
    RefractedCoefficients,
    ScaleBasis,
    conv_exp,
    conv_exp_deriv,
    refracted_coefficients,
    scale_basis,
    w_refracted,
    w_refracted_quad,
)

log = logging.getLogger(__name__)

__all__ = [
    "ThetaBasis",
    "Breakpoints",
    "theta_basis",
    "theta",
    "theta_deriv",
    "theta_second",
    "theta_jumps",
    "theta_quad",
    "breakpoints",
]


@dataclass(frozen=True)
class ThetaBasis:
    """Everything needed to evaluate ``theta`` for one problem."""

    problem: ProblemSpec
    X: ScaleBasis
    Y: ScaleBasis
    S: ScaleBasis
    E: tuple[float, float]
    coefficients: RefractedCoefficients | None

    @property
    def l(self) -> float:  # noqa: E743
        return self.problem.l

    @property
    def b(self) -> float:
        return self.problem.b

    @property
    def bounded_variation(self) -> bool:
        return self.problem.model.bounded_variation


def theta_basis(spec: ProblemSpec) -> ThetaBasis:
    """Precompute the bases for rates ``q`` (X, Y) and ``q + m`` (X)."""
    q, m, l = spec.q, spec.m, spec.l
    if l <= 0:
        raise DomainError("barrier depth l must be > 0")
    X = scale_basis(spec, q, "X")
    Y = scale_basis(spec, q, "Y")
    S = scale_basis(spec, q + m, "X")
    E = []
    with np.errstate(over="ignore"):
        for lk in X.rates:
            corr = sum(cs * float(conv_exp(ls, lk, l)) for ls, cs in zip(S.rates, S.coefs))
            E.append(math.exp(lk * l) + m * corr)
    if not all(math.isfinite(e) for e in E):
        raise DomainError(f"theta overflows double precision for q + m = {q + m:g} and l = {l:g}")
    try:
        coefs = refracted_coefficients(spec)
    except (DomainError, OverflowError):
        coefs = None
    return ThetaBasis(spec, X, Y, S, (E[0], E[1]), coefs)


def _as_basis(obj) -> ThetaBasis:
    return obj if isinstance(obj, ThetaBasis) else theta_basis(obj)


# ---------------------------------------------------------------------------
# segment evaluators (order 0, 1, 2), vectorized over x


def _seg1(tb: ThetaBasis, x: np.ndarray, order: int) -> np.ndarray:
    z = x + tb.l
    return tb.S.value(z) if order == 0 else tb.S.deriv(z, order)


def _seg2(tb: ThetaBasis, x: np.ndarray, order: int) -> np.ndarray:
    out = np.zeros_like(x)
    for lk, ck, ek in zip(tb.X.rates, tb.X.coefs, tb.E):
        out = out + ck * ek * lk**order * np.exp(lk * x)
    return out


def _seg3(tb: ThetaBasis, x: np.ndarray, order: int) -> np.ndarray:
    b, delta = tb.b, tb.problem.delta
    t = np.maximum(x - b, 0.0)
    out = np.zeros_like(x)
    for lk, ck, ek in zip(tb.X.rates, tb.X.coefs, tb.E):
        term = ck * lk**order * np.exp(lk * x)
        if delta != 0.0:
            pre = delta * ck * lk * math.exp(lk * b)
            for mj, dj in zip(tb.Y.rates, tb.Y.coefs):
                J = conv_exp(mj, lk, t) if order == 0 else conv_exp_deriv(mj, lk, t, order)
                term = term + pre * dj * J
        out = out + ek * term
    return out


_SEGMENTS = (_seg1, _seg2, _seg3)


def _segment_ids(tb: ThetaBasis, x: np.ndarray) -> np.ndarray:
    return np.where(x < 0, 0, np.where(x < tb.b, 1, 2))


def _evaluate(tb: ThetaBasis, x, order: int, side: str | None) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if np.any(x < -tb.l):
        raise DomainError(f"theta is defined for x >= -l = {-tb.l}")
    seg = _segment_ids(tb, x)
    if side == "left":
        seg = np.where((x == 0) | ((x == tb.b) & (tb.b > 0)), seg - 1, seg)
        seg = np.where((x == 0) & (tb.b == 0), 0, seg)
    out = np.empty_like(x)
    for k, fn in enumerate(_SEGMENTS):
        mask = seg == k
        if np.any(mask):
            out[mask] = fn(tb, x[mask], order)
    return out


def segment_of(basis, x) -> np.ndarray:
    """Segment index (0, 1, 2) of each ``x`` for ``[-l,0)``, ``[0,b)``, ``[b,inf)``."""
    tb = _as_basis(basis)
    return _segment_ids(tb, np.asarray(x, dtype=float))


# ---------------------------------------------------------------------------
# public evaluators


def theta(basis, x):
    """``vartheta^(q+m,q)(x, -l)`` for ``x >= -l``.

    ``basis`` may be a :class:`ThetaBasis` or a :class:`ProblemSpec`.  With
    ``m = 0`` the function is the refracted scale function ``w^(q)(x; -l)``.
    """
    tb = _as_basis(basis)
    if tb.problem.m == 0.0:
        xa = np.asarray(x, dtype=float)
        if np.any(xa < -tb.l):
            raise DomainError(f"theta is defined for x >= -l = {-tb.l}")
        return w_refracted(tb.problem, tb.problem.q, xa, -tb.l)
    return _evaluate(tb, x, 0, None)[()]


def theta_jumps(basis) -> dict[float, float]:
    """Size ``theta'(x+) - theta'(x-)`` of the derivative jumps at 0 and ``b``.

    Both vanish for unbounded variation.
    """
    tb = _as_basis(basis)
    out = {}
    for p in sorted({0.0, tb.b}):
        r = _evaluate(tb, np.array([p]), 1, "right")[0]
        lft = _evaluate(tb, np.array([p]), 1, "left")[0]
        out[p] = r - lft
    return out


def _check_kinks(tb: ThetaBasis, x: np.ndarray, side: str | None, order: int) -> None:
    if side not in (None, "left", "right"):
        raise ValueError("side must be None, 'left' or 'right'")
    if side is not None:
        return
    at_0 = np.any(x == 0)
    at_b = np.any(x == tb.b)
    if order == 1:
        if not tb.bounded_variation:
            return
        if (at_0 and tb.problem.m != 0) or (at_b and tb.problem.delta != 0):
            raise KinkError("theta' jumps at 0 and b for bounded variation; pass side='left' or 'right'")
    elif at_0 or at_b:
        raise KinkError("theta'' is not defined at the segment boundaries 0 and b; pass side=")


def theta_deriv(basis, x, side: str | None = None):
    """First derivative; ``side`` selects the one-sided limit at 0 or ``b``.

    For unbounded variation the derivative is continuous and ``side`` may be
    omitted everywhere.  At ``x = -l`` the right derivative is returned.
    """
    tb = _as_basis(basis)
    xa = np.asarray(x, dtype=float)
    _check_kinks(tb, xa, side, 1)
    return _evaluate(tb, xa, 1, side)[()]


def theta_second(basis, x, side: str | None = None):
    """Second derivative on the open segments ``(-l, 0)``, ``(0, b)``, ``(b, inf)``."""
    tb = _as_basis(basis)
    xa = np.asarray(x, dtype=float)
    _check_kinks(tb, xa, side, 2)
    return _evaluate(tb, xa, 2, side)[()]


def theta_quad(spec: ProblemSpec, x: float, inner: str = "closed") -> float:
    """Evaluate the defining integral of ``theta`` by quadrature.

    ``theta(x) = w(x; -l) + m int_0^l w(x; -l + y) W^(q+m)(y) dy``.  The outer
    integral uses QUADPACK; ``inner="quad"`` also evaluates ``w`` through
    its own integral (slow), ``inner="closed"`` uses the closed-form ``w``.
    """
    q, m, l = spec.q, spec.m, spec.l
    if x < -l:
        raise DomainError(f"theta is defined for x >= -l = {-l}")
    S = scale_basis(spec, q + m, "X")
    if inner == "quad":
        def w(a: float) -> float:
            return w_refracted_quad(spec, q, x, a, tol=1e-12)
    elif inner == "closed":
        def w(a: float) -> float:
            return float(w_refracted(spec, q, x, a))
    else:
        raise ValueError("inner must be 'closed' or 'quad'")
    head = w(-l)
    if m == 0:
        return head
    integral = quad_piecewise(lambda y: w(-l + y) * float(S.value(y)), 0.0, l, breaks=(x + l,))
    return head + m * integral


# ---------------------------------------------------------------------------
# breakpoints


@dataclass(frozen=True)
class Breakpoints:
    """Monotonicity structure of ``theta'``.

    ``theta'`` decreases on ``(-l, eps1)`` and ``(0, eps2)`` and increases on
    ``(eps1, 0)`` and ``(eps2, inf)`` (jumps at 0 and ``b`` aside).
    ``zeta3`` is ``None`` when ``theta''`` has no root formula above ``b``.
    """

    eps1: float
    eps2: float
    zeta1: float
    zeta2: float
    zeta3: float | None
    K: tuple[float, float]
    K_star: tuple[float, float]
    N: tuple[float, float]
    used_fallback: bool = False
    zeta_order_violated: bool = False


def _two_exp_root(a2: float, r2: float, a1: float, r1: float) -> float | None:
    """Root of ``a2 exp(r2 x) + a1 exp(r1 x)`` (``r2 > r1``), if any."""
    if a2 == 0 or a1 == 0 or (a2 > 0) == (a1 > 0):
        return None
    return math.log(-a1 / a2) / (r2 - r1)


def _refine(tb: ThetaBasis, z: float, lo: float, hi: float, scale: float) -> tuple[float, bool]:
    """Return ``z`` or a bisected replacement if ``theta''(z)`` is not small."""
    if lo < z < hi:
        try:
            resid = abs(float(_evaluate(tb, np.array([z]), 2, None)[0]))
        except DomainError:
            resid = math.inf
        if resid <= 1e-6 * scale:
            return z, False
    else:
        return z, False

    def f(y):
        return float(_evaluate(tb, np.array([y]), 2, None)[0])

    eps = 1e-12 * max(1.0, abs(hi - lo))
    return bisect(f, lo + eps, hi - eps, xtol=1e-13), True


def breakpoints(basis) -> Breakpoints:
    """Roots ``zeta1..3`` of ``theta''`` on the three segments and the
    clamped monotonicity limits ``eps1, eps2``."""
    tb = _as_basis(basis)
    spec = tb.problem
    if spec.q <= 0 or spec.m <= 0:
        raise DomainError("breakpoints need q > 0 and m > 0")
    l, b = tb.l, tb.b
    S, X, Y = tb.S, tb.X, tb.Y
    fallback = False

    # segment 1: W^(q+m)''(x + l) = 0
    a1 = S.coefs[0] * S.rates[0] ** 2
    a2 = S.coefs[1] * S.rates[1] ** 2
    z1 = _two_exp_root(a2, S.rates[1], a1, S.rates[0])
    zeta1 = (z1 if z1 is not None else -math.inf) - l
    scale1 = abs(a1) + abs(a2)
    if math.isfinite(zeta1):
        zeta1, fb = _refine(tb, zeta1, -l, 0.0, scale1 * math.exp(S.rates[1] * max(zeta1 + l, 0)))
        fallback |= fb
    eps1 = min(max(zeta1, -l), 0.0)

    # segment 2: K2 exp(lam2 x) - K1 exp(lam1 x)
    K1 = -X.coefs[0] * tb.E[0] * X.rates[0] ** 2
    K2 = X.coefs[1] * tb.E[1] * X.rates[1] ** 2
    z2 = _two_exp_root(K2, X.rates[1], -K1, X.rates[0])
    if z2 is None:
        zeta2 = -math.inf if K2 - K1 >= 0 else math.inf
    else:
        zeta2 = z2
        if b > 0:
            zeta2, fb = _refine(tb, zeta2, 0.0, b, (abs(K1) + abs(K2)) * math.exp(X.rates[1] * max(zeta2, 0)))
            fallback |= fb

    # segment 3: theta'' = N2 exp(mu2 (x-b)) + N1 exp(mu1 (x-b)); fit N from two exact values
    mu1, mu2 = Y.rates
    v0 = float(_seg3(tb, np.array([b]), 2)[0])
    v1 = float(_seg3(tb, np.array([b + 1.0]), 2)[0])
    e1, e2 = math.exp(mu1), math.exp(mu2)
    N2 = (v1 - v0 * e1) / (e2 - e1)
    N1 = v0 - N2
    z3 = _two_exp_root(N2, mu2, N1, mu1)
    zeta3 = None if z3 is None or N1 >= 0 else b + z3
    if zeta3 is not None and zeta3 > b:
        zeta3, fb = _refine(tb, zeta3, b, zeta3 + 10.0, (abs(N1) + abs(N2)) * math.exp(mu2 * (zeta3 - b)))
        fallback |= fb

    if zeta3 is not None:
        eps2 = min(max(zeta2, 0.0), max(zeta3, b))
    else:
        eps2 = min(max(zeta2, 0.0), b)
    violated = zeta3 is not None and zeta3 > zeta2
    if violated:
        log.warning("zeta3=%.6g exceeds zeta2=%.6g; reported, not clamped", zeta3, zeta2)
    K_star = (K1, K2)
    return Breakpoints(
        eps1=eps1, eps2=eps2, zeta1=zeta1, zeta2=zeta2, zeta3=zeta3,
        K=(N1, N2), K_star=K_star, N=(N1, N2),
        used_fallback=fallback, zeta_order_violated=violated,
    )
