"""Exit transforms, impulse-policy values and optimality diagnostics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainError, KinkError
from .models import Brownian
from .parisian import ThetaBasis, _as_basis, theta, theta_deriv, theta_second
from .quadrature import quad_piecewise

__all__ = [
    "Policy",
    "ValueCurve",
    "FunctionCurve",
    "BoundReport",
    "exit_laplace",
    "value_policy",
    "value_curve",
    "H_surface",
    "value_optimal",
    "first_order_residual",
    "hjb_residual",
    "bound_check",
]


@dataclass(frozen=True)
class Policy:
    """Impulse policy: pay down to ``c1`` whenever the surplus reaches ``c2``."""

    c1: float
    c2: float

    def __post_init__(self):
        if not (math.isfinite(self.c1) and math.isfinite(self.c2)):
            raise DomainError("policy levels must be finite")
        if self.c1 < 0:
            raise DomainError(f"c1 must be >= 0, got {self.c1}")

    def check(self, beta: float) -> None:
        if not self.c2 > self.c1 + beta:
            raise DomainError(f"policy needs c2 > c1 + beta; got c1={self.c1}, c2={self.c2}, beta={beta}")


def _policy(p) -> Policy:
    return p if isinstance(p, Policy) else Policy(*p)


def _theta1(tb: ThetaBasis, x: float) -> float:
    return float(theta(tb, x))


# ---------------------------------------------------------------------------
# exit transform and H


def exit_laplace(basis, x, c: float):
    """``E_x[exp(-q k_c) 1{k_c < T}] = theta(x) / theta(c)`` for ``-l <= x <= c``."""
    tb = _as_basis(basis)
    xa = np.asarray(x, dtype=float)
    if np.any(xa < -tb.l) or np.any(xa > c):
        raise DomainError(f"exit_laplace needs -l <= x <= c (l={tb.l}, c={c})")
    return (theta(tb, xa) / _theta1(tb, c))[()]


def H_surface(basis, c1, c2):
    """``(theta(c2) - theta(c1)) / (c2 - c1 - beta)`` on ``c1 >= 0, c2 > c1 + beta``."""
    tb = _as_basis(basis)
    c1a = np.asarray(c1, dtype=float)
    c2a = np.asarray(c2, dtype=float)
    gap = c2a - c1a - tb.problem.beta
    if np.any(c1a < 0) or np.any(gap <= 0):
        raise DomainError("H is defined on c1 >= 0, c2 > c1 + beta")
    return ((theta(tb, c2a) - theta(tb, c1a)) / gap)[()]


# ---------------------------------------------------------------------------
# value curves


@dataclass(frozen=True)
class ValueCurve:
    """Value of a ``(c1, c2)`` policy.

    ``V(x) = scale * theta(x)`` on ``[-l, c2]`` and ``x + offset`` above
    ``c2``; ``grid``/``values`` hold a tabulation for output.
    """

    basis: ThetaBasis
    policy: Policy
    scale: float
    offset: float
    grid: np.ndarray = field(default_factory=lambda: np.empty(0))
    values: np.ndarray = field(default_factory=lambda: np.empty(0))

    def value(self, x):
        xa = np.asarray(x, dtype=float)
        lo = np.maximum(xa, -self.basis.l)
        inner = self.scale * theta(self.basis, np.minimum(lo, self.policy.c2))
        out = np.where(xa > self.policy.c2, xa + self.offset, inner)
        return np.where(xa < -self.basis.l, 0.0, out)[()]

    __call__ = value

    def deriv(self, x, side: str | None = None):
        xa = np.asarray(x, dtype=float)
        c2 = self.policy.c2
        if np.any(xa == c2):
            left = self.scale * float(theta_deriv(self.basis, c2, side="left"))
            if side is None and abs(left - 1.0) > 1e-9:
                raise KinkError("V' jumps at c2; pass side='left' or 'right'")
        inner_x = np.minimum(xa, c2)
        inner = self.scale * theta_deriv(self.basis, inner_x, side=side if side else None)
        right = (xa > c2) | ((xa == c2) & (side == "right"))
        return np.where(right, 1.0, inner)[()]

    def second(self, x, side: str | None = None):
        xa = np.asarray(x, dtype=float)
        c2 = self.policy.c2
        if np.any(xa == c2) and side is None:
            raise KinkError("V'' is not defined at c2; pass side=")
        inner = self.scale * theta_second(self.basis, np.minimum(xa, c2), side=side)
        right = (xa > c2) | ((xa == c2) & (side == "right"))
        return np.where(right, 0.0, inner)[()]


@dataclass(frozen=True)
class FunctionCurve:
    """Any ``V`` given by callables, for feeding ad hoc test functions to the
    HJB residual (e.g. constants)."""

    value: Callable
    deriv: Callable
    second: Callable
    kinks: tuple[float, ...] = ()


def value_curve(basis, policy, grid=None) -> ValueCurve:
    """Closed-form value of ``policy`` (tabulated on ``grid`` if given)."""
    tb = _as_basis(basis)
    pol = _policy(policy)
    pol.check(tb.problem.beta)
    t1, t2 = _theta1(tb, pol.c1), _theta1(tb, pol.c2)
    scale = (pol.c2 - pol.c1 - tb.problem.beta) / (t2 - t1)
    offset = -pol.c1 - tb.problem.beta + scale * t1
    vc = ValueCurve(tb, pol, scale, offset)
    if grid is not None:
        g = np.asarray(grid, dtype=float)
        vc = ValueCurve(tb, pol, scale, offset, g, np.asarray(vc.value(g)))
    return vc


def value_policy(basis, policy, x):
    """``V_(c1,c2)(x)`` for ``x >= -l``."""
    tb = _as_basis(basis)
    xa = np.asarray(x, dtype=float)
    if np.any(xa < -tb.l):
        raise DomainError(f"value is defined for x >= -l = {-tb.l}")
    return value_curve(tb, policy).value(xa)


def first_order_residual(basis, policy) -> dict[str, float]:
    """Relative residuals of the stationarity conditions at ``policy``.

    ``c2`` is the relative gap between ``theta'(c2)`` and ``H``; ``c1``
    between ``theta'(c1)`` and ``H``.  At a kink the right limit is used.
    """
    tb = _as_basis(basis)
    pol = _policy(policy)
    H = float(H_surface(tb, pol.c1, pol.c2))
    d2 = float(theta_deriv(tb, pol.c2, side="right"))
    d1 = float(theta_deriv(tb, pol.c1, side="right"))
    return {"c2": abs(d2 - H) / H, "c1": abs(d1 - H) / H, "H": H}


def value_optimal(basis, cstar, x, max_residual: float = 1e-4):
    """Optimal value ``theta(x)/theta'(c2*)`` (affine with slope 1 above ``c2*``).

    Refuses policies whose ``c2`` stationarity residual exceeds
    ``max_residual``, and ``c2* = b`` in the bounded-variation case.
    """
    tb = _as_basis(basis)
    pol = _policy(cstar)
    pol.check(tb.problem.beta)
    if tb.bounded_variation and pol.c2 == tb.b:
        raise DomainError("c2* = b is excluded for bounded variation")
    res = first_order_residual(tb, pol)["c2"]
    if res > max_residual:
        raise DomainError(f"policy is not stationary: theta'(c2) vs H residual {res:.3g}")
    xa = np.asarray(x, dtype=float)
    if np.any(xa < -tb.l):
        raise DomainError(f"value is defined for x >= -l = {-tb.l}")
    d2 = float(theta_deriv(tb, pol.c2))
    t2 = _theta1(tb, pol.c2)
    below = theta(tb, np.minimum(xa, pol.c2)) / d2
    return np.where(xa > pol.c2, xa - pol.c2 + t2 / d2, below)[()]


# ---------------------------------------------------------------------------
# HJB residual


def _kinks(tb: ThetaBasis, curve) -> tuple[float, ...]:
    pts = [0.0, tb.b]
    if isinstance(curve, ValueCurve):
        pts.append(curve.policy.c2)
    else:
        pts.extend(curve.kinks)
    return tuple(pts)


def hjb_residual(basis, curve, x: float, exclusion: float = 1e-3) -> float:
    """``(A - q - m 1{x<0}) V(x)`` with the model's generator ``A``.

    Brownian: ``(mu - delta 1{x>b}) V' + sigma^2/2 V''``.
    Cramer-Lundberg: ``(mu - delta 1{x>b}) V' + eta int_0^inf (V(x-z) - V(x)) alpha e^{-alpha z} dz``
    with ``V = 0`` below ``-l``.  Points within ``exclusion`` of 0, ``b``
    or ``c2`` and points ``x <= -l`` are rejected.
    """
    tb = _as_basis(basis)
    spec = tb.problem
    x = float(x)
    if x <= -tb.l:
        raise DomainError("hjb_residual needs x > -l")
    kinks = _kinks(tb, curve)
    if any(abs(x - k) < exclusion for k in kinks):
        raise DomainError(f"x={x} lies within {exclusion} of a kink {kinks}")
    model = spec.model
    drift = model.mu - (spec.delta if x > tb.b else 0.0)
    kill = spec.q + (spec.m if x < 0 else 0.0)
    V = float(curve.value(x))
    dV = float(curve.deriv(x))
    if isinstance(model, Brownian):
        return drift * dV + 0.5 * model.sigma**2 * float(curve.second(x)) - kill * V
    eta, alpha = model.eta, model.alpha
    upper = x + tb.l
    breaks = tuple(x - k for k in kinks)
    integral = quad_piecewise(
        lambda z: float(curve.value(x - z)) * alpha * math.exp(-alpha * z), 0.0, upper, breaks=breaks
    )
    return drift * dV + eta * (integral - V) - kill * V


# ---------------------------------------------------------------------------
# value bounds


@dataclass(frozen=True)
class BoundReport:
    """Outcome of the two value-function bounds at one ``(x, y)`` pair.

    ``lower_applicable`` is False when ``y < 0`` or ``x - y <= beta``.
    Slack values are ``rhs - lhs`` of each inequality (>= -tol means pass).
    """

    x: float
    y: float
    lower_applicable: bool
    lower_slack: float
    upper_slack: float
    tol: float

    @property
    def lower_ok(self) -> bool:
        return (not self.lower_applicable) or self.lower_slack >= -self.tol

    @property
    def upper_ok(self) -> bool:
        return self.upper_slack >= -self.tol

    @property
    def ok(self) -> bool:
        return self.lower_ok and self.upper_ok


def bound_check(basis, curve: ValueCurve, x: float, y: float, tol: float = 1e-9) -> BoundReport:
    """Check ``x - y - beta <= V(x) - V(y) <= (1 - theta(y)/theta(x)) V(x)``."""
    tb = _as_basis(basis)
    if not (x >= y >= -tb.l):
        raise DomainError(f"bound_check needs x >= y >= -l; got x={x}, y={y}")
    Vx, Vy = float(curve.value(x)), float(curve.value(y))
    diff = Vx - Vy
    beta = tb.problem.beta
    applicable = y >= 0 and x - y > beta
    lower = diff - (x - y - beta)
    tx = _theta1(tb, x)
    upper = (1.0 - _theta1(tb, y) / tx) * Vx - diff if tx > 0 else 0.0
    return BoundReport(x, y, applicable, lower, upper, tol)
