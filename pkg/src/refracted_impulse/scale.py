"""Scale functions of the two supported models and of the refracted process.

For both models the q-scale function is a two-term exponential sum on
``[0, inf)``::

    W(x) = C1 * exp(lam1 * x) + C2 * exp(lam2 * x),   lam1 < 0 <= lam2,

extended by zero on the negative half-line.  Every convolution that appears
in the refracted and Parisian scale functions then reduces to integrals of
the form ``int_0^t exp(u*(t - s) + v*s) ds``, which are evaluated through
``scipy.special.exprel`` so that coinciding exponents (``delta = 0`` or
``q = 0``) need no special casing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import exprel

from .errors import DomainError, KinkError, NonConvergenceError
from .models import Brownian, CramerLundberg, Process, ProblemSpec
from .quadrature import simpson_piecewise

__all__ = [
    "ScaleBasis",
    "RefractedCoefficients",
    "scale_basis",
    "refracted_coefficients",
    "W_q",
    "W_q_deriv",
    "W_q_deriv_0plus",
    "w_refracted",
    "w_refracted_quad",
    "w_refracted_deriv",
    "g_qpq",
    "g_qpq_forms",
    "varpi",
    "convolution_identity_residual",
    "conv_exp",
    "conv_exp_deriv",
]


@dataclass(frozen=True)
class ScaleBasis:
    """Exponents and coefficients of one q-scale function.

    ``rates``/``coefs`` give the generic representation.  The model-specific
    names are filled in as well: ``rho1, rho2, rho`` for the Brownian model,
    ``r1, r2, r, G1, G2`` for Cramer-Lundberg.
    """

    rate: float
    process: str
    drift: float
    rates: tuple[float, float]
    coefs: tuple[float, float]
    bounded_variation: bool
    rho1: float | None = None
    rho2: float | None = None
    rho: float | None = None
    r1: float | None = None
    r2: float | None = None
    r: float | None = None
    G1: float | None = None
    G2: float | None = None

    @property
    def at_zero(self) -> float:
        """``W(0+)``: ``1/drift`` for bounded variation, 0 otherwise."""
        return self.coefs[0] + self.coefs[1]

    @property
    def gap(self) -> float:
        return self.rates[1] - self.rates[0]

    def value(self, x):
        """``W(x)``; zero for ``x < 0``.

        Written as ``exp(lam2 x) * (W(0) + C1 * expm1(-gap x))`` so the
        Brownian case keeps full relative precision near 0 and the larger
        exponential is factored out.
        """
        x = np.asarray(x, dtype=float)
        xp = np.where(x >= 0, x, 0.0)
        c1 = self.coefs[0]
        out = np.exp(self.rates[1] * xp) * (self.at_zero + c1 * np.expm1(-self.gap * xp))
        return np.where(x >= 0, out, 0.0)[()]

    def scalar(self, x: float) -> float:
        """Same as :meth:`value` for one float, without numpy overhead (used
        inside quadrature integrands)."""
        if x < 0:
            return 0.0
        return math.exp(self.rates[1] * x) * (self.at_zero + self.coefs[0] * math.expm1(-self.gap * x))

    def deriv(self, x, order: int = 1):
        """Termwise derivative on ``x >= 0`` (the right derivative at 0);
        zero for ``x < 0``."""
        x = np.asarray(x, dtype=float)
        xp = np.where(x >= 0, x, 0.0)
        (l1, l2), (c1, c2) = self.rates, self.coefs
        out = c1 * l1**order * np.exp(l1 * xp) + c2 * l2**order * np.exp(l2 * xp)
        return np.where(x >= 0, out, 0.0)[()]


def _brownian_basis(mu_eff: float, sigma: float, q: float, process: str) -> ScaleBasis:
    s2 = sigma * sigma
    root = math.sqrt(mu_eff * mu_eff + 2.0 * q * s2)
    if root == 0.0:
        raise DomainError("degenerate Brownian scale function (zero drift and q = 0)")
    rho1 = (-root - mu_eff) / s2
    # (root - mu)/s2 rewritten to avoid cancellation for small q
    rho2 = 2.0 * q / (root + mu_eff) if mu_eff > 0 else (root - mu_eff) / s2
    rho = 2.0 * root / s2
    c = 2.0 / (s2 * rho)
    return ScaleBasis(
        rate=q, process=process, drift=mu_eff, rates=(rho1, rho2), coefs=(-c, c),
        bounded_variation=False, rho1=rho1, rho2=rho2, rho=rho,
    )


def _cl_basis(mu_eff: float, eta: float, alpha: float, q: float, process: str) -> ScaleBasis:
    # roots of mu r^2 + B r - q alpha = 0 with B = mu alpha - q - eta
    B = mu_eff * alpha - q - eta
    disc = math.sqrt(B * B + 4.0 * mu_eff * q * alpha)
    if disc == 0.0:
        raise DomainError("degenerate Cramer-Lundberg scale function (double root)")
    if B >= 0:
        r1 = (-B - disc) / (2.0 * mu_eff)
        r2 = -q * alpha / (mu_eff * r1)
    else:
        r2 = (-B + disc) / (2.0 * mu_eff)
        r1 = -q * alpha / (mu_eff * r2) if r2 != 0 else (-B - disc) / (2.0 * mu_eff)
    r = disc / mu_eff
    G1 = (alpha + r1) / r
    G2 = (alpha + r2) / r
    return ScaleBasis(
        rate=q, process=process, drift=mu_eff, rates=(r1, r2), coefs=(-G1 / mu_eff, G2 / mu_eff),
        bounded_variation=True, r1=r1, r2=r2, r=r, G1=G1, G2=G2,
    )


@lru_cache(maxsize=512)
def scale_basis(spec: ProblemSpec, q: float, process: Process = "X") -> ScaleBasis:
    """Closed-form exponents/coefficients of ``W^(q)`` (X) or ``WW^(q)`` (Y)."""
    if q < 0:
        raise DomainError(f"q must be >= 0, got {q}")
    if process not in ("X", "Y"):
        raise ValueError(f"process must be 'X' or 'Y', got {process!r}")
    model = spec.model
    d = model.mu - (spec.delta if process == "Y" else 0.0)
    if isinstance(model, Brownian):
        return _brownian_basis(d, model.sigma, q, process)
    if isinstance(model, CramerLundberg):
        if d <= 0:
            raise DomainError("Cramer-Lundberg drift must stay positive (delta < mu)")
        return _cl_basis(d, model.eta, model.alpha, q, process)
    raise TypeError(f"unsupported model {model!r}")


# ---------------------------------------------------------------------------
# exponential convolutions


def conv_exp(u, v, t):
    """``int_0^t exp(u*(t-s) + v*s) ds`` for ``t >= 0``, stable when ``u == v``."""
    t = np.asarray(t, dtype=float)
    return np.exp(u * t) * t * exprel((v - u) * t)


def conv_exp_deriv(u, v, t, order: int = 1):
    """Derivatives in ``t`` of :func:`conv_exp`.

    With ``J = conv_exp(u, v, t)``: ``J' = exp(v t) + u J`` and
    ``J'' = v exp(v t) + u J'``.
    """
    J = conv_exp(u, v, t)
    d1 = np.exp(v * t) + u * J
    if order == 1:
        return d1
    if order == 2:
        return v * np.exp(v * t) + u * d1
    raise ValueError("order must be 1 or 2")


# ---------------------------------------------------------------------------
# W^(q), WW^(q)


def W_q(spec: ProblemSpec, q: float, x, process: Process = "X"):
    """q-scale function of X (or of Y), zero on the negative half-line."""
    return scale_basis(spec, q, process).value(x)


def W_q_deriv_0plus(spec: ProblemSpec, q: float, process: Process = "X") -> float:
    """Right limit ``W^(q)'(0+)``: ``2/sigma^2`` (Brownian) or
    ``(eta + q)/drift^2`` (Cramer-Lundberg)."""
    model = spec.model
    if isinstance(model, Brownian):
        return 2.0 / model.sigma**2
    d = model.mu - (spec.delta if process == "Y" else 0.0)
    return (model.eta + q) / d**2


def W_q_deriv(spec: ProblemSpec, q: float, x, process: Process = "X"):
    """Derivative of the scale function on ``(0, inf)``."""
    xa = np.asarray(x, dtype=float)
    if np.any(xa <= 0):
        raise DomainError("W_q_deriv needs x > 0; use W_q_deriv_0plus for the right limit at 0")
    return scale_basis(spec, q, process).deriv(xa)


# ---------------------------------------------------------------------------
# refracted scale function w^(q)(x; a)


def _refracted_terms(spec: ProblemSpec, q: float, x, a: float, order: int):
    """Closed form of ``w^(q)(x; a)`` and its derivatives for ``a <= b``."""
    WX = scale_basis(spec, q, "X")
    WY = scale_basis(spec, q, "Y")
    b, delta = spec.b, spec.delta
    x = np.asarray(x, dtype=float)
    if order == 0:
        base = WX.value(x - a)
    else:
        base = WX.deriv(x - a, order)
    t = np.where(x >= b, x - b, 0.0)
    extra = np.zeros_like(t)
    if delta != 0.0:
        for lk, ck in zip(WX.rates, WX.coefs):
            pre = delta * ck * lk * math.exp(lk * (b - a))
            for mj, dj in zip(WY.rates, WY.coefs):
                if order == 0:
                    J = conv_exp(mj, lk, t)
                else:
                    J = conv_exp_deriv(mj, lk, t, order)
                extra = extra + pre * dj * J
    return np.where(x >= b, base + extra, base)


def w_refracted(spec: ProblemSpec, q: float, x, a: float):
    """Scale function ``w^(q)(x; a)`` of the refracted process.

    Below ``b`` it is ``W^(q)(x - a)``.  For ``a > b`` a process started
    above ``a`` never sees the lower drift regime before exiting below
    ``a``, and the function reduces to ``WW^(q)(x - a)``.
    """
    x = np.asarray(x, dtype=float)
    if a > spec.b:
        return scale_basis(spec, q, "Y").value(x - a)[()]
    return _refracted_terms(spec, q, x, a, 0)[()]


def w_refracted_deriv(spec: ProblemSpec, q: float, x, a: float, side: str | None = None):
    """Derivative of ``w^(q)(.; a)``.

    In the bounded-variation case the derivative jumps at ``b`` (and at
    ``a``); there ``side`` must be ``"left"`` or ``"right"``.
    """
    xa = np.asarray(x, dtype=float)
    bv = spec.model.bounded_variation
    if a > spec.b:
        return scale_basis(spec, q, "Y").deriv(xa - a)[()]
    if side not in (None, "left", "right"):
        raise ValueError("side must be None, 'left' or 'right'")
    at_b = xa == spec.b
    if bv and side is None and np.any(at_b) and spec.delta != 0:
        raise KinkError("derivative of w is discontinuous at b for bounded variation; pass side=")
    out = _refracted_terms(spec, q, xa, a, 1)
    if side == "left" and np.any(at_b):
        left = scale_basis(spec, q, "X").deriv(xa - a)
        out = np.where(at_b, left, out)
    return out[()]


def w_refracted_quad(spec: ProblemSpec, q: float, x: float, a: float, tol: float = 1e-10) -> float:
    """Quadrature of the defining integral of ``w^(q)(x; a)`` (``a <= b``).

    Only the scale functions of X and Y enter; the convolution is integrated
    numerically with adaptive Simpson.
    """
    if a > spec.b:
        raise DomainError("quadrature oracle implemented for a <= b")
    WX = scale_basis(spec, q, "X")
    WY = scale_basis(spec, q, "Y")
    base = float(WX.value(x - a))
    if x < spec.b or spec.delta == 0:
        return base
    c1, c2 = WX.coefs
    l1, l2 = WX.rates
    y1, y2 = WY.rates
    e1, e2 = WY.coefs

    def integrand(y: float) -> float:
        u, v = x - y, y - a
        ww = e1 * math.exp(y1 * u) + e2 * math.exp(y2 * u)
        dw = c1 * l1 * math.exp(l1 * v) + c2 * l2 * math.exp(l2 * v) if v > 0 else 0.0
        return ww * dw

    return base + spec.delta * simpson_piecewise(integrand, spec.b, x, breaks=(a,), tol=tol)


# ---------------------------------------------------------------------------
# auxiliary fluctuation functions


def g_qpq_forms(spec: ProblemSpec, q: float, p: float, x: float, a: float, tol: float = 1e-11):
    """Both integral representations of ``g^(q+p,q)(x, a)``.

    Returns ``(form1, form2)`` where

    * form1 = ``W^(q+p)(x+a) - p int_0^x W^(q)(x-y) W^(q+p)(y+a) dy``
    * form2 = ``W^(q)(x+a) + p int_0^a W^(q)(x+a-y) W^(q+p)(y) dy``
    """
    if a < 0:
        raise DomainError(f"a must be >= 0, got {a}")
    if not (-a <= x <= spec.b):
        raise DomainError(f"g is defined for -a <= x <= b; got x={x}, a={a}, b={spec.b}")
    Wq = scale_basis(spec, q, "X")
    Wqp = scale_basis(spec, q + p, "X")

    wq, wqp = Wq.scalar, Wqp.scalar

    if x > 0:
        f1 = wqp(x + a) - p * simpson_piecewise(lambda y: wq(x - y) * wqp(y + a), 0.0, x, tol=tol)
    else:
        # W^(q)(x - y) vanishes for y > x
        f1 = wqp(x + a)
    f2 = wq(x + a) + p * simpson_piecewise(
        lambda y: wq(x + a - y) * wqp(y), 0.0, a, breaks=(x + a,), tol=tol
    )
    return f1, f2


def g_qpq(spec: ProblemSpec, q: float, p: float, x: float, a: float, rtol: float = 1e-9) -> float:
    """``g^(q+p,q)(x, a)``, cross-checked between its two representations."""
    f1, f2 = g_qpq_forms(spec, q, p, x, a)
    scale = max(abs(f1), abs(f2), 1e-300)
    if abs(f1 - f2) > rtol * scale:
        raise NonConvergenceError(f"g forms disagree: {f1!r} vs {f2!r}")
    return f1


def varpi(spec: ProblemSpec, q: float, x: float, c: float, b: float | None = None) -> float:
    """``WW(x-b) w(c; 0) / (WW(c-b) W(b))`` for ``b <= x``, ``b <= c``."""
    if b is not None and b != spec.b:
        spec = spec.with_params(b=b)
    b = spec.b
    if not (b <= x and b <= c and b >= 0):
        raise DomainError(f"varpi needs 0 <= b <= x and b <= c; got b={b}, x={x}, c={c}")
    Wb = float(W_q(spec, q, b))
    WWc = float(W_q(spec, q, c - b, "Y"))
    if Wb == 0.0 or WWc == 0.0:
        raise DomainError("varpi undefined: W(b) = 0 or WW(c - b) = 0")
    return float(W_q(spec, q, x - b, "Y")) * float(w_refracted(spec, q, c, 0.0)) / (WWc * Wb)


def convolution_identity_residual(
    spec: ProblemSpec, q: float, p: float, x: float, process: Process = "X", tol: float = 1e-10
) -> float:
    """``|p int_0^x W^(q)(x-y) W^(q+p)(y) dy - (W^(q+p)(x) - W^(q)(x))|``."""
    if x <= 0:
        raise DomainError(f"x must be > 0, got {x}")
    Wq = scale_basis(spec, q, process)
    Wqp = scale_basis(spec, q + p, process)
    if p == 0:
        return 0.0
    wq, wqp = Wq.scalar, Wqp.scalar
    integral = simpson_piecewise(lambda y: wq(x - y) * wqp(y), 0.0, x, tol=tol)
    return abs(p * integral - (wqp(x) - wq(x)))


# ---------------------------------------------------------------------------
# coefficient forms of the closed-form solutions


@dataclass(frozen=True)
class RefractedCoefficients:
    """Named coefficients of the model-specific closed forms.

    Brownian: ``A`` (``A_ij``), ``A_star`` (``A*_ij``) and ``Q`` (``Q_i(l)``).
    Cramer-Lundberg: ``phi`` (``phi_i(l)``), ``phi_star`` and ``phi_Y``.
    Index ``[i-1, j-1]`` corresponds to subscript ``ij``.
    """

    kind: str
    A: np.ndarray | None = None
    A_star: np.ndarray | None = None
    Q: np.ndarray | None = None
    phi: np.ndarray | None = None
    phi_star: np.ndarray | None = None
    phi_Y: np.ndarray | None = None


def refracted_coefficients(spec: ProblemSpec) -> RefractedCoefficients:
    """Build the coefficient matrices; raises ``DomainError`` when a
    denominator ``rho_i - rho_j^Y`` (or its analogue) vanishes."""
    q, m, l, b, delta = spec.q, spec.m, spec.l, spec.b, spec.delta
    X = scale_basis(spec, q, "X")
    Y = scale_basis(spec, q, "Y")
    S = scale_basis(spec, q + m, "X")
    lx, ly, ls = np.array(X.rates), np.array(Y.rates), np.array(S.rates)
    diff_xy = lx[:, None] - ly[None, :]
    diff_sx = ls[:, None] - lx[None, :]
    if np.any(np.abs(diff_xy) < 1e-13) or np.any(np.abs(diff_sx) < 1e-13):
        raise DomainError("closed-form coefficients are singular (coinciding exponents)")
    if isinstance(spec.model, Brownian):
        s4 = spec.model.sigma**4
        A = 4 * delta * lx[:, None] * np.exp(diff_xy * b) / (s4 * X.rho * Y.rho * diff_xy)
        A_star = 4 * m / (s4 * X.rho * S.rho * diff_sx)
        Q = (lx - ls[0]) / S.rho * math.exp(ls[1] * l) - (lx - ls[1]) / S.rho * math.exp(ls[0] * l)
        return RefractedCoefficients("brownian", A=A, A_star=A_star, Q=Q)
    other = [1, 0]
    phi = np.array([
        sum((-1) ** (j) * (lx[j] - ly[other[i]]) * math.exp((lx[j] - ly[i]) * b + lx[j] * l) for j in range(2))
        for i in range(2)
    ])
    phi_star = np.array([
        sum((-1) ** (j) * (ls[j] - lx[other[i]]) * math.exp(ls[j] * l) for j in range(2))
        for i in range(2)
    ])
    phi_Y = np.array([
        sum(
            (-1) ** (j + 1) * math.exp(ls[j] * l) * sum(
                (-1) ** (k) * (lx[k] - ly[other[i]]) * (ls[j] - lx[other[k]]) * math.exp((lx[k] - ly[i]) * b)
                for k in range(2)
            )
            for j in range(2)
        )
        for i in range(2)
    ])
    return RefractedCoefficients("cramer_lundberg", phi=phi, phi_star=phi_star, phi_Y=phi_Y)
