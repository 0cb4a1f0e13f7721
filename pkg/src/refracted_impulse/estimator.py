"""scikit-learn style front end for the optimizer.

Parameters are plain constructor arguments, so ``get_params``/``set_params``
and ``sklearn.base.clone`` work.  ``fit`` takes no data: it solves for the
optimal policy of the configured problem.  ``predict`` evaluates the
optimal value function at surplus levels.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .models import Brownian, CramerLundberg, EconSpec, ProblemSpec, RefractionSpec, validate
from .optimizer import optimize
from .parisian import theta_basis
from .valuation import value_curve, value_optimal


class OptimalImpulseDividends(BaseEstimator):
    """Optimal ``(c1, c2)`` impulse dividend policy.

    Args:
        model: ``"brownian"`` or ``"cramer_lundberg"``.
        mu: Drift (premium rate).
        sigma: Volatility (Brownian only).
        eta: Claim arrival rate (Cramer-Lundberg only).
        alpha: Exponential claim parameter (Cramer-Lundberg only).
        delta: Drift reduction above ``b``.
        b: Refraction threshold.
        q: Discount rate.
        m: Parisian delay rate.
        l: Depth of the bankruptcy barrier ``-l``.
        beta: Fixed transaction cost.

    Attributes:
        spec_: The fitted :class:`ProblemSpec`.
        result_: Full :class:`OptimizerResult`.
        c1_, c2_: Optimal levels.
        H_: Optimal value of ``H``.
        case_: Which of the optimizer's cases the optimum falls in.
    """

    def __init__(self, model="brownian", mu=0.5, sigma=0.75, eta=2.0, alpha=1.0, delta=0.03, b=3.0,
                 q=0.05, m=0.05, l=6.0, beta=1.0):  # noqa: E741
        self.model = model
        self.mu = mu
        self.sigma = sigma
        self.eta = eta
        self.alpha = alpha
        self.delta = delta
        self.b = b
        self.q = q
        self.m = m
        self.l = l  # noqa: E741
        self.beta = beta

    def to_spec(self) -> ProblemSpec:
        if self.model == "brownian":
            lm = Brownian(float(self.mu), float(self.sigma))
        elif self.model == "cramer_lundberg":
            lm = CramerLundberg(float(self.mu), float(self.eta), float(self.alpha))
        else:
            raise ValueError(f"unknown model {self.model!r}")
        return ProblemSpec(lm, RefractionSpec(float(self.delta), float(self.b)),
                           EconSpec(float(self.q), float(self.m), float(self.l), float(self.beta)))

    @classmethod
    def from_spec(cls, spec: ProblemSpec) -> "OptimalImpulseDividends":
        extra = {"sigma": spec.model.sigma} if isinstance(spec.model, Brownian) else {
            "eta": spec.model.eta, "alpha": spec.model.alpha}
        return cls(model=spec.model.kind, mu=spec.model.mu, delta=spec.delta, b=spec.b, q=spec.q,
                   m=spec.m, l=spec.l, beta=spec.beta, **extra)

    def fit(self, X=None, y=None):
        """Solve for the optimal policy; ``X`` and ``y`` are ignored."""
        spec = self.to_spec()
        validate(spec).raise_if_invalid()
        self.spec_ = spec
        self.basis_ = theta_basis(spec)
        self.result_ = optimize(self.basis_)
        self.c1_ = self.result_.policy.c1
        self.c2_ = self.result_.policy.c2
        self.H_ = self.result_.h_value
        self.case_ = self.result_.case
        return self

    def _check_fitted(self):
        if not hasattr(self, "result_"):
            raise NotFittedError("call fit() first")

    def predict(self, X):
        """Optimal value at the surplus levels in ``X`` (any shape; a
        single-column 2-D array is flattened)."""
        self._check_fitted()
        x = np.asarray(X, dtype=float)
        if x.ndim == 2 and x.shape[1] == 1:
            x = x[:, 0]
        if self.case_ == "interior":
            return np.asarray(value_optimal(self.basis_, self.result_.policy, x))
        return np.asarray(value_curve(self.basis_, self.result_.policy).value(x))

    @property
    def policy_(self):
        self._check_fitted()
        return self.result_.policy
