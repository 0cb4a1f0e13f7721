"""Monte Carlo oracle for exit transforms and impulse-policy values.

The discount factor ``exp(-q t)`` of the value functional is realized as an
independent exp(q) horizon: a dividend paid at ``t`` counts iff ``t`` is
before the horizon.  The expectation is unchanged and paths stop after a
finite, short time, so truncation at ``t_max`` is negligible.

Parisian ruin is handled by one of two estimators:

* ``clock``: a fresh exp(m) clock is drawn at every downcrossing of 0 and
  the path is ruined when an excursion outlives it,
* ``killing``: the path only stops at ``-l`` and each payment is weighted by
  ``exp(-m * time spent below 0)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..models import Brownian, ProblemSpec
from ..valuation import Policy
from . import kernels
from .kernels import BANKRUPT, HORIZON, PARISIAN, REACHED, TRUNCATED
from .rng import split_seed

__all__ = [
    "SimConfig",
    "SimEstimate",
    "PathRecord",
    "simulate_path",
    "simulate_batch",
    "estimate_value",
    "estimate_exit_laplace",
    "STATUS_NAMES",
]

STATUS_NAMES = {HORIZON: "horizon", PARISIAN: "parisian", BANKRUPT: "bankrupt", REACHED: "reached",
                TRUNCATED: "truncated"}
_EST = {"clock": kernels.EST_CLOCK, "killing": kernels.EST_KILLING}


@dataclass(frozen=True)
class SimConfig:
    """Monte Carlo settings.

    ``t_max`` defaults to ``50/q`` (or 1e4 time units when ``q = 0``);
    ``dt`` is only used by the Brownian Euler scheme.  With
    ``continuity_correction`` the Euler scheme monitors ``c2 - s`` and
    ``-l + s`` with ``s = 0.5826 sigma sqrt(dt)``, which removes the leading
    O(sqrt(dt)) bias of grid monitoring; switch it off for the raw scheme.
    """

    n_paths: int = 100_000
    seed: int = 0
    dt: float = 2.5e-3
    t_max: float | None = None
    estimator: str = "clock"
    continuity_correction: bool = True

    def __post_init__(self):
        if self.n_paths < 1:
            raise ValueError("n_paths must be >= 1")
        if not self.dt > 0:
            raise ValueError("dt must be > 0")
        if self.t_max is not None and not self.t_max > 0:
            raise ValueError("t_max must be > 0")
        if self.estimator not in _EST:
            raise ValueError(f"estimator must be one of {sorted(_EST)}")
        split_seed(self.seed)

    def horizon(self, q: float) -> float:
        if self.t_max is not None:
            return float(self.t_max)
        return 50.0 / q if q > 0 else 1e4


@dataclass(frozen=True)
class SimEstimate:
    mean: float
    stderr: float
    n_effective: int
    truncation_fraction: float
    seed: int
    estimator: str
    status_fractions: dict = field(default_factory=dict)

    def z_score(self, reference: float) -> float:
        if self.stderr == 0:
            return 0.0 if self.mean == reference else float("inf")
        return (self.mean - reference) / self.stderr

    def to_dict(self) -> dict:
        return {
            "mean": self.mean, "stderr": self.stderr, "n_effective": self.n_effective,
            "truncation_fraction": self.truncation_fraction, "seed": self.seed,
            "estimator": self.estimator, "status_fractions": dict(self.status_fractions),
        }


@dataclass(frozen=True)
class PathRecord:
    """Outcome of one path: the (weighted) dividend sum or exit weight,
    how and when it ended, and the number of dividend payments."""

    payoff: float
    status: str
    t_end: float
    n_dividends: int


def _run(spec: ProblemSpec, c1: float, c2: float, x0: float, mode: int, config: SimConfig,
         n: int, offset: int):
    k0, k1 = (np.uint64(v) for v in split_seed(config.seed))
    est = _EST[config.estimator]
    t_max = config.horizon(spec.q)
    model = spec.model
    args_tail = (spec.delta, spec.b, spec.m, spec.l, spec.q, spec.beta, float(c1), float(c2), float(x0),
                 mode, est, t_max)
    if isinstance(model, Brownian):
        shift = kernels.SHIFT_CONSTANT * model.sigma * np.sqrt(config.dt) if config.continuity_correction else 0.0
        return kernels.brownian_batch(model.mu, model.sigma, *args_tail, config.dt, shift, n, offset, k0, k1)
    return kernels.cl_batch(model.mu, model.eta, model.alpha, *args_tail, n, offset, k0, k1)


def _check_x0(spec: ProblemSpec, x0: float) -> None:
    if x0 < -spec.l:
        raise ValueError(f"x0 must be >= -l = {-spec.l}")


def simulate_batch(spec: ProblemSpec, policy: Policy | None, x0: float, config: SimConfig,
                   c: float | None = None, offset: int = 0, n: int | None = None):
    """Raw per-path arrays ``(payoff, status, t_end, n_dividends)``."""
    _check_x0(spec, x0)
    n = config.n_paths if n is None else n
    if policy is not None:
        pol = policy if isinstance(policy, Policy) else Policy(*policy)
        pol.check(spec.beta)
        return _run(spec, pol.c1, pol.c2, x0, kernels.MODE_VALUE, config, n, offset)
    if c is None:
        raise ValueError("either a policy or an exit level c is required")
    return _run(spec, 0.0, c, x0, kernels.MODE_EXIT, config, n, offset)


def simulate_path(spec: ProblemSpec, policy: Policy | None, x0: float, config: SimConfig,
                  stream: int = 0, c: float | None = None) -> PathRecord:
    """Simulate path number ``stream`` of the run defined by ``config.seed``."""
    pay, st, te, nd = simulate_batch(spec, policy, x0, config, c=c, offset=stream, n=1)
    return PathRecord(float(pay[0]), STATUS_NAMES[int(st[0])], float(te[0]), int(nd[0]))


def _summarize(pay: np.ndarray, status: np.ndarray, config: SimConfig) -> SimEstimate:
    n = pay.size
    mean = float(np.mean(pay))
    stderr = float(np.std(pay, ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    counts = np.bincount(status.astype(np.int64), minlength=5)
    fr = {STATUS_NAMES[k]: float(counts[k]) / n for k in STATUS_NAMES}
    return SimEstimate(mean, stderr, n, fr["truncated"], config.seed, config.estimator, fr)


def estimate_value(spec: ProblemSpec, policy, x0: float, config: SimConfig) -> SimEstimate:
    """Monte Carlo estimate of the expected discounted dividends of ``policy``."""
    pay, st, _, _ = simulate_batch(spec, policy, x0, config)
    return _summarize(pay, st, config)


def estimate_exit_laplace(spec: ProblemSpec, x0: float, c: float, config: SimConfig) -> SimEstimate:
    """Monte Carlo estimate of ``E_x0[exp(-q k_c) 1{k_c < T}]``."""
    if x0 > c:
        raise ValueError("x0 must be <= c")
    pay, st, _, _ = simulate_batch(spec, None, x0, config, c=c)
    return _summarize(pay, st, config)
