"""Risk-model parameterization, validation and Laplace exponents.

Two spectrally negative models are supported:

* ``Brownian``: ``X_t = x + mu*t + sigma*B_t`` (unbounded variation),
* ``CramerLundberg``: ``X_t = x + mu*t - S_t`` with ``S`` compound Poisson,
  arrival rate ``eta`` and Exp(``alpha``) claims (bounded variation).

Above the refraction threshold ``b`` the drift is reduced by ``delta``; the
reduced process is called ``Y`` throughout.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Literal, Union

from .errors import DomainError, ValidationError

Process = Literal["X", "Y"]


@dataclass(frozen=True)
class Brownian:
    mu: float
    sigma: float

    kind = "brownian"
    bounded_variation = False


@dataclass(frozen=True)
class CramerLundberg:
    mu: float
    eta: float
    alpha: float

    kind = "cramer_lundberg"
    bounded_variation = True


LevyModelSpec = Union[Brownian, CramerLundberg]


@dataclass(frozen=True)
class RefractionSpec:
    delta: float
    b: float


@dataclass(frozen=True)
class EconSpec:
    """Discount rate ``q``, Parisian rate ``m``, barrier depth ``l`` (barrier
    at ``-l``) and fixed transaction cost ``beta``."""

    q: float
    m: float
    l: float
    beta: float


@dataclass(frozen=True)
class ProblemSpec:
    model: LevyModelSpec
    refraction: RefractionSpec
    econ: EconSpec

    # flat accessors keep the numerical code readable
    @property
    def delta(self) -> float:
        return self.refraction.delta

    @property
    def b(self) -> float:
        return self.refraction.b

    @property
    def q(self) -> float:
        return self.econ.q

    @property
    def m(self) -> float:
        return self.econ.m

    @property
    def l(self) -> float:  # noqa: E743
        return self.econ.l

    @property
    def beta(self) -> float:
        return self.econ.beta

    def with_params(self, **params) -> "ProblemSpec":
        """Copy with any of ``delta, b, q, m, l, beta`` or model fields replaced."""
        model_fields = {k: params.pop(k) for k in list(params) if hasattr(self.model, k)}
        refr = {k: params.pop(k) for k in list(params) if k in ("delta", "b")}
        econ = {k: params.pop(k) for k in list(params) if k in ("q", "m", "l", "beta")}
        if params:
            raise KeyError(f"unknown parameter(s): {sorted(params)}")
        return ProblemSpec(
            replace(self.model, **model_fields),
            replace(self.refraction, **refr),
            replace(self.econ, **econ),
        )

    def to_dict(self) -> dict:
        model = {"type": self.model.kind, **asdict(self.model)}
        return {
            "model": model,
            "refraction": asdict(self.refraction),
            "econ": asdict(self.econ),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ProblemSpec":
        try:
            mdata = dict(data["model"])
            kind = mdata.pop("type")
            if kind == "brownian":
                model = Brownian(mu=float(mdata["mu"]), sigma=float(mdata["sigma"]))
            elif kind == "cramer_lundberg":
                model = CramerLundberg(
                    mu=float(mdata["mu"]), eta=float(mdata["eta"]), alpha=float(mdata["alpha"])
                )
            else:
                raise ValueError(f"unknown model type {kind!r}")
            refr = RefractionSpec(delta=float(data["refraction"]["delta"]), b=float(data["refraction"]["b"]))
            e = data["econ"]
            econ = EconSpec(q=float(e["q"]), m=float(e["m"]), l=float(e["l"]), beta=float(e["beta"]))
        except KeyError as exc:
            raise ValueError(f"missing field {exc.args[0]!r} in problem file") from exc
        return cls(model, refr, econ)


def load_problem(path: str | Path) -> ProblemSpec:
    with open(path) as fh:
        return ProblemSpec.from_dict(json.load(fh))


# Parameter sets used for the numerical section of the source study.
BROWNIAN_BASE = ProblemSpec(
    Brownian(mu=0.5, sigma=0.75),
    RefractionSpec(delta=0.03, b=3.0),
    EconSpec(q=0.05, m=0.05, l=6.0, beta=1.0),
)
CRAMER_LUNDBERG_BASE = ProblemSpec(
    CramerLundberg(mu=3.0, eta=2.0, alpha=1.0),
    RefractionSpec(delta=0.15, b=6.0),
    EconSpec(q=0.05, m=0.5, l=6.0, beta=0.1),
)


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class Violation:
    rule: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return not self.violations

    def raise_if_invalid(self) -> None:
        if self.violations:
            raise ValidationError(self.violations)


def _finite(*vals: float) -> bool:
    return all(isinstance(v, (int, float)) and math.isfinite(v) for v in vals)


def validate(spec: ProblemSpec) -> ValidationReport:
    """Check every sign/structure invariant and report all that fail."""
    out: list[Violation] = []
    model, delta, b = spec.model, spec.delta, spec.b
    e = spec.econ

    def need(cond: bool, rule: str, msg: str) -> None:
        if not cond:
            out.append(Violation(rule, msg))

    if isinstance(model, Brownian):
        need(_finite(model.mu, model.sigma), "finite_parameters", "model parameters must be finite")
        need(model.mu > 0, "positive_drift", f"mu must be > 0, got {model.mu}")
        need(model.sigma > 0, "positive_volatility", f"sigma must be > 0, got {model.sigma}")
        mean_y = model.mu - delta
    elif isinstance(model, CramerLundberg):
        need(_finite(model.mu, model.eta, model.alpha), "finite_parameters", "model parameters must be finite")
        need(model.mu > 0, "positive_drift", f"mu must be > 0, got {model.mu}")
        need(model.eta > 0, "positive_claim_rate", f"eta must be > 0, got {model.eta}")
        need(model.alpha > 0, "positive_claim_parameter", f"alpha must be > 0, got {model.alpha}")
        need(
            delta < model.mu,
            "drift_retention",
            f"bounded-variation case requires delta < mu (delta={delta}, mu={model.mu})",
        )
        mean_y = model.mu - delta - model.eta / model.alpha if model.alpha > 0 else -math.inf
    else:  # pragma: no cover - typing guard
        raise TypeError(f"unsupported model {model!r}")

    need(_finite(delta, b, e.q, e.m, e.l, e.beta), "finite_parameters", "parameters must be finite")
    need(delta >= 0, "nonnegative_refraction", f"delta must be >= 0, got {delta}")
    need(b >= 0, "nonnegative_threshold", f"b must be >= 0, got {b}")
    need(
        mean_y >= 0,
        "net_profit",
        f"refracted drift psi'(0+) - delta must be >= 0, got {mean_y:.6g}",
    )
    need(e.q >= 0, "nonnegative_discount", f"q must be >= 0, got {e.q}")
    need(e.m >= 0, "nonnegative_parisian_rate", f"m must be >= 0, got {e.m}")
    need(e.l > 0, "positive_barrier_depth", f"l must be > 0, got {e.l}")
    need(e.beta > 0, "positive_transaction_cost", f"beta must be > 0, got {e.beta}")
    return ValidationReport(tuple(out))


# ---------------------------------------------------------------------------
# Laplace exponents


def _drift(spec: ProblemSpec, process: Process) -> float:
    if process == "X":
        return spec.model.mu
    if process == "Y":
        return spec.model.mu - spec.delta
    raise ValueError(f"process must be 'X' or 'Y', got {process!r}")


def laplace_exponent(spec: ProblemSpec, lam: float, process: Process = "X") -> float:
    """``psi(lam)`` for X, or ``psi(lam) - delta*lam`` for Y."""
    if not lam >= 0:
        raise DomainError(f"Laplace exponent is evaluated for lambda >= 0 only, got {lam}")
    if process not in ("X", "Y"):
        raise ValueError(f"process must be 'X' or 'Y', got {process!r}")
    model = spec.model
    if isinstance(model, Brownian):
        psi = model.mu * lam + 0.5 * model.sigma**2 * lam**2
    else:
        psi = model.mu * lam + model.eta * (model.alpha / (lam + model.alpha) - 1.0)
    return psi - spec.delta * lam if process == "Y" else psi


def phi_inverse(spec: ProblemSpec, q: float, process: Process = "X") -> float:
    """Largest nonnegative root of ``psi(lam) = q`` (or its Y analogue).

    Brackets by doubling and bisects; the exponent is convex and increasing
    past its minimum, so the bracket is safe.
    """
    if q < 0:
        raise DomainError(f"q must be >= 0, got {q}")

    def f(lam: float) -> float:
        return laplace_exponent(spec, lam, process) - q

    mean = _drift(spec, process)
    if isinstance(spec.model, CramerLundberg):
        mean -= spec.model.eta / spec.model.alpha
    if q == 0 and mean >= 0:
        return 0.0
    # {f <= 0} on [0, inf) is an interval [0, root] by convexity and f(0) = -q <= 0
    lo, hi = 0.0, 1.0
    while f(hi) <= 0:
        lo, hi = hi, 2.0 * hi
        if hi > 1e300:
            raise DomainError("no root of psi(lambda) = q found")
    while hi - lo > 1e-14:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if f(mid) <= 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
