"""Optimal impulse thresholds ``(c1*, c2*)`` minimizing ``H``.

The solver works on levels ``lam`` of ``theta'``.  With
``phi_lam(c) = theta(c) - lam * c``, a pair is optimal with ``H = lam`` iff
``min over c2 of phi_lam(c2) - max over c1 of phi_lam(c1) + lam * beta = 0``.
On ``[0, eps2]`` ``theta'`` decreases, so the inner maximizer ``c1(lam)``
sits where ``theta'`` crosses ``lam`` (or at an end of the interval); on
``[eps2, inf)`` ``theta'`` increases and ``c2(lam)`` is its generalized
inverse.  The outer equation in ``lam`` is solved by bisection.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, NonConvergenceError
from .models import ProblemSpec, validate
from .parisian import Breakpoints, ThetaBasis, _as_basis, breakpoints, theta, theta_basis, theta_deriv
from .quadrature import bisect
from .valuation import H_surface, Policy, hjb_residual, value_curve

log = logging.getLogger(__name__)

__all__ = [
    "CASES",
    "OptimizerResult",
    "GridOracleResult",
    "OptimalityReport",
    "SweepRow",
    "search_box",
    "optimize",
    "grid_oracle",
    "verify_optimality",
    "sweep",
]

CASES = ("interior", "c1_at_b", "c1_at_0", "c2_at_b", "corner_0_b")

_LAM_TOL = 1e-10
_X_TOL = 1e-13


@dataclass(frozen=True)
class OptimizerResult:
    policy: Policy
    case: str
    h_value: float
    first_order_residuals: dict
    search_box: tuple[float, float]
    level: float
    breakpoints: Breakpoints
    flags: tuple[str, ...] = ()
    candidates: tuple = ()

    def to_dict(self) -> dict:
        return {
            "c1": self.policy.c1,
            "c2": self.policy.c2,
            "case": self.case,
            "H": self.h_value,
            "residuals": dict(self.first_order_residuals),
            "search_box": list(self.search_box),
            "eps2": self.breakpoints.eps2,
            "flags": list(self.flags),
        }


# ---------------------------------------------------------------------------
# search box


def search_box(basis, n_coarse: int = 40, max_doublings: int = 60) -> tuple[float, float]:
    """Square ``[0, c]^2`` that numerically contains every minimizer of ``H``.

    ``c`` starts at ``max(b, l, 10 beta)`` and doubles until ``H`` on the
    edge ``c2 = c`` exceeds twice the best value found inside.
    """
    tb = _as_basis(basis)
    beta = tb.problem.beta
    c = max(tb.b, tb.l, 10.0 * beta)
    for _ in range(max_doublings):
        g = np.linspace(0.0, c, n_coarse + 1)
        c1, c2 = np.meshgrid(g, g, indexing="ij")
        ok = c2 > c1 + beta
        th = theta(tb, g)
        with np.errstate(divide="ignore", invalid="ignore"):
            H = (th[None, :] - th[:, None]) / (c2 - c1 - beta)
        best = np.min(np.where(ok, H, np.inf))
        edge_c1 = g[g < c - beta]
        edge = np.min(H_surface(tb, edge_c1, np.full_like(edge_c1, c)))
        if edge > 2.0 * best:
            return c, c
        c *= 2.0
    raise NonConvergenceError(f"search box did not close after {max_doublings} doublings")


# ---------------------------------------------------------------------------
# level-set solver


class _Level:
    """Inner maximization/minimization of ``phi_lam`` for a fixed basis."""

    def __init__(self, tb: ThetaBasis, bp: Breakpoints):
        self.tb = tb
        self.bp = bp
        self.b = tb.b
        self.jump_at_b = tb.bounded_variation and tb.problem.delta != 0

    def d(self, x: float, side: str = "right") -> float:
        return float(theta_deriv(self.tb, x, side=side))

    def phi(self, c: float, lam: float) -> float:
        return float(theta(self.tb, c)) - lam * c

    def _crossing(self, lo: float, hi: float, lam: float) -> float:
        # one-sided limits at the ends keep the bracket valid across jumps
        def f(c: float) -> float:
            return self.d(c, "left" if c == hi else "right") - lam

        return bisect(f, lo, hi, xtol=_X_TOL)

    def _argmax_decreasing(self, lo: float, hi: float, lam: float) -> float:
        if self.d(lo, "right") <= lam:
            return lo
        if self.d(hi, "left") >= lam:
            return hi
        return self._crossing(lo, hi, lam)

    def c1(self, lam: float) -> float:
        eps2 = self.bp.eps2
        if eps2 <= 0:
            return 0.0
        if self.jump_at_b and 0 < self.b < eps2:
            pieces = [(0.0, self.b), (self.b, eps2)]
        else:
            pieces = [(0.0, eps2)]
        cands = [self._argmax_decreasing(lo, hi, lam) for lo, hi in pieces]
        return max(cands, key=lambda c: self.phi(c, lam))

    def c2(self, lam: float) -> float:
        lo = self.bp.eps2
        if self.d(lo, "right") >= lam:
            return lo
        step = max(1.0, lo)
        hi = lo + step
        while self.d(hi) < lam:
            step *= 2.0
            hi = lo + step
            if step > 1e8:
                raise NonConvergenceError("theta' does not reach the requested level")
        c = self._crossing(lo, hi, lam)
        if self.jump_at_b and abs(c - self.b) < 1e-9:
            if self.d(self.b, "left") <= lam <= self.d(self.b, "right"):
                c = self.b
        return c

    def gap(self, lam: float) -> tuple[float, float, float]:
        c1, c2 = self.c1(lam), self.c2(lam)
        return self.phi(c2, lam) - self.phi(c1, lam) + lam * self.tb.problem.beta, c1, c2


def _classify(tb: ThetaBasis, c1: float, c2: float) -> str:
    bv = tb.bounded_variation and tb.problem.delta != 0
    at0 = c1 == 0.0
    c2b = bv and c2 == tb.b
    c1b = bv and c1 == tb.b
    if at0 and c2b:
        return "corner_0_b"
    if c2b:
        return "c2_at_b"
    if at0:
        return "c1_at_0"
    if c1b:
        return "c1_at_b"
    return "interior"


def _residuals(tb: ThetaBasis, case: str, c1: float, c2: float, H: float) -> dict:
    d1 = float(theta_deriv(tb, c1, side="right"))
    d2 = float(theta_deriv(tb, c2, side="right"))
    if case == "interior":
        return {"c1_c2": abs(d1 - d2) / H, "c2_H": abs(d2 - H) / H}
    if case in ("c1_at_0", "c1_at_b"):
        return {"c2_H": abs(d2 - H) / H}
    if case == "c2_at_b":
        return {"c1_H": abs(d1 - H) / H}
    return {}


def optimize(basis, box: tuple[float, float] | None = None) -> OptimizerResult:
    """Minimize ``H`` over ``{c1 >= 0, c2 > c1 + beta}``.

    ``basis`` may be a :class:`ThetaBasis` or a :class:`ProblemSpec`.
    """
    tb = _as_basis(basis)
    spec = tb.problem
    if spec.q <= 0:
        raise DomainError("optimize needs q > 0")
    beta = spec.beta
    bp = breakpoints(tb)
    if box is None:
        box = search_box(tb)
    lv = _Level(tb, bp)

    lam_lo = lv.d(bp.eps2, "right")
    if bp.eps2 > 0:
        lam_lo = min(lam_lo, lv.d(bp.eps2, "left"))
    g_lo = lv.gap(lam_lo)[0]
    if g_lo <= 0:
        raise NonConvergenceError(f"level bracket failed at lam={lam_lo}: gap {g_lo}")
    inc = max(1.0, abs(lam_lo))
    lam_hi = lam_lo + inc
    while lv.gap(lam_hi)[0] > 0:
        inc *= 2.0
        lam_hi = lam_lo + inc
        if inc > 1e12:
            raise NonConvergenceError("level bracket failed: H unbounded")
    for _ in range(200):
        if lam_hi - lam_lo <= _LAM_TOL:
            break
        mid = 0.5 * (lam_lo + lam_hi)
        if lv.gap(mid)[0] > 0:
            lam_lo = mid
        else:
            lam_hi = mid
    lam = lam_hi
    _, c1, c2 = lv.gap(lam)
    if not c2 > c1 + beta:
        raise NonConvergenceError(f"level-set solution left dom(H): c1={c1}, c2={c2}")

    flags: list[str] = []
    cands = [(float(H_surface(tb, c1, c2)), c1, c2, "level_set")]
    if spec.b > beta:
        cands.append((float(H_surface(tb, 0.0, spec.b)), 0.0, spec.b, "corner_0_b"))
    cands.sort(key=lambda t: t[0])
    H, c1, c2, src = cands[0]
    if src != "level_set":
        flags.append("corner candidate beats level-set solution; no first-order certificate")
    if len(cands) > 1 and abs(cands[1][0] - H) <= 1e-9 * H:
        flags.append("tie between candidates within 1e-9 relative")
    case = _classify(tb, c1, c2)
    if tb.bounded_variation and abs(c2 - spec.b) < 1e-6:
        flags.append("c2* within 1e-6 of b (bounded variation)")
    if bp.zeta_order_violated:
        flags.append("zeta3 > zeta2")
    if max(c1, c2) >= box[1]:
        flags.append("optimum on the search box edge")
    res = _residuals(tb, case, c1, c2, H)
    return OptimizerResult(
        policy=Policy(c1, c2), case=case, h_value=H, first_order_residuals=res,
        search_box=box, level=lam, breakpoints=bp, flags=tuple(flags), candidates=tuple(cands),
    )


# ---------------------------------------------------------------------------
# brute-force oracle


@dataclass(frozen=True)
class GridOracleResult:
    c1: float
    c2: float
    h_value: float
    n_basins: int
    coarse: tuple[float, float]
    coarse_step: float
    fine_step: float
    cell_variation: float
    basin_points: tuple = ()


def _cluster(points: list[tuple[int, int]]) -> list[list[tuple[int, int]]]:
    groups: list[list[tuple[int, int]]] = []
    for p in points:
        for g in groups:
            if any(abs(p[0] - r[0]) <= 1 and abs(p[1] - r[1]) <= 1 for r in g):
                g.append(p)
                break
        else:
            groups.append([p])
    # merge groups joined by later points
    merged = True
    while merged:
        merged = False
        for i in range(len(groups)):
            for j in range(i + 1, len(groups)):
                if any(abs(a[0] - b[0]) <= 1 and abs(a[1] - b[1]) <= 1 for a in groups[i] for b in groups[j]):
                    groups[i].extend(groups.pop(j))
                    merged = True
                    break
            if merged:
                break
    return groups


def grid_oracle(
    basis, box: tuple[float, float] | None = None, step: float = 1e-2, fine: float = 1e-4, window: int = 2
) -> GridOracleResult:
    """Brute-force minimization of ``H`` on a grid, then a finer grid around
    the best coarse cell.  Also counts the grid's local-minimum basins."""
    tb = _as_basis(basis)
    beta = tb.problem.beta
    if box is None:
        box = search_box(tb)
    n = int(round(box[1] / step)) + 1
    g = np.arange(n) * step
    th = np.asarray(theta(tb, g))

    def row(i: int) -> np.ndarray:
        if i < 0 or i >= n:
            return np.full(n, np.inf)
        gap = g - g[i] - beta
        out = np.full(n, np.inf)
        ok = gap > 0
        out[ok] = (th[ok] - th[i]) / gap[ok]
        return out

    best = (np.inf, 0, 0)
    minima: list[tuple[int, int]] = []
    prev, cur = row(-1), row(0)
    for i in range(n):
        nxt = row(i + 1)
        stack = np.vstack([prev, cur, nxt])
        neigh = np.full(n, np.inf)
        for di in range(3):
            for dj in (-1, 0, 1):
                if di == 1 and dj == 0:
                    continue
                shifted = np.roll(stack[di], -dj)
                if dj == 1:
                    shifted[-1] = np.inf
                elif dj == -1:
                    shifted[0] = np.inf
                neigh = np.minimum(neigh, shifted)
        fin = np.isfinite(cur)
        is_min = fin & (cur <= neigh)
        minima.extend((i, int(j)) for j in np.nonzero(is_min)[0])
        j = int(np.argmin(cur))
        if cur[j] < best[0]:
            best = (float(cur[j]), i, j)
        prev, cur = cur, nxt
    basins = _cluster(minima)

    _, i0, j0 = best
    c1c, c2c = g[i0], g[j0]
    f1 = np.arange(max(0.0, c1c - window * step), c1c + window * step + fine / 2, fine)
    f2 = np.arange(c2c - window * step, c2c + window * step + fine / 2, fine)
    t1 = np.asarray(theta(tb, f1))
    t2 = np.asarray(theta(tb, f2))
    gap = f2[None, :] - f1[:, None] - beta
    with np.errstate(divide="ignore", invalid="ignore"):
        Hf = np.where(gap > 0, (t2[None, :] - t1[:, None]) / gap, np.inf)
    a, bidx = np.unravel_index(np.argmin(Hf), Hf.shape)
    Hmin = float(Hf[a, bidx])
    cell = Hf[max(a - 1, 0): a + 2, max(bidx - 1, 0): bidx + 2]
    variation = float(np.max(cell[np.isfinite(cell)]) - Hmin)
    pts = tuple((float(g[p[0]]), float(g[p[1]])) for grp in basins for p in grp[:1])
    return GridOracleResult(
        c1=float(f1[a]), c2=float(f2[bidx]), h_value=Hmin, n_basins=len(basins), coarse=(float(c1c), float(c2c)),
        coarse_step=step, fine_step=fine, cell_variation=variation, basin_points=pts,
    )


# ---------------------------------------------------------------------------
# optimality certificate


@dataclass(frozen=True)
class OptimalityReport:
    monotone_ok: bool
    hjb_ok: bool
    random_ok: bool
    max_hjb_inside: float
    max_hjb_outside: float
    min_random_gap: float
    details: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.monotone_ok and self.hjb_ok and self.random_ok


def _grid_excluding(lo: float, hi: float, n: int, avoid, radius: float) -> np.ndarray:
    x = np.linspace(lo, hi, n)
    keep = np.ones_like(x, dtype=bool)
    for k in avoid:
        keep &= np.abs(x - k) >= radius
    return x[keep]


def verify_optimality(
    basis, result: OptimizerResult, n_random: int = 10_000, seed: int = 0, n_hjb: int = 120
) -> OptimalityReport:
    """Check the sufficient conditions at ``result``.

    (a) ``theta'`` nondecreasing on ``[c2*, c2* + 5l]`` sampled at 1e-2,
    (b) HJB residual zero below ``c2*`` and nonpositive above,
    (c) ``H(result)`` below ``H`` at ``n_random`` random feasible points.
    """
    tb = _as_basis(basis)
    spec = tb.problem
    c1, c2 = result.policy.c1, result.policy.c2
    xs = np.arange(c2, c2 + 5 * spec.l, 1e-2)
    if tb.bounded_variation:
        xs = xs[xs != spec.b]
    d = np.asarray(theta_deriv(tb, xs, side="right"))
    steps = np.diff(d)
    monotone = bool(np.all(steps >= -1e-12 * np.abs(d[1:])))

    curve = value_curve(tb, result.policy)
    avoid = (0.0, spec.b, c2)
    inside = _grid_excluding(-spec.l + 1e-3, c2, n_hjb, avoid, 1e-3)
    outside = _grid_excluding(c2, c2 + 3 * spec.l, n_hjb // 2, avoid, 1e-3)
    r_in = [abs(hjb_residual(tb, curve, x)) / (spec.q * float(curve.value(x)) + 1.0) for x in inside]
    r_out = [hjb_residual(tb, curve, x) for x in outside]
    max_in = max(r_in) if r_in else 0.0
    max_out = max(r_out) if r_out else -math.inf
    hjb_ok = max_in < 1e-6 and max_out <= 1e-6

    rng = np.random.default_rng(seed)
    cmax = result.search_box[1]
    pts = []
    while len(pts) < n_random:
        c = rng.uniform(0.0, cmax, size=(2 * n_random, 2))
        c = c[c[:, 1] > c[:, 0] + spec.beta]
        pts.extend(c.tolist())
    arr = np.asarray(pts[:n_random])
    Hr = np.asarray(H_surface(tb, arr[:, 0], arr[:, 1]))
    gap = float(np.min(Hr - result.h_value))
    random_ok = gap >= -1e-12 * result.h_value
    return OptimalityReport(
        monotone, hjb_ok, random_ok, max_in, max_out, gap,
        details={"n_hjb_inside": len(inside), "n_hjb_outside": len(outside), "n_random": n_random},
    )


# ---------------------------------------------------------------------------
# parameter sweeps


@dataclass(frozen=True)
class SweepRow:
    param: str
    value: float
    c1: float
    c2: float
    H: float
    case: str
    eps2: float
    error: str = ""


def sweep(base: ProblemSpec, parameter: str, values) -> list[SweepRow]:
    """Optimize at each ``parameter`` value; failures are recorded per row."""
    allowed = ("beta", "delta", "b", "l", "m", "q")
    if parameter not in allowed:
        raise ValueError(f"parameter must be one of {allowed}")
    rows = []
    for v in values:
        v = float(v)
        try:
            spec = base.with_params(**{parameter: v})
            validate(spec).raise_if_invalid()
            res = optimize(theta_basis(spec))
            rows.append(SweepRow(parameter, v, res.policy.c1, res.policy.c2, res.h_value, res.case,
                                 res.breakpoints.eps2))
        except Exception as exc:  # noqa: BLE001 - sweep isolates per-point failures
            log.warning("sweep %s=%g failed: %s", parameter, v, exc)
            rows.append(SweepRow(parameter, v, math.nan, math.nan, math.nan, "failed", math.nan, str(exc)))
    return rows
