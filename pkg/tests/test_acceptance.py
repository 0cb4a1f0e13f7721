"""Acceptance criteria, one test per criterion at its stated tolerance.

Each test records a PASS/FAIL line that is printed in the terminal summary.
"""

import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES, SPECS
from refracted_impulse.optimizer import grid_oracle, optimize, sweep
from refracted_impulse.parisian import breakpoints, theta, theta_basis, theta_deriv, theta_quad, theta_second
from refracted_impulse.scale import W_q, convolution_identity_residual, g_qpq
from refracted_impulse.simulator import SimConfig, estimate_exit_laplace, estimate_value
from refracted_impulse.valuation import bound_check, exit_laplace, hjb_residual, value_curve, value_optimal

KINDS = sorted(SPECS)


def record(n: int, ok: bool, detail: str) -> None:
    ACCEPTANCE_LINES[n] = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    assert ok, ACCEPTANCE_LINES[n]


def _away(x, points, radius):
    x = np.asarray(x, dtype=float)
    keep = np.ones(x.shape, dtype=bool)
    for p in points:
        keep &= np.abs(x - p) >= radius
    return x[keep]


# ---------------------------------------------------------------------------


def test_criterion_01_convolution_identity():
    start = time.perf_counter()
    worst = 0.0
    x = np.linspace(12 / 50, 12.0, 50)
    for spec in SPECS.values():
        for q, p in ((0.05, 0.05), (0.05, 0.5), (0.0, 0.5)):
            for xi in x:
                r = convolution_identity_residual(spec, q, p, float(xi))
                worst = max(worst, r / (1 + float(W_q(spec, q + p, xi))))
    elapsed = time.perf_counter() - start
    record(1, worst < 1e-8 and elapsed < 5, f"max scaled residual {worst:.2e}, {elapsed:.2f} s")


def test_criterion_02_theta_vs_quadrature():
    start = time.perf_counter()
    worst = 0.0
    for spec in SPECS.values():
        tb = theta_basis(spec)
        xs = np.linspace(-spec.l, spec.b + 3 * spec.l, 100)
        closed = np.asarray(theta(tb, xs))
        for xi, c in zip(xs, closed):
            ref = theta_quad(spec, float(xi))
            if ref == 0.0:
                worst = max(worst, abs(c))
            else:
                worst = max(worst, abs(c - ref) / abs(ref))
    elapsed = time.perf_counter() - start
    record(2, worst < 1e-8 and elapsed < 10, f"max rel error {worst:.2e}, {elapsed:.2f} s")


def test_criterion_03_theta_equals_g():
    worst = 0.0
    for spec in SPECS.values():
        tb = theta_basis(spec)
        for xi in np.linspace(-spec.l, spec.b, 51)[:-1]:
            g = g_qpq(spec, spec.q, spec.m, float(xi), spec.l)
            t = float(theta(tb, xi))
            worst = max(worst, abs(t - g) / abs(g) if g else abs(t))
    record(3, worst < 1e-9, f"max rel error {worst:.2e}")


def test_criterion_04_derivatives_vs_fd():
    w1 = w2 = 0.0
    for spec in SPECS.values():
        tb = theta_basis(spec)
        xs = _away(np.linspace(-spec.l + 0.01, spec.b + 3 * spec.l, 200), (0.0, spec.b), 1e-3)
        for x in xs:
            h = 1e-5 * max(1.0, abs(x))
            fd1 = (float(theta(tb, x + h)) - float(theta(tb, x - h))) / (2 * h)
            fd2 = (float(theta_deriv(tb, x + h)) - float(theta_deriv(tb, x - h))) / (2 * h)
            d1, d2 = float(theta_deriv(tb, x)), float(theta_second(tb, x))
            w1 = max(w1, abs(d1 - fd1) / abs(d1))
            w2 = max(w2, abs(d2 - fd2) / abs(d2))
    record(4, w1 < 1e-6 and w2 < 1e-5, f"max rel error first {w1:.2e}, second {w2:.2e}")


def _sign_flips(tb, lo, hi, step):
    x = np.arange(lo + step / 2, hi, step)
    s = np.sign(np.asarray(theta_second(tb, x)))
    idx = np.nonzero(np.diff(s))[0]
    return list(x[idx] + step / 2)


def test_criterion_05_breakpoints():
    problems = []
    for kind, spec in SPECS.items():
        tb = theta_basis(spec)
        bp = breakpoints(tb)
        left = _sign_flips(tb, -spec.l, 0.0, 1e-4)
        expect_left = [bp.eps1] if -spec.l < bp.eps1 < 0 else []
        if len(left) != len(expect_left) or any(abs(a - e) > 1e-3 for a, e in zip(left, expect_left)):
            problems.append(f"{kind}: left flips {left} vs {expect_left}")
        mid = _sign_flips(tb, 0.0, spec.b, 1e-4)
        expect_mid = [bp.eps2] if 0 < bp.eps2 < spec.b else []
        if len(mid) != len(expect_mid) or any(abs(a - e) > 1e-3 for a, e in zip(mid, expect_mid)):
            problems.append(f"{kind}: middle flips {mid} vs {expect_mid}")
        right = _sign_flips(tb, spec.b, spec.b + 5 * spec.l, 1e-4)
        expect_right = [bp.eps2] if bp.eps2 > spec.b else []
        if len(right) != len(expect_right) or any(abs(a - e) > 1e-3 for a, e in zip(right, expect_right)):
            problems.append(f"{kind}: right flips {right} vs {expect_right}")
        # monotone pattern of theta' at step 1e-2
        for lo, hi, sign in ((-spec.l, bp.eps1, -1), (bp.eps1, 0.0, 1), (0.0, bp.eps2, -1),
                             (bp.eps2, bp.eps2 + 5 * spec.l, 1)):
            x = np.arange(lo, hi + 1e-12, 1e-2)
            if x.size < 2:
                continue
            d = np.asarray(theta_deriv(tb, x, side="left" if sign < 0 else "right"))
            steps = np.diff(d)
            crossing = (x[:-1] < spec.b) & (x[1:] > spec.b) | (x[:-1] < 0) & (x[1:] > 0)
            if tb.bounded_variation:
                steps = steps[~crossing]
            if not np.all(sign * steps > 0):
                problems.append(f"{kind}: theta' not monotone on [{lo:.4g}, {hi:.4g}]")
    record(5, not problems, "; ".join(problems) or "sign flips at reported breakpoints, monotone pattern holds")


@pytest.mark.parametrize("kind", KINDS)
def test_criterion_06_optimizer(kind):
    spec = SPECS[kind]
    start = time.perf_counter()
    tb = theta_basis(spec)
    res = optimize(tb)
    ref = grid_oracle(tb, box=res.search_box, step=1e-2, fine=1e-4)
    elapsed = time.perf_counter() - start
    res_ok = res.case == "interior" and max(res.first_order_residuals.values()) < 1e-6
    grid_ok = abs(ref.c1 - res.policy.c1) <= ref.fine_step and abs(ref.c2 - res.policy.c2) <= ref.fine_step
    ok = res_ok and grid_ok and ref.n_basins == 1 and elapsed < 60
    line = (f"{kind}: c* = ({res.policy.c1:.6f}, {res.policy.c2:.6f}), residuals "
            f"{max(res.first_order_residuals.values()):.1e}, oracle ({ref.c1:.4f}, {ref.c2:.4f}), "
            f"{ref.n_basins} basin(s), {elapsed:.1f} s")
    _merge(6, kind, ok, line)


def _merge(n, kind, ok, line):
    """Criteria checked per model share one summary line."""
    prev = _PARTS.setdefault(n, {})
    prev[kind] = (ok, line)
    all_ok = all(v[0] for v in prev.values())
    ACCEPTANCE_LINES[n] = f"criterion {n:2d}: {'PASS' if all_ok else 'FAIL'}  " + " | ".join(
        prev[k][1] for k in sorted(prev))
    assert ok, line


_PARTS: dict[int, dict] = {}


def test_criterion_07_monotone_above_c2(optima, bases):
    notes = []
    ok = True
    for kind, spec in SPECS.items():
        tb, c2 = bases[kind], optima[kind].policy.c2
        x = np.arange(c2, c2 + 5 * spec.l + 1e-9, 1e-2)
        d = np.asarray(theta_deriv(tb, x, side="right"))
        good = bool(np.all(np.diff(d) >= 0))
        ok &= good
        notes.append(f"{kind} {'ok' if good else 'violated'} on [{c2:.4f}, {c2 + 5 * spec.l:.4f}]")
    record(7, ok, ", ".join(notes))


def test_criterion_08_hjb_pattern(optima, bases):
    start = time.perf_counter()
    worst_in = 0.0
    worst_out = -math.inf
    for kind, spec in SPECS.items():
        tb, pol = bases[kind], optima[kind].policy
        curve = value_curve(tb, pol)
        kinks = (0.0, spec.b, pol.c2)
        inside = _away(np.linspace(-spec.l + 1e-3, pol.c2 - 1e-3, 150), kinks, 1e-3)
        outside = _away(np.linspace(pol.c2 + 1e-3, pol.c2 + 3 * spec.l, 80), kinks, 1e-3)
        for x in inside:
            r = hjb_residual(tb, curve, float(x))
            worst_in = max(worst_in, abs(r) / (spec.q * float(curve.value(x)) + 1))
        for x in outside:
            worst_out = max(worst_out, hjb_residual(tb, curve, float(x)))
    elapsed = time.perf_counter() - start
    ok = worst_in < 1e-6 and worst_out <= 1e-6 and elapsed < 30
    record(8, ok, f"max scaled |residual| below c2* {worst_in:.1e}, max residual above {worst_out:.2e}, "
                  f"{elapsed:.1f} s")


# ---------------------------------------------------------------------------
# Monte Carlo (seeds fixed, 1e5 paths)

EXIT_POINTS = {
    "cramer_lundberg": [(-5.0, 2.0), (0.0, 4.0), (3.0, 7.0), (6.0, 9.0), (-2.0, 6.0), (5.0, 5.5)],
    "brownian": [(-5.0, 2.0), (-2.0, 1.0), (0.0, 4.0), (1.0, 3.0), (2.0, 6.0), (4.0, 8.0)],
}
VALUE_POINTS = {
    "cramer_lundberg": [(0.0, (1.0, 4.0)), (3.0, (2.0, 7.0)), (-4.0, "optimal"), (7.0, "optimal"),
                        (5.0, (6.0, 8.0)), (2.0, (0.0, 3.0))],
    "brownian": [(2.0, (1.0, 4.0)), (0.0, (0.5, 3.0)), (-3.0, (1.0, 4.0)), (5.0, (2.0, 7.0)),
                 (3.0, "optimal"), (-2.0, "optimal")],
}
Z_LIMIT = {"cramer_lundberg": 3.0, "brownian": 4.0}


@pytest.mark.slow
def test_criterion_09_exit_monte_carlo(bases):
    start = time.perf_counter()
    zs = {}
    for kind, spec in SPECS.items():
        tb = bases[kind]
        zs[kind] = []
        for i, (x0, c) in enumerate(EXIT_POINTS[kind]):
            est = estimate_exit_laplace(spec, x0, c, SimConfig(n_paths=100_000, seed=100 + i, dt=2.5e-3))
            zs[kind].append(est.z_score(float(exit_laplace(tb, x0, c))))
    elapsed = time.perf_counter() - start
    ok = all(abs(z) < Z_LIMIT[k] for k, v in zs.items() for z in v) and elapsed < 300
    detail = ", ".join(f"{k} max |z| {max(abs(z) for z in v):.2f} (< {Z_LIMIT[k]:g})" for k, v in zs.items())
    record(9, ok, f"{detail}, {elapsed:.0f} s")


@pytest.mark.slow
def test_criterion_10_value_monte_carlo(bases, optima):
    zs = {}
    for kind, spec in SPECS.items():
        tb = bases[kind]
        zs[kind] = []
        for i, (x0, pol) in enumerate(VALUE_POINTS[kind]):
            if pol == "optimal":
                pol = optima[kind].policy
                exact = float(value_optimal(tb, pol, x0))
            else:
                exact = float(value_curve(tb, pol).value(x0))
            est = estimate_value(spec, pol, x0, SimConfig(n_paths=100_000, seed=200 + i, dt=2.5e-3))
            zs[kind].append(est.z_score(exact))
    ok = all(abs(z) < Z_LIMIT[k] for k, v in zs.items() for z in v)
    detail = ", ".join(f"{k} max |z| {max(abs(z) for z in v):.2f} (< {Z_LIMIT[k]:g})" for k, v in zs.items())
    record(10, ok, detail)


def test_criterion_11_estimator_equivalence(optima):
    spec = SPECS["cramer_lundberg"]
    policies = [(1.0, 4.0), (2.0, 7.0), optima["cramer_lundberg"].policy]
    worst = 0.0
    for i, x0 in enumerate((-3.0, 1.0, 5.0)):
        for j, pol in enumerate(policies):
            seed = 300 + 3 * i + j
            a = estimate_value(spec, pol, x0, SimConfig(n_paths=100_000, seed=seed, estimator="clock"))
            b = estimate_value(spec, pol, x0, SimConfig(n_paths=100_000, seed=seed, estimator="killing"))
            worst = max(worst, abs(a.mean - b.mean) / math.hypot(a.stderr, b.stderr))
    record(11, worst < 2, f"max |clock - killing| / combined stderr {worst:.2f} over 9 settings")


def test_criterion_12_value_bounds(optima, bases):
    rng = np.random.default_rng(12)
    fails = 0
    n = 0
    for kind, spec in SPECS.items():
        tb, pol = bases[kind], optima[kind].policy
        curve = value_curve(tb, pol)
        hi = pol.c2 + 5
        pairs = rng.uniform(-spec.l, hi, size=(1000, 2))
        for a, b in pairs:
            x, y = max(a, b), min(a, b)
            rep = bound_check(tb, curve, x, y, tol=1e-9)
            n += 1
            fails += not rep.ok
    record(12, fails == 0, f"{n - fails}/{n} random pairs satisfy both bounds")


def _ordered(curves, increasing):
    sign = 1 if increasing else -1
    return all(np.all(sign * (b - a) >= 0) for a, b in zip(curves, curves[1:]))


THETA_GRIDS = {
    "brownian": {"m": (0.01, 0.05, 0.1, 0.2, 0.5), "l": (1.0, 2.0, 4.0, 5.0, 6.0),
                 "delta": (0.0, 0.03, 0.05, 0.1, 0.2), "b": (0.0, 1.0, 3.0, 5.0, 6.0)},
    "cramer_lundberg": {"m": (0.1, 0.3, 0.5, 1.0, 2.0), "l": (1.0, 2.0, 4.0, 6.0, 7.0),
                        "delta": (0.0, 0.05, 0.15, 0.2, 0.25), "b": (0.0, 2.0, 4.0, 6.0, 7.0)},
}
SWEEP_GRIDS = {
    "brownian": {"beta": np.linspace(0.05, 2.0, 6), "delta": np.linspace(0.0, 0.2, 6), "l": np.linspace(0.5, 6.0, 6)},
    "cramer_lundberg": {"beta": np.linspace(0.05, 2.0, 6), "delta": np.linspace(0.0, 0.25, 6),
                        "l": np.linspace(0.5, 7.0, 6)},
}


def test_criterion_13_figure_shapes():
    problems = []
    for kind, spec in SPECS.items():
        grids = THETA_GRIDS[kind]
        x_all = np.linspace(-0.99, 25.0, 400)
        for param in ("m", "l"):
            curves = [np.asarray(theta(theta_basis(spec.with_params(**{param: v})), x_all)) for v in grids[param]]
            if not _ordered(curves, True):
                problems.append(f"{kind} theta not increasing in {param}")
        for param, increasing in (("delta", True), ("b", False)):
            hi_b = max(grids["b"]) if param == "b" else spec.b
            x = np.linspace(hi_b, hi_b + 20, 200)
            curves = [np.asarray(theta(theta_basis(spec.with_params(**{param: v})), x)) for v in grids[param]]
            if not _ordered(curves, increasing):
                problems.append(f"{kind} theta on x >= b not {'increasing' if increasing else 'decreasing'} in {param}")
        for param, values in SWEEP_GRIDS[kind].items():
            rows = sweep(spec, param, values)
            if any(r.case == "failed" for r in rows):
                problems.append(f"{kind} sweep {param} had failures")
                continue
            c1 = np.array([r.c1 for r in rows])
            c2 = np.array([r.c2 for r in rows])
            if param == "beta":
                if not np.all(np.diff(c2 - c1) >= 0):
                    problems.append(f"{kind} c2*-c1* not nondecreasing in beta")
            elif not (np.all(np.diff(c1) <= 0) and np.all(np.diff(c2) <= 0)):
                problems.append(f"{kind} c1*, c2* not nonincreasing in {param}")
    record(13, not problems, "; ".join(problems) or "theta orderings in m, l, delta, b and sweep trends hold")
