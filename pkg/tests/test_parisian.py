import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from refracted_impulse import BROWNIAN_BASE, CRAMER_LUNDBERG_BASE, DomainError, KinkError
from refracted_impulse.parisian import (
    breakpoints,
    segment_of,
    theta,
    theta_basis,
    theta_deriv,
    theta_jumps,
    theta_quad,
    theta_second,
)
from refracted_impulse.scale import W_q, g_qpq, scale_basis, w_refracted


def fd(f, x, h):
    return (f(x + h) - f(x - h)) / (2 * h)


def test_segment_one_is_shifted_W(spec, tb):
    x = np.linspace(-spec.l, -1e-9, 40)
    np.testing.assert_allclose(theta(tb, x), W_q(spec, spec.q + spec.m, x + spec.l), rtol=1e-14, atol=0)


def test_theta_at_barrier(spec, tb):
    expected = 0.0 if spec is BROWNIAN_BASE else 1 / spec.model.mu
    assert float(theta(tb, -spec.l)) == pytest.approx(expected, abs=1e-15)


def test_theta_at_zero(spec, tb):
    assert float(theta(tb, 0.0)) == pytest.approx(float(W_q(spec, spec.q + spec.m, spec.l)), rel=1e-12)


def test_segment_continuity(spec, tb):
    t0 = float(theta(tb, 0.0))
    for p in (0.0, spec.b):
        left = float(theta(tb, np.nextafter(p, -1)))
        assert abs(left - float(theta(tb, p))) < 1e-9 * t0


@pytest.mark.parametrize("inner", ["closed", "quad"])
def test_closed_form_vs_quadrature(spec, tb, inner):
    xs = np.linspace(-spec.l, spec.b + 3 * spec.l, 12 if inner == "quad" else 40)
    closed = np.asarray(theta(tb, xs))
    quad = np.array([theta_quad(spec, x, inner=inner) for x in xs])
    mask = quad > 0
    assert np.max(np.abs(closed[mask] - quad[mask]) / quad[mask]) < 1e-8
    assert np.all(closed[~mask] == 0)


def test_matches_g_below_b(spec, tb):
    for x in np.linspace(-spec.l + 0.01, spec.b - 0.01, 9):
        g = g_qpq(spec, spec.q, spec.m, x, spec.l)
        assert float(theta(tb, x)) == pytest.approx(g, rel=1e-9)


def test_named_coefficient_forms(spec, tb):
    """Segments two and three agree with the model-specific coefficient forms."""
    c = tb.coefficients
    X, Y, S = tb.X, tb.Y, tb.S
    l = spec.l
    x2, x3 = 0.5 * spec.b, spec.b + 2.0
    if c.kind == "brownian":
        th2 = sum((-1) ** (i + 1) * math.exp(S.rates[i] * l)
                  * sum((-1) ** (j + 1) * c.A_star[i, j] * math.exp(X.rates[j] * x2) for j in range(2))
                  for i in range(2))
        th3 = sum((-1) ** (i + 1) * c.Q[i]
                  * sum((-1) ** j * c.A[i, j] * math.exp(Y.rates[j] * x3) for j in range(2)) for i in range(2))
        # the segment-two form holds for the x-dependent part; add the W(x+l) term
        th2 += float(W_q(spec, spec.q, x2 + l))
    else:
        mu = spec.model.mu
        G_X, G_Y = (X.G1, X.G2), (Y.G1, Y.G2)
        th2 = sum((-1) ** i * G_X[i] * c.phi_star[i] * math.exp(X.rates[i] * x2) for i in range(2)) / (mu * S.r)
        th3 = sum((-1) ** i * G_Y[i] * c.phi_Y[i] * math.exp(Y.rates[i] * x3) for i in range(2)) / (mu * X.r * S.r)
    assert th3 == pytest.approx(float(theta(tb, x3)), rel=1e-10)
    if c.kind == "cramer_lundberg":
        assert th2 == pytest.approx(float(theta(tb, x2)), rel=1e-10)


def test_m_zero_is_refracted_scale():
    s = BROWNIAN_BASE.with_params(m=0.0)
    x = np.array([-3.0, 1.0, 7.0])
    np.testing.assert_allclose(theta(theta_basis(s), x), w_refracted(s, s.q, x, -s.l), rtol=1e-14)


def test_domain(tb, spec):
    with pytest.raises(DomainError):
        theta(tb, -spec.l - 0.1)


def test_strictly_increasing(tb, spec):
    x = np.linspace(-spec.l, spec.b + 4 * spec.l, 20001)
    v = np.asarray(theta(tb, x))
    assert np.all(np.diff(v) > 0)


def test_segments(tb, spec):
    assert list(segment_of(tb, [-spec.l, -1e-12, 0.0, spec.b - 1e-9, spec.b, spec.b + 5])) == [0, 0, 1, 1, 2, 2]


# ---------------------------------------------------------------------------
# derivatives


def test_derivative_continuity_brownian(bases):
    tb = bases["brownian"]
    for p in (0.0, BROWNIAN_BASE.b):
        left = float(theta_deriv(tb, p, side="left"))
        assert left == pytest.approx(float(theta_deriv(tb, p, side="right")), rel=1e-12)
        assert float(theta_deriv(tb, p)) == pytest.approx(left, rel=1e-12)
    assert all(abs(v) < 1e-12 for v in theta_jumps(tb).values())


def test_derivative_jumps_cl(bases):
    tb = bases["cramer_lundberg"]
    jumps = theta_jumps(tb)
    assert jumps[0.0] < -0.1
    assert jumps[CRAMER_LUNDBERG_BASE.b] > 0.01
    with pytest.raises(KinkError):
        theta_deriv(tb, 0.0)
    with pytest.raises(KinkError):
        theta_deriv(tb, CRAMER_LUNDBERG_BASE.b)
    # left limit at 0 continues segment one
    assert float(theta_deriv(tb, 0.0, side="left")) == pytest.approx(
        float(scale_basis(CRAMER_LUNDBERG_BASE, 0.55).deriv(6.0)), rel=1e-13)


def test_second_derivative_needs_side(tb, spec):
    with pytest.raises(KinkError):
        theta_second(tb, spec.b)
    theta_second(tb, spec.b, side="right")


def _fd_points(spec):
    pts = np.linspace(-spec.l + 0.01, spec.b + 3 * spec.l, 61)
    return [x for x in pts if min(abs(x), abs(x - spec.b)) > 1e-3]


def test_first_derivative_fd(tb, spec):
    for x in _fd_points(spec):
        h = 1e-5 * max(1.0, abs(x))
        ref = fd(lambda z: float(theta(tb, z)), x, h)
        assert float(theta_deriv(tb, x)) == pytest.approx(ref, rel=1e-6)


def test_second_derivative_fd(tb, spec):
    for x in _fd_points(spec):
        h = 1e-5 * max(1.0, abs(x))
        ref = fd(lambda z: float(theta_deriv(tb, z)), x, h)
        assert float(theta_second(tb, x)) == pytest.approx(ref, rel=1e-5, abs=1e-9)


# ---------------------------------------------------------------------------
# breakpoints


def test_breakpoint_ranges(tb, spec):
    bp = breakpoints(tb)
    assert -spec.l <= bp.eps1 <= 0 <= bp.eps2
    assert not bp.zeta_order_violated


def test_brownian_segment_two_constants(bases):
    tb = bases["brownian"]
    bp = breakpoints(tb)
    K1, K2 = bp.K_star
    assert K1 > 0 and K2 > 0
    r1, r2 = tb.X.rates
    for x in (0.5, 1.5, 2.5):
        assert float(theta_second(tb, x)) == pytest.approx(K2 * math.exp(r2 * x) - K1 * math.exp(r1 * x), rel=1e-10)


def test_brownian_zeta1_formula(bases):
    tb = bases["brownian"]
    s1, s2 = tb.S.rates
    z = math.log(s1**2 / s2**2) / (s2 - s1) - BROWNIAN_BASE.l
    bp = breakpoints(tb)
    assert bp.zeta1 == pytest.approx(z, abs=1e-12)
    if -BROWNIAN_BASE.l < z < 0:
        assert bp.eps1 == pytest.approx(z, abs=1e-12)


def _sign_changes(tb, lo, hi, step=1e-3):
    x = np.arange(lo + step / 2, hi, step)
    s = np.sign(np.asarray(theta_second(tb, x)))
    idx = np.nonzero(np.diff(s))[0]
    return x[idx] + step / 2


def test_eps_by_sign_scan(tb, spec):
    bp = breakpoints(tb)
    left = _sign_changes(tb, -spec.l, 0.0)
    if -spec.l < bp.eps1 < 0:
        assert len(left) == 1 and abs(left[0] - bp.eps1) < 1e-3
    else:
        assert len(left) == 0
    mid = _sign_changes(tb, 0.0, spec.b)
    if 0 < bp.eps2 < spec.b:
        assert len(mid) == 1 and abs(mid[0] - bp.eps2) < 1e-3
    else:
        # theta' decreases up to b, then increases from b on
        assert len(mid) == 0
        assert float(theta_second(tb, spec.b, side="left")) < 0
        assert np.all(np.asarray(theta_second(tb, np.linspace(spec.b, spec.b + 20, 500), side="right")) > 0)


def test_monotone_pattern(tb, spec):
    bp = breakpoints(tb)
    step = 1e-2

    def d(lo, hi):
        x = np.arange(lo, hi, step)[1:]
        x = x[(np.abs(x) > 1e-9) & (np.abs(x - spec.b) > 1e-9)]
        return np.diff(np.asarray(theta_deriv(tb, x, side="right"))), x

    for lo, hi, sign in [(-spec.l, bp.eps1, -1), (bp.eps1, 0.0, 1), (0.0, bp.eps2, -1), (bp.eps2, bp.eps2 + 20, 1)]:
        if hi - lo < 3 * step:
            continue
        steps, x = d(lo, hi)
        # drop the step straddling the jump at b
        keep = ~((x[:-1] < spec.b) & (x[1:] > spec.b))
        assert np.all(sign * steps[keep] > 0)


def test_cl_breakpoints_values(bases):
    bp = breakpoints(bases["cramer_lundberg"])
    assert bp.eps1 == -6.0
    assert bp.eps2 == 6.0
    assert bp.zeta2 > 6.0 and bp.zeta3 < 6.0


def test_breakpoints_need_positive_rates():
    with pytest.raises(DomainError):
        breakpoints(BROWNIAN_BASE.with_params(m=0.0))


# ---------------------------------------------------------------------------
# parameter monotonicity


@pytest.mark.parametrize("param, values", [("m", (0.01, 0.05, 0.2, 0.5, 1.0)), ("l", (1.0, 2.0, 4.0, 6.0, 7.0))])
def test_increasing_in_m_and_l(spec, param, values):
    x = np.linspace(-0.99, spec.b + 10, 200)
    curves = [np.asarray(theta(theta_basis(spec.with_params(**{param: v})), x)) for v in values]
    for lo, hi in zip(curves, curves[1:]):
        assert np.all(hi >= lo)


def test_delta_and_b_above_threshold(spec):
    x = np.linspace(8.0, 30.0, 100)
    deltas = np.linspace(0.0, 0.2 if spec is BROWNIAN_BASE else 0.25, 5)
    curves = [np.asarray(theta(theta_basis(spec.with_params(delta=d)), x)) for d in deltas]
    for lo, hi in zip(curves, curves[1:]):
        assert np.all(hi >= lo)
    bs = np.linspace(0.0, 6.0 if spec is BROWNIAN_BASE else 7.0, 5)
    curves = [np.asarray(theta(theta_basis(spec.with_params(b=b)), x)) for b in bs]
    for lo, hi in zip(curves, curves[1:]):
        assert np.all(hi <= lo)


@given(x1=st.floats(-6.0, 40.0), x2=st.floats(-6.0, 40.0))
@settings(max_examples=200, deadline=None)
def test_theta_increasing_property(bases, x1, x2):
    for tb in bases.values():
        lo, hi = sorted((x1, x2))
        assert float(theta(tb, lo)) <= float(theta(tb, hi))
