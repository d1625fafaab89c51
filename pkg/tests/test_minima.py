"""Length-functional minimization: anchors, oracles, convexity, tracing."""

import math
import random

import numpy as np
import pytest

from teichmin.curves import CurveClass, MeasuredMulticurve
from teichmin.hyperbolic import FNPoint, curve_length, multicurve_length
from teichmin.minima import (
    MinimaSample,
    SolverError,
    minimize,
    minimize_with_restarts,
    objective,
    trace_line,
)

slope = CurveClass.slope
mc = MeasuredMulticurve.of_slope

P0, M0 = mc("0/1"), mc("1/0")


# ---------------------------------------------------------------------------
# the objective
# ---------------------------------------------------------------------------


def test_objective_plain_sum_at_zero():
    fn = FNPoint.t11(1.5, 0.3)
    assert abs(
        objective(fn, P0, M0, 0.0)
        - (curve_length(fn, slope("0/1")) + curve_length(fn, slope("1/0")))
    ) < 1e-12


def test_objective_reweighting_identity():
    from fractions import Fraction

    fn = FNPoint.t11(1.1, -0.4)
    t = 0.8
    r = Fraction(739, 100)  # rational stand-in for e^t-ish scaling
    lhs = objective(fn, P0.scaled(r), M0.scaled(1 / r), t)
    rhs = objective(fn, P0, M0, t + math.log(float(r)))
    assert abs(lhs - rhs) < 1e-12 * abs(rhs)


def test_objective_symmetric_value():
    sym = FNPoint.t11(2.0 * math.acosh(math.sqrt(2.0)), 0.0)
    val = objective(sym, P0, M0, 0.0)
    assert abs(val - 2.0 * 2.0 * math.acosh(math.sqrt(2.0))) < 1e-12


# ---------------------------------------------------------------------------
# minimization anchors
# ---------------------------------------------------------------------------


def test_symmetric_pair_minimum_is_square_point():
    out = minimize(P0, M0, 0.0)
    l_star = 2.0 * math.acosh(math.sqrt(2.0))  # 2 log(1 + sqrt 2)
    assert abs(out.point.l - l_star) < 1e-7
    assert abs(out.point.s) < 1e-7
    la = curve_length(out.point, slope("1/0"))
    lb = curve_length(out.point, slope("0/1"))
    assert abs(la - lb) < 1e-8
    assert out.gradient_norm < 1e-9


def test_upweighted_curve_shortens():
    out = minimize(P0, M0, 1.0)
    assert curve_length(out.point, slope("0/1")) < curve_length(out.point, slope("1/0"))


def test_minimize_rejects_non_filling():
    with pytest.raises(SolverError):
        minimize(mc("0/1"), mc("0/1"), 0.0)


def test_reparameterization_identity():
    from fractions import Fraction

    s = math.log(739.0 / 100.0)
    a = minimize(P0.scaled(Fraction(739, 100)), M0.scaled(Fraction(100, 739)), 0.3)
    b = minimize(P0, M0, 0.3 + s)
    assert abs(a.point.l - b.point.l) < 1e-6
    assert abs(a.point.s - b.point.s) < 1e-6


def test_grid_search_oracle():
    # brute-force refinement over (log l, twist) against the solver
    rng = random.Random(2)
    for idx in range(10):
        t = rng.uniform(-1.0, 1.0)
        p = mc(f"{rng.randint(-2, 2)}/{rng.randint(1, 3)}")
        m = mc("1/0") if p.components[0][0] != slope("1/0") else mc("0/1")
        from teichmin.curves import fills

        if not fills(p, m):
            continue
        out = minimize(p, m, t)
        lo = np.array([math.log(out.point.l) - 0.3, out.point.s * out.point.l - 0.3])
        hi = lo + 0.6
        best = math.inf
        for _ in range(4):
            grid0 = np.linspace(lo[0], hi[0], 11)
            grid1 = np.linspace(lo[1], hi[1], 11)
            vals = [
                (objective(FNPoint.t11(math.exp(u*1.0), v / math.exp(u)), p, m, t), u, v)
                for u in grid0
                for v in grid1
            ]
            best, u_b, v_b = min(vals)
            span0 = (hi[0] - lo[0]) / 10.0
            span1 = (hi[1] - lo[1]) / 10.0
            lo = np.array([u_b - span0, v_b - span1])
            hi = np.array([u_b + span0, v_b + span1])
        assert out.objective_value <= best + 1e-4


def test_five_restart_uniqueness():
    out, worst = minimize_with_restarts(P0, M0, 0.7, restarts=5, seed=11)
    assert worst < 1e-6


def test_finite_difference_step_consistency():
    # gradient agrees across two step sizes within five percent
    from teichmin.minima import _gradient

    u = np.array([0.3, 0.2])
    g1 = _gradient(u, P0, M0, 0.4, h_rel=1e-4)
    g2 = _gradient(u, P0, M0, 0.4, h_rel=5e-5)
    for a, b in zip(g1, g2):
        assert abs(a - b) <= 0.05 * max(abs(a), abs(b), 1e-12)


# ---------------------------------------------------------------------------
# envelope and convexity
# ---------------------------------------------------------------------------


def test_envelope_derivative_at_minimum():
    t = 0.45
    out = minimize(P0, M0, t)
    h = 1e-4
    fp = minimize(P0, M0, t + h).objective_value
    fm = minimize(P0, M0, t - h).objective_value
    fd = (fp - fm) / (2 * h)
    analytic = math.exp(t) * multicurve_length(out.point, P0) - math.exp(
        -t
    ) * multicurve_length(out.point, M0)
    assert abs(fd - analytic) < 1e-4


def test_twist_line_convexity():
    rng = random.Random(8)
    for _ in range(100):
        l = math.exp(rng.uniform(math.log(0.4), math.log(3.0)))
        s0 = rng.uniform(-1.5, 1.5)
        h = 0.05
        t = rng.uniform(-0.5, 0.5)
        vals = [
            objective(FNPoint.t11(l, s0 + k * h), P0, M0, t) for k in (-1, 0, 1)
        ]
        second = vals[0] - 2 * vals[1] + vals[2]
        assert second >= -1e-8


# ---------------------------------------------------------------------------
# tracing
# ---------------------------------------------------------------------------


def test_trace_single_point_matches_minimize():
    tr = trace_line(P0, M0, [0.0])
    solo = minimize(P0, M0, 0.0)
    assert abs(tr[0].point.l - solo.point.l) < 1e-9
    assert abs(tr[0].objective_value - solo.objective_value) < 1e-12


def test_trace_time_reversal_swaps_lengths():
    grid = [-1.5 + 0.25 * k for k in range(13)]
    tr = trace_line(P0, M0, grid)
    by_t = {round(s.t, 6): s for s in tr}
    for t in (0.25, 0.75, 1.25):
        plus = by_t[round(t, 6)].point
        minus = by_t[round(-t, 6)].point
        assert abs(
            curve_length(plus, slope("0/1")) - curve_length(minus, slope("1/0"))
        ) < 1e-6


def test_trace_objective_smooth():
    grid = [0.1 * k for k in range(-10, 11)]
    tr = trace_line(P0, M0, grid)
    vals = [s.objective_value for s in tr]
    second = [vals[i - 1] - 2 * vals[i] + vals[i + 1] for i in range(1, len(vals) - 1)]
    # smooth convex profile: the coarse and fine second differences agree
    fine = trace_line(P0, M0, [0.05 * k for k in range(-20, 21)])
    fine_vals = [s.objective_value for s in fine]
    for i in range(1, len(vals) - 1):
        coarse = second[i - 1]
        fi = 2 * i  # matching fine index of the same t
        fine_dd = (fine_vals[fi - 2] - 2 * fine_vals[fi] + fine_vals[fi + 2])
        assert abs(coarse - fine_dd) < 0.05 * max(abs(coarse), 1e-6)


def test_trace_rejects_big_steps():
    with pytest.raises(Exception):
        trace_line(P0, M0, [0.0, 0.75])
