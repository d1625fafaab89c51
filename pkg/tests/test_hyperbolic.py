"""Holonomy, trace recursion, lengths, and hyperbolic twists on (1,1)."""

import math
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from teichmin.curves import CurveClass, DomainError, MeasuredMulticurve, dehn_twist
from teichmin.hyperbolic import (
    FNPoint,
    base_triple,
    curve_length,
    holonomy,
    matrix_of_word,
    multicurve_length,
    systole_t11,
    thick_thin,
    trace_of_slope,
    triple_to_fn,
    twist,
    word_for_slope,
)

slope = CurveClass.slope

SYM333 = triple_to_fn(3.0, 3.0, 3.0)
SQUARE = FNPoint.t11(2.0 * math.acosh(math.sqrt(2.0)), 0.0)
SYSTOLE_333 = 2.0 * math.acosh(1.5)  # 1.9248473002384139


# ---------------------------------------------------------------------------
# holonomy and the cusped relation
# ---------------------------------------------------------------------------


def test_commutator_relation_random_points():
    rng = random.Random(3)
    for _ in range(60):
        l = math.exp(rng.uniform(math.log(0.05), math.log(6.0)))
        s = rng.uniform(-4.0, 4.0)
        fn = FNPoint.t11(l, s)
        hol = holonomy(fn)  # raises if |tr[X,Y]+2| > 1e-8
        x, y, z = base_triple(fn)
        assert abs(x * x + y * y + z * z - x * y * z) < 1e-8 * max(1.0, x * y * z)


def test_square_point_triple():
    x, y, z = base_triple(SQUARE)
    assert abs(x - 2.0 * math.sqrt(2.0)) < 1e-14
    assert abs(y - 2.0 * math.sqrt(2.0)) < 1e-14
    assert abs(z - 4.0) < 1e-14


def test_triple_roundtrip():
    fn = FNPoint.t11(1.7, 0.42)
    x, y, z = base_triple(fn)
    back = triple_to_fn(x, y, z)
    assert abs(back.l - fn.l) < 1e-12
    assert abs(back.s - fn.s) < 1e-12


def test_symmetric_333_point():
    # the (3,3,3)-marked point is a half-twist point of the maximal-symmetry
    # surface; systole length 2 arccosh(3/2)
    assert abs(SYM333.l - SYSTOLE_333) < 1e-12
    assert abs(SYM333.s + 0.5) < 1e-12
    c, l = systole_t11(SYM333)
    assert abs(l - 1.9248473002384139) < 1e-10


# ---------------------------------------------------------------------------
# lengths and the trace recursion
# ---------------------------------------------------------------------------


def test_pants_curve_length_is_stored_length():
    fn = FNPoint.t11(1.234567, 0.777)
    assert abs(curve_length(fn, slope("1/0")) - 1.234567) < 1e-12


def test_symmetric_point_systole_length():
    val = curve_length(SYM333, slope("1/0"))
    assert abs(val - 1.9248473002384139) < 1e-10


def test_length_invariant_under_word_rotation():
    fn = FNPoint.t11(1.1, 0.3)
    hol = holonomy(fn)
    w = word_for_slope(slope("3/5"))
    base = abs(np.trace(matrix_of_word(w, hol)))
    for k in range(1, len(w)):
        rot = w[k:] + w[:k]
        assert abs(abs(np.trace(matrix_of_word(rot, hol))) - base) < 1e-12 * base


def test_trace_recursion_vs_matrix_oracle_1000():
    rng = random.Random(17)
    fn = FNPoint.t11(1.9, -0.35)
    hol = holonomy(fn)
    x, y, z = base_triple(fn)
    checked = 0
    while checked < 1000:
        p, q = rng.randint(-30, 30), rng.randint(0, 30)
        if (p, q) == (0, 0):
            continue
        c = slope(p, q)
        t_rec = trace_of_slope(c, x, y, z)
        t_mat = np.trace(matrix_of_word(word_for_slope(c), hol))
        assert abs(t_rec - t_mat) < 1e-9 * max(1.0, abs(t_mat))
        checked += 1


def test_multicurve_length_linearity():
    fn = FNPoint.t11(1.5, 0.2)
    n1 = MeasuredMulticurve.of_slope("2/3", 1)
    assert abs(multicurve_length(fn, n1) - curve_length(fn, slope("2/3"))) < 1e-14
    doubled = n1.scaled(2)
    assert abs(multicurve_length(fn, doubled) - 2 * multicurve_length(fn, n1)) < 1e-12


def test_two_curve_sum_at_symmetric_point():
    both = 0.0
    for s in ("0/1", "1/0"):
        both += curve_length(SYM333, slope(s))
    # slopes 0 and inf are both in the minimal triple of the (3,3,3) point
    assert abs(both - 2 * 1.9248473002384139) < 1e-9


def test_nonessential_trace_raises():
    fn = FNPoint.t11(1.0, 0.0)
    with pytest.raises(DomainError):
        # fabricate a non-hyperbolic trace via the internal check
        triple_to_fn(1.5, 3.0, 3.0)


def test_huge_trace_log_path():
    fn = FNPoint.t11(30.0, 0.0)  # very long pants curve
    val = curve_length(fn, slope("7/1"))
    assert math.isfinite(val) and val > 100.0


# ---------------------------------------------------------------------------
# length derivative bound along twist lines
# ---------------------------------------------------------------------------


def test_twist_derivative_bounded_by_intersection():
    fn0 = FNPoint.t11(1.3, 0.0)
    h = 1e-5
    for sl, isect in (("0/1", 1), ("1/2", 2), ("3/1", 1), ("1/3", 3)):
        c = slope(sl)
        vals = []
        for s in (-h, h):
            fn = FNPoint.t11(1.3, s)
            vals.append(curve_length(fn, c))
        # d(tilde s) = l * ds
        deriv = (vals[1] - vals[0]) / (2 * h * 1.3)
        assert abs(deriv) <= isect + 1e-6


# ---------------------------------------------------------------------------
# hyperbolic twists
# ---------------------------------------------------------------------------


def test_twist_zero_at_symmetric_configuration():
    val = twist(SQUARE, MeasuredMulticurve.of_slope("0/1"), slope("1/0"))
    assert abs(val) < 1e-9


def test_twist_tracks_fn_twist_lemma():
    # |(tw - tw') - (s - s')| <= 4 across random pairs
    rng = random.Random(23)
    nus = [
        MeasuredMulticurve.of_slope("0/1"),
        MeasuredMulticurve.of_slope("1/2"),
        MeasuredMulticurve.of_slope("-2/3"),
    ]
    a = slope("1/0")
    for _ in range(100):
        l = math.exp(rng.uniform(math.log(0.2), math.log(3.0)))
        s1, s2 = rng.uniform(-3, 3), rng.uniform(-3, 3)
        nu = nus[rng.randrange(len(nus))]
        tw1 = twist(FNPoint.t11(l, s1), nu, a)
        tw2 = twist(FNPoint.t11(l, s2), nu, a)
        assert abs((tw1 - tw2) - (s1 - s2)) <= 4.0 + 1e-6


def test_twist_shift_under_curve_twisting():
    fn = FNPoint.t11(1.4, 0.15)
    a = slope("1/0")
    nu = MeasuredMulticurve.of_slope("1/3")
    m = 3
    twisted = MeasuredMulticurve.of_slope(
        str(dehn_twist(nu.components[0][0], a, m))
    )
    d = twist(fn, twisted, a) - twist(fn, nu, a)
    assert abs(d - m) <= 2.0


def test_twist_disjoint_raises():
    with pytest.raises(DomainError):
        twist(SQUARE, MeasuredMulticurve.of_slope("1/0"), slope("1/0"))


# ---------------------------------------------------------------------------
# thick-thin
# ---------------------------------------------------------------------------


def test_thick_thin_symmetric_empty():
    assert thick_thin(SYM333, 0.1) == set()


def test_thick_thin_contains_short_pants_curve():
    fn = FNPoint.t11(0.01, 0.0)
    out = thick_thin(fn, 0.1)
    assert slope("1/0") in out and len(out) == 1


def test_thick_thin_finds_short_nonpants_curve():
    # make slope 0 short by raising the pants-curve length: at large l the
    # transverse curve尺 contracts (trace 2 coth(l/2) -> 2)
    fn = FNPoint.t11(12.0, 0.0)
    out = thick_thin(fn, 0.1)
    assert out == {slope("0/1")}
