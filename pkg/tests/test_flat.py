"""Flat layer: construction, flow, cylinders, lengths, K and D, surgery."""

import math
from fractions import Fraction

import pytest

from teichmin.curves import CurveClass, DomainError, MeasuredMulticurve
from teichmin.flat import (
    FlatSurface,
    build_flat_surface,
    cut_and_reglue,
    estimate_D,
    expanding_K,
    expanding_annulus,
    flat_cylinder,
    flow,
    horizontal_core,
    vertical_core,
    l_origami,
    q_length,
    same_labeled_geometry,
    seam_core,
    short_interval,
    unit_square_torus,
)
from teichmin.flatpath import mesh_return_arc, mesh_torus_class_length
from teichmin.flat import _vertical_return_arcs, horizontal_cylinders
from teichmin.curves import SurfaceSig

slope = CurveClass.slope
mc = MeasuredMulticurve.of_slope


# ---------------------------------------------------------------------------
# construction
# ---------------------------------------------------------------------------


def test_build_unit_square():
    q = unit_square_torus()
    assert q.n_squares == 1
    assert abs(q.width_at(0) - 1.0) < 1e-15
    assert abs(q.height_at(0) - 1.0) < 1e-15
    assert abs(q.area - 1.0) == 0.0
    assert abs(q.conformal_point() - 1j) < 1e-15


def test_build_weighted_aspect():
    q = build_flat_surface(mc("0/1", 1), mc("1/0", 4))
    assert q.n_squares == 1
    assert abs(q.width_at(0) - 0.5) < 1e-15
    assert abs(q.height_at(0) - 2.0) < 1e-15


def test_build_sheared_pair():
    # slope 0 against slope 1 still crosses once: a single sheared square
    q = build_flat_surface(mc("0/1"), mc("1/1"))
    assert q.n_squares == 1
    from teichmin.curves import crossing_count_oracle

    assert crossing_count_oracle(slope("0/1"), slope("1/1")) == 1


def test_build_requires_filling():
    with pytest.raises(DomainError):
        build_flat_surface(mc("2/3"), mc("2/3"))


def test_vertical_cores_realize_first_multicurve():
    # the first multicurve of the pair gets short as t grows
    q = build_flat_surface(mc("0/1"), mc("1/0"))
    lp = [q_length(flow(q, t), slope("0/1")) for t in (0.0, 1.0, 2.0)]
    lm = [q_length(flow(q, t), slope("1/0")) for t in (0.0, 1.0, 2.0)]
    assert lp[0] > lp[1] > lp[2]
    assert lm[0] < lm[1] < lm[2]


# ---------------------------------------------------------------------------
# flow
# ---------------------------------------------------------------------------


def test_flow_identity_and_rectangle():
    q = unit_square_torus()
    assert same_labeled_geometry(flow(q, 0.0), q)
    q1 = flow(q, 1.0)
    assert abs(q1.width_at(0) - math.e) < 1e-14
    assert abs(q1.height_at(0) - 1.0 / math.e) < 1e-14
    assert q1.area == 1.0


def test_flow_exponent_ledger_associative():
    q = unit_square_torus()
    a, b = 0.375, -1.25  # dyadic: float sum is exact
    q_ab = flow(flow(q, a), b)
    q_sum = flow(q, a + b)
    assert q_ab.t == q_sum.t  # bit-for-bit in the exact ledger
    a, b = 0.1, 0.7  # generic floats: ledger still exact as rationals
    assert flow(flow(q, a), b).t == flow(flow(q, b), a).t


def test_flow_scales_horizontal_lengths():
    q = l_origami()
    c = horizontal_core(q, 0)
    base = q_length(q, c)
    for t in (-0.75, 0.3, 2.0):
        assert abs(q_length(flow(q, t), c) - base * math.exp(t)) < 1e-12 * base


def test_two_sided_length_bound_under_flow():
    q = build_flat_surface(mc("1/2"), mc("-1/3"))
    for a in (slope("0/1"), slope("1/1"), slope("5/2")):
        base = q_length(q, a)
        for t in (-1.5, 0.8, 2.5):
            ratio = q_length(flow(q, t), a) / base
            assert math.exp(-abs(t)) - 1e-12 <= ratio <= math.exp(abs(t)) + 1e-12


def test_length_minimal_near_balance_time():
    from teichmin.curves import balance_time

    p, m = mc("0/1"), mc("1/0")
    q = build_flat_surface(p, m)
    a = slope("1/1")
    ta = balance_time(a, p, m).value
    l_bal = q_length(flow(q, ta), a)
    for t in (ta - 2.0, ta - 0.5, ta + 0.7, ta + 2.2):
        lt = q_length(flow(q, t), a)
        assert lt >= l_bal - 1e-12
        # two-sided comparability with factor sqrt(2)
        assert lt <= math.sqrt(2.0) * math.exp(abs(t - ta)) * l_bal + 1e-12
        assert lt >= math.exp(abs(t - ta)) * l_bal / math.sqrt(2.0) - 1e-12


# ---------------------------------------------------------------------------
# lengths
# ---------------------------------------------------------------------------


def test_q_length_slope_one_is_sqrt2():
    q = unit_square_torus()
    assert abs(q_length(q, slope("1/1")) - math.sqrt(2.0)) < 1e-14


def test_q_length_vs_mesh_oracle_torus():
    q = unit_square_torus()
    for s in ("1/1", "2/1", "1/2"):
        exact = q_length(q, slope(s))
        approx = mesh_torus_class_length(q, slope(s), k=12)
        assert abs(approx - exact) / exact < 0.02, s


def test_q_length_core_vs_mesh_strip():
    from teichmin.flatpath import mesh_word_length

    q = l_origami()
    c = horizontal_core(q, 0)  # circumference 2 / sqrt(3)
    exact = q_length(q, c)
    approx = mesh_word_length(q, c, k=12)
    assert abs(approx - exact) / exact < 0.02


# ---------------------------------------------------------------------------
# cylinders
# ---------------------------------------------------------------------------


def test_unit_square_cylinder_modulus_one():
    q = unit_square_torus()
    ann = flat_cylinder(q, vertical_core(q, 0))
    assert ann.kind == "flat"
    assert abs(ann.modulus - 1.0) < 1e-14
    assert abs(ann.circumference - 1.0) < 1e-14
    assert abs(ann.height - 1.0) < 1e-14


def test_l_origami_cylinder_moduli():
    q = l_origami()
    bottom = horizontal_core(q, 0)
    ann = flat_cylinder(q, bottom)
    assert abs(ann.modulus - 0.5) < 1e-14
    single = horizontal_core(q, 2)
    assert abs(flat_cylinder(q, single).modulus - 1.0) < 1e-14


def test_slope_cylinder_modulus_decays():
    q = unit_square_torus()
    a = slope("1/1")
    assert abs(flat_cylinder(q, a).modulus - 0.5) < 1e-14  # 1/|1+i|^2


# ---------------------------------------------------------------------------
# expanding annuli and K
# ---------------------------------------------------------------------------


def test_unit_square_K_half():
    q = unit_square_torus()
    assert abs(expanding_K(q, vertical_core(q, 0)) - 0.5) < 1e-14
    # slope form agrees: the crossing arc halves over the circumference
    assert abs(expanding_K(q, slope("0/1")) - 0.5) < 1e-14


def test_l_origami_K_against_mesh_oracle():
    q = l_origami()
    cyc = [0, 1]
    exact = min(_vertical_return_arcs(q, cyc))
    oracle = mesh_return_arc(q, cyc, k=10)
    assert abs(oracle - exact) / exact < 0.02


def test_K_flow_two_sided_bound():
    # e^{-2(b-a)} K_b <~ K_a <~ e^{2(b-a)} K_a with constant one here
    q = l_origami()
    a = horizontal_core(q, 0)
    for t1, t2 in ((-1.0, 0.5), (0.0, 2.0), (-2.5, -1.0)):
        k1 = expanding_K(flow(q, t1), a)
        k2 = expanding_K(flow(q, t2), a)
        assert k1 <= math.exp(2.0 * (t2 - t1)) * k2 * (1.0 + 1e-12)
        assert k1 >= math.exp(-2.0 * (t2 - t1)) * k2 * (1.0 - 1e-12)


def test_K_monotone_decay_away_from_balance():
    # the L-origami horizontal core is vertical for the core pair, with
    # balance time -inf: K must decay monotonically in t
    q = l_origami()
    a = horizontal_core(q, 0)
    ks = [expanding_K(flow(q, t), a) for t in (-3.0, -1.0, 0.0, 1.5, 3.0)]
    assert all(ks[i] >= ks[i + 1] * (1.0 - 1e-12) for i in range(len(ks) - 1))


def test_K_preserved_by_surgery_before_renormalization():
    q = l_origami()
    a = horizontal_core(q, 0)
    for t in [-2.0 + 0.4 * i for i in range(11)]:
        qt = flow(q, t)
        cut = cut_and_reglue(qt, a)
        abar = seam_core(cut, qt, a)
        assert abs(expanding_K(qt, a) - expanding_K(cut, abar)) < 1e-12


# ---------------------------------------------------------------------------
# D estimates
# ---------------------------------------------------------------------------


def test_D_at_balance_time_equals_relative_twist():
    p, m = mc("0/1"), mc("10/1")
    a = slope("1/1")
    from teichmin.curves import balance_time, relative_twist

    ta = balance_time(a, p, m).value
    assert abs(estimate_D(a, ta, p, m) - relative_twist(p, m, a)) < 1e-12


def test_D_exponential_decay_from_balance():
    p, m = mc("0/1"), mc("10/1")
    a = slope("1/1")
    from teichmin.curves import balance_time

    ta = balance_time(a, p, m).value
    d0 = estimate_D(a, ta, p, m)
    assert abs(estimate_D(a, ta + 1.0, p, m) - d0 * math.exp(-2.0)) < 1e-12
    assert abs(estimate_D(a, ta - 0.5, p, m) - d0 * math.exp(-1.0)) < 1e-12


def test_D_vertical_convention():
    # the horizontal-curve member of the pair: disjoint from m
    p, m = mc("0/1"), mc("1/0")
    a = slope("1/0")  # i(a, m) = 0: vertical, Mod F_0 = 1
    for t in (-1.0, 0.0, 2.0):
        assert abs(estimate_D(a, t, p, m) - math.exp(-2.0 * t)) < 1e-12
    b = slope("0/1")  # i(b, p) = 0: horizontal
    assert abs(estimate_D(b, 1.0, p, m) - math.exp(2.0)) < 1e-12


# ---------------------------------------------------------------------------
# short intervals
# ---------------------------------------------------------------------------


def test_short_interval_empty_when_never_short():
    # the slope-1 curve is balanced at the square point, where its length
    # is 2 arccosh(2), so thresholds below that give the empty interval
    p, m = mc("0/1"), mc("1/0")
    out = short_interval(slope("1/1"), 1.2, p, m)
    assert out.empty


def test_short_interval_symmetric_about_balance():
    p, m = mc("0/1"), mc("1/0")
    out = short_interval(slope("1/1"), 2.8, p, m, tol=1e-6)
    assert not out.empty
    assert abs((out.lo + out.hi) / 2.0) < 1e-4  # balance time is 0
    assert out.lo < 0.0 < out.hi


def test_short_interval_vertical_half_line():
    p, m = mc("0/1"), mc("1/0")
    out = short_interval(slope("1/0"), 0.5, p, m)
    assert not out.empty
    assert out.lo == -math.inf and math.isfinite(out.hi)


def test_short_interval_proxy_flag_on_origami():
    q = l_origami()
    sig = SurfaceSig(2, 0)
    p = MeasuredMulticurve(
        sig,
        (
            (vertical_core(q, 0), Fraction(1)),
            (vertical_core(q, 1), Fraction(1)),
        ),
    )
    m = MeasuredMulticurve(
        sig,
        (
            (horizontal_core(q, 0), Fraction(1)),
            (horizontal_core(q, 2), Fraction(1)),
        ),
    )
    out = short_interval(
        horizontal_core(q, 0), 0.3, p, m, base_surface=q, proxy=True
    )
    assert out.proxy


# ---------------------------------------------------------------------------
# surgery
# ---------------------------------------------------------------------------


def test_cut_l_origami_yields_torus():
    q = l_origami()
    a = horizontal_core(q, 0)
    cut = cut_and_reglue(q, a)
    # hand-checked: deleting the bottom row leaves the unit square torus
    assert cut.n_squares == 1
    assert cut.right == (0,) and cut.top == (0,)
    assert abs(cut.area - 1.0) == 0.0


def test_cut_flow_commutation():
    q = l_origami()
    a = horizontal_core(q, 0)
    t = 2.5
    first = cut_and_reglue(flow(q, t), a)
    second = flow(cut_and_reglue(q, a), t)
    assert same_labeled_geometry(first, second)


def test_cut_degenerate_raises():
    q = unit_square_torus()
    with pytest.raises(DomainError):
        cut_and_reglue(q, vertical_core(q, 0))


def test_cut_preserves_untouched_saddle_data():
    # widths and heights of surviving squares are unchanged before
    # renormalization
    q = l_origami()
    cut = cut_and_reglue(q, horizontal_core(q, 0))
    assert cut.widths == (Fraction(1),)
    assert cut.heights == (Fraction(1),)


def test_deleted_cylinder_gone():
    q = l_origami()
    a = horizontal_core(q, 0)
    cut = cut_and_reglue(q, a)
    # the two-square row no longer exists on the cut surface
    assert all(len(c) != 2 for c in horizontal_cylinders(cut))
