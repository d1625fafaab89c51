"""Distance layer: annulus coordinates, exact (1,1) distances, coarse audits."""

import math
import random

import pytest

from teichmin.curves import CurveClass, DomainError, MeasuredMulticurve
from teichmin.flat import build_flat_surface, flow
from teichmin.hyperbolic import FNPoint, curve_length, thick_thin
from teichmin.metric import (
    AnnulusCoord,
    annulus_coordinate,
    classify_gamma,
    d_annulus,
    d_annulus_surrogate,
    exact_distance_t11,
    fn_relative_to,
    geodesic_point_T11,
    product_regions_distance,
    wolpert_bound,
)
from teichmin.uniformize import tau_to_fn

slope = CurveClass.slope
mc = MeasuredMulticurve.of_slope


def coord(s, l):
    return AnnulusCoord(curve=slope("1/0"), s=s, l=l)


# ---------------------------------------------------------------------------
# annulus distances
# ---------------------------------------------------------------------------


def test_d_annulus_identical_zero():
    assert d_annulus(coord(0.3, 0.2), coord(0.3, 0.2)) == 0.0


def test_d_annulus_half_log_two():
    # points i and 2i: half of arccosh(5/4) = half of ln 2
    val = d_annulus(coord(0.0, 1.0), coord(0.0, 0.5))
    assert abs(val - 0.5 * math.log(2.0)) < 1e-14


def test_d_annulus_twist_dominated():
    a, b = coord(0.0, 0.01), coord(1000.0, 0.01)
    surrogate = d_annulus_surrogate(a, b)
    assert abs(surrogate - 0.5 * math.log(1000.0**2 * 1e-4)) < 1e-12
    assert abs(d_annulus(a, b) - surrogate) <= 1.0


def test_d_annulus_curve_mismatch():
    other = AnnulusCoord(curve=slope("0/1"), s=0.0, l=1.0)
    with pytest.raises(DomainError):
        d_annulus(coord(0.0, 1.0), other)


def test_d_annulus_triangle_inequality_1000():
    rng = random.Random(7)
    worst = 0.0
    for _ in range(1000):
        pts = [
            coord(rng.uniform(-50, 50), math.exp(rng.uniform(math.log(1e-3), 1.0)))
            for _ in range(3)
        ]
        d01 = d_annulus(pts[0], pts[1])
        d12 = d_annulus(pts[1], pts[2])
        d02 = d_annulus(pts[0], pts[2])
        worst = max(worst, d02 - (d01 + d12))
    assert worst < 1e-12


def test_surrogate_vs_exact_coarse_band():
    rng = random.Random(9)
    for _ in range(300):
        a = coord(rng.uniform(-100, 100), math.exp(rng.uniform(-6, 0)))
        b = coord(rng.uniform(-100, 100), math.exp(rng.uniform(-6, 0)))
        big = max((a.s - b.s) ** 2 * a.l * b.l, a.l / b.l, b.l / a.l)
        gap = abs(d_annulus(a, b) - d_annulus_surrogate(a, b))
        if big > math.e**2:
            assert gap <= 1.0
        assert gap <= 2.0


# ---------------------------------------------------------------------------
# exact (1,1) distance
# ---------------------------------------------------------------------------


def test_exact_distance_identity_and_flow():
    assert exact_distance_t11(1j, 1j) == 0.0
    # flat points i and e^2 i are distance one apart
    assert abs(exact_distance_t11(1j, 1j * math.e**2) - 1.0) < 1e-14


def test_geodesic_flow_unit_speed():
    p, m = mc("0/1"), mc("1/0")
    qa, fna = geodesic_point_T11(p, m, -1.3)
    qb, fnb = geodesic_point_T11(p, m, 2.1)
    assert abs(exact_distance_t11(qa, qb) - 3.4) < 1e-9
    assert abs(exact_distance_t11(fna, fnb) - 3.4) < 1e-9


def test_symmetric_pair_time_zero_square_point():
    p, m = mc("0/1"), mc("1/0")
    q0, fn0 = geodesic_point_T11(p, m, 0.0)
    assert abs(q0.conformal_point() - 1j) < 1e-15
    assert abs(fn0.l - 2.0 * math.acosh(math.sqrt(2.0))) < 1e-9


def test_триangle_inequality_exact():
    rng = random.Random(3)
    for _ in range(200):
        taus = [
            complex(rng.uniform(-1.5, 1.5), math.exp(rng.uniform(-1.0, 2.0)))
            for _ in range(3)
        ]
        d01 = exact_distance_t11(taus[0], taus[1])
        d12 = exact_distance_t11(taus[1], taus[2])
        d02 = exact_distance_t11(taus[0], taus[2])
        assert d02 <= d01 + d12 + 1e-12


# ---------------------------------------------------------------------------
# Wolpert lower bound
# ---------------------------------------------------------------------------


def test_wolpert_identity_and_ratio():
    fn = tau_to_fn(complex(0.2, 1.1))
    assert wolpert_bound(fn, fn, [slope("1/0")]) == 0.0


def test_wolpert_never_exceeds_exact():
    rng = random.Random(21)
    probes = [slope(f"{p}/{q}") for p, q in
              [(0, 1), (1, 0), (1, 1), (-1, 1), (2, 1), (1, 2), (3, 2), (-2, 3)]]
    for _ in range(60):
        t1 = complex(rng.uniform(-1, 1), math.exp(rng.uniform(-0.8, 1.8)))
        t2 = complex(rng.uniform(-1, 1), math.exp(rng.uniform(-0.8, 1.8)))
        fn1, fn2 = tau_to_fn(t1), tau_to_fn(t2)
        bound = wolpert_bound(fn1, fn2, probes)
        assert bound <= exact_distance_t11(t1, t2) + 1e-9


# ---------------------------------------------------------------------------
# product regions vs ground truth
# ---------------------------------------------------------------------------


def test_product_regions_requires_short_curve():
    fn1 = tau_to_fn(complex(0.0, 1.0))
    fn2 = tau_to_fn(complex(0.3, 1.4))
    with pytest.raises(DomainError):
        product_regions_distance(fn1, fn2, {slope("1/0")})


def test_product_regions_tracks_exact_in_thin_part():
    rng = random.Random(5)
    alpha = slope("1/0")
    worst = 0.0
    for _ in range(100):
        t1 = complex(rng.uniform(-0.5, 0.5), math.exp(rng.uniform(3.8, 7.0)))
        t2 = complex(rng.uniform(-0.5, 0.5), math.exp(rng.uniform(3.8, 7.0)))
        fn1, fn2 = tau_to_fn(t1), tau_to_fn(t2)
        cd = product_regions_distance(fn1, fn2, {alpha})
        exact = exact_distance_t11(t1, t2)
        assert cd.provenance == "product_regions"
        worst = max(worst, abs(cd.value - exact))
    assert worst <= cd.additive_slack, worst


def test_fn_relative_to_reports_short_transverse_curve():
    # deep in the thin part of slope 0 the re-marked point has tiny length
    q = build_flat_surface(mc("0/1"), mc("1/0"))
    qt = flow(q, 4.0)
    fn = tau_to_fn(qt.conformal_point())
    rel = fn_relative_to(fn, slope("0/1"))
    assert rel.l < 2e-3  # pi e^-8
    direct = curve_length(fn, slope("0/1"))
    assert abs(rel.l - direct) < 1e-6 * direct


# ---------------------------------------------------------------------------
# Gamma classification
# ---------------------------------------------------------------------------


def test_classify_gamma_thick_run_empty():
    p, m = mc("0/1"), mc("1/0")
    split = classify_gamma(p, m, -0.3, 0.3, eps_prime=0.05)
    assert not split.gamma_a and not split.gamma_b and not split.gamma


def test_classify_gamma_one_sided():
    p, m = mc("0/1"), mc("1/0")
    # at t = 3 the first multicurve's slope is very short; at t = 0 nothing is
    split = classify_gamma(p, m, 0.0, 3.0, eps_prime=0.05)
    assert slope("0/1") in split.gamma_b
    assert not split.gamma_a and not split.gamma


def test_classify_gamma_both_sides_tags():
    p, m = mc("0/1"), mc("1/0")
    split = classify_gamma(p, m, 2.5, 4.0, eps_prime=0.05)
    assert slope("0/1") in split.gamma
    assert split.case_tags[slope("0/1")] in {"K_large", "D_prefix", "D_suffix"}
