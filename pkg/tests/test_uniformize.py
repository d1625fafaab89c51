"""Conformal/hyperbolic bridge tests for the once-punctured torus.

The two exactly-known symmetric structures anchor everything: the square
torus has trace coordinates (2 sqrt 2, 2 sqrt 2, 4) and the hexagonal torus
(3, 3, 6), both with vanishing accessory parameter.
"""

import cmath
import math

import numpy as np
import pytest

from teichmin.hyperbolic import FNPoint, base_triple
from teichmin.uniformize import (
    _cusp_monodromy,
    _solve_accessory,
    fn_to_tau,
    monodromy_traces,
    reduce_tau,
    tau_to_fn,
    tau_to_triple,
    wp,
    wp_lattice_oracle,
)

SQ = 2.0 * math.sqrt(2.0)
HEX_TAU = cmath.exp(1j * math.pi / 3.0)


def test_wp_series_vs_lattice_oracle():
    # differences of wp cancel the box-shape constant of the truncated sum
    tau = complex(0.13, 1.21)
    zs = [0.31 + 0.42j, -0.2 + 0.55j * tau.imag, 0.45 + 0.5 * tau]
    series = [wp(z, tau) for z in zs]
    lattice = [wp_lattice_oracle(z, tau, box=80) for z in zs]
    for i in range(len(zs) - 1):
        d_series = series[i] - series[i + 1]
        d_lattice = lattice[i] - lattice[i + 1]
        assert abs(d_series - d_lattice) < 2e-4


def test_wp_double_periodicity():
    tau = complex(-0.21, 0.93)
    z = 0.23 + 0.31j
    base = wp(z, tau)
    assert abs(wp(z + 1, tau) - base) < 1e-12 * abs(base)
    assert abs(wp(z + tau, tau) - base) < 1e-12 * abs(base)
    assert abs(wp(-z, tau) - base) < 1e-12 * abs(base)


def test_square_anchor_traces():
    tr = monodromy_traces(1j, [0.0])[0]
    assert abs(tr[0] - SQ) < 1e-8
    assert abs(tr[1] - SQ) < 1e-8
    assert abs(tr[2] - 4.0) < 1e-7


def test_hexagonal_anchor_traces():
    tr = monodromy_traces(HEX_TAU, [0.0])[0]
    assert abs(tr[0] - 3.0) < 1e-8
    assert abs(tr[1] - 3.0) < 1e-8
    assert abs(tr[2] - 6.0) < 1e-7


def test_accessory_vanishes_at_anchors():
    for tau in (1j, HEX_TAU):
        b, _ = _solve_accessory(tau)
        assert abs(b) < 1e-9


def test_commutator_parabolic_at_solution():
    from teichmin.uniformize import _path_monodromy

    tau = complex(0.2, 1.3)
    b, _ = _solve_accessory(tau)
    bs = np.array([b])
    ma = _path_monodromy(tau, bs, 1.0 + 0.0j, 384)[0]
    mb = _path_monodromy(tau, bs, tau, 384)[0]
    comm = ma @ mb @ np.linalg.inv(ma) @ np.linalg.inv(mb)
    assert abs(np.trace(comm) + 2.0) < 1e-6


def test_triple_satisfies_cusped_relation():
    for tau in (complex(0.31, 0.77), complex(-0.11, 2.9), complex(0.02, 40.0)):
        x, y, z = tau_to_triple(tau)
        resid = x * x + y * y + z * z - x * y * z
        assert abs(resid) < 1e-6 * abs(x * y * z)


def test_translation_equivariance():
    tau = complex(0.21, 1.37)
    x0, y0, z0 = tau_to_triple(tau)
    x1, y1, z1 = tau_to_triple(tau + 1)
    assert abs(x1 - x0) < 1e-9 * x0  # pants curve unchanged
    assert abs(y1 - z0) < 1e-9 * z0  # slope 0 at tau+1 is slope 1 at tau


def test_inversion_equivariance():
    tau = complex(0.4, 1.9)
    x0, y0, z0 = tau_to_triple(tau)
    xs, ys, zs = tau_to_triple(-1.0 / tau)
    # S swaps the two marked curves
    assert abs(xs - y0) < 1e-8 * y0
    assert abs(ys - x0) < 1e-8 * x0


def test_reduce_tau_moebius_consistency():
    tau = complex(3.71, 0.23)
    t_red, (a, b, c, d) = reduce_tau(tau)
    assert a * d - b * c == 1
    assert abs((a * t_red + b) / (c * t_red + d) - tau) < 1e-12
    assert abs(t_red.real) <= 0.5 + 1e-12 and abs(t_red) >= 1.0 - 1e-12


def test_cusp_closed_form_matches_integration():
    tau = complex(0.17, 50.0)
    b = complex(-0.8223, 0.001)
    tr_int = monodromy_traces(tau, [b])  # integrated: below the switch
    ma, mb = _cusp_monodromy(tau, np.array([b], dtype=complex))
    x = np.trace(ma[0])
    yv = np.trace(mb[0])
    z = np.trace(ma[0] @ mb[0])
    sx = 1 if x.real >= 0 else -1
    sy = 1 if yv.real >= 0 else -1
    closed = np.array([x * sx, yv * sy, z * sx * sy])
    rel = np.abs(closed - tr_int[0]) / np.abs(tr_int[0])
    assert np.max(rel) < 1e-9


def test_switch_continuity():
    below = tau_to_fn(complex(0.1, 63.9))
    above = tau_to_fn(complex(0.1, 64.1))
    assert abs(below.l / above.l - 64.1 / 63.9) < 1e-3
    assert abs(below.s - above.s) < 1e-6


def test_roundtrip_spread():
    pts = [
        complex(0.0, 1.0),
        complex(0.3, 0.9),
        complex(-0.45, 2.2),
        complex(0.12, 17.0),
        complex(2.7, 0.8),
        complex(0.47, 120.0),
        complex(0.05, 4000.0),
        complex(-0.31, 0.52),
    ]
    for tau in pts:
        fn = tau_to_fn(tau)
        back = fn_to_tau(FNPoint.t11(fn.l, fn.s))
        assert abs(back - tau) / abs(tau) < 1e-6, tau


def test_fn_point_matches_holonomy_parameterization():
    # the bridge's FN output reproduces its trace triple through the
    # explicit holonomy of teichmin.hyperbolic
    for tau in (complex(0.3, 0.9), complex(-0.2, 3.1)):
        fn = tau_to_fn(tau)
        x1, y1, z1 = base_triple(fn)
        x2, y2, z2 = tau_to_triple(tau)
        assert abs(x1 - x2) < 1e-8 * max(1, x2)
        assert abs(y1 - y2) < 1e-8 * max(1, y2)
        assert abs(z1 - z2) < 1e-8 * max(1, z2)


def test_step_halving_consistency():
    from teichmin import uniformize as _u

    tau = complex(0.29, 1.11)
    t1 = tau_to_triple(tau, steps=256)
    for cache in (_u._ACCESSORY_CACHE, _u._TRIPLE_CACHE):
        cache.pop((round(tau.real, 12), round(tau.imag, 12)), None)
    t2 = tau_to_triple(tau, steps=512)
    for a, b in zip(t1, t2):
        assert abs(a - b) < 1e-8 * max(1.0, abs(b))
