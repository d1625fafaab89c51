"""Distance layer: per-curve half-plane coordinates, product-region coarse
distances, and exact distances on the once-punctured torus.

The exact Teichmuller distance on (1,1) is half the hyperbolic distance
between conformal points in the upper half-plane (quadratic differentials
lift through the elliptic involution); it is cross-validated against the
unit-speed property of the geodesic flow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from teichmin.curves import (
    CurveClass,
    DomainError,
    MeasuredMulticurve,
    _bezout_to_infinity,
    invert_unimodular,
    transform_slope,
)
from teichmin.flat import (
    FlatSurface,
    build_flat_surface,
    expanding_K,
    estimate_D,
    flow,
)
from teichmin.hyperbolic import (
    EPS0_DEFAULT,
    FNPoint,
    base_triple,
    curve_length,
    trace_of_slope,
    triple_to_fn,
)
from teichmin.uniformize import (
    curve_length_at_tau,
    fn_to_tau,
    remark_tau,
    tau_to_fn,
)


# ---------------------------------------------------------------------------
# per-curve upper half-plane coordinates
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AnnulusCoord:
    """Point s + i / l in the curve's upper half-plane."""

    curve: CurveClass
    s: float
    l: float

    def __post_init__(self):
        if self.l <= 0:
            raise DomainError("length coordinate must be positive")

    @property
    def point(self) -> complex:
        return complex(self.s, 1.0 / self.l)


def fn_relative_to(fn: FNPoint, alpha: CurveClass) -> FNPoint:
    """Fenchel-Nielsen coordinates with alpha as the pants curve.

    Uses the cached conformal point when present (exact arbitrarily deep in
    the thin part); otherwise transports the trace triple along the Farey
    recursion.
    """
    if alpha == fn.pants_curves[0]:
        return fn
    if fn.tau is not None:
        return tau_to_fn(remark_tau(fn.tau, alpha))
    h = _bezout_to_infinity(alpha)
    hinv = invert_unimodular(h)
    x, y, z = base_triple(fn)
    vals = []
    for pq in ((1, 0), (0, 1), (1, 1)):
        c_old = transform_slope(hinv, CurveClass.slope(*pq))
        vals.append(trace_of_slope(c_old, x, y, z))
    return triple_to_fn(*vals)


def annulus_coordinate(fn: FNPoint, alpha: CurveClass) -> AnnulusCoord:
    rel = fn_relative_to(fn, alpha)
    return AnnulusCoord(curve=alpha, s=rel.s, l=rel.l)


def d_annulus(a: AnnulusCoord, b: AnnulusCoord) -> float:
    """Half the hyperbolic distance between the two coordinate points.

    Whenever the coarse surrogate's max exceeds e^2, the exact value is
    checked against the surrogate within additive one.
    """
    if a.curve != b.curve:
        raise DomainError("annulus coordinates belong to different curves")
    z1, z2 = a.point, b.point
    u = abs(z1 - z2) / (2.0 * math.sqrt(z1.imag * z2.imag))
    exact = math.asinh(u)  # half of 2 asinh(u)
    big = max(
        (a.s - b.s) ** 2 * a.l * b.l, a.l / b.l, b.l / a.l
    )
    if big > math.e**2:
        surrogate = 0.5 * math.log(big)
        assert abs(exact - surrogate) <= 1.0, (exact, surrogate)
    return exact


def d_annulus_surrogate(a: AnnulusCoord, b: AnnulusCoord) -> float:
    big = max((a.s - b.s) ** 2 * a.l * b.l, a.l / b.l, b.l / a.l)
    return 0.5 * math.log(max(big, 1.0))


# ---------------------------------------------------------------------------
# coarse distances
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CoarseDistance:
    value: float
    additive_slack: float = 0.0
    multiplicative_slack: float = 1.0
    provenance: str = "exact"  # exact | product_regions | proxy

    def __post_init__(self):
        if self.provenance == "exact" and (
            self.additive_slack != 0.0 or self.multiplicative_slack != 1.0
        ):
            raise DomainError("exact provenance forces zero slack")
        if self.multiplicative_slack < 1.0:
            raise DomainError("multiplicative slack is at least one")


PRODUCT_REGIONS_SLACK = 2.0  # measured on (1,1) against ground truth


def product_regions_distance(
    x: FNPoint,
    y: FNPoint,
    gamma: set[CurveClass] | frozenset[CurveClass],
    eps0: float = EPS0_DEFAULT,
    additive_slack: float = PRODUCT_REGIONS_SLACK,
) -> CoarseDistance:
    """Coarse distance in a thin region: max of per-curve half-plane terms
    and the cut-surface term (zero on complexity-one surfaces)."""
    terms = [0.0]
    for alpha in gamma:
        la = curve_length(x, alpha)
        lb = curve_length(y, alpha)
        if la >= eps0 or lb >= eps0:
            raise DomainError(f"curve {alpha} is not short at both points")
        terms.append(d_annulus(annulus_coordinate(x, alpha), annulus_coordinate(y, alpha)))
    if x.surface.is_t11 and gamma:
        # cutting the single curve leaves complexity zero: no extra term
        return CoarseDistance(
            value=max(terms),
            additive_slack=additive_slack,
            provenance="product_regions",
        )
    if not gamma:
        # degenerate max: the cut-surface term alone
        return CoarseDistance(
            value=_thick_fn_distance(x, y),
            additive_slack=additive_slack,
            provenance="product_regions" if x.surface.is_t11 else "proxy",
        )
    return CoarseDistance(
        value=max(max(terms), _thick_fn_distance(x, y)),
        additive_slack=additive_slack,
        provenance="proxy",
    )


def _thick_fn_distance(x: FNPoint, y: FNPoint) -> float:
    """Sup-style coordinate distance over the remaining pants coordinates."""
    total = 0.0
    for (la, sa, lb, sb) in zip(x.lengths, x.twists, y.lengths, y.twists):
        total = max(total, abs(math.log(lb / la)) / 2.0, abs(sb - sa) * min(la, lb) / 2.0)
    return total


# ---------------------------------------------------------------------------
# exact distances on (1,1)
# ---------------------------------------------------------------------------


def _to_tau(pt: FNPoint | FlatSurface | complex) -> complex:
    if isinstance(pt, complex):
        return pt
    if isinstance(pt, FlatSurface):
        return pt.conformal_point()
    if isinstance(pt, FNPoint):
        return pt.tau if pt.tau is not None else fn_to_tau(pt)
    raise DomainError(f"cannot interpret {type(pt).__name__} as a (1,1) point")


def exact_distance_t11(
    x: FNPoint | FlatSurface | complex, y: FNPoint | FlatSurface | complex
) -> float:
    """Teichmuller distance on the once-punctured torus: half the hyperbolic
    distance between the conformal points."""
    z1, z2 = _to_tau(x), _to_tau(y)
    u = abs(z1 - z2) / (2.0 * math.sqrt(z1.imag * z2.imag))
    return math.asinh(u)


# spec-facing alias
exact_distance_T11 = exact_distance_t11


def geodesic_point_T11(
    p: MeasuredMulticurve, m: MeasuredMulticurve, t: float,
    base_surface: FlatSurface | None = None,
) -> tuple[FlatSurface, FNPoint]:
    """Time-t geodesic surface as flat data plus the uniformized FN point."""
    q0 = base_surface if base_surface is not None else build_flat_surface(p, m)
    qt = flow(q0, t)
    return qt, tau_to_fn(qt.conformal_point())


def wolpert_bound(
    x: FNPoint, y: FNPoint, probes: list[CurveClass]
) -> float:
    """Certified lower bound: max over probes of half the log length ratio."""
    best = 0.0
    for gamma in probes:
        lx = _robust_length(x, gamma)
        ly = _robust_length(y, gamma)
        best = max(best, 0.5 * abs(math.log(ly / lx)))
    return best


def _robust_length(fn: FNPoint, c: CurveClass) -> float:
    try:
        return curve_length(fn, c)
    except DomainError:
        if fn.tau is not None:
            return curve_length_at_tau(fn.tau, c)
        raise


# ---------------------------------------------------------------------------
# the Gamma classification at interval endpoints
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GammaSplit:
    gamma_a: frozenset[CurveClass]
    gamma_b: frozenset[CurveClass]
    gamma: frozenset[CurveClass]
    case_tags: dict = field(default_factory=dict, compare=False)


def classify_gamma(
    p: MeasuredMulticurve,
    m: MeasuredMulticurve,
    t_a: float,
    t_b: float,
    eps_prime: float,
    big_m: float = 10.0,
    candidates: list[CurveClass] | None = None,
    base_surface: FlatSurface | None = None,
    sweep_points: int = 17,
) -> GammaSplit:
    """Split the eps'-short curves at the two endpoint surfaces and tag the
    doubly-short ones by the decay trichotomy.

    Tags: "K_large" when K stays above the threshold on the whole interval;
    otherwise "D_prefix"/"D_suffix" according to the side on which the
    twisting estimate dominates sqrt(K).
    """
    from teichmin.hyperbolic import systole_t11

    q0 = base_surface if base_surface is not None else build_flat_surface(p, m)

    def short_curves(t: float) -> dict[CurveClass, float]:
        tau = flow(q0, t).conformal_point()
        fn = tau_to_fn(tau)
        c, l = systole_t11(fn)
        out = {}
        if l < eps_prime:
            out[c] = l
        else:
            # nothing can be shorter than the systole
            return out
        return out

    at_a = short_curves(t_a)
    at_b = short_curves(t_b)
    if candidates:
        for t, store in ((t_a, at_a), (t_b, at_b)):
            tau = flow(q0, t).conformal_point()
            for c in candidates:
                l = curve_length_at_tau(tau, c)
                if l < eps_prime:
                    store[c] = l
    ga = frozenset(c for c in at_a if c not in at_b)
    gb = frozenset(c for c in at_b if c not in at_a)
    gboth = frozenset(c for c in at_a if c in at_b)

    tags: dict[CurveClass, str] = {}
    for alpha in gboth:
        ts = [t_a + (t_b - t_a) * k / (sweep_points - 1) for k in range(sweep_points)]
        ks = [expanding_K(flow(q0, t), alpha) for t in ts]
        ds = [estimate_D(alpha, t, p, m, base_surface=q0) for t in ts]
        if all(k > big_m for k in ks):
            tags[alpha] = "K_large"
        else:
            dominated = [d >= math.sqrt(k) for d, k in zip(ds, ks)]
            if dominated[0]:
                tags[alpha] = "D_prefix"
            elif dominated[-1]:
                tags[alpha] = "D_suffix"
            else:
                tags[alpha] = "K_large"  # failure of (i) with no D side: rare
    return GammaSplit(gamma_a=ga, gamma_b=gb, gamma=gboth, case_tags=tags)
