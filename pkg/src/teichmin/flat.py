"""Flat layer: square-tiled surfaces, the geodesic flow, cylinder analysis.

A surface is a set of axis-aligned rectangles glued by right/top
permutations.  Base dimensions are exact rationals; the time-t metric scales
widths by e^t and heights by e^-t (times the unit-area normalization), with
t kept as an exact rational so that flowing is associative on the nose.

Filling slope pairs on the once-punctured torus build a marked torus
complex: the second multicurve runs horizontally, the first vertically, and
a crossing of components with weights (w+, w-) contributes a rectangle of
base width w+ and height w-.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Iterable, Sequence

from teichmin.curves import (
    CurveClass,
    DomainError,
    MeasuredMulticurve,
    SurfaceSig,
    T11,
    balance_time,
    curve_intersection,
    fills,
    intersection_number,
    invert_unimodular,
    relative_twist,
    transform_slope,
    _bezout_to_infinity,
)

Mat = tuple[int, int, int, int]


# ---------------------------------------------------------------------------
# the surface type
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FlatSurface:
    """Unit-area rectangle complex carrying the time-t flat metric."""

    widths: tuple[Fraction, ...]
    heights: tuple[Fraction, ...]
    right: tuple[int, ...]
    top: tuple[int, ...]
    t: Fraction = Fraction(0)
    marking: Mat | None = None  # (1,1) only: slope change of basis
    torus_shift: int | None = None  # (1,1) only: top-shift a with 0 <= a < n

    def __post_init__(self):
        n = len(self.widths)
        if not (len(self.heights) == len(self.right) == len(self.top) == n):
            raise DomainError("inconsistent square data")
        if sorted(self.right) != list(range(n)) or sorted(self.top) != list(range(n)):
            raise DomainError("gluing maps must be permutations")
        if any(w <= 0 for w in self.widths) or any(h <= 0 for h in self.heights):
            raise DomainError("rectangle dimensions must be positive")
        for i in range(n):
            if self.heights[self.right[i]] != self.heights[i]:
                raise DomainError("heights must be constant along rows")
            if self.widths[self.top[i]] != self.widths[i]:
                raise DomainError("widths must be constant along columns")

    # -- metric bookkeeping -------------------------------------------------

    @property
    def n_squares(self) -> int:
        return len(self.widths)

    @property
    def base_area(self) -> Fraction:
        return sum((w * h for w, h in zip(self.widths, self.heights)), Fraction(0))

    @property
    def scale(self) -> float:
        return 1.0 / math.sqrt(float(self.base_area))

    @property
    def time(self) -> float:
        return float(self.t)

    @property
    def area(self) -> float:
        return 1.0  # exact by the ledger: widths and heights scale inversely

    def width_at(self, i: int) -> float:
        return float(self.widths[i]) * math.exp(self.time) * self.scale

    def height_at(self, i: int) -> float:
        return float(self.heights[i]) * math.exp(-self.time) * self.scale

    @property
    def is_marked_torus(self) -> bool:
        return self.marking is not None

    def conformal_point(self) -> complex:
        """tau of a marked (1,1) surface, in the original marking.

        The complex is built in a normalized basis (the second multicurve
        horizontal); the conformal point is pulled back through the marking
        so that distances and uniformized Fenchel-Nielsen data refer to the
        caller's slope coordinates.
        """
        if not self.is_marked_torus:
            raise DomainError("surface carries no torus marking")
        n = self.n_squares
        a = self.torus_shift
        w_plus = self.widths[0]
        w_minus = self.heights[0]
        im = float(w_minus) / (n * float(w_plus)) * math.exp(-2.0 * self.time)
        tau_norm = complex(-a / n, im)
        g1, g2, g3, g4 = self.marking
        out = (g4 * tau_norm + g2) / (g3 * tau_norm + g1)
        if out.imag <= 0:
            raise DomainError("marking pullback left the upper half-plane")
        return out

    def periods(self) -> tuple[complex, complex]:
        """Lattice vectors of the slope-infinity and slope-0 curves (time t)."""
        if not self.is_marked_torus:
            raise DomainError("surface carries no torus marking")
        n = self.n_squares
        a = self.torus_shift
        et = math.exp(self.time) * self.scale
        emt = math.exp(-self.time) * self.scale
        w_plus = float(self.widths[0])
        w_minus = float(self.heights[0])
        omega_a = complex(n * w_plus * et, 0.0)
        omega_b = complex(-a * w_plus * et, w_minus * emt)
        return omega_a, omega_b

    # -- serialization (origami JSON format) ---------------------------------

    @staticmethod
    def from_json(data: dict | str) -> "FlatSurface":
        if isinstance(data, str):
            data = json.loads(data)
        n = int(data["squares"])
        widths = tuple(Fraction(w) for w in data.get("widths", ["1"] * n))
        heights = tuple(Fraction(h) for h in data.get("heights", ["1"] * n))
        return FlatSurface(
            widths=widths,
            heights=heights,
            right=tuple(int(i) for i in data["right"]),
            top=tuple(int(i) for i in data["top"]),
        )

    def to_json(self) -> dict:
        return {
            "squares": self.n_squares,
            "right": list(self.right),
            "top": list(self.top),
            "widths": [f"{w.numerator}/{w.denominator}" for w in self.widths],
            "heights": [f"{h.numerator}/{h.denominator}" for h in self.heights],
        }


@dataclass(frozen=True)
class FlatAnnulus:
    """Flat cylinder or expanding-annulus data around a core curve."""

    kind: str  # "flat" | "expanding"
    core: CurveClass
    circumference: float
    height: float = 0.0
    inner_boundary_length: float = 0.0
    escape_distance: float = 0.0
    modulus: float = 0.0


@dataclass(frozen=True)
class ShortCurveEstimate:
    curve: CurveClass
    t: float
    D: float
    K: float
    t_alpha: float


@dataclass(frozen=True)
class ShortInterval:
    curve: CurveClass
    epsilon: float
    lo: float  # -inf for vertical half-lines
    hi: float  # +inf for horizontal half-lines
    empty: bool = False
    proxy: bool = False

    def contains(self, t: float) -> bool:
        return (not self.empty) and self.lo < t < self.hi


# ---------------------------------------------------------------------------
# construction
# ---------------------------------------------------------------------------


def build_flat_surface(p: MeasuredMulticurve, m: MeasuredMulticurve) -> FlatSurface:
    """Rectangle complex whose vertical cores realize p and horizontal m."""
    if not fills(p, m):
        raise DomainError("the pair does not fill; no quadratic differential")
    if not p.surface.is_t11:
        raise DomainError(
            "direct construction is implemented for (1,1) slope pairs; "
            "origami surfaces enter through FlatSurface.from_json"
        )
    (cp, w_plus), (cm, w_minus) = p.components[0], m.components[0]
    g = _bezout_to_infinity(cm)
    ap, n = transform_slope(g, cp).vector
    if n < 0:  # impossible after canonicalization, kept as a guard
        ap, n = -ap, -n
    if n == 0:
        raise DomainError("parallel slopes cannot fill")
    shift = ap % n
    j = (shift - ap) // n
    # compose the twist normalization T^j into the marking
    a0, b0, c0, d0 = g
    g = (a0 + j * c0, b0 + j * d0, c0, d0)
    return FlatSurface(
        widths=(w_plus,) * n,
        heights=(w_minus,) * n,
        right=tuple((i + 1) % n for i in range(n)),
        top=tuple((i + shift) % n for i in range(n)),
        marking=g,
        torus_shift=shift,
    )


def flow(q: FlatSurface, dt: float | Fraction) -> FlatSurface:
    """Scale widths by e^dt and heights by e^-dt; exact in the t ledger."""
    return replace(q, t=q.t + Fraction(dt))


def transpose(q: FlatSurface) -> FlatSurface:
    """Quarter-turn: swaps the roles of rows and columns (and the flow sign)."""
    return FlatSurface(
        widths=q.heights,
        heights=q.widths,
        right=q.top,
        top=q.right,
        t=-q.t,
    )


# ---------------------------------------------------------------------------
# cylinders
# ---------------------------------------------------------------------------


def _cycles(perm: Sequence[int]) -> list[list[int]]:
    seen: set[int] = set()
    out = []
    for i in range(len(perm)):
        if i in seen:
            continue
        cyc = [i]
        seen.add(i)
        j = perm[i]
        while j != i:
            cyc.append(j)
            seen.add(j)
            j = perm[j]
        out.append(cyc)
    return out


def horizontal_cylinders(q: FlatSurface) -> list[list[int]]:
    return _cycles(q.right)

def vertical_cylinders(q: FlatSurface) -> list[list[int]]:
    return _cycles(q.top)


def horizontal_core(q: FlatSurface, square: int) -> CurveClass:
    for cyc in horizontal_cylinders(q):
        if square in cyc:
            return CurveClass.word("R" * len(cyc), min(cyc))
    raise DomainError("square index out of range")


def vertical_core(q: FlatSurface, square: int) -> CurveClass:
    for cyc in vertical_cylinders(q):
        if square in cyc:
            return CurveClass.word("U" * len(cyc), min(cyc))
    raise DomainError("square index out of range")


def _core_cylinder(q: FlatSurface, a: CurveClass) -> tuple[str, list[int]] | None:
    """(direction, squares) when a is a cylinder core word, else None."""
    if a.kind != "word":
        return None
    if set(a.steps) == {"R"}:
        for cyc in horizontal_cylinders(q):
            if a.start in cyc and len(cyc) == len(a.steps):
                return "H", cyc
    if set(a.steps) == {"U"}:
        for cyc in vertical_cylinders(q):
            if a.start in cyc and len(cyc) == len(a.steps):
                return "V", cyc
    return None


def core_intersection(q: FlatSurface, a: CurveClass, b: CurveClass) -> int:
    """Geometric intersection number of two cylinder-core classes."""
    ca, cb = _core_cylinder(q, a), _core_cylinder(q, b)
    if ca is None or cb is None:
        raise DomainError("core_intersection needs cylinder-core words")
    if ca[0] == cb[0]:
        return 0
    return len(set(ca[1]) & set(cb[1]))


def cores_fill(q: FlatSurface, p: MeasuredMulticurve, m: MeasuredMulticurve) -> bool:
    """Whether two core multicurves jointly fill the origami.

    Requires every square to be crossed in both directions (then every
    complementary piece is an open rectangle) and positive joint
    intersection with every cylinder core.
    """
    covered_v: set[int] = set()
    covered_h: set[int] = set()
    for comp, _w in p.components + m.components:
        info = _core_cylinder(q, comp)
        if info is None:
            raise DomainError("origami multicurves must consist of cylinder cores")
        (covered_v if info[0] == "V" else covered_h).update(info[1])
    if covered_v | covered_h != set(range(q.n_squares)):
        return False
    if not (covered_v and covered_h):
        return False
    if covered_v != set(range(q.n_squares)) or covered_h != set(range(q.n_squares)):
        raise DomainError(
            "complement check is only implemented when the cores cover every "
            "square in both directions"
        )
    all_cores = [horizontal_core(q, c[0]) for c in horizontal_cylinders(q)]
    all_cores += [vertical_core(q, c[0]) for c in vertical_cylinders(q)]
    for gamma in all_cores:
        total = 0
        for comp, _w in p.components + m.components:
            total += core_intersection(q, gamma, comp)
        if total == 0:
            return False
    return True


def flat_cylinder(q: FlatSurface, a: CurveClass) -> FlatAnnulus:
    """Maximal flat cylinder with core a (modulus 0 when degenerate)."""
    if a.kind == "slope":
        if not q.is_marked_torus:
            raise DomainError("slope classes need a marked torus surface")
        v = _slope_vector(q, a)
        circ = abs(v)
        height = 1.0 / circ  # unit area
        return FlatAnnulus(
            kind="flat", core=a, circumference=circ, height=height,
            modulus=height / circ,
        )
    info = _core_cylinder(q, a)
    if info is None:
        # no closed parallel family: degenerate cylinder by convention
        return FlatAnnulus(kind="flat", core=a, circumference=q_length(q, a))
    direction, cyc = info
    if direction == "H":
        circ = sum(q.width_at(i) for i in cyc)
        height = q.height_at(cyc[0])
    else:
        circ = sum(q.height_at(i) for i in cyc)
        height = q.width_at(cyc[0])
    return FlatAnnulus(
        kind="flat", core=a, circumference=circ, height=height,
        modulus=height / circ,
    )


# ---------------------------------------------------------------------------
# lengths
# ---------------------------------------------------------------------------


def _slope_vector(q: FlatSurface, a: CurveClass) -> complex:
    omega_a, omega_b = q.periods()
    pq = transform_slope(q.marking, a)
    p_, q_ = pq.vector
    return p_ * omega_a + q_ * omega_b


def q_length(q: FlatSurface, a: CurveClass, mesh: int = 16) -> float:
    """Length of the shortest flat representative.

    Exact for slope classes on a marked torus and for cylinder cores;
    general word classes fall back to the refined-mesh shortest path with
    the declared tolerance (about one percent).
    """
    if a.kind == "slope":
        return abs(_slope_vector(q, a))
    info = _core_cylinder(q, a)
    if info is not None:
        direction, cyc = info
        if direction == "H":
            return sum(q.width_at(i) for i in cyc)
        return sum(q.height_at(i) for i in cyc)
    from teichmin.flatpath import mesh_word_length

    return mesh_word_length(q, a, mesh)


# ---------------------------------------------------------------------------
# the expanding-annulus quantity K
# ---------------------------------------------------------------------------


def _torus_return_arc(q: FlatSurface, a: CurveClass) -> float:
    """Shortest essential arc from the a-geodesic back to itself (torus)."""
    v = _slope_vector(q, a)
    # crossing arcs slide along the line: the minimum is the transverse
    # distance between consecutive lifts, i.e. area / |v|
    return 1.0 / abs(v)


def _rim_port_length(q: FlatSurface, cyc: list[int], upper: bool) -> float:
    cset = set(cyc)
    total = 0.0
    for c in cyc:
        neighbor = q.top[c] if upper else _inverse(q.top)[c]
        if neighbor not in cset:
            total += q.width_at(c)
    return total


def _inverse(perm: Sequence[int]) -> list[int]:
    inv = [0] * len(perm)
    for i, j in enumerate(perm):
        inv[j] = i
    return inv


def _vertical_return_arcs(q: FlatSurface, cyc: list[int]) -> list[float]:
    """Exact vertical port-to-port arcs through the complement of a
    horizontal cylinder: climb column stacks from one rim to the other."""
    cset = set(cyc)
    arcs: list[float] = []
    top_inv = _inverse(q.top)
    for start in range(q.n_squares):
        if start in cset or top_inv[start] not in cset:
            continue  # must start on the lower rim of the complement
        height = 0.0
        i = start
        hops = 0
        while hops <= q.n_squares:
            height += q.height_at(i)
            nxt = q.top[i]
            if nxt in cset:
                arcs.append(height)
                break
            i = nxt
            hops += 1
    return arcs


def expanding_K(q: FlatSurface, a: CurveClass) -> float:
    """Escape-distance ratio of the expanding annulus around a.

    K = (shortest essential return arc to the cylinder boundary / 2)
        / (inner boundary length), searching outside the flat cylinder.
    On the torus the complement is empty and the crossing arc is used with
    the core circumference as the inner boundary.
    """
    ann = expanding_annulus(q, a)
    return ann.escape_distance / ann.inner_boundary_length


def expanding_annulus(q: FlatSurface, a: CurveClass) -> FlatAnnulus:
    if a.kind == "slope":
        circ = abs(_slope_vector(q, a))
        d = 0.5 * _torus_return_arc(q, a)
        mod = math.log(max(d / circ, 1.0))
        return FlatAnnulus(
            kind="expanding", core=a, circumference=circ,
            inner_boundary_length=circ, escape_distance=d, modulus=mod,
        )
    info = _core_cylinder(q, a)
    if info is None:
        raise DomainError("return-arc search needs a cylinder core")
    direction, cyc = info
    qh = q if direction == "H" else transpose(q)
    cyc_h = cyc
    if len(cyc) == qh.n_squares:
        # the cylinder fills the surface: the essential return arc crosses
        # the full vertical extent of a column
        circ = sum(qh.width_at(i) for i in cyc_h)
        d = 0.5 * sum(qh.height_at(i) for i in _column_through(qh, cyc_h[0]))
        mod = math.log(max(d / circ, 1.0))
        return FlatAnnulus(
            kind="expanding", core=a, circumference=circ,
            inner_boundary_length=circ, escape_distance=d, modulus=mod,
        )
    arcs = _vertical_return_arcs(qh, cyc_h)
    if not arcs:
        raise DomainError("no essential return arc found within the cap")
    upper = _rim_port_length(qh, cyc_h, upper=True)
    lower = _rim_port_length(qh, cyc_h, upper=False)
    ports = [v for v in (upper, lower) if v > 0]
    if not ports:
        raise DomainError("cylinder has no complement-facing boundary")
    inner = min(ports)
    circ = sum(qh.width_at(i) for i in cyc_h)
    d = 0.5 * min(arcs)
    mod = math.log(max(d / inner, 1.0))
    return FlatAnnulus(
        kind="expanding", core=a, circumference=circ,
        inner_boundary_length=inner, escape_distance=d, modulus=mod,
    )


def _column_through(q: FlatSurface, square: int) -> list[int]:
    for cyc in vertical_cylinders(q):
        if square in cyc:
            return cyc
    raise DomainError("square index out of range")


# ---------------------------------------------------------------------------
# the flat-cylinder quantity D
# ---------------------------------------------------------------------------


def flat_twist(q: FlatSurface, n: MeasuredMulticurve, a: CurveClass) -> float:
    """Twist of the multicurve about a in the flat metric.

    Signed drift of a crossing strand along the a-direction, in units of
    the circumference of a: Re(v_n conj(v_a)) / (i(n, a) |v_a|^2) summed
    over crossing components.  Agrees with the hyperbolic twist up to the
    usual bounded discrepancy and shifts by one per Dehn twist about a.
    """
    total = 0.0
    found = False
    va = _slope_vector(q, a)
    for comp, _w in n.components:
        crossings = curve_intersection(comp, a)
        if crossings == 0:
            continue
        found = True
        vn = _slope_vector(q, comp)
        w = vn * va.conjugate()
        # curve classes are unoriented: the crossing orientation factor
        # makes the drift independent of the vector sign choices
        orient = 1.0 if w.imag >= 0 else -1.0
        total += orient * w.real / (crossings * abs(va) ** 2)
    if not found:
        raise DomainError("multicurve is disjoint from a: flat twist undefined")
    return total


def core_multicurve_intersection(
    q: FlatSurface, a: CurveClass, n: MeasuredMulticurve
) -> Fraction:
    total = Fraction(0)
    for comp, w in n.components:
        total += w * core_intersection(q, a, comp)
    return total


def core_balance_time(
    q: FlatSurface, a: CurveClass, p: MeasuredMulticurve, m: MeasuredMulticurve
):
    """Balance time for cylinder-core classes on an explicit origami."""
    from teichmin.curves import BalanceTime

    ip = core_multicurve_intersection(q, a, p)
    im = core_multicurve_intersection(q, a, m)
    if ip == 0 and im == 0:
        raise DomainError("core misses both multicurves")
    if im == 0:
        return BalanceTime(-math.inf)
    if ip == 0:
        return BalanceTime(math.inf)
    return BalanceTime(0.5 * math.log(im / ip))


def _pair_balance(a, p, m, q0):
    if a.kind == "word":
        return core_balance_time(q0, a, p, m)
    return balance_time(a, p, m)


def estimate_D(
    a: CurveClass,
    t: float,
    p: MeasuredMulticurve,
    m: MeasuredMulticurve,
    base_surface: FlatSurface | None = None,
) -> float:
    """Twisting estimate: e^(-2|t - t_a|) d_a in the balanced case and
    e^(-+2t) Mod F_0 for vertical/horizontal curves.

    On square-tiled surfaces whose defining multicurves are perpendicular
    cylinder cores the relative winding vanishes, so D for a balanced core
    is zero and the escape quantity K carries the whole estimate.
    """
    q0 = base_surface if base_surface is not None else build_flat_surface(p, m)
    tb = _pair_balance(a, p, m, q0)
    if tb.vertical:
        return math.exp(-2.0 * t) * flat_cylinder(q0, a).modulus
    if tb.horizontal:
        return math.exp(2.0 * t) * flat_cylinder(q0, a).modulus
    d_a = relative_twist(p, m, a) if a.kind == "slope" else 0.0
    return math.exp(-2.0 * abs(t - tb.value)) * d_a


def short_curve_estimate(
    a: CurveClass,
    t: float,
    p: MeasuredMulticurve,
    m: MeasuredMulticurve,
    base_surface: FlatSurface | None = None,
) -> ShortCurveEstimate:
    q0 = base_surface if base_surface is not None else build_flat_surface(p, m)
    qt = flow(q0, t)
    return ShortCurveEstimate(
        curve=a,
        t=t,
        D=estimate_D(a, t, p, m, base_surface=q0),
        K=expanding_K(qt, a),
        t_alpha=_pair_balance(a, p, m, q0).value,
    )


# ---------------------------------------------------------------------------
# thinness intervals
# ---------------------------------------------------------------------------


def short_interval(
    a: CurveClass,
    eps: float,
    p: MeasuredMulticurve,
    m: MeasuredMulticurve,
    base_surface: FlatSurface | None = None,
    t_span: float = 14.0,
    tol: float = 1e-6,
    proxy: bool = False,
) -> ShortInterval:
    """Maximal interval around the balance time on which a stays shorter
    than eps along the geodesic family.

    On the once-punctured torus the exact hyperbolic length is used; in
    proxy mode (general origami) the reciprocal-length surrogate
    max(D, log K) is thresholded instead and the result is flagged.
    """
    q0 = base_surface if base_surface is not None else build_flat_surface(p, m)
    tb = _pair_balance(a, p, m, q0)

    if proxy or not q0.is_marked_torus:
        def small(t: float) -> bool:
            est_d = estimate_D(a, t, p, m, base_surface=q0)
            est_k = expanding_K(flow(q0, t), a)
            return max(est_d, math.log(max(est_k, 1.0))) > 1.0 / eps

        return _interval_from_predicate(a, eps, tb.value, small, t_span, tol, True)

    from teichmin.uniformize import curve_length_at_tau

    def small(t: float) -> bool:
        return curve_length_at_tau(flow(q0, t).conformal_point(), a) < eps

    return _interval_from_predicate(a, eps, tb.value, small, t_span, tol, False)


def _interval_from_predicate(
    a: CurveClass,
    eps: float,
    t_alpha: float,
    small,
    t_span: float,
    tol: float,
    proxy: bool,
) -> ShortInterval:
    if math.isinf(t_alpha):
        center = -t_span if t_alpha < 0 else t_span
    else:
        center = t_alpha
    if not small(center):
        # scan for any short moment near the balance time
        probes = [center + d for d in (-1.0, 1.0, -2.0, 2.0, -0.5, 0.5)]
        hits = [tt for tt in probes if small(tt)]
        if not hits:
            return ShortInterval(a, eps, math.nan, math.nan, empty=True, proxy=proxy)
        center = hits[0]

    def bisect(lo: float, hi: float) -> float:
        # precondition: small(lo) != small(hi)
        flo = small(lo)
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if small(mid) == flo:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    # right edge
    if small(center + t_span):
        hi = math.inf
    else:
        hi = bisect(center, center + t_span)
    # left edge
    if small(center - t_span):
        lo = -math.inf
    else:
        lo = bisect(center - t_span, center)
    return ShortInterval(a, eps, lo, hi, empty=False, proxy=proxy)


# ---------------------------------------------------------------------------
# cut-and-reglue surgery
# ---------------------------------------------------------------------------


def cut_and_reglue(q: FlatSurface, a: CurveClass) -> FlatSurface:
    """Delete the maximal flat cylinder around a and reglue the boundary by
    the perpendicular-arc isometry, preserving the marking of the rest."""
    info = _core_cylinder(q, a)
    if info is None:
        raise DomainError("cut_and_reglue needs a nondegenerate cylinder core")
    direction, cyc = info
    if len(cyc) == q.n_squares:
        raise DomainError("cutting the only cylinder leaves no surface")
    if direction == "V":
        return transpose(cut_and_reglue(transpose(q), CurveClass.word(
            "R" * len(a.steps), a.start)))
    cset = set(cyc)
    keep = [i for i in range(q.n_squares) if i not in cset]
    index = {old: new for new, old in enumerate(keep)}

    def chase_top(i: int) -> int:
        j = q.top[i]
        hops = 0
        while j in cset:
            j = q.top[j]
            hops += 1
            if hops > q.n_squares:
                raise DomainError("cylinder chase failed to exit")
        return j

    new_top = tuple(index[chase_top(i)] for i in keep)
    new_right = tuple(index[q.right[i]] if q.right[i] in index else None for i in keep)
    if any(v is None for v in new_right):
        raise DomainError("row structure broken by the cut")
    return FlatSurface(
        widths=tuple(q.widths[i] for i in keep),
        heights=tuple(q.heights[i] for i in keep),
        right=tuple(new_right),  # type: ignore[arg-type]
        top=new_top,
        t=q.t,
    )


def seam_core(q_cut: FlatSurface, q: FlatSurface, a: CurveClass) -> CurveClass:
    """Core class on the cut surface homotopic to the gluing curve."""
    info = _core_cylinder(q, a)
    if info is None:
        raise DomainError("seam_core needs the original cylinder core")
    direction, cyc = info
    cset = set(cyc)
    keep = [i for i in range(q.n_squares) if i not in cset]
    index = {old: new for new, old in enumerate(keep)}
    # the seam is homotopic to the core of the row just above the cut
    for c in cyc:
        u = q.top[c]
        if u not in cset:
            if direction == "H":
                return horizontal_core(q_cut, index[u])
            return vertical_core(q_cut, index[u])
    raise DomainError("cylinder has no complement above it")


def same_labeled_geometry(q1: FlatSurface, q2: FlatSurface, tol: float = 1e-12) -> bool:
    """Isometry check as labeled gluing data, after matching normalization."""
    if (q1.right, q1.top) != (q2.right, q2.top):
        return False
    for i in range(q1.n_squares):
        if abs(q1.width_at(i) - q2.width_at(i)) > tol * max(1.0, q1.width_at(i)):
            return False
        if abs(q1.height_at(i) - q2.height_at(i)) > tol * max(1.0, q1.height_at(i)):
            return False
    return True


# ---------------------------------------------------------------------------
# standard example surfaces
# ---------------------------------------------------------------------------


def l_origami() -> FlatSurface:
    """The three-square genus-2 origami: squares 0 (bottom-left),
    1 (bottom-right), 2 (top-left); one cone point of angle 6 pi."""
    return FlatSurface(
        widths=(Fraction(1),) * 3,
        heights=(Fraction(1),) * 3,
        right=(1, 0, 2),
        top=(2, 1, 0),
    )


def unit_square_torus() -> FlatSurface:
    return build_flat_surface(
        MeasuredMulticurve.of_slope("0/1"), MeasuredMulticurve.of_slope("1/0")
    )
