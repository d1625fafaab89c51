"""Hyperbolic layer: Fenchel-Nielsen structures, holonomy, lengths, twists.

On the once-punctured torus the holonomy is built explicitly: with pants
curve A (the infinity slope) of length l and twist parameter ta = s * l,

    X  = [[e^u, 0], [0, e^-u]],            u = l/2
    Y0 = [[coth u, csch u], [csch u, coth u]]
    Y  = diag(e^(ta/2), e^(-ta/2)) Y0

which satisfies tr[X, Y] = -2 identically (cusped relation).  Zero twist is
the reflection-symmetric gluing, where tr(XY) = tr(X) tr(Y) / 2.  Traces of
slope curves follow the Farey mediant recursion

    tr(u + v) = tr(u) tr(v) - tr(u - v)

which is cross-checked against holonomy matrix products in the tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from teichmin.curves import (
    CurveClass,
    DomainError,
    MeasuredMulticurve,
    SurfaceSig,
    T11,
    curve_intersection,
)

EPS0_DEFAULT = 0.1

_LOG_SWITCH = 1e120  # traces beyond this switch to log-scaled recursion


# ---------------------------------------------------------------------------
# Fenchel-Nielsen points
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FNPoint:
    """Fenchel-Nielsen coordinates for a hyperbolic structure.

    ``twists`` are length-normalized: the stored s equals the hyperbolic
    twist distance divided by the curve length.  ``tau`` optionally caches
    the conformal point in the upper half-plane when the surface is the
    once-punctured torus and the point was produced from flat data.
    """

    surface: SurfaceSig
    pants_curves: tuple[CurveClass, ...]
    lengths: tuple[float, ...]
    twists: tuple[float, ...]
    tau: complex | None = None

    def __post_init__(self):
        if not (len(self.pants_curves) == len(self.lengths) == len(self.twists)):
            raise DomainError("pants curves, lengths, twists must align")
        if any(l <= 0 for l in self.lengths):
            raise DomainError("lengths must be positive")
        if self.surface.is_t11 and len(self.pants_curves) != 1:
            raise DomainError("a (1,1) point has one pants curve")

    @staticmethod
    def t11(length: float, twist: float, tau: complex | None = None) -> "FNPoint":
        return FNPoint(
            T11, (CurveClass.slope("1/0"),), (float(length),), (float(twist),), tau
        )

    @property
    def l(self) -> float:
        return self.lengths[0]

    @property
    def s(self) -> float:
        return self.twists[0]

    def to_json(self) -> dict:
        return {
            "curves": [str(c) for c in self.pants_curves],
            "lengths": [f"{v:.17g}" for v in self.lengths],
            "twists": [f"{v:.17g}" for v in self.twists],
        }

    @staticmethod
    def from_json(surface: SurfaceSig, data: dict) -> "FNPoint":
        from teichmin.curves import parse_curve

        return FNPoint(
            surface,
            tuple(parse_curve(c) for c in data["curves"]),
            tuple(float(v) for v in data["lengths"]),
            tuple(float(v) for v in data["twists"]),
        )


# ---------------------------------------------------------------------------
# holonomy
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Holonomy:
    """Discrete faithful representation data for a (1,1) structure."""

    X: np.ndarray
    Y: np.ndarray

    def __post_init__(self):
        drift = abs(_commutator_trace(self.X, self.Y) + 2.0)
        if drift > 1e-8:
            raise DomainError(f"holonomy drifted off the cusped relation: {drift:.3e}")


def _commutator_trace(X: np.ndarray, Y: np.ndarray) -> float:
    Xi = np.array([[X[1, 1], -X[0, 1]], [-X[1, 0], X[0, 0]]])
    Yi = np.array([[Y[1, 1], -Y[0, 1]], [-Y[1, 0], Y[0, 0]]])
    M = X @ Y @ Xi @ Yi
    return float(M[0, 0] + M[1, 1])


def holonomy(fn: FNPoint) -> Holonomy:
    """Explicit generator matrices for a (1,1) Fenchel-Nielsen point."""
    if not fn.surface.is_t11:
        raise DomainError("explicit holonomy is implemented on (1,1)")
    l, s = fn.l, fn.s
    u = 0.5 * l
    ta = s * l
    coth = 1.0 / math.tanh(u)
    csch = 1.0 / math.sinh(u)
    X = np.array([[math.exp(u), 0.0], [0.0, math.exp(-u)]])
    Y0 = np.array([[coth, csch], [csch, coth]])
    D = np.array([[math.exp(0.5 * ta), 0.0], [0.0, math.exp(-0.5 * ta)]])
    return Holonomy(X=X, Y=D @ Y0)


def base_triple(fn: FNPoint) -> tuple[float, float, float]:
    """Traces (x, y, z) of the slope-infinity, slope-0, slope-1 curves."""
    l, s = fn.l, fn.s
    u = 0.5 * l
    ta = s * l
    coth = 1.0 / math.tanh(u)
    x = 2.0 * math.cosh(u)
    y = 2.0 * coth * math.cosh(0.5 * ta)
    z = 2.0 * coth * math.cosh(u + 0.5 * ta)
    return x, y, z


def triple_to_fn(x: float, y: float, z: float) -> FNPoint:
    """Invert (x, y, z) traces to a (1,1) Fenchel-Nielsen point."""
    if x <= 2.0:
        raise DomainError("pants curve trace must exceed 2")
    l = 2.0 * math.acosh(0.5 * x)
    sh = (2.0 * z - x * y) / (2.0 * x)
    ta = 2.0 * math.asinh(sh)
    # consistency with the cusped relation: cosh(ta/2) must match y
    coth = 1.0 / math.tanh(0.5 * l)
    resid = abs(2.0 * coth * math.cosh(0.5 * ta) - y)
    if resid > 3e-5 * max(1.0, abs(y)):
        raise DomainError(f"trace triple violates the cusped relation: {resid:.3e}")
    return FNPoint.t11(l, ta / l)


# ---------------------------------------------------------------------------
# slope traces via the mediant recursion
# ---------------------------------------------------------------------------


def trace_of_slope(c: CurveClass, x: float, y: float, z: float) -> float:
    """Trace of the slope curve from the basis traces, by Farey descent."""
    p, q = c.vector
    if q == 0:
        return x
    if p == 0:
        return y
    if p < 0:
        return trace_of_slope(CurveClass.slope(-p, q), x, y, x * y - z)
    if max(p, q) * math.log(max(x, y, z)) > 600:
        sign, logt = _log_trace_positive(p, q, x, y, z)
        return sign * math.inf  # magnitude reported via curve_length path
    return _trace_positive(p, q, x, y, z)


def _trace_positive(p: int, q: int, x: float, y: float, z: float) -> float:
    lp, lq, tl = 0, 1, y
    rp, rq, tr = 1, 0, x
    mp, mq, tm = 1, 1, z
    while (mp, mq) != (p, q):
        cross = p * mq - mp * q
        if cross < 0:  # target lies left of the mediant
            rp, rq, tr, mp, mq, tm = mp, mq, tm, lp + mp, lq + mq, tl * tm - tr
        else:
            lp, lq, tl, mp, mq, tm = mp, mq, tm, mp + rp, mq + rq, tm * tr - tl
    return tm


def _log_trace_positive(
    p: int, q: int, x: float, y: float, z: float
) -> tuple[float, float]:
    """(sign, log|trace|) by the same descent, stable for huge traces."""

    def pack(v: float) -> tuple[float, float]:
        return (math.copysign(1.0, v), math.log(abs(v)) if v != 0 else -math.inf)

    def combine(a, b, c):
        # a*b - c in (sign, log) form
        sp, lp_ = a[0] * b[0], a[1] + b[1]
        sc, lc = c
        if lc == -math.inf:
            return (sp, lp_)
        if lp_ >= lc:
            diff = sc * sp * math.exp(min(lc - lp_, 0.0))
            return (sp, lp_ + math.log1p(-diff)) if diff < 1 else pack(0.0)
        diff = sp * sc * math.exp(lp_ - lc)
        return (-sc, lc + math.log1p(-diff)) if diff < 1 else pack(0.0)

    lp, lq, tl = 0, 1, pack(y)
    rp, rq, tr = 1, 0, pack(x)
    mp, mq, tm = 1, 1, pack(z)
    while (mp, mq) != (p, q):
        cross = p * mq - mp * q
        if cross < 0:
            rp, rq, tr, mp, mq, tm = mp, mq, tm, lp + mp, lq + mq, combine(tl, tm, tr)
        else:
            lp, lq, tl, mp, mq, tm = mp, mq, tm, mp + rp, mq + rq, combine(tm, tr, tl)
    return tm


def log_trace_of_slope(c: CurveClass, x: float, y: float, z: float) -> float:
    p, q = c.vector
    if q == 0:
        return math.log(abs(x))
    if p == 0:
        return math.log(abs(y))
    if p < 0:
        p, z = -p, x * y - z
    return _log_trace_positive(p, q, x, y, z)[1]


# ---------------------------------------------------------------------------
# words and matrices (for oracles and twist computations)
# ---------------------------------------------------------------------------


def word_for_slope(c: CurveClass) -> str:
    """A curve word in the generators A (slope inf) and B (slope 0).

    Built by the same Farey descent as the trace recursion, with the word of
    a mediant being W(right) W(left); lowercase letters denote inverses.
    """
    p, q = c.vector
    if q == 0:
        return "A"
    if p == 0:
        return "B"
    mirror = p < 0
    p = abs(p)
    lp, lq, lw = 0, 1, "B"
    rp, rq, rw = 1, 0, "A"
    mp, mq, mw = 1, 1, "AB"
    while (mp, mq) != (p, q):
        cross = p * mq - mp * q
        if cross < 0:
            rp, rq, rw = mp, mq, mw
            mp, mq, mw = lp + mp, lq + mq, mw + lw
        else:
            lp, lq, lw = mp, mq, mw
            mp, mq, mw = mp + rp, mq + rq, rw + mw
    word = mw
    if mirror:
        word = word.translate(str.maketrans("Aa", "aA"))
    return word


def matrix_of_word(word: str, hol: Holonomy) -> np.ndarray:
    mats = {
        "A": hol.X,
        "B": hol.Y,
        "a": np.array([[hol.X[1, 1], -hol.X[0, 1]], [-hol.X[1, 0], hol.X[0, 0]]]),
        "b": np.array([[hol.Y[1, 1], -hol.Y[0, 1]], [-hol.Y[1, 0], hol.Y[0, 0]]]),
    }
    M = np.eye(2)
    for ch in word:
        M = M @ mats[ch]
    return M


# ---------------------------------------------------------------------------
# lengths
# ---------------------------------------------------------------------------


def curve_length(fn: FNPoint, c: CurveClass) -> float:
    """Hyperbolic geodesic length 2 arccosh(|tr|/2) of an essential curve.

    Slopes crossing the pants curve once have the exact closed form
    tr = 2 coth(u) cosh(k u + v) with u = l/2 and v half the twist
    distance; their lengths are evaluated through the cancellation-free
    trace gap and stay accurate arbitrarily deep in the thin part.
    """
    for pc, l in zip(fn.pants_curves, fn.lengths):
        if pc == c:
            return l  # stored coordinate, exact
    if not fn.surface.is_t11:
        raise DomainError("general-surface lengths exist for pants curves only")
    if c.kind == "slope" and c.q == 1:
        return _once_crossing_length(fn.l, fn.s, c.p)
    x, y, z = base_triple(fn)
    t = trace_of_slope(c, x, y, z)
    if math.isinf(t):
        return 2.0 * log_trace_of_slope(c, x, y, z)
    t = abs(t)
    if t <= 2.0:
        raise DomainError(f"curve {c} is not essential here (trace {t:.6g})")
    if t > 1e15:
        return 2.0 * (math.log(t))
    if t < 2.001:
        # keep full relative precision in the trace gap
        g = t - 2.0
        return 2.0 * math.asinh(0.5 * math.sqrt(g * (g + 4.0)))
    return 2.0 * math.acosh(0.5 * t)


def _once_crossing_length(l: float, s: float, k: int) -> float:
    """Stable length of the (k, 1)-slope at Fenchel-Nielsen (l, s)."""
    u = 0.5 * l
    w = k * u + 0.5 * s * l
    if abs(w) > 200.0 or u > 200.0:
        # log-domain: arccosh of 2 coth(u) cosh(w) over 2
        log_coth = math.log(1.0 / math.tanh(u)) if u < 200.0 else 0.0
        log_cosh_w = abs(w) - math.log(2.0) + math.log1p(math.exp(-2.0 * abs(w)))
        return 2.0 * (log_coth + log_cosh_w + math.log(2.0))
    tanh_u = math.tanh(u)
    cusp_term = 2.0 / (math.exp(2.0 * u) + 1.0)
    gap = 2.0 * (2.0 * math.sinh(0.5 * w) ** 2 + cusp_term) / tanh_u
    return 2.0 * math.asinh(0.5 * math.sqrt(gap * (gap + 4.0)))


def multicurve_length(fn: FNPoint, n: MeasuredMulticurve) -> float:
    """Weighted total length; linear in the weights."""
    return float(sum(w * curve_length(fn, c) for c, w in n.components))


# ---------------------------------------------------------------------------
# the hyperbolic twist tw_sigma(nu, alpha)
# ---------------------------------------------------------------------------


def _fixed_points(M: np.ndarray) -> tuple[float, float]:
    """(repelling, attracting) boundary fixed points of a hyperbolic matrix.

    Scale-invariant: accepts any positive multiple of an SL(2,R) matrix.
    """
    a, b, c, d = float(M[0, 0]), float(M[0, 1]), float(M[1, 0]), float(M[1, 1])
    det = a * d - b * c
    tr = a + d
    if not (det > 0.0) or tr * tr <= 4.0 * det * (1.0 + 1e-13):
        raise DomainError("matrix is not hyperbolic")
    scale = max(abs(a), abs(b), abs(c), abs(d))
    if abs(c) < 1e-14 * scale:
        finite = b / (d - a)
        if abs(a) > abs(d):
            return finite, math.inf
        return math.inf, finite
    disc = math.sqrt(max(tr * tr - 4.0 * det, 0.0))
    lam_plus = (tr + math.copysign(disc, tr)) / 2.0  # dominant eigenvalue
    lam_minus = det / lam_plus
    att = (lam_plus - d) / c
    rep = (lam_minus - d) / c
    return rep, att


def twist(fn: FNPoint, n: MeasuredMulticurve, a: CurveClass, k_max: int = 3) -> float:
    """Signed twist of the multicurve around a, per unit length of a.

    Works with lifts: the axis of a is normalized to the imaginary axis; for
    each lift of a leaf of n crossing it, the signed distance between the
    perpendicular projections of its endpoints is recorded, and the signed
    minimum (over an enumerated, stabilized set of lifts) divided by l(a)
    is returned.
    """
    ia = curve_intersection(n.components[0][0], a)
    for c, _ in n.components[1:]:
        ia = max(ia, curve_intersection(c, a))
    if ia == 0:
        raise DomainError("multicurve is disjoint from a: twist undefined")
    hol = holonomy(fn)
    Wa = word_for_slope(a)
    Ma = matrix_of_word(Wa, hol)
    rep, att = _fixed_points(Ma)
    # Mobius map G sending (rep, att) -> (0, inf)
    if math.isinf(att):
        G = np.array([[1.0, -rep], [0.0, 1.0]])
    elif math.isinf(rep):
        G = np.array([[0.0, 1.0], [1.0, -att]])
    else:
        G = np.array([[1.0, -rep], [1.0, -att]])
    Gi = np.linalg.inv(G)
    la = curve_length(fn, a)

    best: float | None = None
    for comp, _w in n.components:
        if curve_intersection(comp, a) == 0:
            continue
        Wn = word_for_slope(comp)
        Mn = matrix_of_word(Wn, hol)
        depth = max(1, k_max)
        prev: float | None = None
        while True:
            vals = _crossing_values(G, Gi, Wa, Wn, Mn, hol, depth)
            cand = min(vals) if vals else None
            if cand is not None and prev is not None and abs(cand - prev) < 1e-9:
                prev = cand
                break
            prev = cand if cand is not None else prev
            depth *= 2
            if depth > 16 * max(1, k_max):
                break
        if prev is not None and (best is None or prev < best):
            best = prev
    if best is None:
        raise DomainError("no crossing lift found; enumeration exhausted")
    return best / la


def _crossing_values(
    G: np.ndarray,
    Gi: np.ndarray,
    Wa: str,
    Wn: str,
    Mn: np.ndarray,
    hol: Holonomy,
    depth: int,
) -> list[float]:
    """Signed projection distances over an enumerated family of leaf lifts.

    Conjugators run over prefixes of the leaf word (unrolled ``depth`` times,
    capped) and prefixes of the annulus word times those; translating a lift
    along the axis of a changes neither the crossing property nor the signed
    projection distance, so axis powers are not enumerated.
    """
    def _normalized_prefixes(word: str) -> list[np.ndarray]:
        out = [np.eye(2)]
        M = np.eye(2)
        for ch in word:
            M = M @ matrix_of_word(ch, hol)
            M = M / np.max(np.abs(M))  # conjugation is scale-invariant
            out.append(M.copy())
        return out

    reps = min(depth, 4)
    prefixes = _normalized_prefixes(Wn * reps)
    a_prefixes = _normalized_prefixes(Wa)
    Mn = Mn / np.max(np.abs(Mn))
    det_n = float(Mn[0, 0] * Mn[1, 1] - Mn[0, 1] * Mn[1, 0])
    disc_ref = float(np.trace(Mn)) ** 2 / det_n - 4.0
    vals: list[float] = []
    for V in a_prefixes:
        for U in prefixes:
            H = V @ U
            adj = np.array([[H[1, 1], -H[0, 1]], [-H[1, 0], H[0, 0]]])
            C = G @ H @ Mn @ adj @ Gi
            det_c = float(C[0, 0] * C[1, 1] - C[0, 1] * C[1, 0])
            if det_c <= 0:
                continue
            # tr^2/det is a conjugation invariant: ill-conditioned products
            # whose fixed-point data is numerical junk betray themselves
            # here; at large discriminants the invariant itself carries
            # rounding, so the gate widens to an order-of-magnitude check
            disc_c = float(np.trace(C)) ** 2 / det_c - 4.0
            if abs(disc_ref) < 1e3:
                if abs(disc_c - disc_ref) > 1e-6 * (4.0 + abs(disc_ref)):
                    continue
            elif not (0.5 < disc_c / disc_ref < 2.0):
                continue
            try:
                r, t = _fixed_points(C)
            except DomainError:
                continue
            if math.isinf(r) or math.isinf(t) or r == 0.0 or t == 0.0:
                continue
            if r * t < 0:
                vals.append(math.log(abs(t)) - math.log(abs(r)))
    return vals


# ---------------------------------------------------------------------------
# thick-thin decomposition
# ---------------------------------------------------------------------------


def _same_class(u: tuple[int, int], v: tuple[int, int]) -> bool:
    return u == v or u == (-v[0], -v[1])


def systole_t11(fn: FNPoint) -> tuple[CurveClass, float]:
    """Shortest essential curve, by trace-reducing Farey triangle flips."""
    x, y, z = base_triple(fn)
    tri = [((1, 0), x), ((0, 1), y), ((1, 1), z)]
    for _ in range(400):
        tri.sort(key=lambda vc: abs(vc[1]))
        (v1, t1), (v2, t2), (v3, t3) = tri
        # flip the largest vertex across the edge (v1, v2)
        plus = (v1[0] + v2[0], v1[1] + v2[1])
        minus = (v1[0] - v2[0], v1[1] - v2[1])
        new_v = minus if _same_class(plus, v3) else plus
        new_t = t1 * t2 - t3
        if abs(new_t) < abs(t3) - 1e-12:
            tri = [(v1, t1), (v2, t2), (new_v, new_t)]
        else:
            break
    tri.sort(key=lambda vc: abs(vc[1]))
    (p, q), t = tri[0]
    c = CurveClass.slope(p, q)
    return c, 2.0 * math.acosh(max(abs(t) / 2.0, 1.0 + 1e-16))


def thick_thin(fn: FNPoint, eps: float = EPS0_DEFAULT) -> set[CurveClass]:
    """All essential classes shorter than eps (at most 3g-3+p of them)."""
    if eps > 0.3:
        raise DomainError("eps must stay below the Margulis-safe bound 0.3")
    if fn.surface.is_t11:
        c, l = systole_t11(fn)
        return {c} if l < eps else set()
    return {
        c for c, l in zip(fn.pants_curves, fn.lengths) if l < eps
    }
