"""Topological layer: surfaces, weighted multicurves, twisting, balance times.

Curves on the once-punctured torus are rational slopes p/q (infinity is 1/0);
curves on square-tiled surfaces are cyclic edge words in the square-gluing
graph.  All arithmetic on weights and intersection numbers is exact rational
arithmetic via ``fractions.Fraction``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence


class DomainError(ValueError):
    """An operation was called outside its mathematical domain."""


# ---------------------------------------------------------------------------
# surfaces
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SurfaceSig:
    """Topological type (genus, punctures) of a finite-type surface."""

    genus: int
    punctures: int

    def __post_init__(self):
        if self.genus < 0 or self.punctures < 0:
            raise DomainError("genus and punctures must be nonnegative")
        if self.complexity < 1:
            raise DomainError(
                "surface carries no essential curve: 3g-3+p = %d" % self.complexity
            )

    @property
    def complexity(self) -> int:
        return 3 * self.genus - 3 + self.punctures

    @property
    def is_t11(self) -> bool:
        """True for the once-punctured torus, where exact paths are available."""
        return (self.genus, self.punctures) == (1, 1)


T11 = SurfaceSig(1, 1)


# ---------------------------------------------------------------------------
# curve classes
# ---------------------------------------------------------------------------

_STEP_INVERSE = {"R": "L", "L": "R", "U": "D", "D": "U"}


def _canonical_slope(p: int, q: int) -> tuple[int, int]:
    if q == 0:
        if p == 0:
            raise DomainError("0/0 is not a slope")
        return (1, 0)
    if q < 0:
        p, q = -p, -q
    g = math.gcd(abs(p), q)
    return (p // g, q // g)


@dataclass(frozen=True)
class CurveClass:
    """An essential simple closed curve.

    ``kind == "slope"``: reduced fraction p/q on the once-punctured torus,
    with q >= 0 and infinity encoded as 1/0.

    ``kind == "word"``: cyclic edge word over the steps R/L/U/D through the
    squares of an origami, together with a start square.  The stored form is
    the lexicographically least cyclic rotation of the freely reduced word.
    """

    kind: str
    p: int = 0
    q: int = 0
    steps: str = ""
    start: int = 0

    @staticmethod
    def slope(p: int | str, q: int | None = None) -> "CurveClass":
        if isinstance(p, str):
            text = p.strip()
            if text in ("inf", "oo", "1/0"):
                return CurveClass(kind="slope", p=1, q=0)
            if "/" in text:
                a, b = text.split("/")
                p, q = int(a), int(b)
            else:
                p, q = int(text), 1
        elif q is None:
            q = 1
        pp, qq = _canonical_slope(int(p), int(q))
        return CurveClass(kind="slope", p=pp, q=qq)

    @staticmethod
    def word(steps: str, start: int = 0) -> "CurveClass":
        reduced = _cyclic_reduce(steps.upper())
        if not reduced:
            raise DomainError("edge word reduces to the trivial loop")
        rotated, start = _least_rotation(reduced, start)
        return CurveClass(kind="word", steps=rotated, start=start)

    @property
    def vector(self) -> tuple[int, int]:
        """Primitive homology vector (p, q) of a slope class."""
        if self.kind != "slope":
            raise DomainError("vector is defined for slope classes only")
        return (self.p, self.q)

    def __str__(self) -> str:
        if self.kind == "slope":
            return "inf" if self.q == 0 else f"{self.p}/{self.q}"
        return f"{self.steps}@{self.start}"


def _cyclic_reduce(word: str) -> str:
    for ch in word:
        if ch not in "RLUD":
            raise DomainError(f"bad edge-word step {ch!r}")
    letters = list(word)
    changed = True
    while changed and letters:
        changed = False
        out: list[str] = []
        for ch in letters:
            if out and _STEP_INVERSE[out[-1]] == ch:
                out.pop()
                changed = True
            else:
                out.append(ch)
        while len(out) >= 2 and _STEP_INVERSE[out[0]] == out[-1]:
            out = out[1:-1]
            changed = True
        letters = out
    return "".join(letters)


def _least_rotation(word: str, start: int) -> tuple[str, int]:
    # start square is rotation-dependent only through the caller's gluing
    # data, so the canonical form keeps the caller-supplied start.
    best = min(word[i:] + word[:i] for i in range(len(word)))
    return best, start


def parse_curve(text: str) -> CurveClass:
    """Parse a curve literal: a slope ``"p/q"``/``"inf"`` or an edge word."""
    text = text.strip()
    if text in ("inf", "oo", "1/0") or all(c in "0123456789/-" for c in text):
        return CurveClass.slope(text)
    if "@" in text:
        word, start = text.split("@")
        return CurveClass.word(word, int(start))
    return CurveClass.word(text, 0)


# ---------------------------------------------------------------------------
# measured multicurves
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MeasuredMulticurve:
    """Weighted simple multicurve: pairwise disjoint, non-isotopic components."""

    surface: SurfaceSig
    components: tuple[tuple[CurveClass, Fraction], ...]

    def __post_init__(self):
        if not self.components:
            raise DomainError("multicurve needs at least one component")
        for c, w in self.components:
            if w <= 0:
                raise DomainError("weights must be positive")
        classes = [c for c, _ in self.components]
        if len(set(classes)) != len(classes):
            raise DomainError("multicurve components must be non-isotopic")
        if self.surface.is_t11 and len(classes) > 1:
            # on the torus any two disjoint essential curves are isotopic
            raise DomainError("a (1,1) multicurve has a single component")

    @staticmethod
    def single(
        surface: SurfaceSig, curve: CurveClass, weight: Fraction | int | str = 1
    ) -> "MeasuredMulticurve":
        return MeasuredMulticurve(surface, ((curve, Fraction(weight)),))

    @staticmethod
    def of_slope(slope: str | int, weight: Fraction | int | str = 1) -> "MeasuredMulticurve":
        return MeasuredMulticurve.single(T11, CurveClass.slope(slope), Fraction(weight))

    def scaled(self, factor: Fraction) -> "MeasuredMulticurve":
        return MeasuredMulticurve(
            self.surface, tuple((c, w * factor) for c, w in self.components)
        )

    @staticmethod
    def from_json(surface: SurfaceSig, data: Iterable[dict]) -> "MeasuredMulticurve":
        comps = tuple(
            (parse_curve(item["curve"]), Fraction(item["weight"])) for item in data
        )
        return MeasuredMulticurve(surface, comps)

    def to_json(self) -> list[dict]:
        return [
            {"curve": str(c), "weight": f"{w.numerator}/{w.denominator}"}
            for c, w in self.components
        ]


# ---------------------------------------------------------------------------
# intersection numbers
# ---------------------------------------------------------------------------


def _slope_intersection(a: CurveClass, b: CurveClass) -> int:
    (p, q), (r, s) = a.vector, b.vector
    return abs(p * s - q * r)


def curve_intersection(a: CurveClass, b: CurveClass) -> int:
    """Geometric intersection number of two unweighted classes."""
    if a.kind == "slope" and b.kind == "slope":
        return _slope_intersection(a, b)
    raise DomainError(
        "intersection of origami word classes requires gluing data; "
        "use flat.core_intersection for cylinder cores"
    )


def intersection_number(a: MeasuredMulticurve, b: MeasuredMulticurve) -> Fraction:
    """i(a, b): bilinear in weights, symmetric, exact."""
    if a.surface != b.surface:
        raise DomainError("multicurves live on different surfaces")
    total = Fraction(0)
    for ca, wa in a.components:
        for cb, wb in b.components:
            total += wa * wb * curve_intersection(ca, cb)
    return total


# ---------------------------------------------------------------------------
# filling pairs and the complementary-region oracle
# ---------------------------------------------------------------------------


def _torus_crossings(
    a: CurveClass, b: CurveClass
) -> list[tuple[Fraction, Fraction]]:
    """Exact crossing parameters of the straight-line torus representatives.

    Curve a is t (q, p); curve b is offset to a generic base point and is
    (e1, e2) + w (s, r); both mod Z^2.  Returns the (t, w) parameter pairs of
    all transverse crossings, found by exact linear solves over a bounding
    box of integer translates (no appeal to the determinant formula).
    """
    (p, q), (r, s) = a.vector, b.vector
    e1, e2 = Fraction(1, 7), Fraction(1, 11)
    det = q * (-r) - p * (-s)
    if det == 0:
        return []
    crossings = []
    for m1 in range(-abs(q) - abs(s) - 1, abs(q) + abs(s) + 2):
        for m2 in range(-abs(p) - abs(r) - 1, abs(p) + abs(r) + 2):
            # t*q - w*s = e1 + m1 ; t*p - w*r = e2 + m2
            rhs1, rhs2 = e1 + m1, e2 + m2
            t = (rhs1 * (-r) - rhs2 * (-s)) / det
            w = (q * rhs2 - p * rhs1) / det
            if 0 <= t < 1 and 0 <= w < 1:
                crossings.append((t, w))
    return crossings


def crossing_count_oracle(a: CurveClass, b: CurveClass) -> int:
    """Straight-line crossing count of two slopes on the unit flat torus."""
    if a.vector == b.vector:
        return 0
    return len(_torus_crossings(a, b))


def torus_complement_faces(a: CurveClass, b: CurveClass) -> list[int]:
    """Boundary lengths of the complementary faces of two torus slopes.

    The two straight-line representatives are intersected exactly; faces of
    the resulting 4-valent graph on the torus are traced through the
    rotation system.  Used as the minimal-position complementary-region
    oracle.
    """
    (p, q), (r, s) = a.vector, b.vector
    crossings = _torus_crossings(a, b)
    n = len(crossings)
    if n == 0:
        raise DomainError("parallel slopes have no transverse crossings")
    by_t = sorted(range(n), key=lambda i: crossings[i][0])
    by_w = sorted(range(n), key=lambda i: crossings[i][1])
    pos_t = {c: k for k, c in enumerate(by_t)}
    pos_w = {c: k for k, c in enumerate(by_w)}
    # darts: (crossing, curve, direction); curve 0 = a, 1 = b
    # next crossing along a from crossing c (forward): by_t[pos_t[c]+1]
    def step(c: int, curve: int, fwd: bool) -> int:
        order, pos = (by_t, pos_t) if curve == 0 else (by_w, pos_w)
        k = pos[c] + (1 if fwd else -1)
        return order[k % n]

    # rotation at each crossing: outgoing darts sorted by angle of direction
    ang_a = math.atan2(p, q)
    ang_b = math.atan2(r, s)

    def angle(curve: int, fwd: bool) -> float:
        base = ang_a if curve == 0 else ang_b
        return base if fwd else math.atan2(
            -math.sin(base), -math.cos(base)
        )

    outs = [(0, True), (0, False), (1, True), (1, False)]
    outs.sort(key=lambda cf: angle(*cf) % (2 * math.pi))
    nxt_out = {outs[i]: outs[(i + 1) % 4] for i in range(4)}

    # face tracing: a dart is (crossing, curve, fwd) meaning we travel from
    # `crossing` forward/backward along `curve` to the next crossing; at the
    # head, turn to the next outgoing dart clockwise from our reversal.
    faces: list[int] = []
    seen: set[tuple[int, int, bool]] = set()
    for c0 in range(n):
        for curve0, fwd0 in outs:
            dart = (c0, curve0, fwd0)
            if dart in seen:
                continue
            length = 0
            d = dart
            while True:
                seen.add(d)
                length += 1
                c, curve, fwd = d
                head = step(c, curve, fwd)
                rev = (curve, not fwd)
                turn = nxt_out[rev]
                d = (head, turn[0], turn[1])
                if d == dart:
                    break
            faces.append(length)
    return faces


def fills(p: MeasuredMulticurve, m: MeasuredMulticurve) -> bool:
    """Whether the pair jointly meets every essential curve of the surface."""
    if p.surface != m.surface:
        raise DomainError("multicurves live on different surfaces")
    if p.surface.is_t11:
        a = p.components[0][0]
        b = m.components[0][0]
        if a.vector == b.vector:
            return False
        # every slope gamma misses at most one of two distinct slopes; verify
        # the complement decomposes into disks (faces of the crossing graph)
        n = _slope_intersection(a, b)
        if n <= 64:
            faces = torus_complement_faces(a, b)
            v, e = n, 2 * n
            if v - e + len(faces) != 0:
                return False
        return True
    # word multicurves: handled against explicit gluing data in teichmin.flat
    raise DomainError(
        "fills() for origami multicurves requires gluing data; "
        "use flat.cores_fill"
    )


# ---------------------------------------------------------------------------
# Dehn twists
# ---------------------------------------------------------------------------


def _bezout_to_infinity(c: CurveClass) -> tuple[int, int, int, int]:
    """SL(2,Z) matrix (a, b; c0, d) sending the slope vector of c to (1, 0)."""
    p, q = c.vector
    g, x, y = _xgcd(p, q)
    assert g == 1
    # rows: (x, y) and (-q, p): det = x p + y q = 1
    return (x, y, -q, p)


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r != 0:
        quo = old_r // r
        old_r, r = r, old_r - quo * r
        old_s, s = s, old_s - quo * s
        old_t, t = t, old_t - quo * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


def transform_slope(mat: tuple[int, int, int, int], c: CurveClass) -> CurveClass:
    a, b, cc, d = mat
    p, q = c.vector
    return CurveClass.slope(a * p + b * q, cc * p + d * q)


def invert_unimodular(mat: tuple[int, int, int, int]) -> tuple[int, int, int, int]:
    a, b, c, d = mat
    det = a * d - b * c
    if det == 1:
        return (d, -b, -c, a)
    if det == -1:
        return (-d, b, c, -a)
    raise DomainError("matrix is not unimodular")


def dehn_twist(c: CurveClass, about: CurveClass, n: int) -> CurveClass:
    """n-fold Dehn twist of c about a slope curve.

    About infinity the action on slopes is p/q -> (p + n q)/q; a general
    twisting curve is conjugated to infinity first.
    """
    if n == 0:
        return c
    if c.kind != "slope" or about.kind != "slope":
        raise DomainError("Dehn twists are implemented for slope classes")
    mat = _bezout_to_infinity(about)
    p, q = transform_slope(mat, c).vector
    twisted = CurveClass.slope(p + n * q, q)
    return transform_slope(invert_unimodular(mat), twisted)


# ---------------------------------------------------------------------------
# relative twist (annular winding difference)
# ---------------------------------------------------------------------------


def relative_twist(
    n1: MeasuredMulticurve, n2: MeasuredMulticurve, a: CurveClass
) -> float:
    """d_a(n1, n2): how differently the two multicurves wind around a.

    Computed combinatorially: both classes are moved to the basis in which a
    is the infinity slope; lifted leaves in the annular cover of a then cross
    with winding p/q, and the relative twist is the difference of windings.
    The value agrees with the metric-definition quantity up to the universal
    additive constant, so no consumer asserts it tighter than +-2.
    """
    if a.kind != "slope":
        raise DomainError("relative_twist needs a slope curve; see flat module")
    mat = _bezout_to_infinity(a)

    def winding(n: MeasuredMulticurve) -> Fraction:
        vals = []
        for comp, _w in n.components:
            p, q = transform_slope(mat, comp).vector
            if q == 0:
                continue
            vals.append(Fraction(p, q))
        if not vals:
            raise DomainError("multicurve is disjoint from a: d_a undefined")
        return min(vals)

    return float(abs(winding(n1) - winding(n2)))


# ---------------------------------------------------------------------------
# balance time
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BalanceTime:
    """Time at which a curve crosses the two scaled multicurves equally.

    ``value`` is -inf for vertical curves (disjoint from the second
    multicurve of the pair) and +inf for horizontal ones (disjoint from the
    first); finite otherwise.
    """

    value: float

    @property
    def finite(self) -> bool:
        return math.isfinite(self.value)

    @property
    def vertical(self) -> bool:
        return self.value == -math.inf

    @property
    def horizontal(self) -> bool:
        return self.value == math.inf


def balance_time(
    a: CurveClass, p: MeasuredMulticurve, m: MeasuredMulticurve
) -> BalanceTime:
    """Solve e^t i(a,p) = e^-t i(a,m); conventions cover the degenerate cases."""
    ma = MeasuredMulticurve.single(p.surface, a)
    ip = intersection_number(ma, p)
    im = intersection_number(ma, m)
    if ip == 0 and im == 0:
        raise DomainError("curve misses both multicurves; pair does not fill")
    if im == 0:
        return BalanceTime(-math.inf)
    if ip == 0:
        return BalanceTime(math.inf)
    return BalanceTime(0.5 * math.log(im / ip))
