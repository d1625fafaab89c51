"""Conformal <-> hyperbolic bridge for the once-punctured torus.

A marked flat torus C/(Z + tau Z) punctured at the origin carries a unique
complete hyperbolic metric.  Its holonomy is the monodromy of the linear
equation

    y'' = Q(z) y,      Q(z) = -wp(z; tau)/4 + B(tau),

where wp is the Weierstrass function of the lattice and the accessory
parameter B(tau) is the unique value making the monodromy real (Fuchsian).
The cusp forces the -1/4 coefficient; evenness of Q plus holomorphy pins
the remainder to a constant.

B(tau) is found by Newton iteration on (Im x, Im y) where x, y are the
monodromy traces around the two marked cycles; these depend holomorphically
on B.  The solver is anchored and validated at two exactly-known points:

    square torus    tau = i          ->  traces (2 sqrt 2, 2 sqrt 2, 4)
    hexagonal torus tau = e^(i pi/3) ->  traces (3, 3, 6)

both with B = 0 by symmetry.  General tau are reduced to the fundamental
domain of SL(2,Z) first, with the marking change transported through the
trace coordinates.
"""

from __future__ import annotations

import cmath
import math
from typing import Iterable

import numpy as np

from teichmin.curves import CurveClass, DomainError
from teichmin.hyperbolic import FNPoint, base_triple, trace_of_slope, triple_to_fn

_TWO_PI = 2.0 * math.pi

# accessory solutions keyed by reduced tau (rounded); values are B
_ACCESSORY_CACHE: dict[tuple[float, float], complex] = {}
_TRIPLE_CACHE: dict[tuple[float, float], tuple[float, float, float]] = {}
_CUSP_MU_CACHE: dict[tuple[float, float], float] = {}

_BULK_IM = 8.0  # beyond this Im tau the off-feature potential is constant


# ---------------------------------------------------------------------------
# Weierstrass wp
# ---------------------------------------------------------------------------


def eisenstein_e2(tau: complex) -> complex:
    """E2(tau) = 1 - 24 sum sigma_1(n) q^n with q = exp(2 pi i tau)."""
    q = cmath.exp(2j * math.pi * tau)
    total = 0.0 + 0.0j
    qn = q
    n = 1
    while abs(qn) > 1e-19 and n < 400:
        total += n * qn / (1.0 - qn)
        qn *= q
        n += 1
    return 1.0 - 24.0 * total


def _reduce_to_cell(z: complex, tau: complex) -> complex:
    """Translate z by the lattice into |Im z| <= Im(tau)/2, |Re| <= 1/2ish."""
    n = round(z.imag / tau.imag)
    z = z - n * tau
    z = z - round(z.real)
    return z


def wp(z: complex | np.ndarray, tau: complex) -> complex | np.ndarray:
    """Weierstrass wp(z; tau) via the cosecant q-series (vectorized in z).

    wp = pi^2 (1/sin^2(pi z) - 1/3) + 8 pi^2 sum n q^n/(1-q^n) (1 - cos 2 pi n z)
    with q = exp(2 pi i tau).  z is reduced to the fundamental cell first and
    the cosine terms are kept in exponential form so thin tori cannot
    overflow: with |Im z| <= Im(tau)/2 every factor has modulus below one.
    """
    q2 = cmath.exp(2j * math.pi * tau)
    zs = np.atleast_1d(np.asarray(z, dtype=complex)).copy()
    ns = np.round(zs.imag / tau.imag)
    zs = zs - ns * tau
    zs = zs - np.round(zs.real)
    inv_sin2 = np.zeros_like(zs)
    near = np.abs(zs.imag) <= 20.0
    s = np.sin(np.pi * zs[near])
    inv_sin2[near] = 1.0 / (s * s)
    out = np.pi**2 * (inv_sin2 - 1.0 / 3.0)
    u_plus = np.exp(2j * np.pi * (tau + zs))
    u_minus = np.exp(2j * np.pi * (tau - zs))
    term = np.zeros_like(out)
    qn, upn, umn = complex(q2), u_plus.copy(), u_minus.copy()
    n = 1
    while n < 400:
        mag = max(abs(qn), float(np.max(np.abs(upn))), float(np.max(np.abs(umn))))
        if n * mag < 1e-19:
            break
        term = term + n * (qn - 0.5 * (upn + umn)) / (1.0 - qn)
        qn *= q2
        upn *= u_plus
        umn *= u_minus
        n += 1
    out = out + 8.0 * np.pi**2 * term
    if np.isscalar(z) or np.asarray(z).ndim == 0:
        return complex(out[0])
    return out


def wp_lattice_oracle(z: complex, tau: complex, box: int = 120) -> complex:
    """Truncated symmetric lattice sum for wp; test oracle only."""
    total = 1.0 / (z * z)
    for m in range(-box, box + 1):
        for n in range(-box, box + 1):
            if m == 0 and n == 0:
                continue
            w = m + n * tau
            total += 1.0 / ((z - w) ** 2) - 1.0 / (w * w)
    return total


# ---------------------------------------------------------------------------
# monodromy of y'' = (-wp/4 + B) y
# ---------------------------------------------------------------------------


def _rk4_propagators(qvals: np.ndarray, w: complex, h: float) -> np.ndarray:
    """Per-step propagators for u' = w [[0,1],[Q,0]] u, RK4 in the path time.

    qvals has shape (m, 2*n + 1): Q at nodes and midpoints for m parameter
    values; returns (m, n, 2, 2) step matrices.
    """
    m, ln = qvals.shape
    n = (ln - 1) // 2
    q0 = qvals[:, 0:-1:2]  # left nodes   (m, n)
    qm = qvals[:, 1::2]  # midpoints
    q1 = qvals[:, 2::2]  # right nodes

    def amat(q: np.ndarray) -> np.ndarray:
        a = np.zeros(q.shape + (2, 2), dtype=complex)
        a[..., 0, 1] = w
        a[..., 1, 0] = w * q
        return a

    eye = np.broadcast_to(np.eye(2, dtype=complex), (m, n, 2, 2))
    a1, a2, a4 = amat(q0), amat(qm), amat(q1)
    k1 = a1
    k2 = a2 @ (eye + 0.5 * h * k1)
    k3 = a2 @ (eye + 0.5 * h * k2)
    k4 = a4 @ (eye + h * k3)
    return eye + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _chain(props: np.ndarray) -> np.ndarray:
    """Ordered product P_{n-1} ... P_1 P_0 along axis 1, by pairwise folding."""
    while props.shape[1] > 1:
        n = props.shape[1]
        even = props[:, 0 : n - (n % 2) : 2]
        odd = props[:, 1 : n - (n % 2) : 2]
        folded = odd @ even
        if n % 2:
            folded = np.concatenate([folded, props[:, -1:]], axis=1)
        props = folded
    return props[:, 0]


def _const_propagator(q: np.ndarray, dz: complex) -> np.ndarray:
    """Exact propagator of y'' = q y over a straight step dz (batched)."""
    mu = np.sqrt(q.astype(complex))
    mu = np.where(np.abs(mu) < 1e-300, 1e-300 + 0j, mu)
    arg = mu * dz
    out = np.zeros(q.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = np.cosh(arg)
    out[..., 0, 1] = np.sinh(arg) / mu
    out[..., 1, 0] = mu * np.sinh(arg)
    out[..., 1, 1] = np.cosh(arg)
    return out


def _path_monodromy(
    tau: complex, bs: np.ndarray, period: complex, steps: int
) -> np.ndarray:
    """Monodromy matrices along z0 -> z0 + period for each accessory value."""
    z0 = 0.5 + 0.5 * tau
    im = tau.imag

    def integrate_raw(s_a: float, s_b: float, n: int) -> np.ndarray:
        h = (s_b - s_a) / n
        s_nodes = s_a + 0.5 * h * np.arange(2 * n + 1)
        z_nodes = z0 + s_nodes * period
        wp_nodes = wp(z_nodes, tau)
        qvals = -0.25 * wp_nodes[None, :] + bs[:, None]
        return _chain(_rk4_propagators(qvals, period, h))

    def integrate(s_a: float, s_b: float, n: int) -> np.ndarray:
        # Richardson in the RK4 order: errors expand in h^4
        p1 = integrate_raw(s_a, s_b, n)
        p2 = integrate_raw(s_a, s_b, 2 * n)
        return (16.0 * p2 - p1) / 15.0

    def bulk(s_a: float, s_b: float) -> np.ndarray:
        z_mid = z0 + 0.5 * (s_a + s_b) * period
        q = -0.25 * np.asarray(wp(z_mid, tau)) + bs
        return _const_propagator(q, (s_b - s_a) * period)

    if period == 1 or im <= _BULK_IM:
        # single pass; step budget scales with the path's feature content
        n = steps if period == 1 else max(steps, int(steps * min(im, _BULK_IM)))
        return integrate(0.0, 1.0, n)
    # long vertical path: fine integration only near the lattice row at
    # s = 1/2; elsewhere the potential is constant to machine precision
    wwin = min(0.49, 6.0 / im)
    p_mid = integrate(0.5 - wwin, 0.5 + wwin, 2 * steps)
    p_lo = bulk(0.0, 0.5 - wwin)
    p_hi = bulk(0.5 + wwin, 1.0)
    return p_hi @ p_mid @ p_lo


_CUSP_IM = 12.0  # beyond this the closed connection form is machine-exact
# (the neglected lattice corrections are of order exp(-pi Im tau))


def _gamma(w: np.ndarray) -> np.ndarray:
    from scipy.special import gamma as _g

    return _g(w)


def _cusp_monodromy(
    tau: complex, bs: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form (M_A, M_B) for Im tau large.

    There the potential along the B-path is a single cosecant-squared row,
    whose plane-wave connection matrix is hypergeometric:

        V = [[T(l), R(-l)], [R(l), T(-l)]],  l = mu/(2 pi),  mu = sqrt(B + pi^2/12)
        R(l) = i e^(-2 pi l) / sinh(2 pi l)
        T(l) = Gamma(1 + 2 i l) Gamma(2 i l) / Gamma(1/2 + 2 i l)^2

    with det V = 1 (a Gamma reflection identity).  The A-path is free
    propagation.  Relative error is O(exp(-pi Im tau)).
    """
    mu = np.sqrt(bs + np.pi**2 / 12.0)
    mu = np.where(np.abs(mu) < 1e-300, 1e-300 + 0j, mu)
    lam = mu / (2.0 * np.pi)
    z0 = 0.5 + 0.5 * tau
    w_a = z0 - tau
    w_b = z0

    def wave(w: complex) -> np.ndarray:
        out = np.zeros(mu.shape + (2, 2), dtype=complex)
        em = np.exp(-mu * w)
        ep = np.exp(mu * w)
        out[..., 0, 0] = em
        out[..., 0, 1] = ep
        out[..., 1, 0] = -mu * em
        out[..., 1, 1] = mu * ep
        return out

    def wave_inv(w: complex) -> np.ndarray:
        out = np.zeros(mu.shape + (2, 2), dtype=complex)
        em = np.exp(-mu * w)
        ep = np.exp(mu * w)
        out[..., 0, 0] = 0.5 * ep
        out[..., 0, 1] = -0.5 * ep / mu
        out[..., 1, 0] = 0.5 * em
        out[..., 1, 1] = 0.5 * em / mu
        return out

    def refl(l: np.ndarray) -> np.ndarray:
        return 1j * np.exp(-2.0 * np.pi * l) / np.sinh(2.0 * np.pi * l)

    def trans(l: np.ndarray) -> np.ndarray:
        return _gamma(1.0 + 2j * l) * _gamma(2j * l) / _gamma(0.5 + 2j * l) ** 2

    v_inv = np.zeros(mu.shape + (2, 2), dtype=complex)
    v_inv[..., 0, 0] = trans(-lam)
    v_inv[..., 0, 1] = -refl(-lam)
    v_inv[..., 1, 0] = -refl(lam)
    v_inv[..., 1, 1] = trans(lam)
    mb = wave(w_b) @ v_inv @ wave_inv(w_a)
    # free propagation over one period in the horizontal direction
    ma = np.zeros(mu.shape + (2, 2), dtype=complex)
    ma[..., 0, 0] = np.cosh(mu)
    ma[..., 0, 1] = np.sinh(mu) / mu
    ma[..., 1, 0] = mu * np.sinh(mu)
    ma[..., 1, 1] = np.cosh(mu)
    return ma, mb


def monodromy_traces(
    tau: complex, b: complex | Iterable[complex], steps: int = 384
) -> np.ndarray:
    """Traces (x, y, z) = (tr M_A, tr M_B, tr M_A M_B) for accessory values b.

    Returns an array of shape (m, 3) of complex traces (sign-canonical: the
    lifts are flipped so that Re x and Re y are positive).
    """
    bs = np.atleast_1d(np.asarray(b, dtype=complex))
    if tau.imag >= _CUSP_IM:
        ma, mb = _cusp_monodromy(tau, bs)
    else:
        ma = _path_monodromy(tau, bs, 1.0 + 0.0j, steps)
        mb = _path_monodromy(tau, bs, complex(tau), steps)
    x = np.trace(ma, axis1=-2, axis2=-1)
    y = np.trace(mb, axis1=-2, axis2=-1)
    sx = np.where(x.real >= 0, 1.0, -1.0)
    sy = np.where(y.real >= 0, 1.0, -1.0)
    z = np.trace(ma @ mb, axis1=-2, axis2=-1) * sx * sy
    return np.stack([x * sx, y * sy, z], axis=-1)


# ---------------------------------------------------------------------------
# accessory parameter
# ---------------------------------------------------------------------------


def _trace_residual(tr: np.ndarray) -> np.ndarray:
    """Imaginary parts scaled relative to each trace's magnitude."""
    return np.array(
        [t.imag / max(1.0, abs(t)) for t in tr]
    )


def _solve_accessory_at(
    tau: complex, b0: complex, steps: int = 384, tol: float = 1e-11
) -> tuple[complex, tuple[float, float, float]]:
    """Damped Gauss-Newton on B driving Im(x, y, z) to zero, seeded at b0.

    Residuals are scaled per trace; the traces are holomorphic in B, so a
    single finite-difference shift yields the full real Jacobian.
    """
    b = complex(b0)
    h = 1e-7
    last = None
    for _ in range(80):
        tr = monodromy_traces(tau, [b, b + h], steps)
        f = _trace_residual(tr[0])
        if float(np.max(np.abs(f))) < tol:
            last = tr[0]
            break
        scales = np.array([max(1.0, abs(t)) for t in tr[0]])
        dcol = (tr[1] - tr[0]) / h  # complex derivatives d(x,y,z)/dB
        jac = np.column_stack([dcol.imag / scales, dcol.real / scales])
        if not np.all(np.isfinite(jac)):
            raise DomainError(f"monodromy not finite at tau={tau}")
        delta, *_ = np.linalg.lstsq(jac, -f, rcond=None)
        step_c = complex(delta[0], delta[1])
        base = float(np.linalg.norm(f))
        chosen = None
        for k in range(9):
            cand = b + step_c * (0.5**k)
            fc = _trace_residual(monodromy_traces(tau, [cand], steps)[0])
            # allow mildly non-monotone steps: near a needle-like solution
            # the residual first rises before Newton locks on
            if float(np.linalg.norm(fc)) < 3.0 * base:
                chosen = cand
                break
        b = chosen if chosen is not None else b + step_c
    else:
        # iteration budget exhausted; the validation below arbitrates
        last = monodromy_traces(tau, [b], steps)[0]
    x, y, z = last
    ok = (
        abs(x.imag) < 1e-6 * max(1.0, abs(x))
        and abs(y.imag) < 1e-6 * max(1.0, abs(y))
        and abs(z.imag) < 1e-6 * max(1.0, abs(z))
        and x.real > 2.0
        and y.real > 2.0
        and z.real > 2.0
    )
    if not ok:
        raise DomainError(
            f"accessory Newton landed on a non-Fuchsian branch at tau={tau}"
        )
    triple = (float(x.real), float(y.real), float(z.real))
    prod = triple[0] * triple[1] * triple[2]
    resid = abs(triple[0] ** 2 + triple[1] ** 2 + triple[2] ** 2 - prod)
    if resid > 1e-6 * max(1.0, abs(prod)):
        raise DomainError(f"cusped trace relation violated ({resid:.2e}) at {tau}")
    # every essential simple curve of a Fuchsian structure is hyperbolic;
    # exotic real-monodromy branches fail this on a Farey neighbor
    xx, yy, zz = triple
    for neighbor in (xx * yy - zz, xx * zz - yy, yy * zz - xx):
        if neighbor <= 2.0:
            raise DomainError(
                f"accessory Newton landed on an exotic real branch at tau={tau}"
            )
    return b, triple


def _tau_dist(t1: complex, t2: complex) -> float:
    """Scale-aware distance, comparable across the cusp region."""
    return abs(t1 - t2) / max(1.0, min(t1.imag, t2.imag))


def _nearest_cached(tau: complex) -> tuple[complex, complex] | None:
    if not _ACCESSORY_CACHE:
        return None
    key = min(
        _ACCESSORY_CACHE, key=lambda k: _tau_dist(complex(k[0], k[1]), tau)
    )
    return complex(*key), _ACCESSORY_CACHE[key]


def _record(t: complex, b: complex, triple: tuple) -> None:
    key = (round(t.real, 12), round(t.imag, 12))
    _ACCESSORY_CACHE[key] = b
    _TRIPLE_CACHE[key] = triple


def _walk(
    start: complex,
    b_start: complex,
    goal: complex,
    steps: int,
    vertical: bool,
) -> tuple[complex, tuple]:
    """Continuation along one straight leg, stepping in bounded increments.

    The accessory parameter varies smoothly, and bounded steps keep Newton in
    the Fuchsian basin (exotic real-monodromy branches exist); vertical legs
    step multiplicatively in Im tau, horizontal legs additively in Re tau.
    """
    t, b = start, b_start
    triple: tuple | None = None
    prev_gap: float | None = None  # x - 2 at the previous rung
    guard = 0
    frac_cap = 1.0
    while t != goal:
        guard += 1
        if guard > 4000:
            raise DomainError(f"accessory continuation exhausted toward {goal}")
        if vertical:
            full = math.log(goal.imag / t.imag)
            step = math.copysign(min(abs(full), 0.35 * frac_cap), full)
            target = complex(t.real, t.imag * math.exp(step))
            if abs(step - full) < 1e-15:
                target = goal
        else:
            full = goal.real - t.real
            step = math.copysign(min(abs(full), 0.2 * frac_cap), full)
            target = complex(t.real + step, t.imag)
            if abs(step - full) < 1e-15:
                target = goal
        key = (round(target.real, 12), round(target.imag, 12))
        if key in _ACCESSORY_CACHE:
            t, b = target, _ACCESSORY_CACHE[key]
            triple = _TRIPLE_CACHE[key]
            prev_gap = triple[0] - 2.0
            frac_cap = min(1.0, frac_cap * 2.0)
            continue
        try:
            b_new, triple_new = _solve_accessory_at(target, b, steps)
            # resonant (non-Fuchsian but real) branches betray themselves by
            # a jump in the systole scale between neighboring rungs
            if prev_gap is not None:
                ratio = (triple_new[0] - 2.0) / prev_gap
                if not (0.02 < ratio < 50.0):
                    raise DomainError("discontinuous continuation step")
        except DomainError:
            frac_cap *= 0.5
            if frac_cap < 1.0 / 512.0:
                raise
            continue
        t, b, triple = target, b_new, triple_new
        prev_gap = triple[0] - 2.0
        _record(t, b, triple)
        frac_cap = min(1.0, frac_cap * 2.0)
    if triple is None:
        b, triple = _solve_accessory_at(goal, b, steps)
        _record(goal, b, triple)
    return b, triple


def _cusp_accessory(tau: complex) -> tuple[complex, tuple]:
    """Exact accessory solve in the cusp regime via the quantization condition.

    With mu = sqrt(B + pi^2/12) real, every trace has the form
    2 Re[e^(mu (p + q tau)) T(lam)], so the Fuchsian (real-trace) condition is
    sin(mu Y + arg T) = 0.  The discrete-faithful structure is the lowest
    root; higher roots are the exotic branches that plague Newton solvers.
    """
    from scipy.special import loggamma

    y_im = tau.imag
    xi = tau.real

    def theta(mu: float) -> float:
        lam = mu / (2.0 * np.pi)
        val = (
            loggamma(1.0 + 2j * lam)
            + loggamma(2j * lam)
            - 2.0 * loggamma(0.5 + 2j * lam)
        )
        return float(val.imag)

    def g(mu: float) -> float:
        return mu * y_im + theta(mu)

    lo = 1e-12 / y_im
    hi = 0.75 * np.pi / y_im
    glo, ghi = g(lo), g(hi)
    expand = 0
    while ghi < 0.0 and expand < 60:
        hi *= 1.3
        ghi = g(hi)
        expand += 1
    if not (glo < 0.0 < ghi):
        raise DomainError(f"cusp quantization bracket failed at tau={tau}")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if g(mid) < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-18 * y_im**-1 + 1e-16 * mid:
            break
    mu = 0.5 * (lo + hi)
    b = complex(mu * mu - np.pi**2 / 12.0)
    # at the lowest root |T| = coth(mu) and the phase is +1, so the triple
    # takes the exact Fenchel-Nielsen form with length 2 mu and twist xi
    coth = 1.0 / math.tanh(mu)
    x = 2.0 * math.cosh(mu)
    y_tr = 2.0 * coth * math.cosh(mu * xi)
    z_tr = 2.0 * coth * math.cosh(mu * (1.0 + xi))
    triple = (float(x), float(y_tr), float(z_tr))
    if not (y_tr > 2.0 and z_tr > 2.0):
        raise DomainError(f"cusp accessory solve failed sanity checks at {tau}")
    key = (round(tau.real, 12), round(tau.imag, 12))
    _CUSP_MU_CACHE[key] = mu
    return b, triple


def _solve_accessory(tau: complex, steps: int = 384) -> tuple[complex, tuple]:
    key = (round(tau.real, 12), round(tau.imag, 12))
    if key in _ACCESSORY_CACHE and key in _TRIPLE_CACHE:
        return _ACCESSORY_CACHE[key], _TRIPLE_CACHE[key]
    if tau.imag >= _CUSP_IM:
        b, triple = _cusp_accessory(tau)
        _record(tau, b, triple)
        return b, triple
    near = _nearest_cached(tau)
    if near is not None and _tau_dist(near[0], tau) < 0.3:
        try:
            b, triple = _solve_accessory_at(tau, near[1], steps)
            near_key = (round(near[0].real, 12), round(near[0].imag, 12))
            near_triple = _TRIPLE_CACHE.get(near_key)
            if near_triple is not None:
                ratio = (triple[0] - 2.0) / (near_triple[0] - 2.0)
                if not (0.01 < ratio < 100.0):
                    raise DomainError("cache-seeded solve jumped branches")
            _record(tau, b, triple)
            return b, triple
        except DomainError:
            pass
    # ladder: up the imaginary axis from the square point, then across
    b0, _ = _walk(1j, 0.0 + 0.0j, complex(0.0, tau.imag), steps, vertical=True)
    b, triple = _walk(complex(0.0, tau.imag), b0, tau, steps, vertical=False)
    return b, triple


# ---------------------------------------------------------------------------
# fundamental-domain reduction and marking transport
# ---------------------------------------------------------------------------


def reduce_tau(tau: complex) -> tuple[complex, tuple[int, int, int, int]]:
    """Reduce into |Re| <= 1/2, |tau| >= 1; returns (tau', g) with tau = g tau'."""
    if tau.imag <= 0:
        raise DomainError("tau must lie in the upper half-plane")
    a, b, c, d = 1, 0, 0, 1  # tau = (a t' + b)/(c t' + d)
    t = tau
    for _ in range(200):
        n = round(t.real)
        if n != 0:
            t = t - n
            # tau = g_old (t_new + n) => right-multiply by [[1, n], [0, 1]]
            a, b, c, d = a, a * n + b, c, c * n + d
        if abs(t) < 1.0 - 1e-15:
            t = -1.0 / t
            # right-multiply by S = [[0, -1], [1, 0]]
            a, b, c, d = b, -a, d, -c
        else:
            break
    return t, (a, b, c, d)


def _transport_slope(
    g: tuple[int, int, int, int], p: int, q: int
) -> CurveClass:
    """Class at the reduced point matching the (p, q) class at the original."""
    a, b, c, d = g
    return CurveClass.slope(p * d + q * b, p * c + q * a)


def tau_to_triple(tau: complex, steps: int = 384) -> tuple[float, float, float]:
    """Trace coordinates (x, y, z) of the marked punctured torus at tau."""
    t_red, g = reduce_tau(tau)
    _, triple = _solve_accessory(t_red, steps)
    if g == (1, 0, 0, 1):
        return triple
    x, y, z = triple
    out = []
    for p, q in ((1, 0), (0, 1), (1, 1)):
        c = _transport_slope(g, p, q)
        out.append(trace_of_slope(c, x, y, z))
    return (out[0], out[1], out[2])


def tau_to_fn(tau: complex, steps: int = 384) -> FNPoint:
    """Fenchel-Nielsen point of the marked punctured torus at tau."""
    t_red, g = reduce_tau(tau)
    a, b, c, d = g
    if t_red.imag >= _CUSP_IM and c == 0 and abs(a) == 1 and a == d:
        # pants curve is the thin one: read (l, s) off the cusp solve
        # directly, avoiding the catastrophic trace round-trip near x = 2
        _solve_accessory(t_red, steps)
        key = (round(t_red.real, 12), round(t_red.imag, 12))
        mu = _CUSP_MU_CACHE[key]
        n = a * b  # tau = t_red + n
        return FNPoint.t11(2.0 * mu, t_red.real + n, tau=tau)
    try:
        x, y, z = tau_to_triple(tau, steps)
        fn = triple_to_fn(x, y, z)
    except OverflowError as exc:
        raise DomainError(f"trace transport overflowed at tau={tau}") from exc
    return FNPoint.t11(fn.l, fn.s, tau=tau)


# ---------------------------------------------------------------------------
# inverse map: Fenchel-Nielsen -> tau
# ---------------------------------------------------------------------------

def remark_tau(tau: complex, a) -> complex:
    """Conformal point in the marking that makes the curve a the pants curve.

    If h sends the slope of a to infinity, curves transform by h and the
    conformal point by the corresponding inverse Moebius map.
    """
    from teichmin.curves import _bezout_to_infinity

    h1, h2, h3, h4 = _bezout_to_infinity(a)
    num = h1 * tau - h2
    den = -h3 * tau + h4
    out = num / den
    if out.imag < 0:
        raise DomainError("marking change left the upper half-plane")
    return out


def curve_length_at_tau(tau: complex, a, steps: int = 384) -> float:
    """Hyperbolic length of a slope curve at the marked conformal point.

    Computed as the pants-curve length in the re-marked surface, which stays
    accurate arbitrarily deep in the thin part (the direct trace route loses
    the length once 2 cosh(l/2) rounds to 2).
    """
    return tau_to_fn(remark_tau(tau, a), steps).l


_IM_TABLE: list[tuple[float, float]] = []  # (log l(iY), log Y) samples


def _seed_table() -> list[tuple[float, float]]:
    global _IM_TABLE
    if not _IM_TABLE:
        for logy in np.linspace(0.0, 3.6, 10):
            y = math.exp(logy)
            fn = tau_to_fn(complex(0.0, y))
            _IM_TABLE.append((math.log(fn.l), logy))
        _IM_TABLE.sort()
    return _IM_TABLE


def _seed_tau(l: float, s0: float) -> complex:
    table = _seed_table()
    logl = math.log(l)
    logls = [a for a, _ in table]
    logys = [b for _, b in table]
    if logl <= logls[0]:
        logy = logys[0] + (logls[0] - logl)  # thin end: l ~ const / Y
    elif logl >= logls[-1]:
        logy = logys[-1] - (logl - logls[-1])
    else:
        # the table is sorted with log l decreasing in log Y
        logy = float(np.interp(logl, logls, logys))
    return complex(0.55 * s0, math.exp(logy))


def _long_pants_inverse(
    fn: FNPoint, steps: int, tol: float
) -> complex | None:
    """Conformal point when the pants curve is long.

    The thin curve is then a (k, 1)-slope with w = k u + v small, where
    u = l/2 and v is half the twist distance.  Its trace gap and the
    remarked twist have cancellation-free closed forms, so the point is
    solved in the remarked (pants-thin) coordinates and mapped back.  The
    round trip is verified; returns None when no branch verifies.
    """
    u = 0.5 * fn.l
    v = 0.5 * fn.s * fn.l
    k0 = int(round(-v / u))
    for k in (k0, k0 - 1, k0 + 1):
        w = k * u + v
        if abs(w) > 0.75 * u:
            continue
        tanh_u = math.tanh(u)
        cusp_term = 2.0 / (math.exp(2.0 * u) + 1.0)
        gap = 2.0 * (2.0 * math.sinh(0.5 * w) ** 2 + cusp_term) / tanh_u
        if gap <= 0:
            continue
        l_thin = 2.0 * math.asinh(math.sqrt(gap + 0.25 * gap * gap))
        x_thin = 2.0 + gap
        bracket = 2.0 * math.sinh(0.5 * w) * math.sinh(0.5 * w - u) + math.cosh(
            u
        ) * cusp_term
        num = 4.0 * bracket / tanh_u - 2.0 * gap * math.cosh(u)
        sh = num / (2.0 * x_thin)
        s_thin = 2.0 * math.asinh(sh) / l_thin
        try:
            tau_rel = fn_to_tau(FNPoint.t11(l_thin, s_thin), steps, tol)
        except DomainError:
            continue
        # relabeling h = (0, 1, -1, k) sends the (k,1)-slope to infinity;
        # invert the paired Moebius action
        tau = -k - 1.0 / tau_rel
        try:
            check = tau_to_fn(tau, steps)
        except DomainError:
            continue
        ds = check.s - fn.s
        if abs(math.log(check.l / fn.l)) < 1e-6 and abs(ds) < 1e-6:
            return tau
    return None


def fn_to_tau(
    fn: FNPoint, steps: int = 384, tol: float = 1e-9, seed: complex | None = None
) -> complex:
    """Invert the uniformization: conformal point of an FN (1,1) point.

    Newton in (Re tau, log Im tau) on the residuals (s - s_target,
    log l - log l_target), after splitting off the integer part of the twist
    (a Dehn twist about the pants curve shifts tau by exactly 1).  A seed
    from a nearby solved point speeds up continuation along paths.
    """
    if fn.tau is not None:
        return fn.tau
    if not fn.surface.is_t11:
        raise DomainError("fn_to_tau is defined on the once-punctured torus")
    if fn.l > 10.0:
        out = _long_pants_inverse(fn, steps, tol)
        if out is not None:
            return out
    n_twist = round(fn.s)
    s0 = fn.s - n_twist
    target = np.array([math.log(fn.l), s0])
    # the accessory solve fixes traces to ~1e-11 absolute, which limits the
    # attainable log-length precision for very short pants curves
    xt_gap = 2.0 * math.cosh(0.5 * fn.l) - 2.0
    tol_eff = max(tol, min(1e-3, 5e-11 / max(xt_gap, 5e-11)))

    def residual(tau: complex) -> np.ndarray:
        p = tau_to_fn(tau, steps)
        return np.array([math.log(p.l) - target[0], p.s - s0])

    if seed is not None:
        tau = complex(seed.real - n_twist, seed.imag)
    else:
        tau = _seed_tau(fn.l, s0)
    if abs(s0) < 1e-6 and abs(tau.real) < 1e-3:
        # twist-zero targets lie exactly on the reflection locus; noise in
        # the seed's real part explodes into spurious twist powers under
        # the modular reduction near the lower cusp
        tau = complex(0.0, tau.imag)
    res = residual(tau)
    for _ in range(60):
        if float(np.hypot(*res)) < tol_eff or float(
            np.max(np.abs(res))
        ) < tol_eff:
            break
        # near the lower cusp the natural twist coordinate is Re/|tau|^2, so
        # probe steps and caps in Re must carry the cusp-adapted scale
        re_scale = min(1.0, tau.imag * tau.imag)
        h_re = 1e-6 * re_scale
        h_im = 1e-6
        r1 = residual(complex(tau.real + h_re, tau.imag))
        r2 = residual(complex(tau.real, tau.imag * math.exp(h_im)))
        jac = np.column_stack([(r1 - res) / h_re, (r2 - res) / h_im])
        if not np.all(np.isfinite(jac)):
            raise DomainError("fn_to_tau: non-finite Jacobian")
        # don't chase residual components already below tolerance: their
        # Jacobian rows can be pure noise at the precision floor
        res_drive = np.where(np.abs(res) < 0.25 * tol_eff, 0.0, res)
        try:
            delta, *_ = np.linalg.lstsq(jac, -res_drive, rcond=1e-10)
        except np.linalg.LinAlgError:
            raise DomainError("fn_to_tau: singular Jacobian")
        delta[0] = float(np.clip(delta[0], -0.75 * re_scale, 0.75 * re_scale))
        delta[1] = float(np.clip(delta[1], -0.75, 0.75))
        if not np.any(res_drive):
            break  # every component is at or below tolerance-floor level
        best = None
        for scale in (1.0, 0.5, 0.25, 0.125):
            cand = complex(
                tau.real + scale * delta[0], tau.imag * math.exp(scale * delta[1])
            )
            try:
                rc = residual(cand)
            except DomainError:
                continue
            if not np.all(np.isfinite(rc)):
                continue
            if best is None or float(np.hypot(*rc)) < float(np.hypot(*res)):
                best = (cand, rc)
                break
        if best is None:
            if float(np.hypot(*res)) < 1e-4:
                break  # precision floor of the coarse regime
            raise DomainError("fn_to_tau: line search failed")
        tau, res = best
    else:
        if float(np.hypot(*res)) >= 1e-4:
            raise DomainError(f"fn_to_tau did not converge for l={fn.l}, s={fn.s}")
    return complex(tau.real + n_twist, tau.imag)
