"""Length-functional minimization: the path of minima of
e^t l(nu+) + e^-t l(nu-) over Teichmuller space.

The solver is a compact BFGS with Armijo backtracking on the coordinates
(log length, twist distance); positivity of the length coordinate is free
and a barrier floor keeps degenerate near-cusp points finite.  Gradients
are Richardson-extrapolated central differences with relative steps, per
the declared tolerance scheme.  Runs are deterministic for a fixed seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from teichmin.curves import (
    CurveClass,
    DomainError,
    MeasuredMulticurve,
    fills,
    invert_unimodular,
    transform_slope,
)
from teichmin.flat import build_flat_surface, flow
from teichmin.hyperbolic import (
    FNPoint,
    base_triple,
    multicurve_length,
    trace_of_slope,
    triple_to_fn,
)

LOG_L_FLOOR = math.log(1e-12)
LOG_L_CEIL = math.log(600.0)  # cosh overflows past this; no minimizer is near
TOL_GRAD_DEFAULT = 1e-9


class SolverError(DomainError):
    """The minimizer failed to converge."""


@dataclass(frozen=True)
class MinimaSample:
    """One solved point of the minima path."""

    t: float
    point: FNPoint
    objective_value: float
    gradient_norm: float
    solver_iterations: int
    flagged_near_cusp: bool = False
    normalized_coords: tuple[float, float] | None = None


def objective(
    fn: FNPoint, p: MeasuredMulticurve, m: MeasuredMulticurve, t: float
) -> float:
    """e^t l(nu+) + e^-t l(nu-) at the hyperbolic structure fn."""
    return math.exp(t) * multicurve_length(fn, p) + math.exp(-t) * multicurve_length(
        fn, m
    )


def _fn_of(u: np.ndarray) -> FNPoint:
    log_l = min(max(float(u[0]), LOG_L_FLOOR), LOG_L_CEIL)
    l = math.exp(log_l)
    return FNPoint.t11(l, float(u[1]) / l)


def _value(u: np.ndarray, p, m, t: float) -> float:
    try:
        return objective(_fn_of(u), p, m, t)
    except (OverflowError, DomainError):
        # wandering probes can reach regions where a trace degenerates;
        # an infinite value makes the line search back off
        return math.inf


def _gradient(u: np.ndarray, p, m, t: float, h_rel: float = 1e-5) -> np.ndarray:
    """Richardson-extrapolated central differences, relative steps."""
    out = np.zeros(2)
    for k in range(2):
        h = h_rel * max(1.0, abs(float(u[k])))
        vals = []
        for hh in (h, 0.5 * h):
            e = np.zeros(2)
            e[k] = hh
            vals.append((_value(u + e, p, m, t) - _value(u - e, p, m, t)) / (2 * hh))
        out[k] = (4.0 * vals[1] - vals[0]) / 3.0
    return out


def _bfgs(
    u0: np.ndarray, p, m, t: float, tol_grad: float, max_iter: int = 200
) -> tuple[np.ndarray, float, int]:
    u = u0.astype(float).copy()
    f = _value(u, p, m, t)
    g = _gradient(u, p, m, t)
    h_inv = np.eye(2)
    iters = 0
    stalled = 0
    for iters in range(1, max_iter + 1):
        if float(np.max(np.abs(g))) < tol_grad:
            break
        d = -h_inv @ g
        if float(d @ g) > 0:  # safeguard: reset to steepest descent
            h_inv = np.eye(2)
            d = -g
        step = 1.0
        accepted = False
        for _ in range(60):
            u_new = u + step * d
            f_new = _value(u_new, p, m, t)
            if f_new <= f + 1e-4 * step * float(g @ d):
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break
        # descent below the evaluation noise cannot be resolved; the Newton
        # polish takes over from here
        if f - f_new < 1e-14 * max(1.0, abs(f)):
            stalled += 1
            if stalled >= 3:
                u, f = u_new, f_new
                break
        else:
            stalled = 0
        g_new = _gradient(u_new, p, m, t)
        s = u_new - u
        yv = g_new - g
        sy = float(s @ yv)
        if sy > 1e-14:
            rho = 1.0 / sy
            eye = np.eye(2)
            h_inv = (eye - rho * np.outer(s, yv)) @ h_inv @ (
                eye - rho * np.outer(yv, s)
            ) + rho * np.outer(s, s)
        u, f, g = u_new, f_new, g_new
    u, f = _newton_polish(u, p, m, t, tol_grad)
    return u, f, iters


def _newton_polish(
    u: np.ndarray, p, m, t: float, tol_grad: float
) -> tuple[np.ndarray, float]:
    """Finish with Newton steps on a finite-difference Hessian: the line
    search cannot resolve descent below the evaluation noise, Newton can."""
    for _ in range(4):
        g = _gradient(u, p, m, t)
        if float(np.max(np.abs(g))) < 0.2 * tol_grad:
            break
        hess = np.zeros((2, 2))
        for k in range(2):
            h = 1e-4 * max(1.0, abs(float(u[k])))
            e = np.zeros(2)
            e[k] = h
            hess[:, k] = (_gradient(u + e, p, m, t) - _gradient(u - e, p, m, t)) / (
                2 * h
            )
        hess = 0.5 * (hess + hess.T)
        try:
            step = np.linalg.solve(hess, -g)
        except np.linalg.LinAlgError:
            break
        if not np.all(np.isfinite(step)) or float(np.max(np.abs(step))) > 1.0:
            break
        u_new = u + step
        if float(np.max(np.abs(_gradient(u_new, p, m, t)))) < float(
            np.max(np.abs(g))
        ):
            u = u_new
        else:
            break
    return u, _value(u, p, m, t)


def fn_in_new_marking(fn: FNPoint, h) -> FNPoint:
    """Fenchel-Nielsen data after the slope relabeling c -> h c.

    Tiered for robustness: the identity and pure-twist relabelings are
    exact; general relabelings go through the trace recursion, falling back
    to the conformal-point route when the point is too deep in the thin
    part for the trace round-trip to stay accurate.
    """
    if h == (1, 0, 0, 1) or h == (-1, 0, 0, -1):
        return fn
    h1, h2, h3, h4 = h
    if h3 == 0 and abs(h1) == 1 and h1 == h4:
        # relabeling by a power of the twist about the pants curve shifts
        # the conformal point by an integer: tau_new = tau_old - h1 h2
        j = h1 * h2
        tau = None if fn.tau is None else complex(fn.tau.real - j, fn.tau.imag)
        return FNPoint.t11(fn.l, fn.s - j, tau=tau)
    deep = fn.l < 1e-4
    if not deep:
        hinv = invert_unimodular(h)
        x, y, z = base_triple(fn)
        vals = []
        for pq in ((1, 0), (0, 1), (1, 1)):
            c_old = transform_slope(hinv, CurveClass.slope(*pq))
            vals.append(trace_of_slope(c_old, x, y, z))
        if all(math.isfinite(v) and abs(v) < 1e12 for v in vals):
            try:
                return triple_to_fn(*vals)
            except DomainError:
                pass
    # conformal-point route: exact at any thinness
    from teichmin.uniformize import fn_to_tau, tau_to_fn

    tau_old = fn.tau if fn.tau is not None else fn_to_tau(fn)
    # tau transforms by the inverse of the Moebius matrix paired with the
    # slope action (same pattern as remark_tau)
    num = h1 * tau_old - h2
    den = -h3 * tau_old + h4
    return tau_to_fn(num / den)


def _normalized_problem(p: MeasuredMulticurve, m: MeasuredMulticurve):
    """Relabel slopes so that m is the infinity curve and p a twist-reduced
    slope; minimizers then carry uniformly bounded twist coordinates."""
    q0 = build_flat_surface(p, m)
    g = q0.marking

    def push(n: MeasuredMulticurve) -> MeasuredMulticurve:
        comps = tuple((transform_slope(g, c), w) for c, w in n.components)
        return MeasuredMulticurve(n.surface, comps)

    return q0, g, push(p), push(m)


def _gradient_noise(u: np.ndarray, p, m, t: float) -> float:
    """Jitter floor of the finite-difference gradient near u."""
    probes = [
        _gradient(u + np.array([d, d]), p, m, t) for d in (0.0, 2e-9, -2e-9)
    ]
    return float(
        max(
            np.max(np.abs(probes[0] - probes[1])),
            np.max(np.abs(probes[0] - probes[2])),
        )
    )


def _seed_point(q0, t: float) -> np.ndarray:
    """Seed from the geodesic-flow surface, which stays near the minimum."""
    try:
        from teichmin.uniformize import tau_to_fn

        # normalized marking: the raw complex coordinates apply
        n = q0.n_squares
        im = (
            float(q0.heights[0]) / (n * float(q0.widths[0]))
            * math.exp(-2.0 * (float(q0.t) + t))
        )
        fn = tau_to_fn(complex(-q0.torus_shift / n, im))
        return np.array([math.log(fn.l), fn.s * fn.l])
    except DomainError:
        return np.array([math.log(2.0 * math.acosh(math.sqrt(2.0))), 0.0])


def minimize(
    p: MeasuredMulticurve,
    m: MeasuredMulticurve,
    t: float,
    warm: FNPoint | None = None,
    tol_grad: float = TOL_GRAD_DEFAULT,
    _warm_u: tuple[float, float] | None = None,
) -> MinimaSample:
    """Unique minimizer of the length functional at time t.

    The reported gradient norm is measured in the twist-normalized marking,
    where the solve is well conditioned.
    """
    if not fills(p, m):
        raise SolverError("the pair does not fill: the objective is not proper")
    q0, g, p_n, m_n = _normalized_problem(p, m)
    if _warm_u is not None:
        u0 = np.array(_warm_u, dtype=float)
    elif warm is not None:
        warm_n = fn_in_new_marking(warm, g)
        u0 = np.array([math.log(warm_n.l), warm_n.s * warm_n.l])
    else:
        u0 = _seed_point(q0, t)
    u, f, iters = _bfgs(u0, p_n, m_n, t, tol_grad)
    gvec = _gradient(u, p_n, m_n, t)
    gnorm = float(np.max(np.abs(gvec)))
    # attainable tolerance: a short transverse curve reaches the solver
    # through a trace near two, which floors the finite-difference gradient
    # noise; measure the local jitter and accept down to it, but never let
    # a silently frozen solve pass as converged
    jitter = _gradient_noise(u, p_n, m_n, t)
    tol_eff = max(tol_grad, min(4.0 * jitter, 1e-3))
    if gnorm > 100.0 * tol_eff:
        raise SolverError(
            f"minimizer stalled at t={t}: grad {gnorm:.2e} > {tol_eff:.0e}; "
            "the pinching curve's trace gap is below double resolution"
        )
    fn = fn_in_new_marking(_fn_of(u), invert_unimodular(g))
    # recompute the objective from the Fenchel-Nielsen point; the relabeled
    # coordinates give the same value exactly and stay well conditioned at
    # deeply pinched points
    obj = objective(_fn_of(u), p_n, m_n, t)
    return MinimaSample(
        t=t,
        point=fn,
        objective_value=obj,
        gradient_norm=gnorm,
        solver_iterations=iters,
        flagged_near_cusp=bool(u[0] <= LOG_L_FLOOR + 1e-9),
        normalized_coords=(float(u[0]), float(u[1])),
    )


def minimize_with_restarts(
    p: MeasuredMulticurve,
    m: MeasuredMulticurve,
    t: float,
    restarts: int = 5,
    seed: int = 0,
    tol_grad: float = TOL_GRAD_DEFAULT,
) -> tuple[MinimaSample, float]:
    """Uniqueness audit: re-solve from random perturbations and report the
    largest coordinate disagreement."""
    base = minimize(p, m, t, tol_grad=tol_grad)
    rng = np.random.RandomState(seed)
    _, g, p_n, m_n = _normalized_problem(p, m)
    base_n = fn_in_new_marking(base.point, g)
    u_base = np.array([math.log(base_n.l), base_n.s * base_n.l])
    worst = 0.0
    for _ in range(restarts):
        u0 = u_base + rng.uniform(-0.5, 0.5, size=2)
        u, _, _ = _bfgs(u0, p_n, m_n, t, tol_grad)
        worst = max(worst, float(np.max(np.abs(u - u_base))))
    return base, worst


def trace_line(
    p: MeasuredMulticurve,
    m: MeasuredMulticurve,
    t_grid: list[float],
    tol_grad: float = TOL_GRAD_DEFAULT,
) -> list[MinimaSample]:
    """Warm-started continuation of the minima path over an increasing grid.

    A coordinate jump exceeding ten times the local trend triggers step
    bisection; persistent jumps raise with the offending time.
    """
    if any(b <= a for a, b in zip(t_grid, t_grid[1:])):
        raise DomainError("t grid must be strictly increasing")
    if any(b - a > 0.5 + 1e-12 for a, b in zip(t_grid, t_grid[1:])):
        raise DomainError("grid step must stay at or below one half")
    out: list[MinimaSample] = []
    warm_u: tuple[float, float] | None = None
    trend = None
    for t in t_grid:
        sample = minimize(p, m, t, _warm_u=warm_u, tol_grad=tol_grad)
        if out:
            jump = _u_jump(out[-1].normalized_coords, sample.normalized_coords)
            if trend is not None and jump > 10.0 * max(trend, 1e-6):
                # bisect the step to verify continuity
                t_mid = 0.5 * (out[-1].t + t)
                mid = minimize(
                    p, m, t_mid,
                    _warm_u=out[-1].normalized_coords, tol_grad=tol_grad,
                )
                j1 = _u_jump(out[-1].normalized_coords, mid.normalized_coords)
                j2 = _u_jump(mid.normalized_coords, sample.normalized_coords)
                if max(j1, j2) > 0.75 * jump:
                    sample = minimize(
                        p, m, t,
                        _warm_u=mid.normalized_coords, tol_grad=tol_grad,
                    )
                    jump2 = _u_jump(
                        mid.normalized_coords, sample.normalized_coords
                    )
                    if trend is not None and jump2 > 20.0 * max(trend, 1e-6):
                        raise SolverError(f"minima path jumped at t={t}")
            trend = jump if trend is None else 0.5 * (trend + jump)
        out.append(sample)
        warm_u = sample.normalized_coords
    return out


def _u_jump(a: tuple[float, float], b: tuple[float, float]) -> float:
    return max(abs(b[0] - a[0]), abs(b[1] - a[1]))
