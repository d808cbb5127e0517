"""Constant-curvature model planes and the timelike four-point condition.

L2(K) is the plane whose TIMELIKE sectional curvature is K (the sign
convention TSec = -Sec on timelike planes, so the classical sectional
curvature is -K). Model charts (universal covers):

  K = 0   Minkowski (t, x)
  K > 0   refocusing cover (timelike geodesics reconverge), chart (T, rho)
          with ds^2 = r^2 (-cosh^2(rho) dT^2 + drho^2),  r = 1/sqrt(K);
          produced tau never exceeds D_K = pi * r
  K < 0   expanding cover, chart (t, theta) with
          ds^2 = -dt^2 + r^2 cosh^2(t/r) dtheta^2,  r = 1/sqrt(-K)

Causality is flat in conformal coordinates (time vs gudermannian of the
other coordinate); time separations come from the quadric bilinear form in
cancellation-free form, cross-validated against geodesic shooting in the
test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import FiniteLorentzSpace
from .errors import ChartDomain, ShapeMismatch, SolverDiverged, Unrealizable
from .extended import NEG_INF


def diameter_bound(K: float) -> float:
    """D_K: pi/sqrt(K) for the refocusing models K > 0, infinite otherwise."""
    if K > 0:
        return math.pi / math.sqrt(K)
    return math.inf


@dataclass(frozen=True)
class ModelPoint:
    K: float
    coords: tuple[float, float]


def model_point(K: float, a: float, b: float) -> ModelPoint:
    return ModelPoint(K=float(K), coords=(float(a), float(b)))


def _gd(x: float) -> float:
    """Gudermannian, the conformal compression of the hyperbolic coordinate."""
    return math.atan(math.sinh(x))


def model_ell(K: float, p: ModelPoint, q: ModelPoint) -> float:
    """Extended time separation from p to q in the model plane L2(K)."""
    if p.K != K or q.K != K:
        raise ShapeMismatch("points carry a different curvature than requested")
    (t1, x1), (t2, x2) = p.coords, q.coords
    if K == 0:
        dt, dx = t2 - t1, x2 - x1
        if dt < 0 or dt < abs(dx):
            return NEG_INF
        return math.sqrt(max(dt * dt - dx * dx, 0.0))
    if K < 0:
        # expanding cover: chart (t, theta), conformal time gd(t/r)
        r = 1.0 / math.sqrt(-K)
        a1, a2 = t1 / r, t2 / r
        deta = _gd(a2) - _gd(a1)
        if deta < 0 or deta < abs(x2 - x1):
            return NEG_INF
        # cosh(a1)cosh(a2)cos(dx) - sinh(a1)sinh(a2) = 1 + x, cancellation-free
        x = 2.0 * math.sinh((a2 - a1) / 2.0) ** 2 \
            - 2.0 * math.cosh(a1) * math.cosh(a2) * math.sin((x2 - x1) / 2.0) ** 2
        x = max(x, 0.0)
        return r * math.asinh(math.sqrt(x * (x + 2.0)))
    # refocusing cover: chart (T, rho), conformal space gd(rho)
    r = 1.0 / math.sqrt(K)
    dT = t2 - t1
    if dT < 0 or dT < abs(_gd(x2) - _gd(x1)):
        return NEG_INF
    if dT > math.pi:
        raise ChartDomain("causal pair beyond the first conjugate regime (dT > pi)")
    # cosh(x1)cosh(x2)cos(dT) - sinh(x1)sinh(x2) = 1 - y, cancellation-free
    y = 2.0 * math.cosh(x1) * math.cosh(x2) * math.sin(dT / 2.0) ** 2 \
        - 2.0 * math.sinh((x2 - x1) / 2.0) ** 2
    y = min(2.0, max(y, 0.0))
    return r * 2.0 * math.asin(math.sqrt(y / 2.0))


def model_tau(K: float, p: ModelPoint, q: ModelPoint) -> float:
    return max(0.0, model_ell(K, p, q))


def model_tau_between(K: float, p: ModelPoint, q: ModelPoint) -> float:
    """Order-free tau: the positive direction wins (0 for spacelike pairs)."""
    forward = model_ell(K, p, q)
    backward = model_ell(K, q, p)
    return max(0.0, forward, backward)


def scale_point(K: float, p: ModelPoint, lam: float) -> ModelPoint:
    """Chart image of p under the rescaling L2(K) -> L2(lam^2 K)."""
    a, b = p.coords
    if K == 0:
        return model_point(0.0, a / lam, b / lam)
    if K < 0:
        return model_point(lam * lam * K, a / lam, b)  # (t, theta): t scales
    return model_point(lam * lam * K, a, b)            # (T, rho): dimensionless


# ---------------------------------------------------------------------------
# comparison configurations
# ---------------------------------------------------------------------------


def _time_axis_point(K: float, tau: float) -> ModelPoint:
    """Point at proper time `tau` up the time axis from the chart origin."""
    if K <= 0:
        return model_point(K, tau, 0.0)  # proper time = chart time on the axis
    r = 1.0 / math.sqrt(K)
    return model_point(K, tau / r, 0.0)


def _interval_residuals(K: float, y: ModelPoint, x: ModelPoint,
                        t_yz: float, t_xz: float):
    """Smooth residual system for the z placement (solved in chart coords)."""
    if K == 0:
        def res(u, v):
            return (u * u - v * v - t_yz * t_yz,
                    (u - x.coords[0]) ** 2 - v * v - t_xz * t_xz)
        return res
    if K < 0:
        # expanding chart (t, theta): bilinear form via cosh of t/r
        r = 1.0 / math.sqrt(-K)
        ay = y.coords[0] / r
        ax = x.coords[0] / r

        def res(u, v):
            a = u / r
            qy = math.cosh(ay) * math.cosh(a) * math.cos(v - y.coords[1]) \
                - math.sinh(ay) * math.sinh(a)
            qx = math.cosh(ax) * math.cosh(a) * math.cos(v - x.coords[1]) \
                - math.sinh(ax) * math.sinh(a)
            return (qy - math.cosh(t_yz / r), qx - math.cosh(t_xz / r))
        return res
    # refocusing chart (T, rho)
    r = 1.0 / math.sqrt(K)
    Ty, ry_ = y.coords
    Tx, rx_ = x.coords

    def res(u, v):
        qy = math.cosh(ry_) * math.cosh(v) * math.cos(u - Ty) \
            - math.sinh(ry_) * math.sinh(v)
        qx = math.cosh(rx_) * math.cosh(v) * math.cos(u - Tx) \
            - math.sinh(rx_) * math.sinh(v)
        return (qy - math.cos(t_yz / r), qx - math.cos(t_xz / r))
    return res


def _flat_z(a: float, t_yz: float, t_xz: float) -> tuple[float, float]:
    """Closed-form Minkowski placement (positive-side branch)."""
    t = (a * a + t_yz * t_yz - t_xz * t_xz) / (2 * a)
    under = t * t - t_yz * t_yz
    if under < 0:
        if under > -1e-12:  # collinear within roundoff
            under = 0.0
        else:
            raise Unrealizable("tau_yz < tau_yx + tau_xz",
                               "sides admit no model placement")
    return t, math.sqrt(under)


def _solve_z(K: float, y: ModelPoint, x: ModelPoint, t_yx: float,
             t_yz: float, t_xz: float, tol: float = 1e-10) -> ModelPoint:
    """Place z with tau(y,z) = t_yz, tau(x,z) = t_xz on the positive side."""
    collinear = abs(t_yz - (t_yx + t_xz)) <= 1e-12 * max(1.0, t_yz)
    if collinear:
        return _time_axis_point(K, t_yz)
    if t_yz < t_yx + t_xz - 1e-12:
        raise Unrealizable("tau_yz < tau_yx + tau_xz",
                           "reverse triangle fails in the model")
    tf, xf = _flat_z(t_yx, t_yz, t_xz)
    if K == 0:
        return model_point(0.0, tf, xf)
    res = _interval_residuals(K, y, x, t_yz, t_xz)
    if K < 0:
        r = 1.0 / math.sqrt(-K)
        inits = [(tf, xf / (r * math.cosh(tf / (2 * r)))), (tf, xf / r), (tf, 0.5 * xf / r)]
    else:
        r = 1.0 / math.sqrt(K)
        inits = [(tf / r, xf / r), (tf / r, 0.5 * xf / r), (tf / r, 1.5 * xf / r)]
    def safe_res(u, v):
        try:
            f = res(u, v)
        except OverflowError:
            return None
        if not (math.isfinite(f[0]) and math.isfinite(f[1])):
            return None
        return f

    h = 1e-7
    for u0, v0 in inits:
        u, v = u0, max(v0, 1e-9)
        ok = False
        for _ in range(80):
            f = safe_res(u, v)
            if f is None:
                break
            f1, f2 = f
            norm = math.hypot(f1, f2)
            if norm < tol / 10:
                ok = True
                break
            # numerical Jacobian, central differences
            rp, rm = safe_res(u + h, v), safe_res(u - h, v)
            cp, cm = safe_res(u, v + h), safe_res(u, v - h)
            if None in (rp, rm, cp, cm):
                break
            j11 = (rp[0] - rm[0]) / (2 * h)
            j12 = (cp[0] - cm[0]) / (2 * h)
            j21 = (rp[1] - rm[1]) / (2 * h)
            j22 = (cp[1] - cm[1]) / (2 * h)
            det = j11 * j22 - j12 * j21
            if abs(det) < 1e-300:
                break
            du = (f1 * j22 - f2 * j12) / det
            dv = (j11 * f2 - j21 * f1) / det
            step = 1.0
            while step > 1e-6:
                n = safe_res(u - step * du, v - step * dv)
                if n is not None and math.hypot(*n) < norm:
                    u, v = u - step * du, v - step * dv
                    break
                step /= 2
            else:
                break
        if ok:
            z = model_point(K, u, abs(v))
            try:
                if model_ell(K, y, z) == NEG_INF or model_ell(K, x, z) == NEG_INF:
                    continue  # converged to a spurious non-causal branch
            except ChartDomain:
                continue  # spurious branch past the conjugate locus
            return _polish_tau(K, y, x, z, t_yz, t_xz, tol)
    raise SolverDiverged(f"comparison placement did not converge for K={K}")


def _polish_tau(K: float, y: ModelPoint, x: ModelPoint, z: ModelPoint,
                t_yz: float, t_xz: float, tol: float) -> ModelPoint:
    """Newton steps on the tau residuals themselves.

    The interval-form solve leaves tau residuals above tol when a side is
    small (the arccos/arccosh derivative blows up), so finish in tau space.
    """
    u, v = z.coords
    h = 1e-8

    def res(uu, vv):
        zz = model_point(K, uu, vv)
        try:
            a = model_ell(K, y, zz)
            b = model_ell(K, x, zz)
        except ChartDomain:
            return None
        if a == NEG_INF or b == NEG_INF:
            return None
        return (a - t_yz, b - t_xz)

    for _ in range(30):
        f = res(u, v)
        if f is None:
            break
        norm = math.hypot(*f)
        if norm < tol / 10:
            break
        rp, rm = res(u + h, v), res(u - h, v)
        cp, cm = res(u, v + h), res(u, v - h)
        if None in (rp, rm, cp, cm):
            break
        j11 = (rp[0] - rm[0]) / (2 * h)
        j12 = (cp[0] - cm[0]) / (2 * h)
        j21 = (rp[1] - rm[1]) / (2 * h)
        j22 = (cp[1] - cm[1]) / (2 * h)
        det = j11 * j22 - j12 * j21
        if abs(det) < 1e-300:
            break
        du = (f[0] * j22 - f[1] * j12) / det
        dv = (j11 * f[1] - j21 * f[0]) / det
        step = 1.0
        while step > 1e-6:
            nf = res(u - step * du, v - step * dv)
            if nf is not None and math.hypot(*nf) < norm:
                u, v = u - step * du, v - step * dv
                break
            step /= 2
        else:
            break
    return model_point(K, u, abs(v))


@dataclass(frozen=True)
class ComparisonConfig:
    y: ModelPoint
    x: ModelPoint
    z1: ModelPoint
    z2: ModelPoint
    residual: float


def comparison_config(K: float, sides: Sequence[float], tol: float = 1e-10) -> ComparisonConfig:
    """Realize the five sides (t_yx, t_yz1, t_yz2, t_xz1, t_xz2) in L2(K).

    Gauge: y at the chart origin, x up the positive time axis; z1 on the
    positive side of that axis, z2 on the negative (opposite sides). The
    realized sides are re-measured and must match within `tol`.
    """
    t_yx, t_yz1, t_yz2, t_xz1, t_xz2 = (float(s) for s in sides)
    if not (t_yx > 0):
        raise Unrealizable("tau_yx <= 0", "y and x must be chronologically related")
    dk = diameter_bound(K)
    for name, val in (("tau_yx", t_yx), ("tau_yz1", t_yz1), ("tau_yz2", t_yz2),
                      ("tau_xz1", t_xz1), ("tau_xz2", t_xz2)):
        if val < 0:
            raise Unrealizable(f"{name} < 0")
        if val >= dk:
            raise Unrealizable(f"{name} >= D_K")
    for i, t_yz in ((1, t_yz1), (2, t_yz2)):
        if t_yz < t_yx:
            raise Unrealizable(f"tau_yz{i} < tau_yx")

    y = model_point(K, 0.0, 0.0)
    x = _time_axis_point(K, t_yx)
    z1 = _solve_z(K, y, x, t_yx, t_yz1, t_xz1, tol)
    z2m = _solve_z(K, y, x, t_yx, t_yz2, t_xz2, tol)
    z2 = model_point(K, z2m.coords[0], -z2m.coords[1])  # mirror to the opposite side

    residual = max(
        abs(model_tau(K, y, x) - t_yx),
        abs(model_tau(K, y, z1) - t_yz1),
        abs(model_tau(K, y, z2) - t_yz2),
        abs(model_tau(K, x, z1) - t_xz1),
        abs(model_tau(K, x, z2) - t_xz2),
    )
    if residual > tol:
        raise SolverDiverged(f"comparison residual {residual:.3e} exceeds {tol:.1e}")
    return ComparisonConfig(y=y, x=x, z1=z1, z2=z2, residual=residual)


# ---------------------------------------------------------------------------
# four-point condition on finite spaces
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FourPointConfig:
    kind: str                       # "future" | "past"
    points: tuple[int, int, int, int]  # (y, x, z1, z2)


def _config_sides(space: FiniteLorentzSpace, cfg: FourPointConfig):
    y, x, z1, z2 = cfg.points
    if cfg.kind == "future":
        ok = space.chron[y, x] and space.chron[x, z1] and space.causal[z1, z2]
        tau = space.tau
        pattern = (tau(y, x), tau(y, z1), tau(y, z2), tau(x, z1), tau(x, z2),
                   tau(z1, z2), tau(y, z2))
    elif cfg.kind == "past":
        # past configurations are future ones of the time-reversed space
        ok = space.chron[x, y] and space.chron[z1, x] and space.causal[z2, z1]
        tau = space.tau
        pattern = (tau(x, y), tau(z1, y), tau(z2, y), tau(z1, x), tau(z2, x),
                   tau(z2, z1), tau(z2, y))
    else:
        raise ShapeMismatch(f"unknown configuration kind {cfg.kind!r}")
    if not ok:
        raise ShapeMismatch(f"points {cfg.points} do not form a {cfg.kind} four-point configuration")
    return pattern


def four_point_check(space: FiniteLorentzSpace, cfg: FourPointConfig, K: float,
                     tol: float = 1e-9) -> dict:
    """Compare tau(z1, z2) against the model value; holds iff slack >= -tol."""
    t_yx, t_yz1, t_yz2, t_xz1, t_xz2, t_z, t_guard = _config_sides(space, cfg)
    if t_guard >= diameter_bound(K):
        raise Unrealizable("tau(y, z2) >= D_K")
    comp = comparison_config(K, (t_yx, t_yz1, t_yz2, t_xz1, t_xz2))
    model_val = model_tau_between(K, comp.z1, comp.z2)
    slack = t_z - model_val
    return {"holds": bool(slack >= -tol), "slack": float(slack),
            "model_tau": float(model_val), "residual": comp.residual}


def curvature_bound_scan(space: FiniteLorentzSpace, K: float, budget: int,
                         seed: int, tol: float = 1e-9) -> dict:
    """Sample admissible four-point configurations and report violations.

    Stagewise uniform drawing (y, then x in I+(y), then z1 in I+(x), then z2
    in J+(z1)), seeded; `tested` counts evaluated configurations.
    """
    rng = np.random.default_rng(seed)
    dk = diameter_bound(K)
    ys = [i for i in range(space.n) if space.chron[i, :].any()]
    tested = 0
    violations = []
    attempts = 0
    max_attempts = max(budget * 20, 100)
    while tested < budget and attempts < max_attempts and ys:
        attempts += 1
        y = int(rng.choice(ys))
        xs = np.flatnonzero(space.chron[y, :])
        xs = xs[[bool(space.chron[x, :].any()) for x in xs]]
        if xs.size == 0:
            continue
        x = int(rng.choice(xs))
        z1s = np.flatnonzero(space.chron[x, :])
        if z1s.size == 0:
            continue
        z1 = int(rng.choice(z1s))
        z2s = np.flatnonzero(space.causal[z1, :])
        if z2s.size == 0:
            continue
        z2 = int(rng.choice(z2s))
        if space.tau(y, z2) >= dk:
            continue
        cfg = FourPointConfig(kind="future", points=(y, x, z1, z2))
        try:
            result = four_point_check(space, cfg, K, tol)
        except (Unrealizable, SolverDiverged, ChartDomain):
            continue
        tested += 1
        if not result["holds"]:
            violations.append({"points": cfg.points, "slack": result["slack"]})
    return {"violations": violations, "tested": tested}


# ---------------------------------------------------------------------------
# geodesic-shooting oracle (used by the tests to validate the closed forms)
# ---------------------------------------------------------------------------


def geodesic_tau_oracle(K: float, p: ModelPoint, q: ModelPoint) -> float:
    """Proper time along the connecting timelike geodesic, by shooting.

    Independent of the bilinear-form path: the expanding models (K < 0)
    integrate the reduced quadrature in the time coordinate, the refocusing
    models (K > 0) shoot the full geodesic ODE over the initial rapidity.
    """
    from scipy.integrate import quad, solve_ivp
    from scipy.optimize import brentq

    if K == 0:
        dt = q.coords[0] - p.coords[0]
        dx = q.coords[1] - p.coords[1]
        return math.sqrt(dt * dt - dx * dx)

    if K < 0:
        r = 1.0 / math.sqrt(-K)
        a1, a2 = p.coords[0] / r, q.coords[0] / r
        dth = q.coords[1] - p.coords[1]
        if a2 <= a1 and dth == 0:
            return 0.0

        def theta_gain(J):
            val, _ = quad(lambda u: (J / math.cosh(u) ** 2)
                          / math.sqrt(1 + J * J / math.cosh(u) ** 2), a1, a2,
                          limit=200)
            return val - dth

        hi = 1.0
        while theta_gain(hi) < 0:
            hi *= 2
            if hi > 1e8:
                raise SolverDiverged("oracle shooting failed (expanding model)")
        lo = -1.0
        while theta_gain(lo) > 0:
            lo *= 2
            if lo < -1e8:
                raise SolverDiverged("oracle shooting failed (expanding model)")
        J = brentq(theta_gain, lo, hi, xtol=1e-14)
        val, _ = quad(lambda u: 1.0 / math.sqrt(1 + J * J / math.cosh(u) ** 2),
                      a1, a2, limit=200)
        return r * val

    r = 1.0 / math.sqrt(K)
    T1, r1 = p.coords
    T2, r2 = q.coords

    def shoot(chi):
        # unit timelike initial velocity: T' = cosh(chi)/cosh(rho), rho' = sinh(chi)
        def rhs(_, state):
            T, rho, Tp, rp = state
            return [Tp, rp,
                    -2 * math.tanh(rho) * Tp * rp,
                    -math.cosh(rho) * math.sinh(rho) * Tp * Tp]

        def hit(_, state):
            return state[0] - T2
        hit.terminal = True
        hit.direction = 1
        v0 = [T1, r1, math.cosh(chi) / math.cosh(r1), math.sinh(chi)]
        sol = solve_ivp(rhs, (0.0, 4.0 * math.pi), v0, events=hit,
                        rtol=1e-11, atol=1e-12, dense_output=True)
        if not sol.t_events[0].size:
            return None, None
        s_hit = float(sol.t_events[0][0])
        rho_hit = float(sol.y_events[0][0][1])
        return s_hit, rho_hit

    def miss(chi):
        _, rho_hit = shoot(chi)
        if rho_hit is None:
            raise SolverDiverged("oracle shooting failed (K < 0)")
        return rho_hit - r2

    lo, hi = -5.0, 5.0
    flo, fhi = miss(lo), miss(hi)
    if flo * fhi > 0:
        raise SolverDiverged("oracle bracketing failed (K < 0)")
    chi = brentq(miss, lo, hi, xtol=1e-13)
    s_hit, _ = shoot(chi)
    return r * s_hit
