"""The billiard map, its generating function, and elliptic invariants.

Phase points are (s, phi) with s the arc length of the impact and phi
in (0, pi) the angle of the outgoing ray measured from the positive
tangent direction, so the outgoing direction is
cos(phi) * tangent + sin(phi) * inward_normal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .boundary import BoundaryDomain, EllipseDomain
from .errors import ConvergenceFailure, DegenerateChord, DomainError

_SCAN_NODES = 64
_ROOT_TOL = 1e-12


@dataclass(frozen=True)
class PhasePoint:
    """Billiard state: impact arc length s and reflection angle phi."""

    s: float
    phi: float

    def __post_init__(self):
        if not 0.0 < self.phi < math.pi:
            raise DomainError(f"phi must lie in (0, pi), got {self.phi}")


@dataclass(frozen=True)
class StepResult:
    """Next phase point together with the chord just traversed."""

    point: PhasePoint
    chord_length: float


def _ellipse_next_param(domain: EllipseDomain, phi_b: float, vx: float, vy: float):
    """Second intersection of the ray with the ellipse, in closed form."""
    a, b = domain.a, domain.b
    x0, y0 = a * math.cos(phi_b), b * math.sin(phi_b)
    qa = (vx / a) ** 2 + (vy / b) ** 2
    qb = 2.0 * (x0 * vx / a**2 + y0 * vy / b**2)
    t = -qb / qa
    x1, y1 = x0 + t * vx, y0 + t * vy
    return math.atan2(y1 / b, x1 / a) % (2.0 * math.pi), t


def billiard_step(domain: BoundaryDomain, p: PhasePoint) -> StepResult:
    """Advance one bounce: next impact point and reflected angle.

    Raises ConvergenceFailure when the second boundary intersection
    cannot be bracketed, which signals inconsistent domain data.
    """
    if isinstance(domain, EllipseDomain):
        return _billiard_step_ellipse(domain, p)
    return _billiard_step_generic(domain, p)


def _billiard_step_ellipse(domain: EllipseDomain, p: PhasePoint) -> StepResult:
    phi_b = domain.param_of_arclength(p.s)
    u = domain.param_speed(phi_b)
    tx, ty = -domain.a * math.sin(phi_b) / u, domain.b * math.cos(phi_b) / u
    nx, ny = -ty, tx  # inward normal
    c, s = math.cos(p.phi), math.sin(p.phi)
    vx, vy = c * tx + s * nx, c * ty + s * ny
    phi_b1, chord = _ellipse_next_param(domain, phi_b, vx, vy)
    u1 = domain.param_speed(phi_b1)
    t1x, t1y = -domain.a * math.sin(phi_b1) / u1, domain.b * math.cos(phi_b1) / u1
    # reflect: keep tangential component, flip normal component
    n1x, n1y = t1y, -t1x  # outward normal
    vdotn = vx * n1x + vy * n1y
    wx, wy = vx - 2.0 * vdotn * n1x, vy - 2.0 * vdotn * n1y
    phi_new = math.atan2(-(wx * n1x + wy * n1y), wx * t1x + wy * t1y)
    s1 = domain.arclength_of_param(phi_b1)
    return StepResult(PhasePoint(s1, phi_new), chord)


def _billiard_step_generic(domain: BoundaryDomain, p: PhasePoint) -> StepResult:
    P = domain.perimeter
    p0 = domain.position(p.s)
    t0 = domain.tangent(p.s)
    n0 = np.array([-t0[1], t0[0]])  # inward
    c, s = math.cos(p.phi), math.sin(p.phi)
    v = c * t0 + s * n0
    v_perp = np.array([-v[1], v[0]])

    def height(offset):
        pos = domain.position(p.s + offset)
        return (pos - p0) @ v_perp

    # the chord line meets the boundary at offset 0 and at the target;
    # height keeps one sign on each arc between them
    lo, hi = None, None
    grid = np.linspace(0.0, P, _SCAN_NODES + 2)[1:-1]
    h_vals = [height(g) for g in grid]
    for i in range(len(grid) - 1):
        if h_vals[i] == 0.0:
            lo = hi = grid[i]
            break
        if h_vals[i] * h_vals[i + 1] < 0.0:
            lo, hi = grid[i], grid[i + 1]
            break
    if lo is None:
        # target is near one endpoint of the scan range: refine geometrically
        for shrink in range(1, 40):
            d = P * 0.5**shrink / _SCAN_NODES
            for cand_lo, cand_hi in ((d, grid[0]), (grid[-1], P - d)):
                ha, hb = height(cand_lo), height(cand_hi)
                if ha * hb < 0.0:
                    lo, hi = cand_lo, cand_hi
                    break
            if lo is not None:
                break
        if lo is None:
            raise ConvergenceFailure("could not bracket the second ray intersection")
    # bisection then Newton polish
    ha = height(lo)
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        hm = height(mid)
        if ha * hm <= 0.0:
            hi = mid
        else:
            lo, ha = mid, hm
    off = 0.5 * (lo + hi)
    for _ in range(20):
        t_here = domain.tangent(p.s + off)
        deriv = t_here @ v_perp
        step = height(off) / deriv
        off -= step
        if abs(step) < _ROOT_TOL * P:
            break
    else:
        raise ConvergenceFailure("Newton polish of the ray intersection stalled")

    s1 = (p.s + off) % P
    p1 = domain.position(s1)
    chordv = p1 - p0
    chord = float(np.hypot(chordv[0], chordv[1]))
    t1 = domain.tangent(s1)
    n1 = np.array([t1[1], -t1[0]])  # outward
    vdotn = float(v @ n1)
    w = v - 2.0 * vdotn * n1
    phi_new = math.atan2(-(w @ n1), w @ t1)
    return StepResult(PhasePoint(float(s1), float(phi_new)), chord)


def reverse(p: PhasePoint) -> PhasePoint:
    """Reverse the velocity at an impact: phi -> pi - phi."""
    return PhasePoint(p.s, math.pi - p.phi)


def ellipse_orbit(domain: EllipseDomain, phi_b0: float, phi0: float, n_steps: int):
    """Fast orbit iteration on an ellipse, in the boundary parameter.

    Starts at gamma(phi_b0) with reflection angle phi0 and returns
    (phi_b, phi, chords): boundary parameters and angles at the n+1
    impacts and the n chord lengths. The loop works in closed form, so
    arc lengths and Lazutkin coordinates can be attached afterwards with
    the vectorized maps.
    """
    a, b = domain.a, domain.b
    sin, cos, atan2, hypot = math.sin, math.cos, math.atan2, math.hypot
    phi_bs = np.empty(n_steps + 1)
    phis = np.empty(n_steps + 1)
    chords = np.empty(n_steps)
    pb = phi_b0 % (2.0 * math.pi)
    # outgoing direction at the start
    sb, cb = sin(pb), cos(pb)
    u = hypot(a * sb, b * cb)
    tx, ty = -a * sb / u, b * cb / u
    vx = cos(phi0) * tx + sin(phi0) * (-ty)
    vy = cos(phi0) * ty + sin(phi0) * (tx)
    phi_bs[0], phis[0] = pb, phi0
    a2, b2 = a * a, b * b
    for i in range(n_steps):
        sb, cb = sin(pb), cos(pb)
        x0, y0 = a * cb, b * sb
        qa = vx * vx / a2 + vy * vy / b2
        qb = 2.0 * (x0 * vx / a2 + y0 * vy / b2)
        t = -qb / qa
        x1, y1 = x0 + t * vx, y0 + t * vy
        pb = atan2(y1 / b, x1 / a) % (2.0 * math.pi)
        sb1, cb1 = sin(pb), cos(pb)
        u1 = hypot(a * sb1, b * cb1)
        t1x, t1y = -a * sb1 / u1, b * cb1 / u1
        n1x, n1y = t1y, -t1x
        vdotn = vx * n1x + vy * n1y
        vx, vy = vx - 2.0 * vdotn * n1x, vy - 2.0 * vdotn * n1y
        phi_bs[i + 1] = pb
        phis[i + 1] = atan2(-(vx * n1x + vy * n1y), vx * t1x + vy * t1y)
        chords[i] = t
    return phi_bs, phis, chords


def iterate(domain: BoundaryDomain, p: PhasePoint, n_steps: int):
    """Iterate the billiard map, keeping a lifted arc-length coordinate.

    Returns arrays (s_lifted, phi, chords) of lengths n+1, n+1, n.
    """
    P = domain.perimeter
    s_lift = np.empty(n_steps + 1)
    phis = np.empty(n_steps + 1)
    chords = np.empty(n_steps)
    s_lift[0], phis[0] = p.s, p.phi
    cur = p
    lift = p.s
    for i in range(n_steps):
        res = billiard_step(domain, cur)
        adv = (res.point.s - cur.s) % P
        lift += adv
        cur = res.point
        s_lift[i + 1] = lift
        phis[i + 1] = cur.phi
        chords[i] = res.chord_length
    return s_lift, phis, chords


def generating_value_and_partials(domain: BoundaryDomain, s0: float, s1: float):
    """Generating function L(s0, s1) = -|gamma(s1) - gamma(s0)| and partials.

    dL/ds0 = <u, T(s0)> and dL/ds1 = -<u, T(s1)> with u the unit chord
    vector from gamma(s0) to gamma(s1).
    """
    g0 = domain.position(s0)
    g1 = domain.position(s1)
    chord = g1 - g0
    dist = float(np.hypot(chord[0], chord[1]))
    if dist < 1e-12 * domain.perimeter:
        raise DegenerateChord(f"chord between s0={s0} and s1={s1} is degenerate")
    u = chord / dist
    dL0 = float(u @ domain.tangent(s0))
    dL1 = float(-(u @ domain.tangent(s1)))
    return -dist, dL0, dL1


def joachimsthal_invariant(domain: EllipseDomain, p: PhasePoint) -> float:
    """Conserved quantity X vX / a^2 + Y vY / b^2 along elliptic orbits."""
    if not isinstance(domain, EllipseDomain):
        raise DomainError("Joachimsthal invariant requires an ellipse")
    phi_b = domain.param_of_arclength(p.s)
    X, Y = domain.a * math.cos(phi_b), domain.b * math.sin(phi_b)
    u = domain.param_speed(phi_b)
    tx, ty = -domain.a * math.sin(phi_b) / u, domain.b * math.cos(phi_b) / u
    nx, ny = -ty, tx
    c, s = math.cos(p.phi), math.sin(p.phi)
    vx, vy = c * tx + s * nx, c * ty + s * ny
    return X * vx / domain.a**2 + Y * vy / domain.b**2


@dataclass(frozen=True)
class CausticResult:
    """Caustic parameter of a chord and the type of the confocal conic."""

    lam: float
    hyperbolic: bool


def caustic_parameter(domain: EllipseDomain, p: PhasePoint) -> CausticResult:
    """Confocal caustic parameter lambda = -a b J of the outgoing chord.

    For lambda in (0, b) the chord stays tangent to the confocal ellipse
    C_lambda; lambda >= b flags a hyperbolic caustic (the orbit crosses
    the focal segment) without raising.
    """
    J = joachimsthal_invariant(domain, p)
    lam = -domain.a * domain.b * J
    return CausticResult(lam=float(lam), hyperbolic=bool(lam >= domain.b))


def caustic_tangency_distance(domain: EllipseDomain, lam: float,
                              point: np.ndarray, direction: np.ndarray) -> float:
    """Distance between a chord line and the confocal ellipse C_lambda.

    Uses the support function of C_lambda: a line u.x = c with |u| = 1 is
    tangent exactly when |c| equals sqrt(A^2 u1^2 + B^2 u2^2).
    """
    if not 0.0 < lam < domain.b:
        raise DomainError("tangency distance needs an elliptic caustic, 0 < lam < b")
    A2 = domain.a**2 - lam**2
    B2 = domain.b**2 - lam**2
    ux, uy = -direction[1], direction[0]
    nrm = math.hypot(ux, uy)
    ux, uy = ux / nrm, uy / nrm
    c = ux * point[0] + uy * point[1]
    support = math.sqrt(A2 * ux**2 + B2 * uy**2)
    return abs(abs(c) - support)
