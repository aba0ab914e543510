"""Variational solvers for maximal and distinguished symmetric periodic
orbits, the orbit functionals ell_q, and the asymptotic tail fit.

A periodic configuration of rotation number p/q is a lifted increasing
sequence s_0 < ... < s_{q-1} < s_0 + p * perimeter whose total chord
length is critical. The solver initializes vertices equally spaced in
the Lazutkin coordinate, runs monotone odd/even coordinate-ascent
half-sweeps, and polishes with a banded Newton iteration on the
reflection equations; the final ascent sweep certifies coordinate-wise
maximality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from .boundary import BoundaryDomain
from .errors import ConvergenceFailure, DomainError, IllConditionedFit, SymmetryViolation
from .lazutkin import LazutkinChart, build_chart
from .profiles import EvenProfile

_STEP_TOL = 1e-13
_GRAD_TOL = 1e-11
_MAX_NEWTON = 80
_MAX_CERTIFY = 25


@dataclass(frozen=True)
class RotationNumber:
    """Reduced fraction p/q in (0, 1/2]."""

    p: int
    q: int

    def __post_init__(self):
        if self.q < 2 or self.p < 1:
            raise DomainError(f"need q >= 2 and p >= 1, got {self.p}/{self.q}")
        if math.gcd(self.p, self.q) != 1:
            raise DomainError(f"{self.p}/{self.q} is not in lowest terms")
        if 2 * self.p > self.q:
            raise DomainError(f"rotation number must be <= 1/2, got {self.p}/{self.q}")

    @property
    def value(self) -> float:
        return self.p / self.q


@dataclass(frozen=True)
class PeriodicOrbit:
    """Solved periodic billiard configuration.

    impacts are lifted arc lengths (strictly increasing, s_0 in [0, P));
    angles are the outgoing reflection angles at each impact. The sweep
    perimeters record the monotone-ascent certificate and grad_sup the
    final reflection-law residual.
    """

    rotation: RotationNumber
    impacts: np.ndarray
    angles: np.ndarray
    perimeter_of_orbit: float
    kind: str
    domain: BoundaryDomain = field(repr=False)
    sweep_perimeters: tuple = ()
    grad_sup: float = 0.0

    def lazutkin_impacts(self, chart: LazutkinChart | None = None) -> np.ndarray:
        chart = chart or _chart_of(self.domain)
        return chart.x_of_s(np.mod(self.impacts, self.domain.perimeter))


def _chart_of(domain: BoundaryDomain) -> LazutkinChart:
    chart = getattr(domain, "_brl_chart", None)
    if chart is None:
        chart = build_chart(domain)
        domain._brl_chart = chart
    return chart


class _Configuration:
    """Lifted impact sequence with the geometry arrays needed by the solver."""

    def __init__(self, domain: BoundaryDomain, s_lift: np.ndarray, span: float):
        self.domain = domain
        self.s = s_lift
        self.span = span  # p * perimeter

    def geometry(self, s=None):
        s = self.s if s is None else s
        P = self.domain.perimeter
        pos = self.domain.position(np.mod(s, P))
        tan = self.domain.tangent(np.mod(s, P))
        nrm = np.stack([tan[:, 1], -tan[:, 0]], axis=1)  # outward
        kap = self.domain.curvature(np.mod(s, P))
        d = np.roll(pos, -1, axis=0) - pos
        ell = np.hypot(d[:, 0], d[:, 1])
        u = d / ell[:, None]
        cos_dep = np.einsum("ij,ij->i", u, tan)
        sin_dep = -np.einsum("ij,ij->i", u, nrm)
        cos_arr = np.einsum("ij,ij->i", u, np.roll(tan, -1, axis=0))
        sin_arr = np.einsum("ij,ij->i", u, np.roll(nrm, -1, axis=0))
        return pos, tan, nrm, kap, ell, u, cos_dep, sin_dep, cos_arr, sin_arr

    def perimeter(self, s=None) -> float:
        s = self.s if s is None else s
        P = self.domain.perimeter
        pos = self.domain.position(np.mod(s, P))
        d = np.roll(pos, -1, axis=0) - pos
        return float(np.sum(np.hypot(d[:, 0], d[:, 1])))

    def gradient_and_hessian(self):
        """Gradient of total length and its tridiagonal Hessian bands."""
        _, _, _, kap, ell, _, cos_dep, sin_dep, cos_arr, sin_arr = self.geometry()
        g = np.roll(cos_arr, 1) - cos_dep
        d11 = sin_dep**2 / ell - kap * sin_dep
        d22 = sin_arr**2 / ell - np.roll(kap, -1) * sin_arr
        diag = np.roll(d22, 1) + d11
        off = sin_dep * sin_arr / ell  # couples s_k to s_{k+1}
        return g, diag, off


def _ascent_half_sweep(cfg: _Configuration, parity: int, pinned_first: bool):
    """Vectorized coordinate ascent on every index of the given parity.

    Indices of one parity share no chord, so their 1D maximizations are
    independent and the half-sweep is a simultaneous monotone update.
    Each selected s_k moves toward the 1D maximizer of the two chords
    containing it by guarded Newton steps; updates that fail to improve
    their local objective are rolled back, so the total length never
    decreases. Returns (largest accepted move, largest local gain).
    """
    q = cfg.s.size
    idx = np.arange(parity, q, 2)
    if pinned_first and parity == 0:
        idx = idx[idx != 0]
    if idx.size == 0:
        return 0.0, 0.0
    s = cfg.s
    span = cfg.span
    left = s[idx - 1]
    right = np.where(idx + 1 < q, s[(idx + 1) % q], s[0] + span)
    P = cfg.domain.perimeter

    def local_value(sk):
        pos_k = cfg.domain.position(np.mod(sk, P))
        pos_l = cfg.domain.position(np.mod(left, P))
        pos_r = cfg.domain.position(np.mod(right, P))
        return (np.hypot(*(pos_k - pos_l).T) + np.hypot(*(pos_r - pos_k).T))

    sk = s[idx].copy()
    base_val = local_value(sk)
    for _ in range(8):
        pos_k = cfg.domain.position(np.mod(sk, P))
        tan_k = cfg.domain.tangent(np.mod(sk, P))
        nrm_k = np.stack([tan_k[:, 1], -tan_k[:, 0]], axis=1)
        kap_k = cfg.domain.curvature(np.mod(sk, P))
        d_in = pos_k - cfg.domain.position(np.mod(left, P))
        d_out = cfg.domain.position(np.mod(right, P)) - pos_k
        l_in = np.hypot(d_in[:, 0], d_in[:, 1])
        l_out = np.hypot(d_out[:, 0], d_out[:, 1])
        u_in = d_in / l_in[:, None]
        u_out = d_out / l_out[:, None]
        g = np.einsum("ij,ij->i", u_in - u_out, tan_k)
        sin_in = np.einsum("ij,ij->i", u_in, nrm_k)
        sin_out = -np.einsum("ij,ij->i", u_out, nrm_k)
        h = sin_in**2 / l_in + sin_out**2 / l_out - kap_k * (sin_in + sin_out)
        step = np.where(h < 0.0, -g / h, 0.1 * np.sign(g) * (right - left))
        step = np.where(np.abs(g) > 1e-14, step, 0.0)
        lim = 0.45 * np.minimum(sk - left, right - sk)
        step = np.clip(step, -lim, lim)
        sk = sk + step
        if np.max(np.abs(step)) < _STEP_TOL * P:
            break
    gains = local_value(sk) - base_val
    good = gains >= 0.0
    moved = np.where(good, np.abs(sk - s[idx]), 0.0)
    cfg.s[idx[good]] = sk[good]
    max_gain = float(np.max(np.where(good, gains, 0.0))) if gains.size else 0.0
    return (float(np.max(moved)) if moved.size else 0.0), max_gain


def _ascent_sweep(cfg: _Configuration, pinned_first: bool):
    m1, g1 = _ascent_half_sweep(cfg, 1, pinned_first)
    m0, g0 = _ascent_half_sweep(cfg, 0, pinned_first)
    return max(m0, m1), max(g0, g1)


def _newton_polish(cfg: _Configuration, pinned_first: bool) -> float:
    """Banded (or cyclic) Newton on the reflection equations.

    Returns the final gradient sup norm over the free coordinates.
    """
    q = cfg.s.size
    P = cfg.domain.perimeter
    for _ in range(_MAX_NEWTON):
        g, diag, off = cfg.gradient_and_hessian()
        if pinned_first:
            gf = g[1:]
            if gf.size == 0:
                return float(np.abs(g).max())
            ab = np.zeros((3, q - 1))
            ab[1] = diag[1:]
            ab[0, 1:] = off[1:-1]
            ab[2, :-1] = off[1:-1]
            try:
                delta = solve_banded((1, 1), ab, -gf)
            except Exception as exc:  # singular Hessian: give up to caller
                raise ConvergenceFailure(f"Newton linear solve failed: {exc}") from exc
            full = np.concatenate([[0.0], delta])
        else:
            H = np.diag(diag)
            for k in range(q):
                H[k, (k + 1) % q] += off[k]
                H[(k + 1) % q, k] += off[k]
            try:
                full = np.linalg.solve(H, -g)
            except np.linalg.LinAlgError as exc:
                raise ConvergenceFailure(f"cyclic Newton solve failed: {exc}") from exc
        if np.max(np.abs(gf if pinned_first else g)) < _GRAD_TOL:
            return float(np.max(np.abs(gf if pinned_first else g)))
        base = cfg.perimeter()
        lam = 1.0
        for _ in range(25):
            trial = cfg.s + lam * full
            ext = np.concatenate([trial, [trial[0] + cfg.span]])
            if np.all(np.diff(ext) > 0.0) and cfg.perimeter(trial) >= base - 1e-12 * P:
                break
            lam *= 0.5
        else:
            raise ConvergenceFailure("Newton backtracking failed to keep a valid configuration")
        cfg.s = cfg.s + lam * full
        if np.max(np.abs(lam * full)) < _STEP_TOL * P:
            g, _, _ = cfg.gradient_and_hessian()
            return float(np.max(np.abs(g[1:] if pinned_first and q > 1 else g)))
    raise ConvergenceFailure("orbit Newton iteration exhausted its budget")


def _solve_orbit(domain: BoundaryDomain, rotation: RotationNumber, kind: str,
                 symmetric: bool) -> PeriodicOrbit:
    P = domain.perimeter
    p, q = rotation.p, rotation.q
    span = p * P
    chart = _chart_of(domain)
    x0 = np.arange(q) * (p / q)
    wraps = np.floor(x0)
    s_init = chart.s_of_x(np.mod(x0, 1.0)) + wraps * P
    s_init[0] = 0.0
    cfg = _Configuration(domain, s_init, span)

    sweeps = [cfg.perimeter()]
    _ascent_sweep(cfg, pinned_first=True)
    if symmetric:
        _symmetrize(cfg)
    sweeps.append(cfg.perimeter())

    _newton_polish(cfg, pinned_first=True)
    if symmetric:
        _symmetrize(cfg)
        _newton_polish(cfg, pinned_first=True)
    sweeps.append(cfg.perimeter())

    # certification loop: ascent sweeps must stop improving the length
    for _ in range(_MAX_CERTIFY):
        _, gained = _ascent_sweep(cfg, pinned_first=True)
        if symmetric:
            _symmetrize(cfg)
        sweeps.append(cfg.perimeter())
        if gained < 1e-13 * max(1.0, P):
            break
        _newton_polish(cfg, pinned_first=True)
    else:
        raise ConvergenceFailure("certifying ascent sweeps kept improving")

    g, _, _ = cfg.gradient_and_hessian()
    if not symmetric and abs(g[0]) > 1e-9:
        # anchored point is not a reflection point: release the anchor
        _newton_polish(cfg, pinned_first=False)
        sweeps.append(cfg.perimeter())
        g, _, _ = cfg.gradient_and_hessian()

    grad_sup = float(np.max(np.abs(g)))
    ext = np.concatenate([cfg.s, [cfg.s[0] + span]])
    if not np.all(np.diff(ext) > 0.0):
        raise ConvergenceFailure("final configuration is not cyclically ordered")

    _, _, _, _, _, _, cos_dep, sin_dep, _, _ = cfg.geometry()
    angles = np.arctan2(sin_dep, cos_dep)
    return PeriodicOrbit(
        rotation=rotation,
        impacts=cfg.s.copy(),
        angles=angles,
        perimeter_of_orbit=cfg.perimeter(),
        kind=kind,
        domain=domain,
        sweep_perimeters=tuple(sweeps),
        grad_sup=grad_sup,
    )


def _symmetrize(cfg: _Configuration) -> None:
    """Average a 1/q configuration with its mirror s_k -> span - s_{q-k}."""
    s = cfg.s
    q = s.size
    mirror = np.empty_like(s)
    mirror[0] = 0.0
    mirror[1:] = cfg.span - s[:0:-1]
    cfg.s = 0.5 * (s + mirror)
    cfg.s[0] = 0.0


def max_perimeter_orbit(domain: BoundaryDomain, rotation: RotationNumber) -> PeriodicOrbit:
    """Perimeter-maximizing periodic orbit of the given rotation number.

    Ties among maximizers (rotationally degenerate families) are broken
    by anchoring s_0 = 0; if the anchored critical configuration fails
    the reflection law at the anchor the solve is re-run unanchored.
    """
    return _solve_orbit(domain, rotation, kind="maximal", symmetric=False)


def distinguished_symmetric_orbit(domain: BoundaryDomain, q: int) -> PeriodicOrbit:
    """Symmetric 1/q orbit with s_0 = 0 and s_{-k} = -s_k.

    Requires an axis-symmetric domain anchored with s = 0 on the axis.
    The perimeter-maximal symmetric configuration is selected; the
    defining symmetry is re-checked post hoc.
    """
    if not domain.axis_symmetric:
        raise DomainError("distinguished orbits need an axis-symmetric domain")
    orbit = _solve_orbit(domain, RotationNumber(1, int(q)), kind="distinguished_symmetric",
                         symmetric=True)
    P = domain.perimeter
    s = orbit.impacts
    dev = np.abs(s[:0:-1] + s[1:] - P)
    if dev.size and np.max(dev) > 1e-9 * max(1.0, P):
        raise SymmetryViolation(f"orbit violates s_(-k) = -s_k by {np.max(dev):.3e}")
    return orbit


def _cached_distinguished(domain: BoundaryDomain, q: int) -> PeriodicOrbit:
    cache = getattr(domain, "_brl_orbit_cache", None)
    if cache is None:
        cache = {}
        domain._brl_orbit_cache = cache
    orbit = cache.get(q)
    if orbit is None:
        orbit = distinguished_symmetric_orbit(domain, q)
        cache[q] = orbit
    return orbit


def ell_q(domain: BoundaryDomain, n: EvenProfile, q: int,
          chart: LazutkinChart | None = None) -> float:
    """Orbit functional sum_k n(x_k) sin(phi_k) over the distinguished
    1/q orbit, with impacts read in the Lazutkin coordinate.

    The domain must be normalized to unit perimeter.
    """
    if abs(domain.perimeter - 1.0) > 1e-9:
        raise DomainError("ell_q needs a unit-perimeter domain")
    orbit = _cached_distinguished(domain, q)
    x = orbit.lazutkin_impacts(chart)
    return float(np.sum(n(x) * np.sin(orbit.angles)))


def _weight_grid(chart: LazutkinChart, size: int = 8192):
    cached = getattr(chart, "_brl_weight_grid", None)
    if cached is None or cached[0].size != size:
        xg = np.arange(size) / size
        cached = (xg, chart.m_of_x(xg))
        chart._brl_weight_grid = cached
    return cached


def delta_weighted(domain: BoundaryDomain, n: EvenProfile, q: int,
                   chart: LazutkinChart | None = None, mean_grid: int = 8192) -> float:
    """Aliasing functional Delta(m n)_q of the weighted profile.

    Samples g = m * n at the q-point uniform grid in x and subtracts its
    mean computed by the (spectrally accurate) trapezoid rule.
    """
    chart = chart or _chart_of(domain)
    k = np.arange(q) / q
    g_samples = chart.m_of_x(k) * n(k)
    xg, wg = _weight_grid(chart, mean_grid)
    mean = float(np.mean(wg * n(xg)))
    return float(np.mean(g_samples) - mean)


@dataclass(frozen=True)
class TailFit:
    """Least-squares head coefficients of the orbit-functional expansion."""

    ell0_hat: float
    ellbullet_hat: float
    residuals: np.ndarray
    q_values: np.ndarray
    raw_values: np.ndarray  # ell_q(n) - Delta(m n)_q before the fit


def expansion_tail_fit(domain: BoundaryDomain, n: EvenProfile, q_values,
                       chart: LazutkinChart | None = None) -> TailFit:
    """Fit ell_q(n) - Delta(m n)_q against {1, q^-2, q^-4}.

    Returns the coefficients of 1 and q^-2 plus per-q residuals of the
    full three-term fit; the q^-4 coefficient absorbs the next order.
    """
    q_values = np.asarray(sorted(int(q) for q in q_values))
    if q_values.size < 8:
        raise DomainError("expansion_tail_fit needs at least 8 q values")
    chart = chart or _chart_of(domain)
    vals = np.array([ell_q(domain, n, int(q), chart) - delta_weighted(domain, n, int(q), chart)
                     for q in q_values])
    qf = q_values.astype(float)
    A = np.stack([np.ones_like(qf), qf**-2.0, qf**-4.0], axis=1)
    # weight by q^4 so the head coefficients are pinned where they
    # dominate; otherwise the omitted q^-6 tail biases the intercept
    w = qf**4.0
    Aw = A * w[:, None]
    col = np.linalg.norm(Aw, axis=0)
    Ae = Aw / col
    gram = Ae.T @ Ae
    cond = float(np.linalg.cond(gram))
    if cond > 1e12:
        raise IllConditionedFit(f"normal equations condition number {cond:.3e}")
    coef, *_ = np.linalg.lstsq(Ae, vals * w, rcond=None)
    coef = coef / col
    resid = vals - A @ coef
    return TailFit(ell0_hat=float(coef[0]), ellbullet_hat=float(coef[1]),
                   residuals=resid, q_values=q_values, raw_values=vals)
