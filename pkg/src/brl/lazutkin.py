"""Lazutkin coordinates: the boundary chart x, the fiber scale y, and
the weight profile m used by the orbit functionals.

The chart normalizes the integral of rho^(-2/3) over the boundary:
x(s) = C * integral_0^s rho^(-2/3), with C the reciprocal of the full
integral, and m(x) = 1 / (2 C rho(x)). In these coordinates one bounce
is a near-identity twist, which near_identity_residual quantifies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .boundary import BoundaryDomain
from .dynamics import PhasePoint, billiard_step
from .errors import QuadratureFailure

_GRID = 4096
_GL_NODES = 8


class LazutkinChart:
    """Arc length <-> Lazutkin x maps for one immutable domain.

    The cumulative integral of rho^(-2/3) is accumulated with composite
    Gauss-Legendre panels on a fine grid; point queries integrate the
    residual sub-interval with the same rule, so chart evaluations are
    spectrally accurate rather than interpolated.
    """

    def __init__(self, domain: BoundaryDomain, grid: int = _GRID):
        self.domain = domain
        P = domain.perimeter
        s_grid = np.linspace(0.0, P, grid + 1)
        gl_x, gl_w = np.polynomial.legendre.leggauss(_GL_NODES)
        h = s_grid[1] - s_grid[0]
        mid = 0.5 * (s_grid[:-1] + s_grid[1:])
        nodes = mid[:, None] + 0.5 * h * gl_x[None, :]
        vals = self._integrand(nodes.ravel()).reshape(nodes.shape)
        seg = 0.5 * h * vals @ gl_w
        cum = np.concatenate([[0.0], np.cumsum(seg)])
        total = float(cum[-1])
        if not math.isfinite(total) or total <= 0.0:
            raise QuadratureFailure("rho^(-2/3) integral is not finite and positive")
        self._gl = (gl_x, gl_w)
        self._s_grid = s_grid
        self._cum = cum
        self.C = 1.0 / total
        self._grid = grid

    def _integrand(self, s):
        rho = 1.0 / np.asarray(self.domain.curvature(s), dtype=float)
        vals = rho ** (-2.0 / 3.0)
        if not np.all(np.isfinite(vals)):
            raise QuadratureFailure("curvature produced non-finite values")
        return vals

    def x_of_s(self, s):
        """Lazutkin coordinate in [0, 1) of the point at arc length s."""
        s = np.asarray(s, dtype=float)
        scalar = not s.shape
        P = self.domain.perimeter
        sm = np.mod(s, P)
        idx = np.clip(np.searchsorted(self._s_grid, sm) - 1, 0, self._grid - 1)
        s0 = self._s_grid[idx]
        gl_x, gl_w = self._gl
        half = 0.5 * (sm - s0)
        nodes = (s0 + half)[..., None] + half[..., None] * gl_x
        vals = self._integrand(nodes.reshape(-1)).reshape(nodes.shape)
        x = (self._cum[idx] + half * (vals @ gl_w)) * self.C
        return float(x) if scalar else x

    def s_of_x(self, x):
        """Invert the chart by Newton; accepts scalars or arrays."""
        x = np.asarray(x, dtype=float)
        scalar = not x.shape
        P = self.domain.perimeter
        xm = np.mod(x, 1.0)
        idx = np.clip(np.searchsorted(self._cum * self.C, xm) - 1, 0, self._grid - 1)
        gap = self.C * (self._cum[idx + 1] - self._cum[idx])
        frac = (xm - self.C * self._cum[idx]) / gap
        s = self._s_grid[idx] + frac * (self._s_grid[idx + 1] - self._s_grid[idx])
        for _ in range(8):
            resid = self.x_of_s(s) - xm
            s = s - resid / (self.C * self._integrand(np.mod(s, P)))
            if np.max(np.abs(resid)) < 1e-14:
                break
        s = np.mod(s, P)
        return float(s) if scalar else s

    def rho_of_x(self, x):
        return 1.0 / np.asarray(self.domain.curvature(self.s_of_x(x)), dtype=float)

    def m_of_x(self, x):
        """Weight profile m(x) = 1 / (2 C rho(x)^(1/3)), strictly positive.

        This is the asymptotic per-bounce weight of the orbit sums:
        q * sin(phi_k) -> m(x_k) along 1/q orbits. It is dimensionless
        and scale invariant (constant pi on any disk).
        """
        m = 1.0 / (2.0 * self.C * self.rho_of_x(x) ** (1.0 / 3.0))
        return float(m) if np.isscalar(x) or not np.asarray(x).shape else m

    def y_of(self, s, phi):
        """Fiber coordinate y = 4 C rho^(1/3)(s) sin(phi / 2)."""
        rho = 1.0 / np.asarray(self.domain.curvature(s), dtype=float)
        y = 4.0 * self.C * rho ** (1.0 / 3.0) * np.sin(np.asarray(phi) / 2.0)
        return float(y) if not np.asarray(s).shape else y


def build_chart(domain: BoundaryDomain) -> LazutkinChart:
    """Build the Lazutkin chart of a domain (as given, no rescaling)."""
    return LazutkinChart(domain)


def lazutkin_y(domain: BoundaryDomain, s, phi, chart: LazutkinChart | None = None):
    """Fiber coordinate y = 4 C rho^(1/3)(s) sin(phi/2) of a phase point."""
    if chart is None:
        chart = build_chart(domain)
    return chart.y_of(s, phi)


@dataclass(frozen=True)
class NearIdentityReport:
    """Per-sample twist residuals and their worst-case ratios."""

    x: np.ndarray
    y: np.ndarray
    x_residual: np.ndarray  # |x1 - x - y|
    y_residual: np.ndarray  # |y1 - y|
    max_ratio_x: float  # max |x1 - x - y| / y^3
    max_ratio_y: float  # max |y1 - y| / y^4


def near_identity_residual(domain: BoundaryDomain, samples,
                           chart: LazutkinChart | None = None) -> NearIdentityReport:
    """Measure how close one bounce is to (x, y) -> (x + y, y).

    samples is an iterable of (s, phi) pairs or PhasePoints. Ratios
    |x1 - x - y| / y^3 and |y1 - y| / y^4 stay bounded as y -> 0.
    """
    if chart is None:
        chart = build_chart(domain)
    xs, ys, rx, ry = [], [], [], []
    for item in samples:
        p = item if isinstance(item, PhasePoint) else PhasePoint(float(item[0]), float(item[1]))
        x0 = chart.x_of_s(p.s)
        y0 = chart.y_of(p.s, p.phi)
        res = billiard_step(domain, p)
        x1 = chart.x_of_s(res.point.s)
        y1 = chart.y_of(res.point.s, res.point.phi)
        dx = (x1 - x0) % 1.0
        xs.append(x0)
        ys.append(y0)
        rx.append(abs(dx - y0))
        ry.append(abs(y1 - y0))
    xs = np.array(xs)
    ys = np.array(ys)
    rx = np.array(rx)
    ry = np.array(ry)
    return NearIdentityReport(
        x=xs, y=ys, x_residual=rx, y_residual=ry,
        max_ratio_x=float(np.max(rx / ys**3)) if len(ys) else 0.0,
        max_ratio_y=float(np.max(ry / ys**4)) if len(ys) else 0.0,
    )
