"""Strongly convex planar domains: ellipses and normal perturbations.

All domains are parametrized by arc length s with unit-speed position
maps, anchored so that s = 0 sits on the positive x-axis (the symmetry
axis for the dihedral classes handled here) and oriented
counterclockwise. The outward normal is the tangent rotated by -90
degrees. Perturbed domains are normal graphs over a base ellipse with
the offset profile read in the base's Lazutkin coordinate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import specfun
from .errors import ConvexityError, DomainError
from .profiles import EvenProfile

_PHI_TABLE_SIZE = 2048
_NEWTON_TOL = 1e-13
_GL8 = np.polynomial.legendre.leggauss(8)


class BoundaryDomain:
    """Interface for arc-length parametrized strongly convex boundaries.

    Concrete subclasses provide ``perimeter``, ``position``, ``tangent``
    and ``curvature``; normals and curvature radii derive from those.
    Instances are immutable after construction and safe to share.
    """

    perimeter: float
    axis_symmetric: bool = False
    centrally_symmetric: bool = False

    def position(self, s):
        raise NotImplementedError

    def tangent(self, s):
        raise NotImplementedError

    def curvature(self, s):
        raise NotImplementedError

    def outward_normal(self, s):
        t = self.tangent(s)
        return np.stack([t[..., 1], -t[..., 0]], axis=-1)

    def radius_of_curvature(self, s):
        return 1.0 / self.curvature(s)

    def scaled(self, factor: float) -> "BoundaryDomain":
        raise NotImplementedError


class EllipseDomain(BoundaryDomain):
    """Ellipse x^2/a^2 + y^2/b^2 = 1 with a >= b > 0.

    The boundary parameter phi refers to gamma(phi) = (a cos phi,
    b sin phi); arc length, curvature and the Lazutkin coordinate have
    closed forms through elliptic integrals.
    """

    def __init__(self, a: float, b: float):
        a, b = float(a), float(b)
        if not (a >= b > 0.0):
            raise DomainError(f"ellipse needs a >= b > 0, got a={a}, b={b}")
        self.a = a
        self.b = b
        self.e = math.sqrt(1.0 - (b / a) ** 2)
        self._e2 = self.e * self.e
        self._Ee = specfun.elliptic_E(self.e)
        self._Ke = specfun.elliptic_K(self.e)
        self.perimeter = 4.0 * a * self._Ee
        self.axis_symmetric = True
        self.centrally_symmetric = True
        phi_nodes = np.linspace(0.0, 2.0 * math.pi, _PHI_TABLE_SIZE + 1)
        self._phi_tab = phi_nodes
        self._s_tab = self.arclength_of_param(phi_nodes)

    @property
    def is_disk(self) -> bool:
        return self.e == 0.0

    def arclength_of_param(self, phi):
        """Arc length from the anchor (a, 0) to gamma(phi)."""
        phi = np.asarray(phi, dtype=float)
        s = self.a * (self._Ee + specfun.elliptic_E_inc_vec(phi - 0.5 * math.pi, self.e))
        return s if s.shape else float(s)

    def param_speed(self, phi):
        """|d gamma / d phi| = a sqrt(1 - e^2 cos^2 phi)."""
        phi = np.asarray(phi, dtype=float)
        v = self.a * np.sqrt(1.0 - self._e2 * np.cos(phi) ** 2)
        return v if v.shape else float(v)

    def param_of_arclength(self, s):
        """Invert s(phi): table lookup plus Newton refinement."""
        s = np.asarray(s, dtype=float)
        scalar = not s.shape
        sm = np.mod(s, self.perimeter)
        idx = np.clip(np.searchsorted(self._s_tab, sm) - 1, 0, _PHI_TABLE_SIZE - 1)
        ds = self._s_tab[idx + 1] - self._s_tab[idx]
        phi = self._phi_tab[idx] + (sm - self._s_tab[idx]) / ds * (self._phi_tab[idx + 1] - self._phi_tab[idx])
        for _ in range(6):
            resid = self.arclength_of_param(phi) - sm
            phi = phi - resid / self.param_speed(phi)
            if np.max(np.abs(resid)) < _NEWTON_TOL * self.perimeter:
                break
        return float(phi) if scalar else phi

    def position_of_param(self, phi):
        phi = np.asarray(phi, dtype=float)
        return np.stack([self.a * np.cos(phi), self.b * np.sin(phi)], axis=-1)

    def position(self, s):
        return self.position_of_param(self.param_of_arclength(s))

    def tangent(self, s):
        phi = np.asarray(self.param_of_arclength(s), dtype=float)
        v = self.param_speed(phi)
        return np.stack([-self.a * np.sin(phi) / v, self.b * np.cos(phi) / v], axis=-1)

    def curvature_of_param(self, phi):
        phi = np.asarray(phi, dtype=float)
        w = self.a**2 * np.sin(phi) ** 2 + self.b**2 * np.cos(phi) ** 2
        k = self.a * self.b / w**1.5
        return k if k.shape else float(k)

    def curvature(self, s):
        return self.curvature_of_param(self.param_of_arclength(s))

    def lazutkin_x_of_param(self, phi):
        """Lazutkin boundary coordinate x in [0, 1) of the point gamma(phi).

        Scale invariant; x(0) = 0 at the anchor and x increases with s.
        """
        phi = np.asarray(phi, dtype=float)
        x = (self._Ke + specfun.elliptic_F_vec(phi - 0.5 * math.pi, self.e)) / (4.0 * self._Ke)
        return x if x.shape else float(x)

    def lazutkin_x_of_arclength(self, s):
        return self.lazutkin_x_of_param(self.param_of_arclength(s))

    def param_of_lazutkin_x(self, x):
        """Invert the closed-form Lazutkin coordinate by Newton."""
        x = np.asarray(x, dtype=float)
        scalar = not x.shape
        xm = np.mod(x, 1.0)
        phi = 2.0 * math.pi * xm  # exact for the disk, good start otherwise
        for _ in range(40):
            resid = np.mod(self.lazutkin_x_of_param(phi) - xm + 0.5, 1.0) - 0.5
            dphi = resid * (4.0 * self._Ke) * np.sqrt(1.0 - self._e2 * np.cos(phi) ** 2)
            phi = phi - dphi
            if np.max(np.abs(resid)) < 1e-14:
                break
        return float(phi) if scalar else phi

    def scaled(self, factor: float) -> "EllipseDomain":
        return EllipseDomain(self.a * factor, self.b * factor)


class PerturbedEllipseDomain(BoundaryDomain):
    """Normal graph over a base ellipse, offset profile in Lazutkin x.

    The realized boundary is C(t) = gamma_E(t) + eps * h(x_E(t)) * N_E(t)
    with t the base arc length. Construction rejects amplitudes for which
    the curvature loses positivity on a 4096-point guard grid.
    """

    _GRID = 4096
    _GL_NODES = 8

    def __init__(self, base: EllipseDomain, epsilon: float, profile: EvenProfile):
        self.base = base
        self.epsilon = float(epsilon)
        self.profile = profile
        self.axis_symmetric = True  # cosine profiles are even in x
        self.centrally_symmetric = bool(profile.half_periodic)

        t_grid = np.linspace(0.0, base.perimeter, self._GRID + 1)
        kappa = self.curvature_of_base_param(t_grid)
        if np.min(kappa) <= 0.0:
            raise ConvexityError(
                f"perturbation epsilon={epsilon} destroys convexity "
                f"(min curvature {np.min(kappa):.3e})"
            )
        # composite Gauss-Legendre arc length accumulated over the grid
        gl_x, gl_w = _GL8
        h = t_grid[1] - t_grid[0]
        mid = 0.5 * (t_grid[:-1] + t_grid[1:])
        nodes = mid[:, None] + 0.5 * h * gl_x[None, :]
        speeds = self._speed(nodes.ravel()).reshape(nodes.shape)
        seg = 0.5 * h * speeds @ gl_w
        self._t_grid = t_grid
        self._s_tab = np.concatenate([[0.0], np.cumsum(seg)])
        self.perimeter = float(self._s_tab[-1])

    # -- geometry in the base parameter ---------------------------------
    def _base_frames(self, t):
        """Base-parameter chain: phi, Lazutkin x and derivatives at t."""
        base = self.base
        t = np.asarray(t, dtype=float)
        phi = base.param_of_arclength(t)
        u = 1.0 - base._e2 * np.cos(phi) ** 2
        su = np.sqrt(u)
        a, b = base.a, base.b
        x = base.lazutkin_x_of_param(phi)
        xp = 1.0 / (4.0 * base._Ke * a * u)
        xpp = -base._e2 * np.sin(2.0 * phi) / (4.0 * base._Ke * a**2 * u**2.5)
        kappa = b / (a**2 * u**1.5)
        kappap = -1.5 * b * base._e2 * np.sin(2.0 * phi) / (a**3 * u**3)
        tang = np.stack([-a * np.sin(phi) / (a * su), b * np.cos(phi) / (a * su)], axis=-1)
        norm = np.stack([tang[..., 1], -tang[..., 0]], axis=-1)
        pos = np.stack([a * np.cos(phi), b * np.sin(phi)], axis=-1)
        return pos, tang, norm, x, xp, xpp, kappa, kappap

    def _curve_derivatives(self, t):
        """C, C', C'' at base parameter t, in the (tangent, normal) frame."""
        pos, tang, norm, x, xp, xpp, kappa, kappap = self._base_frames(t)
        eps = self.epsilon
        h0 = self.profile(x)
        h1 = self.profile.derivative(x, 1)
        h2 = self.profile.derivative(x, 2)
        c = pos + eps * h0[..., None] * norm
        alpha = 1.0 + eps * h0 * kappa
        beta = eps * h1 * xp
        gamma = eps * (2.0 * h1 * xp * kappa + h0 * kappap)
        delta = eps * (h2 * xp**2 + h1 * xpp) - kappa * alpha
        c1 = alpha[..., None] * tang + beta[..., None] * norm
        c2 = gamma[..., None] * tang + delta[..., None] * norm
        return c, c1, c2, alpha, beta, gamma, delta

    def _speed(self, t):
        _, _, _, alpha, beta, _, _ = self._curve_derivatives(t)
        return np.hypot(alpha, beta)

    def curvature_of_base_param(self, t):
        _, _, _, alpha, beta, gamma, delta = self._curve_derivatives(t)
        return (beta * gamma - alpha * delta) / np.hypot(alpha, beta) ** 3

    def _arclength_of_base_param(self, t):
        """Arc length of the realized curve up to base parameter t."""
        t = np.asarray(t, dtype=float)
        tm = np.clip(t, 0.0, self.base.perimeter)
        idx = np.clip(np.searchsorted(self._t_grid, tm) - 1, 0, self._GRID - 1)
        t0 = self._t_grid[idx]
        gl_x, gl_w = _GL8
        half = 0.5 * (tm - t0)
        nodes = (t0 + half)[..., None] + half[..., None] * gl_x
        speeds = self._speed(nodes.reshape(-1)).reshape(nodes.shape)
        return self._s_tab[idx] + half * (speeds @ gl_w)

    def base_param_of_arclength(self, s):
        """Invert the realized arc length back to the base parameter."""
        s = np.asarray(s, dtype=float)
        scalar = not s.shape
        sm = np.mod(s, self.perimeter)
        idx = np.clip(np.searchsorted(self._s_tab, sm) - 1, 0, self._GRID - 1)
        frac = (sm - self._s_tab[idx]) / (self._s_tab[idx + 1] - self._s_tab[idx])
        t = self._t_grid[idx] + frac * (self._t_grid[idx + 1] - self._t_grid[idx])
        for _ in range(8):
            resid = self._arclength_of_base_param(t) - sm
            t = t - resid / self._speed(t)
            if np.max(np.abs(resid)) < _NEWTON_TOL * self.perimeter:
                break
        return float(t) if scalar else t

    # -- BoundaryDomain interface ----------------------------------------
    def position(self, s):
        t = self.base_param_of_arclength(s)
        c, *_ = self._curve_derivatives(t)
        return c

    def tangent(self, s):
        t = self.base_param_of_arclength(s)
        _, c1, _, alpha, beta, _, _ = self._curve_derivatives(t)
        return c1 / np.hypot(alpha, beta)[..., None]

    def curvature(self, s):
        t = self.base_param_of_arclength(s)
        return self.curvature_of_base_param(t)

    def scaled(self, factor: float) -> "PerturbedEllipseDomain":
        return PerturbedEllipseDomain(self.base.scaled(factor), self.epsilon * factor, self.profile)


class RigidMotionDomain(BoundaryDomain):
    """Rotation-plus-translation image of another domain.

    The standard symmetry flags are dropped: symmetry checks in this
    package always refer to the x-axis through the origin.
    """

    def __init__(self, base: BoundaryDomain, angle: float = 0.0, offset=(0.0, 0.0)):
        self.base = base
        self.angle = float(angle)
        self.offset = np.asarray(offset, dtype=float)
        self.perimeter = base.perimeter
        c, s = math.cos(self.angle), math.sin(self.angle)
        self._rot = np.array([[c, -s], [s, c]])
        identity = self.angle == 0.0 and not np.any(self.offset)
        self.axis_symmetric = base.axis_symmetric if identity else False
        self.centrally_symmetric = base.centrally_symmetric if identity else False

    def position(self, s):
        return self.base.position(s) @ self._rot.T + self.offset

    def tangent(self, s):
        return self.base.tangent(s) @ self._rot.T

    def curvature(self, s):
        return self.base.curvature(s)

    def scaled(self, factor: float) -> "RigidMotionDomain":
        return RigidMotionDomain(self.base.scaled(factor), self.angle, self.offset * factor)


def arclength_of_param(domain: EllipseDomain, phi):
    """Arc length of the ellipse point at boundary parameter phi."""
    return domain.arclength_of_param(phi)


def curvature_at(domain: BoundaryDomain, s):
    """Curvature at arc length s (strictly positive for valid domains)."""
    return domain.curvature(s)


def check_dihedral(domain: BoundaryDomain, tol: float | None = None) -> tuple[bool, bool]:
    """Test mirror symmetry about the x-axis and central symmetry.

    Uses a deterministic 256-point arc-length grid; tolerance defaults
    to 1e-10 times the perimeter.
    """
    if tol is None:
        tol = 1e-10 * domain.perimeter
    s = np.linspace(0.0, domain.perimeter, 257)[:-1]
    p = domain.position(s)
    p_neg = domain.position(-s)
    mirror = p * np.array([1.0, -1.0])
    axis_dev = np.max(np.abs(p_neg - mirror))
    p_half = domain.position(s + 0.5 * domain.perimeter)
    central_dev = np.max(np.abs(p_half + p))
    return bool(axis_dev < tol), bool(central_dev < tol)


def normalize_perimeter(domain: BoundaryDomain) -> tuple[BoundaryDomain, float]:
    """Rescale to unit perimeter; returns (domain, scale factor applied)."""
    scale = 1.0 / domain.perimeter
    if abs(scale - 1.0) < 1e-15:
        return domain, 1.0
    return domain.scaled(scale), scale


@dataclass(frozen=True)
class DomainSpec:
    """Parsed JSON domain description (see the CLI docs for the schema)."""

    kind: str
    a: float
    b: float
    epsilon: float = 0.0
    profile: EvenProfile | None = None

    def build(self) -> BoundaryDomain:
        base = EllipseDomain(self.a, self.b)
        if self.kind == "ellipse":
            return base
        if self.kind == "perturbed_ellipse":
            if self.profile is None:
                raise DomainError("perturbed_ellipse needs a profile")
            return PerturbedEllipseDomain(base, self.epsilon, self.profile)
        raise DomainError(f"unknown domain type {self.kind!r}")


def domain_from_dict(data: dict) -> BoundaryDomain:
    """Build a domain from the JSON domain-spec dictionary."""
    try:
        kind = data["type"]
        a = float(data["a"])
        b = float(data["b"])
    except (KeyError, TypeError, ValueError) as exc:
        raise DomainError(f"bad domain spec: {exc}") from exc
    if kind == "ellipse":
        return DomainSpec("ellipse", a, b).build()
    if kind == "perturbed_ellipse":
        prof = data.get("profile", {})
        cos = np.asarray(prof.get("cos", []), dtype=float)
        period = prof.get("period", "half")
        if period == "half":
            coeffs = np.zeros(2 * len(cos) - 1 if len(cos) else 1)
            coeffs[::2] = cos
            profile = EvenProfile(coeffs, half_periodic=True)
        elif period == "full":
            profile = EvenProfile(cos if cos.size else np.zeros(1))
        else:
            raise DomainError(f"unknown profile period {period!r}")
        eps = float(data.get("epsilon", 0.0))
        return DomainSpec("perturbed_ellipse", a, b, eps, profile).build()
    raise DomainError(f"unknown domain type {kind!r}")
