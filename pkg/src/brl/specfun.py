"""Special functions used throughout the package.

Complete and incomplete elliptic integrals (AGM for the complete ones,
Carlson symmetric forms for the incomplete ones), the Moebius function
backed by a growable sieve, the Fourier coefficients of even powers of
sine, central binomial Taylor coefficients of (1-x)^(-1/2), and partial
sums of the zeta series.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from .errors import DomainError

_AGM_TOL = 1e-16
_AGM_MAX_ITER = 40


def _check_modulus(k: float) -> float:
    k = float(k)
    if not 0.0 <= k < 1.0:
        raise DomainError(f"elliptic modulus must lie in [0, 1), got {k}")
    return k


def elliptic_K(k: float) -> float:
    """Complete elliptic integral of the first kind, modulus convention.

    K(k) = integral of (1 - k^2 sin^2 t)^(-1/2) over t in [0, pi/2],
    computed with the arithmetic-geometric mean.
    """
    k = _check_modulus(k)
    a, b = 1.0, math.sqrt(1.0 - k * k)
    for _ in range(_AGM_MAX_ITER):
        if abs(a - b) <= _AGM_TOL * a:
            break
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return math.pi / (a + b)


def elliptic_E(k: float) -> float:
    """Complete elliptic integral of the second kind via the AGM."""
    k = _check_modulus(k)
    a, b = 1.0, math.sqrt(1.0 - k * k)
    c2_sum = 0.5 * k * k
    pow2 = 0.5
    for _ in range(_AGM_MAX_ITER):
        if abs(a - b) <= _AGM_TOL * a:
            break
        c = 0.5 * (a - b)
        a, b = 0.5 * (a + b), math.sqrt(a * b)
        pow2 *= 2.0
        c2_sum += pow2 * c * c
    K = math.pi / (a + b)
    return K * (1.0 - c2_sum)


def _carlson_rf(x, y, z):
    """Carlson symmetric integral R_F by the duplication theorem.

    Accepts scalars or numpy arrays; arguments must be non-negative with
    at most one of them zero.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    for _ in range(200):
        lam = np.sqrt(x) * np.sqrt(y) + np.sqrt(y) * np.sqrt(z) + np.sqrt(z) * np.sqrt(x)
        x, y, z = 0.25 * (x + lam), 0.25 * (y + lam), 0.25 * (z + lam)
        mu = (x + y + z) / 3.0
        rel = np.max(np.abs(np.stack([x - mu, y - mu, z - mu])) / mu)
        if rel < 1e-9:
            break
    mu = (x + y + z) / 3.0
    dx, dy, dz = (mu - x) / mu, (mu - y) / mu, (mu - z) / mu
    e2 = dx * dy + dy * dz + dz * dx
    e3 = dx * dy * dz
    s = 1.0 - e2 / 10.0 + e3 / 14.0 + e2 * e2 / 24.0 - 3.0 * e2 * e3 / 44.0
    return s / np.sqrt(mu)


def _carlson_rd(x, y, z):
    """Carlson symmetric integral R_D by the duplication theorem."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    total = np.zeros(np.broadcast(x, y, z).shape)
    fac = 1.0
    for _ in range(200):
        sx, sy, sz = np.sqrt(x), np.sqrt(y), np.sqrt(z)
        lam = sx * sy + sy * sz + sz * sx
        total = total + fac / (sz * (z + lam))
        fac *= 0.25
        x, y, z = 0.25 * (x + lam), 0.25 * (y + lam), 0.25 * (z + lam)
        mu = (x + y + 3.0 * z) / 5.0
        rel = np.max(np.abs(np.stack([x - mu, y - mu, z - mu])) / mu)
        if rel < 1e-9:
            break
    mu = (x + y + 3.0 * z) / 5.0
    dx, dy, dz = (mu - x) / mu, (mu - y) / mu, (mu - z) / mu
    ea = dx * dy
    eb = dz * dz
    ec = ea - eb
    ed = ea - 6.0 * eb
    ee = ed + 2.0 * ec
    s = 1.0 + ed * (-3.0 / 14.0 + 9.0 / 88.0 * ed - 4.5 / 26.0 * dz * ee) \
        + dz * (1.0 / 6.0 * ee + dz * (-9.0 / 22.0 * ec + 3.0 / 26.0 * dz * ea))
    return 3.0 * total + fac * s / (mu * np.sqrt(mu))


def _incomplete_principal(phi, k):
    """F on the principal range [0, pi/2] via Carlson R_F."""
    s = np.sin(phi)
    c = np.cos(phi)
    return s * _carlson_rf(c * c, 1.0 - (k * s) ** 2, 1.0)


def elliptic_F(phi: float, k: float) -> float:
    """Incomplete elliptic integral of the first kind F(phi, k).

    Defined for any real phi through the quasi-periodicity
    F(phi + pi, k) = F(phi, k) + 2 K(k).
    """
    k = _check_modulus(k)
    phi = float(phi)
    if phi == 0.0:
        return 0.0
    if phi < 0.0:
        return -elliptic_F(-phi, k)
    n = math.floor(phi / math.pi + 0.5)
    r = phi - n * math.pi  # r in (-pi/2, pi/2]
    base = 2.0 * n * elliptic_K(k) if n else 0.0
    if r >= 0.0:
        return base + float(_incomplete_principal(r, k))
    return base - float(_incomplete_principal(-r, k))


def elliptic_E_inc(phi: float, k: float) -> float:
    """Incomplete elliptic integral of the second kind E(phi, k)."""
    k = _check_modulus(k)
    phi = float(phi)
    if phi == 0.0:
        return 0.0
    if phi < 0.0:
        return -elliptic_E_inc(-phi, k)
    n = math.floor(phi / math.pi + 0.5)
    r = phi - n * math.pi
    base = 2.0 * n * elliptic_E(k) if n else 0.0
    sign = 1.0 if r >= 0.0 else -1.0
    r = abs(r)
    s, c = math.sin(r), math.cos(r)
    y = 1.0 - (k * s) ** 2
    val = s * _carlson_rf(c * c, y, 1.0) - (k * k) * s ** 3 * _carlson_rd(c * c, y, 1.0) / 3.0
    return base + sign * float(val)


def elliptic_F_vec(phi, k: float) -> np.ndarray:
    """Vectorized F(phi, k) over an array of angles (k scalar)."""
    k = _check_modulus(k)
    phi = np.asarray(phi, dtype=float)
    n = np.floor(phi / math.pi + 0.5)
    r = phi - n * math.pi
    K2 = 2.0 * elliptic_K(k)
    principal = np.sign(r) * _incomplete_principal(np.abs(r), k)
    return n * K2 + principal


def elliptic_E_inc_vec(phi, k: float) -> np.ndarray:
    """Vectorized E(phi, k) over an array of angles (k scalar)."""
    k = _check_modulus(k)
    phi = np.asarray(phi, dtype=float)
    n = np.floor(phi / math.pi + 0.5)
    r = phi - n * math.pi
    E2 = 2.0 * elliptic_E(k)
    s, c = np.sin(np.abs(r)), np.cos(r)
    y = 1.0 - (k * s) ** 2
    val = s * _carlson_rf(c * c, y, np.ones_like(s))
    if k > 0.0:
        val = val - (k * k) * s**3 * _carlson_rd(c * c, y, np.ones_like(s)) / 3.0
    return n * E2 + np.sign(r) * val


class _MoebiusSieve:
    """Growable linear sieve for the Moebius function."""

    def __init__(self, initial: int = 1 << 10):
        self._mu = _sieve_mu(initial)

    def value(self, n: int) -> int:
        if n < 1:
            raise DomainError(f"Moebius function needs a positive integer, got {n}")
        while n >= len(self._mu):
            self._mu = _sieve_mu(2 * len(self._mu))
        return int(self._mu[n])

    def table(self, n_max: int) -> np.ndarray:
        while n_max >= len(self._mu):
            self._mu = _sieve_mu(2 * len(self._mu))
        return self._mu[: n_max + 1]


def _sieve_mu(size: int) -> np.ndarray:
    mu = np.ones(size, dtype=np.int64)
    is_prime = np.ones(size, dtype=bool)
    is_prime[:2] = False
    for p in range(2, size):
        if not is_prime[p]:
            continue
        is_prime[2 * p :: p] = False
        mu[p::p] *= -1
        p2 = p * p
        if p2 < size:
            mu[p2::p2] = 0
    return mu


_SIEVE = _MoebiusSieve()


def moebius_mu(n: int) -> int:
    """Moebius function: 1, (-1)^k on squarefree k-prime products, else 0."""
    return _SIEVE.value(int(n))


def moebius_table(n_max: int) -> np.ndarray:
    """Moebius values mu(0..n_max) as an int64 array (mu[0] unused)."""
    return _SIEVE.table(int(n_max))


def sin_power_coeffs(j: int) -> np.ndarray:
    """Cosine coefficients of sin^(2j): sin^(2j) t = sum_k s[k] cos(2kt).

    s[0] = binom(2j, j)/4^j and s[k] = 2 (-1)^k binom(2j, j-k)/4^j for
    k >= 1. Exact binomials are used up to j = 500; beyond that the
    log-gamma route would be needed and we refuse instead.
    """
    j = int(j)
    if j < 0:
        raise DomainError("sin_power_coeffs needs j >= 0")
    if j > 500:
        raise DomainError("sin_power_coeffs supports j <= 500")
    four_j = 4.0 ** (-j) if j < 500 else math.exp(-j * math.log(4.0))
    out = np.empty(j + 1)
    out[0] = math.comb(2 * j, j) * four_j
    for k in range(1, j + 1):
        out[k] = 2.0 * (-1) ** k * math.comb(2 * j, j - k) * four_j
    return out


def sin_power_coeffs_exact(j: int) -> list[Fraction]:
    """Exact rational version of :func:`sin_power_coeffs`."""
    j = int(j)
    if j < 0:
        raise DomainError("sin_power_coeffs_exact needs j >= 0")
    denom = Fraction(1, 4**j)
    out = [Fraction(math.comb(2 * j, j)) * denom]
    for k in range(1, j + 1):
        out.append(2 * Fraction((-1) ** k * math.comb(2 * j, j - k)) * denom)
    return out


def central_binomial_cj(j: int) -> float:
    """Taylor coefficient c_j of (1-x)^(-1/2): c_j = binom(2j, j)/4^j."""
    j = int(j)
    if j < 0:
        raise DomainError("central_binomial_cj needs j >= 0")
    if j <= 500:
        return math.comb(2 * j, j) * 4.0 ** (-j)
    return math.exp(math.lgamma(2 * j + 1) - 2 * math.lgamma(j + 1) - j * math.log(4.0))


def zeta_partial(alpha: float, n_terms: int) -> float:
    """Partial sum of sum_{p=1}^{n_terms} p^(-alpha); requires alpha > 1."""
    alpha = float(alpha)
    if alpha <= 1.0:
        raise DomainError("zeta_partial needs alpha > 1")
    if n_terms < 1:
        raise DomainError("zeta_partial needs n_terms >= 1")
    p = np.arange(1, n_terms + 1, dtype=float)
    # ascending summation of the descending terms reduces roundoff
    return float(np.sum(p[::-1] ** (-alpha)))


def zeta_value(alpha: float, n_terms: int = 10_000) -> float:
    """zeta(alpha) with an Euler-Maclaurin tail after n_terms terms."""
    s = zeta_partial(alpha, n_terms)
    n = float(n_terms)
    # tail: N^(1-a)/(a-1) + N^(-a)/2 + a N^(-a-1)/12 - a(a+1)(a+2) N^(-a-3)/720
    tail = n ** (1.0 - alpha) / (alpha - 1.0) - 0.5 * n ** (-alpha)
    tail += alpha * n ** (-alpha - 1.0) / 12.0
    tail -= alpha * (alpha + 1.0) * (alpha + 2.0) * n ** (-alpha - 3.0) / 720.0
    return s + tail
