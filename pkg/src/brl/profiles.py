"""Even cosine profiles on the circle and weighted sequence spaces.

An :class:`EvenProfile` holds an even map n(x) = sum_j c_j cos(2 pi j x)
through its cosine coefficients, with the weighted sup norm
sup_j j^alpha |c_j|. Half-periodic profiles (period 1/2) have all odd
coefficients equal to zero. :class:`AlphaSequence` is the matching
sequence space indexed from some q0 upward.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

_TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class EvenProfile:
    """Even map on the unit circle stored as cosine coefficients.

    Parameters
    ----------
    coeffs : array
        coeffs[j] multiplies cos(2 pi j x); index 0 is the mean.
    alpha : float
        Decay exponent used by the weighted sup norm, in (3, 4).
    half_periodic : bool
        If True the profile has period 1/2, i.e. all odd coefficients
        vanish; enforced at construction.
    """

    coeffs: np.ndarray
    alpha: float = 3.5
    half_periodic: bool = False

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=float))
        object.__setattr__(self, "coeffs", c)
        if not 3.0 < self.alpha < 4.0:
            raise DomainError(f"alpha must lie in (3, 4), got {self.alpha}")
        if self.half_periodic and c.size > 1 and np.any(c[1::2] != 0.0):
            raise DomainError("half-periodic profile has nonzero odd coefficients")

    @classmethod
    def zero(cls, n_modes: int = 1, alpha: float = 3.5, half_periodic: bool = False):
        return cls(np.zeros(n_modes), alpha, half_periodic)

    @classmethod
    def single_mode(cls, j: int, amplitude: float = 1.0, alpha: float = 3.5):
        c = np.zeros(j + 1)
        c[j] = amplitude
        return cls(c, alpha, half_periodic=(j % 2 == 0))

    @classmethod
    def from_samples(cls, values: np.ndarray, alpha: float = 3.5,
                     half_periodic: bool = False, tol: float = 1e-9):
        """Fit cosine coefficients to samples of an even map on x_i = i/N."""
        values = np.asarray(values, dtype=float)
        n = values.size
        spec = np.fft.rfft(values) / n
        if np.max(np.abs(spec.imag)) > tol * max(1.0, np.max(np.abs(values))):
            raise DomainError("samples are not even about x = 0")
        c = 2.0 * spec.real
        c[0] *= 0.5
        if n % 2 == 0:
            c[-1] *= 0.5
        if half_periodic:
            c[1::2] = 0.0
        return cls(c, alpha, half_periodic)

    @property
    def n_modes(self) -> int:
        return self.coeffs.size

    def __call__(self, x):
        """Evaluate n(x); accepts scalars or arrays."""
        x = np.asarray(x, dtype=float)
        j = np.arange(self.n_modes)
        return np.cos(_TWO_PI * np.multiply.outer(x, j)) @ self.coeffs

    def derivative(self, x, order: int = 1):
        """Evaluate d^order n / dx^order at x."""
        x = np.asarray(x, dtype=float)
        j = np.arange(self.n_modes)
        w = (_TWO_PI * j) ** order
        phase = _TWO_PI * np.multiply.outer(x, j) + order * (np.pi / 2.0)
        return np.cos(phase) @ (self.coeffs * w)

    def norm_alpha(self) -> float:
        """Weighted sup norm sup_{j>=1} j^alpha |c_j| (j = 0 contributes 0)."""
        if self.n_modes <= 1:
            return 0.0
        j = np.arange(1, self.n_modes, dtype=float)
        return float(np.max(j**self.alpha * np.abs(self.coeffs[1:])))

    def even_part_of_half_period(self) -> "EvenProfile":
        """Project onto the half-periodic subspace (zero odd coefficients)."""
        c = self.coeffs.copy()
        c[1::2] = 0.0
        return EvenProfile(c, self.alpha, half_periodic=True)

    def padded(self, n_modes: int) -> "EvenProfile":
        if n_modes <= self.n_modes:
            return self
        c = np.zeros(n_modes)
        c[: self.n_modes] = self.coeffs
        return EvenProfile(c, self.alpha, self.half_periodic)

    def scaled(self, factor: float) -> "EvenProfile":
        return EvenProfile(self.coeffs * factor, self.alpha, self.half_periodic)


@dataclass(frozen=True)
class AlphaSequence:
    """Sequence (u_q)_{q >= q0} with the weighted sup norm sup q^alpha |u_q|."""

    q0: int
    values: np.ndarray
    alpha: float = 3.5

    def __post_init__(self):
        object.__setattr__(self, "values", np.atleast_1d(np.asarray(self.values, dtype=float)))
        if self.q0 < 1:
            raise DomainError(f"q0 must be >= 1, got {self.q0}")

    @property
    def q_max(self) -> int:
        return self.q0 + self.values.size - 1

    def entry(self, q: int) -> float:
        if not self.q0 <= q <= self.q_max:
            raise DomainError(f"index {q} outside [{self.q0}, {self.q_max}]")
        return float(self.values[q - self.q0])

    def norm_alpha(self) -> float:
        q = np.arange(self.q0, self.q_max + 1, dtype=float)
        return float(np.max(q**self.alpha * np.abs(self.values))) if self.values.size else 0.0


def delta_full(n: EvenProfile, q: int) -> float:
    """Aliasing functional Delta(n)_q = (1/q) sum_k n(k/q) - mean(n).

    Computed exactly on the coefficient truncation as the sum of the
    coefficients at the nonzero multiples of q.
    """
    q = int(q)
    if q < 1:
        raise DomainError("delta_full needs q >= 1")
    idx = np.arange(q, n.n_modes, q)
    return float(np.sum(n.coeffs[idx])) if idx.size else 0.0


def delta_by_sampling(n: EvenProfile, q: int) -> float:
    """Aliasing functional evaluated literally from point samples."""
    q = int(q)
    if q < 1:
        raise DomainError("delta_by_sampling needs q >= 1")
    k = np.arange(q) / q
    return float(np.mean(n(k)) - n.coeffs[0])
