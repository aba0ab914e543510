"""Exception hierarchy shared across the package.

Validation problems (bad inputs, malformed configs) and numerical
problems (failed convergence, unstable truncations) are kept in two
branches so the CLI can map them to distinct exit codes.
"""


class BrlError(Exception):
    """Base class for all package errors."""


class ConfigError(BrlError):
    """Malformed configuration, flags, or domain-spec files."""


class DomainError(BrlError):
    """Argument outside the mathematical domain of an operation."""


class ConvexityError(BrlError):
    """Constructed boundary fails the positive-curvature guard."""


class NumericalError(BrlError):
    """Base class for failures of numerical procedures."""


class ConvergenceFailure(NumericalError):
    """An iteration exhausted its budget without meeting tolerance."""


class DegenerateChord(NumericalError):
    """Chord endpoints coincide within tolerance."""


class QuadratureFailure(NumericalError):
    """Non-finite data encountered while integrating."""


class SymmetryViolation(NumericalError):
    """A symmetric orbit failed its post-hoc symmetry check."""


class IllConditionedFit(NumericalError):
    """Least-squares normal equations too ill-conditioned to trust."""


class DifferentiationUnstable(NumericalError):
    """Independent derivative computations disagree beyond tolerance."""


class NonConjugacy(NumericalError):
    """Supplied circle map fails the conjugacy spot checks."""


class NoInvariantCurve(NumericalError):
    """Rotation-number estimate failed to converge on an orbit."""


class TruncationUnstable(NumericalError):
    """Operator truncation report changed too much under doubling."""


class RankDeficient(NumericalError):
    """Completed operator is numerically rank deficient."""

    def __init__(self, message: str, kernel_vector=None):
        super().__init__(message)
        self.kernel_vector = kernel_vector


class SelectionExhausted(NumericalError):
    """Greedy functional selection ran out of candidate indices."""

    def __init__(self, message: str, residual_kernel=None):
        super().__init__(message)
        self.residual_kernel = residual_kernel


class DiskRejected(DomainError):
    """Operation requires an ellipse with positive eccentricity."""
