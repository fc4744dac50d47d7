"""Error types shared across the package."""


class TorusTauError(Exception):
    """Base class for all package errors."""


class TruncationToleranceError(TorusTauError):
    """A series cutoff cannot reach the requested tolerance."""


class LatticePointError(TorusTauError):
    """Evaluation point too close to a lattice singularity."""


class ParameterPoleError(TorusTauError):
    """A parameter sits on (or numerically at) a pole."""


class NoConvergenceError(TorusTauError):
    """An iteration (series, quadrature, Newton, fit) failed to converge."""


class ConvergenceDomainError(TorusTauError):
    """Argument outside the convergence domain of a series."""


class DiagonalSingularityError(TorusTauError):
    """Kernel requested at z = w on a singular block without limit mode."""


class InconsistentTruncationError(TorusTauError):
    """Operator blocks assembled at mismatched mode counts."""


class JumpMatrixError(TorusTauError):
    """Riemann-Hilbert jump fails det J = 1 beyond tolerance."""


class UnsupportedTwistError(TorusTauError):
    """U(1) twist sum off the mode lattice; finite section undefined."""


class ResonantParametersError(TorusTauError):
    """Vanishing denominator in a partition-function ratio."""


class DegenerateRatioError(TorusTauError):
    """Determinant ratio at a branch-ambiguous value."""


class PrefactorPoleError(TorusTauError):
    """Theta prefactor vanishes at the requested arguments."""


class CoincidentPuncturesError(TorusTauError):
    """Puncture positions collide modulo the lattice."""


class ConfigError(TorusTauError):
    """Invalid run configuration."""


class CutoffWarning(UserWarning):
    """Last summation shell still contributes above tolerance."""


class AliasingWarning(UserWarning):
    """Fourier table reconstruction residual above tolerance."""


class SpectralRadiusWarning(UserWarning):
    """Truncated operator has spectral radius >= 1 at small nome."""
