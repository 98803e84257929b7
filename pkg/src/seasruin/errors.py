"""Exception hierarchy for seasruin."""


class SeasruinError(Exception):
    """Base class for all seasruin errors."""


class DomainError(SeasruinError):
    """Evaluation requested outside the guaranteed convergence domain."""


class ValidationError(SeasruinError):
    """Input data violates a structural invariant (bad probabilities, kappa < 1, ...)."""


class ParseError(SeasruinError):
    """Malformed model file."""


class NetProfitViolated(SeasruinError):
    """Operation requires E S_N < kappa*N."""


class RootCountMismatch(SeasruinError):
    """Located roots do not sum to kappa*N - 1 with multiplicity."""


class SingularSystem(SeasruinError):
    """Boundary system is singular or numerically unusable (cond > 1e12)."""

    def __init__(self, message, determinant=None, condition=None):
        super().__init__(message)
        self.determinant = determinant
        self.condition = condition


class DimensionMismatch(SeasruinError):
    """Boundary system is not square after zero-column reduction."""


class ImaginaryResidue(SeasruinError):
    """Solution of the boundary system has a non-negligible imaginary part."""


class MassBoundsError(SeasruinError):
    """A probability mass fell outside [-1e-9, 1 + 1e-9] before clamping."""


class ZeroDivisor(SeasruinError):
    """Mass extension hit a zero pivot that is not explained by shifted support."""


class PoleProximity(SeasruinError):
    """Generating-function evaluation too close to a characteristic root."""
