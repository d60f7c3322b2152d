"""Exception types shared across the package."""


class EigenrowsError(Exception):
    """Base class for all package-specific errors."""


class DimensionError(EigenrowsError):
    """Matrix or vector dimensions are incompatible with the request."""


class SpectrumError(EigenrowsError):
    """A requested signed eigenvalue has the wrong sign (misspecified rank split)."""


class RankError(EigenrowsError):
    """A matrix that must be full rank is numerically singular."""


class ProbabilityError(EigenrowsError):
    """An edge probability fell outside [0, 1]."""


class ConfigError(EigenrowsError):
    """Invalid or inconsistent configuration."""


class DomainError(EigenrowsError):
    """Inputs violate a mathematical domain assumption."""


class SingularFisherError(EigenrowsError):
    """A per-vertex Fisher information matrix is too ill conditioned to solve."""


class SingularError(EigenrowsError):
    """A matrix inversion required by an estimator failed."""


class TruthMissingError(EigenrowsError):
    """An operation that needs simulation ground truth got an observation without it."""


class DegenerateError(EigenrowsError):
    """An algorithm ran out of usable structure before finishing."""


class SizeError(EigenrowsError):
    """Problem size exceeds a hard limit of the implementation."""


class NotFoundError(EigenrowsError):
    """A required pure-node index was not located."""
