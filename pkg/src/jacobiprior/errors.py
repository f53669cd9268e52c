"""Exception types shared across the library.

Every failure mode that callers are expected to handle gets its own
class so that CLI and harness code can map errors to exit codes and
per-replication failure counts without string matching.
"""


class JacobiPriorError(Exception):
    """Base class for all library errors."""


class DimensionMismatchError(JacobiPriorError):
    """Array shapes are inconsistent with the operation's contract."""


class RankDeficientError(JacobiPriorError):
    """Design matrix is (numerically) rank deficient; the projection is not unique."""


class NotPositiveDefiniteError(JacobiPriorError):
    """Matrix passed to a Cholesky-based solve is not symmetric positive definite."""


class InvalidHyperError(JacobiPriorError):
    """Prior shape parameters violate the positivity constraints of a mode formula."""


class InvalidResponseError(JacobiPriorError):
    """A response value is outside the support of the requested family."""


class ImproperPosteriorError(JacobiPriorError):
    """Posterior exponents make the per-observation density non-integrable."""


class NoConvergenceError(JacobiPriorError):
    """Iterative routine hit its iteration cap before reaching tolerance."""


class SeparationError(JacobiPriorError):
    """Logistic coefficients diverged during IRLS, indicating perfect separation."""


class InsufficientDrawsError(JacobiPriorError):
    """Too few Monte Carlo draws to compute the requested summary."""


class InsufficientDataError(JacobiPriorError):
    """Too few values for a resampling-based estimate."""


class SchemaMismatchError(JacobiPriorError):
    """Serialized shard payloads disagree on schema version or dimensions."""


class RateOverflowError(JacobiPriorError):
    """A generated Poisson rate exceeded the configured safety bound."""


class MissingFeatureError(JacobiPriorError):
    """A column required by a stored model is absent from the input data."""


class ConfigError(JacobiPriorError):
    """An experiment or CLI configuration document is invalid."""
