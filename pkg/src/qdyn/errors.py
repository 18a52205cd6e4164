"""Exception types raised by qdyn."""


class QdynError(ValueError):
    """Base class for all qdyn validation errors."""


class DimensionMismatchError(QdynError):
    pass


class NotHermitianError(QdynError):
    pass


class NotUnitaryError(QdynError):
    pass


class NotStateError(QdynError):
    """Matrix fails the density-matrix invariants (Hermitian, unit trace, PSD)."""


class NotCPError(QdynError):
    """Choi matrix has an eigenvalue below the negative tolerance."""


class NotTracePreservingError(QdynError):
    pass


class NonRealError(QdynError):
    pass


class ZeroPostSelectionError(QdynError):
    """Post-selection probability is too small to divide by."""
