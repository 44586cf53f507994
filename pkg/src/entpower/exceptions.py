# src/entpower/exceptions.py

class EntPowerError(Exception):
    """Base class for all custom exceptions in the entangling-power project."""
    pass


class DimensionError(EntPowerError):
    """Raised when a matrix or state has the wrong size for the operation."""
    pass


class DimensionCapError(DimensionError):
    """Raised when a request exceeds the configured qubit cap."""
    pass


class NotUnitaryError(EntPowerError):
    """Raised when a matrix fails the unitarity check."""
    pass


class NotHermitianError(EntPowerError):
    """Raised when a matrix is too far from Hermitian to be symmetrized."""
    pass


class NotNormalizedError(EntPowerError):
    """Raised when a state vector or density matrix is not normalized."""
    pass


class InvalidSiteError(EntPowerError):
    """Raised when qubit indices or site subsets are out of range."""
    pass


class InvalidSpecError(EntPowerError):
    """Raised when a unitary, circuit or optimizer specification is invalid."""
    pass


class GridTooLargeError(EntPowerError):
    """Raised when a brute-force grid would exceed the evaluation budget."""
    pass


class ClosedFormError(EntPowerError):
    """Raised when an analytic formula produces an impossible value."""
    pass
