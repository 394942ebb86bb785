"""
Custom exceptions for diamondnet.
"""

from typing import Any, Optional


class DiamondNetError(Exception):
    """Base exception for all diamondnet errors."""
    pass


class InvalidNetworkError(DiamondNetError, ValueError):
    """Input outside the domain of an operation (gains, duty cycle, correlation)."""
    pass


class EnumerationLimitError(InvalidNetworkError):
    """Brute-force enumeration requested above the relay cap."""

    def __init__(self, n_relays: int, limit: int):
        super().__init__(
            f"Brute-force cut enumeration supports at most {limit} relays (got {n_relays})"
        )
        self.n_relays = n_relays
        self.limit = limit


class NumericalError(DiamondNetError):
    """A numerical invariant was broken beyond tolerance."""
    pass


class PartitionError(DiamondNetError):
    """A relay was not covered by the class partition."""
    pass


class CertificateViolationError(DiamondNetError):
    """A certified inequality failed."""

    def __init__(self, message: str, details: Optional[dict[str, Any]] = None):
        super().__init__(message)
        self.details = details or {}
