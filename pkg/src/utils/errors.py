"""
Error taxonomy for the annuli toolkit.

The CLI maps these onto exit codes: usage and domain errors exit with 2,
resource errors with 3.
"""


class AnnuliError(Exception):
    """Base class for all toolkit errors."""


class UsageError(AnnuliError, ValueError):
    """Invalid configuration or command-line arguments."""


class DomainError(AnnuliError, ValueError):
    """Input outside the mathematical domain of an operation."""


class ResourceError(AnnuliError, MemoryError):
    """An enumeration or scan would exceed its configured budget."""
