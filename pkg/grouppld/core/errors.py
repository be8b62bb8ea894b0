"""
Exception hierarchy for the grouppld package.
"""


class AccountingError(Exception):
    """Base exception for grouppld."""
    pass


class DomainError(AccountingError, ValueError):
    """Raised when an argument lies outside the domain of an operation."""
    pass


class NumericalError(AccountingError, ArithmeticError):
    """Raised when an internal numerical check fails (normalization, drift, bracketing)."""
    pass
