"""Exception types shared across the package.

The CLI maps these onto exit codes: ConfigError -> 3, the numerical
failures (FactorizationError, EigensolveError) -> 4.
"""

from __future__ import annotations


class QuasibandError(Exception):
    """Base class for package-specific failures."""


class ConfigError(QuasibandError):
    """Malformed or inconsistent configuration input."""


class FactorizationError(QuasibandError):
    """Symmetric-indefinite factorization broke down at every attempted shift.

    Carries the list of shifts tried so the caller can report them.
    """

    def __init__(self, message: str, shifts: list[float]):
        super().__init__(f"{message} (attempted shifts: {shifts})")
        self.shifts = list(shifts)


class EigensolveError(QuasibandError):
    """An eigenvalue solver failed; the message names the offending input."""
