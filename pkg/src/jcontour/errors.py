"""Exception hierarchy shared across the package."""


class JcontourError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(JcontourError, ValueError):
    """An argument violates a documented precondition."""


class InvalidStateError(JcontourError, RuntimeError):
    """An operation was requested in a state that cannot support it."""


class NumericalFailureError(JcontourError, RuntimeError):
    """Linear algebra failed beyond recovery (e.g. after jitter escalation).

    Carries conditioning diagnostics in ``diagnostics`` when available.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
