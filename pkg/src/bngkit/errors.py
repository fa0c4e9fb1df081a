"""Exception hierarchy. CLI exit codes hang off these classes."""


class BngError(Exception):
    """Base class for all bngkit errors."""

    exit_code = 1


class PreconditionError(BngError, ValueError):
    """An operation was called outside its domain (the math says no)."""

    exit_code = 1


class InfeasibleError(PreconditionError):
    """A construction cannot meet its bound at the given truncation.

    ``suggested_dim`` carries the smallest dimension the planner expects to
    succeed, or None when no truncation change would help.
    """

    def __init__(self, message, suggested_dim=None):
        super().__init__(message)
        self.suggested_dim = suggested_dim


class VerificationError(BngError):
    """A generated certificate failed independent verification."""

    exit_code = 2

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class SchemaError(BngError, ValueError):
    """Malformed JSON input. ``field`` names the offending key."""

    exit_code = 3

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
