"""Exception hierarchy shared by the library and the CLI."""


class DivkitError(Exception):
    """Base class for structured, user-facing errors (CLI exit status 1)."""


class PreconditionError(DivkitError):
    """An input violates an operation's documented precondition."""


class CapExceededError(DivkitError):
    """An exhaustive routine was asked to do more work than its cap allows."""


class FormatError(DivkitError):
    """A file or text input could not be parsed."""

    def __init__(self, message: str, position: int | None = None):
        self.position = position
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)


class EmptyAnswerError(DivkitError):
    """A query has no answers where at least one is required."""


class InvariantError(AssertionError):
    """An internal consistency check failed (CLI exit status 2)."""
