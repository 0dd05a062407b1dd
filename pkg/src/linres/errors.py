"""Shared exception types."""


class LinresError(Exception):
    """Base class for all library errors."""


class BudgetExceeded(LinresError):
    """An exhaustive enumeration would exceed the configured budget."""

    def __init__(self, needed, allowed, what=""):
        self.needed = needed
        self.allowed = allowed
        label = f" for {what}" if what else ""
        super().__init__(f"enumeration of {needed} states{label} exceeds budget {allowed}")


class ParseError(LinresError):
    """A file does not conform to its grammar."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class MalformedProof(LinresError):
    """A refutation object is structurally broken (bad references, cycles)."""


class NotUnsat(LinresError):
    """The instance is 0-1 satisfiable, so no refutation exists."""


class InfeasibleParams(LinresError):
    """Requested generator parameters cannot yield a valid instance."""


class RetriesExhausted(LinresError):
    """A randomized generator failed to meet its target within the retry cap."""


class PreconditionFailed(LinresError):
    """An operation's mathematical precondition does not hold for the inputs."""


class NotFound(LinresError):
    """A search guaranteed only under preconditions came up empty."""


class NeverReached(LinresError):
    """No path prefix attains the requested support size."""


class IllegalMove(LinresError):
    """A game strategy returned a move violating the round rules."""
