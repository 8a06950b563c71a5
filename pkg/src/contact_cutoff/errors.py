"""Exception hierarchy shared by all modules."""


class ContactCutoffError(Exception):
    """Base class for package errors."""


class PreconditionError(ContactCutoffError, ValueError):
    """An input violates an operation's precondition."""


class ContractViolation(ContactCutoffError, RuntimeError):
    """An operation was called on a state it does not accept, or an
    internal consistency check failed."""


class ExhaustionError(ContactCutoffError, RuntimeError):
    """Rejection sampling ran out of attempts.  Retrying with a fresh
    stream is legitimate."""

    retryable = True

    def __init__(self, message, attempts):
        super().__init__(message)
        self.attempts = attempts


class GraphFormatError(ContactCutoffError, ValueError):
    """Malformed graph file."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class GraphValidationError(ContactCutoffError, ValueError):
    """Well-formed graph file describing an invalid graph."""


class CapacityError(ContactCutoffError, MemoryError):
    """A simulation outgrew its configured arena or population cap."""

    def __init__(self, message, time_reached=None, partial=None):
        super().__init__(message)
        self.time_reached = time_reached
        self.partial = partial


class EstimationError(ContactCutoffError, ArithmeticError):
    """An estimator cannot produce a value from the sampled data."""


class ConfigError(PreconditionError):
    """A configuration file or mapping does not match its schema."""
