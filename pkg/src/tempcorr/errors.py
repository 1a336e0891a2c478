"""Exception hierarchy shared by all modules."""


class TempcorrError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(TempcorrError, ValueError):
    """Malformed argument, such as a wrong length or an out-of-range entry."""


class PromiseViolation(TempcorrError, ValueError):
    """Input vector does not satisfy the modulo-d promise."""


class CapExceeded(TempcorrError, RuntimeError):
    """Requested enumeration or simulation exceeds the configured size cap."""


class UnsupportedParameters(TempcorrError, ValueError):
    """Parameters fall outside the hypotheses an operation is defined for."""


class ProtocolInvalid(TempcorrError, ValueError):
    """A protocol table entry leaves its declared alphabet."""


class NotApplicable(TempcorrError, ValueError):
    """The adversary's preconditions do not hold for this protocol.

    This is not a claim that the protocol wins the game.
    """


class InternalContradiction(TempcorrError, RuntimeError):
    """An invariant guaranteed by construction failed (indicates a bug)."""


class NormalizationError(TempcorrError, ArithmeticError):
    """A simulated outcome distribution does not carry unit mass.

    The offending (unrenormalized) distribution is attached as ``distribution``.
    """

    def __init__(self, message, distribution=None):
        super().__init__(message)
        self.distribution = distribution
