"""Exception types shared across khinlab."""


class KhinlabError(Exception):
    """Base class for all khinlab errors."""


class DomainError(KhinlabError, ValueError):
    """An argument lies outside the range where the quantity is defined."""


class PreconditionError(KhinlabError, ValueError):
    """A documented precondition of an operation does not hold."""


class AccuracyError(KhinlabError, RuntimeError):
    """A numerical routine could not reach its requested accuracy.

    Attributes
    ----------
    achieved : float or None
        Best error estimate or bound that was reached.
    """

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class CapabilityError(KhinlabError, RuntimeError):
    """The requested problem size exceeds what an exact routine supports."""
