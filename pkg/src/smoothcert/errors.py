"""Exception types shared across the package."""


class InputError(ValueError):
    """Raised when an argument lies outside an operation's domain."""


class InfeasibleError(ValueError):
    """Raised when probability constraints admit no classifier."""


class AbstainError(RuntimeError):
    """Raised when a numerical tolerance cannot be met.

    Callers treat this as a request to fall back to a weaker but sound answer.
    """
