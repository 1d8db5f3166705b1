"""Exception types shared across the package."""


class InvariantError(ValueError):
    """A domain object violates one of its structural invariants."""


class UnconditionableError(ValueError):
    """Conditioning on an event of probability zero."""


class EnumerationGuardError(ValueError):
    """The state space is too large for exhaustive enumeration."""
