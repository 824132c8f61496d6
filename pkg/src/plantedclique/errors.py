"""Exception types shared across the package."""


class ParameterError(ValueError):
    """An argument violates an operation's preconditions."""


class CapabilityError(RuntimeError):
    """A privileged accessor was called through an algorithm-facing handle."""


class AuditUnavailableError(RuntimeError):
    """Query recording was not enabled, so the ledger cannot be audited."""
