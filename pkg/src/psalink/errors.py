"""Exception hierarchy shared by all psalink modules."""


class PsaLinkError(Exception):
    """Base class for every error raised by psalink."""


class DomainError(PsaLinkError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class PreconditionError(PsaLinkError, ValueError):
    """An operation was called in a regime it does not handle."""


class DegenerateChannelError(DomainError):
    """Channel noise vanishes in exactly one quadrature, so omega is undefined."""


class NumericalFailure(PsaLinkError, RuntimeError):
    """A numerical routine failed to converge or to bracket a root.

    ``interval`` holds the scanned interval when the failure comes from a
    root bracket search.
    """

    def __init__(self, message, interval=None):
        super().__init__(message)
        self.interval = interval


class InfeasibleError(PsaLinkError):
    """No amplifier configuration satisfies the power constraint."""

    def __init__(self, message, margin=None):
        super().__init__(message)
        self.margin = margin


class ConfigError(PsaLinkError, ValueError):
    """A configuration file is malformed; ``field`` names the offending key."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field
