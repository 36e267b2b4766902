"""Exception types shared across the package."""


class DomainError(ValueError):
    """An input lies outside the physical domain of an operation."""


class BranchDomainError(DomainError):
    """A hybrid frequency is not reachable on the requested branch."""


class UsageError(ValueError):
    """Invalid call: empty input, violated step-size precondition, etc."""


class DiagnosticError(RuntimeError):
    """A numerical procedure could not produce a trustworthy result."""


class BandwidthError(DiagnosticError):
    pass


class FitError(DiagnosticError):
    pass


class HeterodyneBandError(DiagnosticError):
    pass


class ConfigError(ValueError):
    pass
