"""Exception types shared across the package."""


class YoptError(Exception):
    """Base class for all package errors."""


class ContractViolation(YoptError, ValueError):
    """An argument violates an operation's precondition (invalid candidate,
    space mismatch, bad dimension)."""


class ConfigError(YoptError, ValueError):
    """An optimizer or experiment configuration is inconsistent."""


class DegenerateInputError(YoptError, ValueError):
    """A statistic is undefined for the given sample(s)."""


class UnsupportedSpaceError(YoptError, TypeError):
    """The optimizer does not support this search-space kind."""


class IngestionError(YoptError, ValueError):
    """An external results file is malformed."""
