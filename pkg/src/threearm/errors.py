"""Exception types raised across the package."""


class ThreeArmError(Exception):
    """Base class for all package errors."""


class ParameterDomainError(ThreeArmError, ValueError):
    """An argument lies outside its mathematical domain."""


class NumericDomainError(ThreeArmError, ArithmeticError):
    """A numerical object is invalid, e.g. a correlation matrix that is not PSD."""


class InfeasibleError(ThreeArmError):
    """The success target cannot be reached inside the sample-size bounds."""

    def __init__(self, message, max_attainable):
        super().__init__(message)
        self.max_attainable = max_attainable


class InputError(ThreeArmError, ValueError):
    """Trial data are incomplete or malformed."""


class ConfigError(ThreeArmError, ValueError):
    """A run configuration is malformed; the message names the offending field."""
