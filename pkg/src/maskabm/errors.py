"""Exception hierarchy shared by the simulator modules."""


class MaskABMError(Exception):
    """Base class for all package errors."""


class ConfigurationError(MaskABMError, ValueError):
    """Infeasible or inconsistent parameters."""


class EdgeListParseError(MaskABMError, ValueError):
    def __init__(self, message, line_number=None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class CalibrationError(MaskABMError, ValueError):
    """The requested network reproduction number cannot be reached."""

    def __init__(self, message, ceiling=None):
        self.ceiling = ceiling
        super().__init__(message)


class EstimationError(MaskABMError, LookupError):
    """Blending was asked for an action with no stored instance."""


class UndefinedStatisticError(MaskABMError, ValueError):
    """A regression or correlation is undefined for the given data."""
