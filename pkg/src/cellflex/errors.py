"""Exception hierarchy shared across the package."""


class CellflexError(Exception):
    """Base class for all package-specific errors."""


class ConfigurationError(CellflexError):
    """Scenario file or parameter set is invalid (maps to CLI exit code 1)."""


class PowerFlowError(CellflexError):
    """Backward/forward sweep failed to converge within the sweep budget."""


class InfeasibleNetworkError(PowerFlowError):
    """Voltage collapsed below the plausibility floor during the sweep."""


class DispatchError(CellflexError):
    """Continuous dispatch had to abort (e.g. power flow failed on an accepted vector)."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace
