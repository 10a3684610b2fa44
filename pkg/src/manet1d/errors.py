"""Exception types shared across the package."""


class EnumerationLimitError(RuntimeError):
    """A combinatorial enumeration would exceed its configured size limit."""


class ReducibleChainError(RuntimeError):
    """A Markov chain that must have a single closed class has several."""

    def __init__(self, message: str, classes=None):
        super().__init__(message)
        self.classes = classes if classes is not None else []


class ConvergenceError(RuntimeError):
    """An iterative solver exhausted its iteration budget."""


class ConfigError(ValueError):
    """A run-configuration file or a policy spec could not be parsed."""
