"""Exception hierarchy shared across the package.

The CLI maps ConfigError to exit code 3 and every other ThermoformError to
exit code 2 (numeric/convergence failure).
"""


class ThermoformError(Exception):
    """Base class for all package errors."""


class ConfigError(ThermoformError):
    """Malformed or inconsistent configuration input."""


class ConvergenceError(ThermoformError):
    """An iterative procedure failed to converge or a root was not bracketed."""


class BudgetError(ThermoformError):
    """A cylinder/digit/edge enumeration exceeded its configured cap."""


class BoundaryPointError(ThermoformError):
    """A point sits on a partition or branch-image boundary; membership is ambiguous."""


class DomainError(ThermoformError):
    """A point or index lies outside the domain it was claimed to belong to."""


class WordLengthError(ThermoformError):
    """A word is too short for the requested operation."""


class NotIrreducibleError(ThermoformError):
    """The truncated transition graph is not strongly connected."""
