"""Exception hierarchy shared by the library and the command line."""

from __future__ import annotations


class RlctLabError(Exception):
    """Base class for every error raised by rlct_lab."""


class DomainError(RlctLabError, ValueError):
    """An argument lies outside the domain of the operation."""


class AmbiguityError(DomainError):
    """A model rate vector matches more than one true rate vector."""


class GroupAssignmentError(DomainError):
    """Partition sizes do not line up with the model components."""


class BudgetExceededError(RlctLabError):
    """The partition enumeration would exceed its size budget."""


class SamplerTuningError(RlctLabError, RuntimeError):
    """A Metropolis block stopped accepting proposals."""


class NumericalError(RlctLabError, ArithmeticError):
    """A quantity that must be finite came out zero or infinite."""


class InsufficientDataError(DomainError):
    """Not enough (or degenerate) experiment records for a fit."""


class ConfigError(RlctLabError, ValueError):
    """Malformed experiment configuration or record file."""
