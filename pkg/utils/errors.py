"""
Exception types shared across the simulator.

Parameter problems are ValueErrors so callers that only know the standard
library hierarchy still catch them.
"""


class InvalidParameterError(ValueError):
    """A model, policy or simulation parameter is outside its valid range."""


class DomainError(ValueError):
    """An argument lies outside the support of a distribution."""


class InvalidStateError(RuntimeError):
    """A policy state is inconsistent with the parameters it is used with."""


class TruncationError(RuntimeError):
    """A series could not be certified to the requested tolerance under the hard cap."""
