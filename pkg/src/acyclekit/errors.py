"""Exception hierarchy for acyclekit."""

from __future__ import annotations


class AcycleKitError(Exception):
    """Base class for all acyclekit errors."""


class ValidationError(AcycleKitError):
    """Malformed or inconsistent input."""


class MalformedFaceError(ValidationError):
    """A face has repeated, negative, or missing vertex ids."""


class MissingFaceError(ValidationError):
    """A required face is absent from the complex."""


class MissingWeightError(ValidationError):
    """A face of the complex has no weight assigned."""


class NonMonotoneWeightsError(ValidationError):
    """A face weighs less than one of its sub-faces."""


class PreconditionError(AcycleKitError):
    """An operation's stated precondition does not hold."""


class NoSpanningAcycleError(PreconditionError):
    """No spanning acycle exists in the requested dimension."""


class HypergraphDisconnectedError(PreconditionError):
    """The coface adjacency graph on codimension-1 faces is disconnected."""


class DivergingLifetimeError(PreconditionError):
    """Lifetime integral diverges because homology survives at infinity."""


class TooLargeError(AcycleKitError):
    """The exhaustive search space exceeds the configured cap."""


class InvariantViolationError(AcycleKitError):
    """An identity that must hold exactly failed; indicates a bug."""
