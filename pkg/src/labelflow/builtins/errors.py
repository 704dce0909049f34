"""Errors raised by built-in module implementations."""
from __future__ import annotations


class BuiltinError(RuntimeError):
    """Base class for failures inside a built-in implementation."""


class MissingFeatures(BuiltinError):
    """A required feature row is absent for some data object."""


class UntrainedModel(BuiltinError):
    """The operation needs a trained model but got an untrained artifact."""


class InsufficientLabels(BuiltinError):
    """Not enough human-labeled objects to train."""


class KOutOfRange(BuiltinError):
    """A component/cluster count is outside its valid range."""


class NonNumericContent(BuiltinError):
    """A data object without vector content reached a numeric operation."""
