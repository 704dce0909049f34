"""Built-in module implementations and the implementation registry."""
from .errors import (
    BuiltinError,
    InsufficientLabels,
    KOutOfRange,
    MissingFeatures,
    NonNumericContent,
    UntrainedModel,
)
from .registry import REGISTRY, ImplementationDescriptor, get_descriptor, implementations_for

__all__ = [
    "BuiltinError",
    "InsufficientLabels",
    "KOutOfRange",
    "MissingFeatures",
    "NonNumericContent",
    "UntrainedModel",
    "REGISTRY",
    "ImplementationDescriptor",
    "get_descriptor",
    "implementations_for",
]
