"""Closed vocabulary of labeling states and module functions.

Every workflow node reads and writes a fixed set of seven global states.
Each of the eight module functions has one canonical output state and a
fixed set of permitted input states; concrete implementations declare
which subset of the permitted inputs they actually read.
"""
from __future__ import annotations

from enum import Enum


class StateName(str, Enum):
    """The seven global states shared by all modules of a labeling tool."""

    DATA_OBJECTS = "dataObjects"
    LABELS = "labels"
    SAMPLES = "samples"
    FEATURES = "features"
    MODEL = "model"
    CATEGORIES = "categories"
    STOP = "stop"


# Fixed display/serialization order for state sets.
STATE_ORDER: tuple[StateName, ...] = (
    StateName.DATA_OBJECTS,
    StateName.LABELS,
    StateName.SAMPLES,
    StateName.FEATURES,
    StateName.MODEL,
    StateName.CATEGORIES,
    StateName.STOP,
)


class ModuleFunction(str, Enum):
    """The eight module kinds a process node can implement."""

    INTERACTIVE_LABELING = "interactiveLabeling"
    DATA_OBJECT_SELECTION = "dataObjectSelection"
    MODEL_TRAINING = "modelTraining"
    FEATURE_EXTRACTION = "featureExtraction"
    DEFAULT_LABELING = "defaultLabeling"
    QUALITY_ASSURANCE = "qualityAssurance"
    STOPPAGE_ANALYSIS = "stoppageAnalysis"
    LABEL_IDEATION = "labelIdeation"


# Canonical (single) output state of each module function.
CANONICAL_OUTPUT: dict[ModuleFunction, StateName] = {
    ModuleFunction.INTERACTIVE_LABELING: StateName.LABELS,
    ModuleFunction.DATA_OBJECT_SELECTION: StateName.SAMPLES,
    ModuleFunction.MODEL_TRAINING: StateName.MODEL,
    ModuleFunction.FEATURE_EXTRACTION: StateName.FEATURES,
    ModuleFunction.DEFAULT_LABELING: StateName.LABELS,
    ModuleFunction.QUALITY_ASSURANCE: StateName.LABELS,
    ModuleFunction.STOPPAGE_ANALYSIS: StateName.STOP,
    ModuleFunction.LABEL_IDEATION: StateName.CATEGORIES,
}

# Permitted (optional) input states of each module function. An
# implementation reads a subset of these, never anything outside.
PERMITTED_INPUTS: dict[ModuleFunction, frozenset[StateName]] = {
    ModuleFunction.INTERACTIVE_LABELING: frozenset(
        {StateName.DATA_OBJECTS, StateName.LABELS, StateName.SAMPLES,
         StateName.FEATURES, StateName.CATEGORIES}
    ),
    ModuleFunction.DATA_OBJECT_SELECTION: frozenset(
        {StateName.DATA_OBJECTS, StateName.LABELS, StateName.SAMPLES,
         StateName.MODEL, StateName.FEATURES}
    ),
    ModuleFunction.MODEL_TRAINING: frozenset(
        {StateName.LABELS, StateName.SAMPLES, StateName.MODEL, StateName.FEATURES}
    ),
    ModuleFunction.FEATURE_EXTRACTION: frozenset(
        {StateName.DATA_OBJECTS, StateName.LABELS, StateName.MODEL, StateName.FEATURES}
    ),
    ModuleFunction.DEFAULT_LABELING: frozenset(
        {StateName.SAMPLES, StateName.MODEL, StateName.FEATURES}
    ),
    ModuleFunction.QUALITY_ASSURANCE: frozenset(
        {StateName.DATA_OBJECTS, StateName.LABELS, StateName.FEATURES}
    ),
    ModuleFunction.STOPPAGE_ANALYSIS: frozenset(
        {StateName.DATA_OBJECTS, StateName.LABELS, StateName.MODEL,
         StateName.FEATURES, StateName.STOP}
    ),
    ModuleFunction.LABEL_IDEATION: frozenset(
        {StateName.DATA_OBJECTS, StateName.MODEL, StateName.FEATURES,
         StateName.CATEGORIES}
    ),
}

# Module functions that can produce a given state (used by fix suggestions).
PRODUCERS_OF: dict[StateName, tuple[ModuleFunction, ...]] = {
    state: tuple(f for f in ModuleFunction if CANONICAL_OUTPUT[f] == state)
    for state in StateName
}

# Decision predicates and the states they read.
PREDICATE_READS: dict[str, frozenset[StateName]] = {
    "stopIsTrue": frozenset({StateName.STOP}),
}


def sort_states(states) -> list[StateName]:
    """Order a state collection by the fixed display order."""
    index = {s: i for i, s in enumerate(STATE_ORDER)}
    return sorted(states, key=lambda s: index[s])
