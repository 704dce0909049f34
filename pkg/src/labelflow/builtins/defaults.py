"""Default labeling by model prediction and stoppage criteria."""
from __future__ import annotations

import numpy as np

from ..blackboard import DataObject, LabelRecord, ModelArtifact
from .errors import UntrainedModel
from .training import predict_proba


def default_label(
    model: ModelArtifact,
    features: dict[str, list[float]],
    samples: list[str],
    labels: dict[str, LabelRecord],
) -> dict[str, LabelRecord]:
    """Assign tentative labels to the unlabeled sampled objects.

    Returns a new labels map where each sampled object that was
    unlabeled now carries the model's argmax category with status
    ``default``; human labels are never overwritten. Probability ties
    resolve to the lexicographically first category.
    """
    if not model.trained:
        raise UntrainedModel(f"model {model.key!r} is not trained")
    if not samples:
        raise ValueError("samples must be nonempty")
    targets = [u for u in samples if labels.get(u, LabelRecord(u)).status == "unlabeled"]
    updated = dict(labels)
    if not targets:
        return updated
    probs = predict_proba(model, targets, features)
    # class_list is sorted at training time, so argmax-first == lexicographic.
    picks = np.argmax(probs, axis=1)
    for uuid, pick in zip(targets, picks):
        updated[uuid] = LabelRecord(
            uuid=uuid, status="default", category=model.class_list[int(pick)]
        )
    return updated


def stoppage_all_labeled(
    data_objects: list[DataObject], labels: dict[str, LabelRecord]
) -> bool:
    """Stop once every data object carries a human-confirmed label.

    Machine-assigned defaults do not count; an empty dataset stops
    vacuously.
    """
    return all(
        labels.get(obj.uuid, LabelRecord(obj.uuid)).status == "humanLabeled"
        for obj in data_objects
    )


def stoppage_rate(
    data_objects: list[DataObject], labels: dict[str, LabelRecord], rate: float
) -> bool:
    """Stop once the human-labeled fraction reaches ``rate`` (in [0, 1])."""
    if not 0.0 <= rate <= 1.0:
        raise ValueError("rate must be within [0, 1]")
    if not data_objects:
        return True
    done = sum(
        1
        for obj in data_objects
        if labels.get(obj.uuid, LabelRecord(obj.uuid)).status == "humanLabeled"
    )
    return done / len(data_objects) >= rate
