"""Scripted annotators answering interaction requests from ground truth."""
from __future__ import annotations

import zlib

from .gateway import InteractionRequest, InteractionResponse
from .rng import make_generator


class MissingTruth(KeyError):
    """The truth table does not cover a requested object."""


def oracle_ground_truth(
    request: InteractionRequest, truth_table: dict[str, str]
) -> InteractionResponse:
    """Answer a request with the true categories.

    Labeling requests get every sampled object labeled with its truth;
    quality-assurance requests get corrections only where the current
    label disagrees; label-ideation requests get the truth table's
    distinct categories, sorted.
    """
    if request.function == "labelIdeation":
        return InteractionResponse(
            request_id=request.request_id,
            categories=tuple(sorted(set(truth_table.values()))),
        )
    items = request.payload.get("sampledObjects", [])
    missing = [i["uuid"] for i in items if i["uuid"] not in truth_table]
    if missing:
        raise MissingTruth(f"no truth for object(s): {missing[:3]}")
    if request.function == "qualityAssurance":
        labels = tuple(
            {"uuid": i["uuid"], "category": truth_table[i["uuid"]]}
            for i in items
            if i.get("currentLabel", {}).get("category") != truth_table[i["uuid"]]
        )
    else:
        labels = tuple(
            {"uuid": i["uuid"], "category": truth_table[i["uuid"]]} for i in items
        )
    return InteractionResponse(request_id=request.request_id, labels=labels)


def oracle_noisy(
    request: InteractionRequest,
    truth_table: dict[str, str],
    error_rate: float,
    seed: int,
) -> InteractionResponse:
    """Ground truth with each label independently flipped with probability
    ``error_rate`` to a uniformly random wrong category."""
    if not 0.0 <= error_rate <= 1.0:
        raise ValueError("error rate must be within [0, 1]")
    base = oracle_ground_truth(request, truth_table)
    if base.labels is None:
        return base
    categories = list(request.payload.get("categories", []))
    rng = make_generator(seed, zlib.crc32(request.request_id.encode("utf-8")))
    flipped = []
    for entry in base.labels:
        entry = dict(entry)
        wrong = [c for c in categories if c != entry["category"]]
        if wrong and rng.random() < error_rate:
            entry["category"] = wrong[int(rng.integers(len(wrong)))]
        flipped.append(entry)
    return InteractionResponse(request_id=request.request_id, labels=tuple(flipped))


class OracleAnnotator:
    """In-process auto-responder plugging an oracle into a gateway."""

    def __init__(self, truth_table: dict[str, str], error_rate: float = 0.0, seed: int = 0):
        self.truth_table = dict(truth_table)
        self.error_rate = error_rate
        self.seed = seed

    def __call__(self, request: InteractionRequest) -> InteractionResponse:
        if self.error_rate > 0.0:
            return oracle_noisy(request, self.truth_table, self.error_rate, self.seed)
        return oracle_ground_truth(request, self.truth_table)
