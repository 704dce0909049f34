"""Versioned store of the seven global labeling states.

Every executing module reads inputs from and writes its output to this
shared board. Each state carries a monotone version counter bumped on
every write; writes are validated against referential integrity with
the current data objects and categories. A single logical writer (the
engine) mutates the board; readers get consistent snapshots.
"""
from __future__ import annotations

import copy
import json
import math
import threading
from dataclasses import dataclass, field
from typing import Any

from .states import StateName


class InvariantViolation(ValueError):
    """A write would break a state invariant or referential integrity."""


VALID_LABEL_STATUSES = ("unlabeled", "default", "humanLabeled")


@dataclass(frozen=True)
class DataObject:
    """An entity to be labeled: a vector, a text, or an image reference."""

    uuid: str
    content: dict[str, Any]
    display: dict[str, Any] = field(default_factory=dict)

    def content_kind(self) -> str:
        for kind in ("vector", "text", "imageRef"):
            if kind in self.content:
                return kind
        raise InvariantViolation(f"data object {self.uuid} has no recognized content")


@dataclass(frozen=True)
class LabelRecord:
    """Current annotation of one data object."""

    uuid: str
    status: str = "unlabeled"
    category: str | None = None
    free_text: str | None = None

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {"uuid": self.uuid, "status": self.status}
        if self.category is not None:
            out["category"] = self.category
        if self.free_text is not None:
            out["freeText"] = self.free_text
        return out

    @staticmethod
    def from_json(raw: dict[str, Any]) -> "LabelRecord":
        return LabelRecord(
            uuid=raw["uuid"],
            status=raw.get("status", "unlabeled"),
            category=raw.get("category"),
            free_text=raw.get("freeText"),
        )


@dataclass(frozen=True)
class ModelArtifact:
    """A (possibly untrained) machine-learned model stored on the board."""

    key: str
    kind: str
    class_list: tuple[str, ...] = ()
    parameters: dict[str, Any] | None = None
    trained: bool = False

    def to_json(self) -> dict[str, Any]:
        return {
            "key": self.key,
            "kind": self.kind,
            "classList": list(self.class_list),
            "parameters": self.parameters,
            "trained": self.trained,
        }

    @staticmethod
    def from_json(raw: dict[str, Any]) -> "ModelArtifact":
        return ModelArtifact(
            key=raw["key"],
            kind=raw["kind"],
            class_list=tuple(raw.get("classList", ())),
            parameters=raw.get("parameters"),
            trained=raw.get("trained", False),
        )


MODEL_KINDS = ("logisticRegression", "decisionTree", "labelPropagation")


def _check_finite_vector(values, context: str) -> None:
    for v in values:
        if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v):
            raise InvariantViolation(f"{context}: values must be finite numbers")


class Blackboard:
    """The global data model: seven states plus per-state version counters."""

    def __init__(self) -> None:
        self._lock = threading.RLock()
        self._states: dict[StateName, Any] = {
            StateName.DATA_OBJECTS: [],
            StateName.LABELS: {},
            StateName.SAMPLES: [],
            StateName.FEATURES: {},
            StateName.MODEL: {},
            StateName.CATEGORIES: [],
            StateName.STOP: False,
        }
        self.versions: dict[StateName, int] = {s: 0 for s in StateName}
        # Append-only value log; one record per write, mirrors versions.
        self.delta_log: list[dict[str, Any]] = []

    # -- reads ---------------------------------------------------------

    def get_state(self, name: StateName) -> Any:
        """Immutable snapshot of one state; never bumps versions."""
        with self._lock:
            return copy.deepcopy(self._states[name])

    def snapshot(self) -> dict[str, Any]:
        """Point-in-time JSON image of every state and version counter."""
        with self._lock:
            return {
                "states": {
                    StateName.DATA_OBJECTS.value: [
                        {"uuid": o.uuid, "content": o.content, "display": o.display}
                        for o in self._states[StateName.DATA_OBJECTS]
                    ],
                    StateName.LABELS.value: {
                        uuid: rec.to_json()
                        for uuid, rec in sorted(self._states[StateName.LABELS].items())
                    },
                    StateName.SAMPLES.value: list(self._states[StateName.SAMPLES]),
                    StateName.FEATURES.value: {
                        uuid: list(row)
                        for uuid, row in sorted(self._states[StateName.FEATURES].items())
                    },
                    StateName.MODEL.value: {
                        key: art.to_json()
                        for key, art in sorted(self._states[StateName.MODEL].items())
                    },
                    StateName.CATEGORIES.value: list(self._states[StateName.CATEGORIES]),
                    StateName.STOP.value: self._states[StateName.STOP],
                },
                "versions": {s.value: self.versions[s] for s in StateName},
            }

    # -- writes --------------------------------------------------------

    def set_state(self, name: StateName, value: Any) -> int:
        """Replace a state atomically; returns the new version counter."""
        with self._lock:
            validator = _VALIDATORS[name]
            normalized = validator(self, value)
            self._states[name] = normalized
            self.versions[name] += 1
            version = self.versions[name]
            self.delta_log.append(
                {"stateName": name.value, "version": version,
                 "value": _state_to_json(name, normalized)}
            )
            return version

    # -- validation helpers ---------------------------------------------

    def _uuids(self) -> set[str]:
        return {o.uuid for o in self._states[StateName.DATA_OBJECTS]}


def _validate_data_objects(board: Blackboard, value: Any) -> list[DataObject]:
    if not isinstance(value, list) or not all(isinstance(o, DataObject) for o in value):
        raise InvariantViolation("dataObjects must be a list of DataObject")
    seen: set[str] = set()
    dim: int | None = None
    for obj in value:
        if obj.uuid in seen:
            raise InvariantViolation(f"duplicate data object uuid {obj.uuid!r}")
        seen.add(obj.uuid)
        kind = obj.content_kind()
        if kind == "vector":
            vec = obj.content["vector"]
            _check_finite_vector(vec, f"data object {obj.uuid}")
            if dim is None:
                dim = len(vec)
            elif len(vec) != dim:
                raise InvariantViolation(
                    f"data object {obj.uuid}: vector length {len(vec)} != {dim}"
                )
    # Replacing data objects must not orphan existing references.
    for state, label in ((StateName.LABELS, "labels"), (StateName.FEATURES, "features")):
        stale = set(board._states[state]) - seen
        if stale:
            raise InvariantViolation(f"{label} reference unknown uuids: {sorted(stale)[:3]}")
    stale = set(board._states[StateName.SAMPLES]) - seen
    if stale:
        raise InvariantViolation(f"samples reference unknown uuids: {sorted(stale)[:3]}")
    return list(value)


def _validate_labels(board: Blackboard, value: Any) -> dict[str, LabelRecord]:
    if not isinstance(value, dict):
        raise InvariantViolation("labels must be a dict uuid -> LabelRecord")
    uuids = board._uuids()
    categories = set(board._states[StateName.CATEGORIES])
    for uuid, rec in value.items():
        if not isinstance(rec, LabelRecord):
            raise InvariantViolation("labels values must be LabelRecord")
        if uuid != rec.uuid:
            raise InvariantViolation(f"label record keyed {uuid!r} but names {rec.uuid!r}")
        if uuid not in uuids:
            raise InvariantViolation(f"label for unknown data object {uuid!r}")
        if rec.status not in VALID_LABEL_STATUSES:
            raise InvariantViolation(f"invalid label status {rec.status!r}")
        if rec.status == "unlabeled":
            if rec.category is not None:
                raise InvariantViolation(f"unlabeled record {uuid!r} carries a category")
        else:
            if rec.category is None:
                raise InvariantViolation(f"{rec.status} record {uuid!r} lacks a category")
            if rec.category not in categories:
                raise InvariantViolation(
                    f"label category {rec.category!r} not in categories state"
                )
    return dict(value)


def _validate_samples(board: Blackboard, value: Any) -> list[str]:
    if not isinstance(value, list) or not all(isinstance(u, str) for u in value):
        raise InvariantViolation("samples must be a list of uuids")
    uuids = board._uuids()
    seen: set[str] = set()
    for u in value:
        if u not in uuids:
            raise InvariantViolation(f"sample references unknown data object {u!r}")
        if u in seen:
            raise InvariantViolation(f"sample list repeats uuid {u!r}")
        seen.add(u)
    return list(value)


def _validate_features(board: Blackboard, value: Any) -> dict[str, list[float]]:
    if not isinstance(value, dict):
        raise InvariantViolation("features must be a dict uuid -> vector")
    uuids = board._uuids()
    length: int | None = None
    normalized: dict[str, list[float]] = {}
    for uuid, row in value.items():
        if uuid not in uuids:
            raise InvariantViolation(f"feature row for unknown data object {uuid!r}")
        row = list(row)
        _check_finite_vector(row, f"feature row {uuid}")
        if length is None:
            length = len(row)
        elif len(row) != length:
            raise InvariantViolation(f"feature row {uuid}: length {len(row)} != {length}")
        normalized[uuid] = [float(v) for v in row]
    return normalized


def _validate_model(board: Blackboard, value: Any) -> dict[str, ModelArtifact]:
    if not isinstance(value, dict):
        raise InvariantViolation("model must be a dict key -> ModelArtifact")
    for key, art in value.items():
        if not isinstance(art, ModelArtifact) or art.key != key:
            raise InvariantViolation(f"model entry {key!r} is not a matching ModelArtifact")
        if art.kind not in MODEL_KINDS:
            raise InvariantViolation(f"unknown model kind {art.kind!r}")
        if art.trained and (art.parameters is None or not art.class_list):
            raise InvariantViolation(
                f"trained model {key!r} must carry parameters and a class list"
            )
    return dict(value)


def _validate_categories(board: Blackboard, value: Any) -> list[str]:
    if not isinstance(value, list) or not all(isinstance(c, str) for c in value):
        raise InvariantViolation("categories must be a list of strings")
    if len(set(value)) != len(value):
        raise InvariantViolation("categories must be distinct")
    # Shrinking categories must not strand existing labeled records.
    in_use = {
        rec.category
        for rec in board._states[StateName.LABELS].values()
        if rec.category is not None
    }
    missing = in_use - set(value)
    if missing:
        raise InvariantViolation(f"categories in use would be removed: {sorted(missing)}")
    return list(value)


def _validate_stop(board: Blackboard, value: Any) -> bool:
    if not isinstance(value, bool):
        raise InvariantViolation("stop must be a boolean")
    return value


_VALIDATORS = {
    StateName.DATA_OBJECTS: _validate_data_objects,
    StateName.LABELS: _validate_labels,
    StateName.SAMPLES: _validate_samples,
    StateName.FEATURES: _validate_features,
    StateName.MODEL: _validate_model,
    StateName.CATEGORIES: _validate_categories,
    StateName.STOP: _validate_stop,
}


def _state_to_json(name: StateName, value: Any) -> Any:
    if name == StateName.DATA_OBJECTS:
        return [{"uuid": o.uuid, "content": o.content, "display": o.display} for o in value]
    if name == StateName.LABELS:
        return {uuid: rec.to_json() for uuid, rec in sorted(value.items())}
    if name == StateName.FEATURES:
        return {uuid: list(row) for uuid, row in sorted(value.items())}
    if name == StateName.MODEL:
        return {key: art.to_json() for key, art in sorted(value.items())}
    if name in (StateName.SAMPLES, StateName.CATEGORIES):
        return list(value)
    return value


def snapshot_to_json(snapshot: dict[str, Any]) -> str:
    """Canonical serialization of a snapshot; bit-exact round-trips."""
    return json.dumps(snapshot, indent=2, ensure_ascii=False, sort_keys=True) + "\n"


def replay_deltas(initial: dict[str, Any], deltas: list[dict[str, Any]]) -> dict[str, Any]:
    """Apply an ordered delta log to an initial snapshot image."""
    image = copy.deepcopy(initial)
    for delta in deltas:
        image["states"][delta["stateName"]] = copy.deepcopy(delta["value"])
        image["versions"][delta["stateName"]] = delta["version"]
    return image
