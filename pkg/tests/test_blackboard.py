"""Blackboard state store: versions, invariants, snapshots, replay."""
from __future__ import annotations

import json

import pytest

from labelflow.blackboard import (
    Blackboard,
    DataObject,
    InvariantViolation,
    LabelRecord,
    ModelArtifact,
    replay_deltas,
    snapshot_to_json,
)
from labelflow.states import StateName


def _objects(n=3):
    return [DataObject(uuid=f"o{i}", content={"vector": [float(i), 1.0]}) for i in range(n)]


def _board(n=3) -> Blackboard:
    board = Blackboard()
    board.set_state(StateName.DATA_OBJECTS, _objects(n))
    board.set_state(StateName.CATEGORIES, ["a", "b"])
    return board


class TestGetSet:
    def test_fresh_defaults(self):
        board = Blackboard()
        assert board.get_state(StateName.STOP) is False
        assert board.get_state(StateName.SAMPLES) == []
        assert board.get_state(StateName.LABELS) == {}
        assert all(v == 0 for v in board.versions.values())

    def test_set_then_get(self):
        board = _board()
        board.set_state(StateName.SAMPLES, ["o0", "o1"])
        assert board.get_state(StateName.SAMPLES) == ["o0", "o1"]

    def test_snapshot_isolation(self):
        board = _board()
        before = board.get_state(StateName.SAMPLES)
        board.set_state(StateName.SAMPLES, ["o2"])
        assert before == []

    def test_mutating_a_snapshot_does_not_leak(self):
        board = _board()
        stolen = board.get_state(StateName.CATEGORIES)
        stolen.append("mutant")
        assert board.get_state(StateName.CATEGORIES) == ["a", "b"]


class TestVersionCounters:
    def test_two_writes_bump_twice(self):
        board = _board()
        v1 = board.set_state(StateName.SAMPLES, ["o0"])
        v2 = board.set_state(StateName.SAMPLES, ["o1"])
        assert (v1, v2) == (1, 2)
        assert board.versions[StateName.SAMPLES] == 2

    def test_get_does_not_bump(self):
        board = _board()
        board.get_state(StateName.LABELS)
        assert board.versions[StateName.LABELS] == 0

    def test_rejected_write_does_not_bump(self):
        board = _board()
        with pytest.raises(InvariantViolation):
            board.set_state(StateName.SAMPLES, ["ghost"])
        assert board.versions[StateName.SAMPLES] == 0


class TestInvariants:
    def test_label_for_unknown_uuid(self):
        board = _board()
        with pytest.raises(InvariantViolation, match="unknown data object"):
            board.set_state(StateName.LABELS,
                            {"ghost": LabelRecord(uuid="ghost", status="unlabeled")})

    def test_labeled_record_needs_known_category(self):
        board = _board()
        with pytest.raises(InvariantViolation, match="not in categories"):
            board.set_state(StateName.LABELS, {
                "o0": LabelRecord(uuid="o0", status="humanLabeled", category="zebra"),
            })

    def test_unlabeled_record_must_not_carry_category(self):
        board = _board()
        with pytest.raises(InvariantViolation, match="carries a category"):
            board.set_state(StateName.LABELS, {
                "o0": LabelRecord(uuid="o0", status="unlabeled", category="a"),
            })

    def test_feature_rows_must_share_length(self):
        board = _board()
        with pytest.raises(InvariantViolation, match="length"):
            board.set_state(StateName.FEATURES, {"o0": [1.0], "o1": [1.0, 2.0]})

    def test_feature_rows_must_be_finite(self):
        board = _board()
        with pytest.raises(InvariantViolation, match="finite"):
            board.set_state(StateName.FEATURES, {"o0": [float("nan")]})

    def test_duplicate_sample_uuid(self):
        board = _board()
        with pytest.raises(InvariantViolation, match="repeats"):
            board.set_state(StateName.SAMPLES, ["o0", "o0"])

    def test_trained_model_needs_parameters(self):
        board = _board()
        with pytest.raises(InvariantViolation, match="parameters"):
            board.set_state(StateName.MODEL, {
                "default": ModelArtifact(key="default", kind="decisionTree",
                                         trained=True),
            })

    def test_vector_dimensions_must_agree(self):
        board = Blackboard()
        with pytest.raises(InvariantViolation, match="vector length"):
            board.set_state(StateName.DATA_OBJECTS, [
                DataObject(uuid="a", content={"vector": [1.0]}),
                DataObject(uuid="b", content={"vector": [1.0, 2.0]}),
            ])

    def test_categories_in_use_cannot_vanish(self):
        board = _board()
        board.set_state(StateName.LABELS, {
            "o0": LabelRecord(uuid="o0", status="humanLabeled", category="b"),
        })
        with pytest.raises(InvariantViolation, match="in use"):
            board.set_state(StateName.CATEGORIES, ["a"])


class TestSnapshotAndReplay:
    def test_fresh_snapshot_all_defaults(self):
        snap = Blackboard().snapshot()
        assert snap["states"]["stop"] is False
        assert snap["states"]["dataObjects"] == []
        assert all(v == 0 for v in snap["versions"].values())

    def test_snapshot_round_trips_bit_exact(self):
        board = _board()
        board.set_state(StateName.FEATURES, {"o0": [0.1, 2.5], "o1": [1.0 / 3.0, -7.25],
                                             "o2": [1e-17, 3.14159]})
        text = snapshot_to_json(board.snapshot())
        assert snapshot_to_json(json.loads(text)) == text

    def test_replay_reproduces_final_snapshot(self):
        board = Blackboard()
        initial = board.snapshot()
        board.set_state(StateName.DATA_OBJECTS, _objects())
        board.set_state(StateName.CATEGORIES, ["a", "b"])
        board.set_state(StateName.LABELS, {
            "o0": LabelRecord(uuid="o0", status="humanLabeled", category="a"),
            "o1": LabelRecord(uuid="o1"),
            "o2": LabelRecord(uuid="o2", status="default", category="b"),
        })
        board.set_state(StateName.SAMPLES, ["o1"])
        board.set_state(StateName.STOP, True)
        replayed = replay_deltas(initial, board.delta_log)
        assert snapshot_to_json(replayed) == snapshot_to_json(board.snapshot())

    def test_delta_log_versions_match_counters(self):
        board = _board()
        board.set_state(StateName.SAMPLES, ["o0"])
        by_state: dict[str, list[int]] = {}
        for delta in board.delta_log:
            by_state.setdefault(delta["stateName"], []).append(delta["version"])
        for versions in by_state.values():
            assert versions == sorted(versions)
            assert versions == list(range(1, len(versions) + 1))
