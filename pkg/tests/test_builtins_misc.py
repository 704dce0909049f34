"""SVD features, default labeling, stoppage criteria, registry metadata."""
from __future__ import annotations

import math

import numpy as np
import pytest

from labelflow.blackboard import DataObject, LabelRecord, ModelArtifact
from labelflow.builtins.defaults import default_label, stoppage_all_labeled, stoppage_rate
from labelflow.builtins.errors import KOutOfRange, NonNumericContent, UntrainedModel
from labelflow.builtins.features import extract_svd_features, project, svd_basis
from labelflow.builtins.registry import REGISTRY, get_descriptor, implementations_for
from labelflow.builtins.training import train_tree
from labelflow.rng import make_generator
from labelflow.states import CANONICAL_OUTPUT, PERMITTED_INPUTS, ModuleFunction


def _vec_objects(rows):
    return [DataObject(uuid=f"o{i:02d}", content={"vector": list(map(float, r))})
            for i, r in enumerate(rows)]


class TestSvdFeatures:
    def test_line_data_first_component(self):
        # Points on y = 2x: the principal direction is (1, 2)/sqrt(5).
        xs = np.linspace(-2, 2, 9)
        objs = _vec_objects([(x, 2 * x) for x in xs])
        rows = np.asarray([o.content["vector"] for o in objs])
        _, components = svd_basis(rows, 1)
        expected = np.array([1.0, 2.0]) / math.sqrt(5.0)
        assert np.allclose(np.abs(components[0]), expected, atol=1e-6)
        # sign rule: the largest-magnitude loading is positive
        assert components[0][np.argmax(np.abs(components[0]))] > 0

    def test_zero_variance_coordinate_contributes_nothing(self):
        rng = make_generator(4)
        base = rng.normal(size=(12, 3))
        rows = np.column_stack([base[:, 0], np.full(12, 3.7), base[:, 1], base[:, 2]])
        _, components = svd_basis(rows, 3)
        assert np.abs(components[:, 1]).max() < 1e-9

    def test_full_rank_projection_is_isometric(self):
        rng = make_generator(6)
        rows = rng.normal(size=(10, 4))
        mean, components = svd_basis(rows, 4)
        projected = project(rows, mean, components)
        for i in range(10):
            for j in range(i + 1, 10):
                original = np.linalg.norm(rows[i] - rows[j])
                mapped = np.linalg.norm(projected[i] - projected[j])
                assert mapped == pytest.approx(original, abs=1e-9)

    def test_output_rows_have_length_k(self):
        objs = _vec_objects(make_generator(1).normal(size=(20, 8)))
        features = extract_svd_features(objs, k=3)
        assert all(len(row) == 3 for row in features.values())
        assert set(features) == {o.uuid for o in objs}

    def test_k_out_of_range(self):
        objs = _vec_objects([[1.0, 2.0], [3.0, 4.0]])
        with pytest.raises(KOutOfRange):
            extract_svd_features(objs, k=3)

    def test_non_vector_content_rejected(self):
        objs = [DataObject(uuid="t", content={"text": "hello"})]
        with pytest.raises(NonNumericContent):
            extract_svd_features(objs, k=1)


class TestDefaultLabel:
    def _model_and_features(self):
        features = {"a": [0.0], "b": [1.0], "c": [10.0], "d": [11.0], "e": [0.5]}
        labels = {
            "a": LabelRecord(uuid="a", status="humanLabeled", category="low"),
            "b": LabelRecord(uuid="b", status="humanLabeled", category="low"),
            "c": LabelRecord(uuid="c", status="humanLabeled", category="high"),
            "d": LabelRecord(uuid="d", status="humanLabeled", category="high"),
            "e": LabelRecord(uuid="e"),
        }
        return train_tree(features, labels), features, labels

    def test_never_overwrites_human_labels(self):
        model, features, labels = self._model_and_features()
        updated = default_label(model, features, ["a", "e"], labels)
        assert updated["a"] == labels["a"]
        assert updated["e"].status == "default"
        assert updated["e"].category == "low"

    def test_tie_breaks_to_first_category(self):
        model = ModelArtifact(
            key="default", kind="decisionTree", class_list=("alpha", "beta"),
            parameters={"nodes": [{"leaf": True, "probs": [0.5, 0.5]}], "root": 0,
                        "featureDim": 1},
            trained=True,
        )
        labels = {"x": LabelRecord(uuid="x")}
        updated = default_label(model, {"x": [0.0]}, ["x"], labels)
        assert updated["x"].category == "alpha"

    def test_matches_standalone_argmax(self):
        from labelflow.builtins.training import predict_proba

        model, features, labels = self._model_and_features()
        updated = default_label(model, features, ["e"], labels)
        probs = predict_proba(model, ["e"], features)
        assert updated["e"].category == model.class_list[int(probs.argmax())]

    def test_untrained_model_error(self):
        labels = {"x": LabelRecord(uuid="x")}
        with pytest.raises(UntrainedModel):
            default_label(ModelArtifact(key="m", kind="decisionTree"),
                          {"x": [0.0]}, ["x"], labels)


class TestStoppage:
    def _board(self, statuses):
        objs = [DataObject(uuid=f"o{i}", content={"vector": [0.0]})
                for i in range(len(statuses))]
        labels = {}
        for obj, status in zip(objs, statuses):
            category = "a" if status != "unlabeled" else None
            labels[obj.uuid] = LabelRecord(uuid=obj.uuid, status=status,
                                           category=category)
        return objs, labels

    def test_all_human_labeled_stops(self):
        objs, labels = self._board(["humanLabeled"] * 4)
        assert stoppage_all_labeled(objs, labels) is True

    def test_default_labels_do_not_count(self):
        objs, labels = self._board(["humanLabeled", "humanLabeled", "default"])
        assert stoppage_all_labeled(objs, labels) is False

    def test_empty_dataset_vacuously_stops(self):
        assert stoppage_all_labeled([], {}) is True
        assert stoppage_rate([], {}, 0.7) is True

    def test_rate_arithmetic(self):
        objs, labels = self._board(["humanLabeled"] * 5 + ["unlabeled"] * 5)
        assert stoppage_rate(objs, labels, 0.5) is True
        assert stoppage_rate(objs, labels, 0.51) is False

    def test_rate_zero_always_true(self):
        objs, labels = self._board(["unlabeled"] * 3)
        assert stoppage_rate(objs, labels, 0.0) is True

    def test_rate_one_equals_all_labeled(self):
        for statuses in (["humanLabeled"] * 3,
                         ["humanLabeled", "default", "humanLabeled"],
                         ["unlabeled"] * 2):
            objs, labels = self._board(statuses)
            assert stoppage_rate(objs, labels, 1.0) == stoppage_all_labeled(objs, labels)


class TestRegistry:
    def test_closed_key_set(self):
        assert set(REGISTRY) == {
            "builtin.selection.random", "builtin.selection.cluster",
            "builtin.selection.entropy", "builtin.selection.leastConfidence",
            "builtin.selection.smallestMargin",
            "builtin.features.svd",
            "builtin.train.logreg", "builtin.train.tree",
            "builtin.train.labelPropagation",
            "builtin.defaultLabel.modelPrediction",
            "builtin.stoppage.allLabeled", "builtin.stoppage.rate",
            "builtin.interface.gridMatrixClassification",
            "builtin.interface.singleObjectClassification",
            "builtin.interface.labelIdeationPanel",
            "builtin.interface.qualityAssuranceReview",
        }

    def test_inputs_within_permitted_sets(self):
        for descriptor in REGISTRY.values():
            assert descriptor.declared_inputs <= PERMITTED_INPUTS[descriptor.function]

    def test_algorithmic_entries_have_runners(self):
        for descriptor in REGISTRY.values():
            if descriptor.execution == "algorithmic":
                assert descriptor.run is not None
            else:
                assert descriptor.run is None
                assert descriptor.interface_layout in ("gridMatrix", "singleObject")

    def test_every_function_has_an_implementation(self):
        for function in ModuleFunction:
            assert implementations_for(function), function

    def test_config_defaults_merge(self):
        descriptor = get_descriptor("builtin.selection.random")
        merged = descriptor.effective_config({"batchSize": 5})
        assert merged["batchSize"] == 5
        assert "seed" in merged

    def test_canonical_output_table(self):
        expected = {
            "interactiveLabeling": "labels",
            "dataObjectSelection": "samples",
            "modelTraining": "model",
            "featureExtraction": "features",
            "defaultLabeling": "labels",
            "qualityAssurance": "labels",
            "stoppageAnalysis": "stop",
            "labelIdeation": "categories",
        }
        assert {f.value: s.value for f, s in CANONICAL_OUTPUT.items()} == expected
