"""Data object selection: random, cluster, uncertainty."""
from __future__ import annotations

import math

import numpy as np
import pytest

from labelflow.blackboard import DataObject, LabelRecord, ModelArtifact
from labelflow.builtins.errors import MissingFeatures, UntrainedModel
from labelflow.builtins.selection import (
    kmeans,
    select_active,
    select_cluster,
    select_random,
    uncertainty_score,
)
from labelflow.builtins.training import train_logreg
from labelflow.rng import make_generator


def _objects(n):
    return [DataObject(uuid=f"o{i:03d}", content={"vector": [float(i)]}) for i in range(n)]


def _labels(objs, labeled=()):
    return {
        o.uuid: (LabelRecord(uuid=o.uuid, status="humanLabeled", category="a")
                 if o.uuid in labeled else LabelRecord(uuid=o.uuid))
        for o in objs
    }


class TestSelectRandom:
    def test_exhausts_small_pool(self):
        objs = _objects(3)
        picked = select_random(objs, _labels(objs), batch_size=3, seed=1)
        assert sorted(picked) == [o.uuid for o in objs]

    def test_all_labeled_gives_empty(self):
        objs = _objects(4)
        labels = _labels(objs, labeled={o.uuid for o in objs})
        assert select_random(objs, labels, batch_size=2, seed=1) == []

    def test_deterministic_across_runs(self):
        objs = _objects(100)
        labels = _labels(objs)
        first = select_random(objs, labels, batch_size=16, seed=42)
        second = select_random(objs, labels, batch_size=16, seed=42)
        assert first == second and len(first) == 16

    def test_labels_version_varies_the_batch(self):
        objs = _objects(100)
        labels = _labels(objs)
        one = select_random(objs, labels, batch_size=16, seed=42, labels_version=1)
        two = select_random(objs, labels, batch_size=16, seed=42, labels_version=2)
        assert one != two

    def test_only_unlabeled_without_duplicates(self):
        objs = _objects(30)
        labeled = {f"o{i:03d}" for i in range(0, 30, 3)}
        labels = _labels(objs, labeled=labeled)
        picked = select_random(objs, labels, batch_size=25, seed=9)
        assert len(picked) == len(set(picked)) == 20
        assert not set(picked) & labeled


class TestKMeans:
    def test_two_blobs_separate(self):
        rng = make_generator(3)
        a = rng.normal([0, 0], 0.05, size=(20, 2))
        b = rng.normal([10, 10], 0.05, size=(20, 2))
        X = np.vstack([a, b])
        centroids, assignments, _ = kmeans(X, 2, make_generator(0))
        assert len(set(assignments[:20])) == 1
        assert len(set(assignments[20:])) == 1
        assert assignments[0] != assignments[20]

    def test_objective_non_increasing(self):
        rng = make_generator(11)
        X = rng.normal(size=(50, 4))
        for seed in range(5):
            _, _, trace = kmeans(X, 5, make_generator(seed))
            assert all(b <= a + 1e-9 for a, b in zip(trace, trace[1:]))


class TestSelectCluster:
    def _features(self, objs, coords):
        return {o.uuid: list(map(float, c)) for o, c in zip(objs, coords)}

    def test_two_blobs_one_from_each(self):
        objs = _objects(8)
        coords = [(0, 0), (0.1, 0), (0, 0.1), (0.1, 0.1),
                  (9, 9), (9.1, 9), (9, 9.1), (9.1, 9.1)]
        picked = select_cluster(self._features(objs, coords), _labels(objs),
                                k=2, batch_size=2, seed=5, data_objects=objs)
        assert len(picked) == 2
        first_blob = {f"o{i:03d}" for i in range(4)}
        assert sum(p in first_blob for p in picked) == 1

    def test_k_one_orders_by_distance_to_mean(self):
        objs = _objects(5)
        coords = [(0,), (1,), (2,), (3,), (10,)]
        features = self._features(objs, coords)
        picked = select_cluster(features, _labels(objs), k=1, batch_size=5, seed=0,
                                data_objects=objs)
        mean = np.mean([c[0] for c in coords])
        expected = sorted(features, key=lambda u: (abs(features[u][0] - mean), u))
        assert picked == expected

    def test_missing_features_error(self):
        objs = _objects(3)
        features = {"o000": [0.0], "o001": [1.0]}
        with pytest.raises(MissingFeatures):
            select_cluster(features, _labels(objs), k=1, batch_size=2, seed=0,
                           data_objects=objs)


class TestUncertainty:
    def test_entropy_scores_match_formula(self):
        probs = np.array([[0.9, 0.1], [0.5, 0.5], [0.7, 0.3]])
        scores = uncertainty_score(probs, "entropy")
        expected = [-(p * math.log(p) + q * math.log(q)) for p, q in probs]
        assert np.allclose(scores, expected, atol=1e-12)
        assert np.allclose(scores, [0.325083, 0.693147, 0.610864], atol=1e-6)

    def test_one_hot_is_least_uncertain(self):
        probs = np.array([[1.0, 0.0], [0.6, 0.4]])
        for criterion, certain_value in (("entropy", 0.0), ("leastConfidence", 0.0),
                                         ("smallestMargin", -1.0)):
            scores = uncertainty_score(probs, criterion)
            assert scores[0] == pytest.approx(certain_value, abs=1e-9)
            assert scores[0] < scores[1]

    def test_uniform_maximizes_entropy(self):
        for c in (2, 3, 5):
            probs = np.full((1, c), 1.0 / c)
            assert uncertainty_score(probs, "entropy")[0] == pytest.approx(math.log(c))


class TestSelectActive:
    def _trained_model(self):
        # 1-D, two separated classes: probability varies smoothly with x.
        objs = _objects(20)
        features = {o.uuid: [float(i) - 10.0] for i, o in enumerate(objs)}
        labels = {}
        for i, o in enumerate(objs):
            if i < 4:
                labels[o.uuid] = LabelRecord(uuid=o.uuid, status="humanLabeled",
                                             category="low")
            elif i >= 16:
                labels[o.uuid] = LabelRecord(uuid=o.uuid, status="humanLabeled",
                                             category="high")
            else:
                labels[o.uuid] = LabelRecord(uuid=o.uuid)
        model = train_logreg(features, labels, epochs=400)
        return objs, features, labels, model

    def test_entropy_picks_boundary_points(self):
        objs, features, labels, model = self._trained_model()
        picked = select_active(features, labels, model, batch_size=2,
                               criterion="entropy", data_objects=objs)
        # Most uncertain unlabeled points straddle x = 0: o009/o010.
        assert set(picked) == {"o009", "o010"}

    def test_spec_example_entropy_ranking(self):
        # Three unlabeled objects whose predicted distributions are known;
        # entropy must select the 50/50 one first.
        distributions = {"u1": [0.9, 0.1], "u2": [0.5, 0.5], "u3": [0.7, 0.3]}
        scores = {
            u: uncertainty_score(np.array([p]), "entropy")[0]
            for u, p in distributions.items()
        }
        assert max(scores, key=scores.get) == "u2"

    def test_untrained_model_error(self):
        objs = _objects(3)
        features = {o.uuid: [0.0] for o in objs}
        with pytest.raises(UntrainedModel):
            select_active(features, _labels(objs),
                          ModelArtifact(key="default", kind="decisionTree"),
                          batch_size=1, criterion="entropy", data_objects=objs)

    def test_ties_break_by_uuid(self):
        objs = _objects(6)
        features = {o.uuid: [0.0] for o in objs}  # identical -> identical scores
        labels = dict(_labels(objs))
        labels["o000"] = LabelRecord(uuid="o000", status="humanLabeled", category="a")
        labels["o001"] = LabelRecord(uuid="o001", status="humanLabeled", category="b")
        model = train_logreg(features, labels, epochs=50)
        picked = select_active(features, labels, model, batch_size=3,
                               criterion="leastConfidence", data_objects=objs)
        assert picked == ["o002", "o003", "o004"]
