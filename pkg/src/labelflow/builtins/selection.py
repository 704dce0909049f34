"""Data object selection strategies: random, cluster-based, uncertainty-based.

Every strategy returns uuids of unlabeled objects only, without
duplicates, at most ``batch_size`` of them, deterministically for a
given seed.
"""
from __future__ import annotations

import numpy as np

from ..blackboard import DataObject, LabelRecord, ModelArtifact
from ..rng import make_generator
from .errors import MissingFeatures, UntrainedModel
from .training import predict_proba


def _unlabeled_uuids(data_objects: list[DataObject], labels: dict[str, LabelRecord]) -> list[str]:
    """Unlabeled uuids in dataset order; objects without a record count as unlabeled."""
    out = []
    for obj in data_objects:
        rec = labels.get(obj.uuid)
        if rec is None or rec.status == "unlabeled":
            out.append(obj.uuid)
    return out


def select_random(
    data_objects: list[DataObject],
    labels: dict[str, LabelRecord],
    batch_size: int,
    seed: int,
    labels_version: int = 0,
) -> list[str]:
    """Sample up to ``batch_size`` unlabeled objects without replacement.

    The generator is seeded from (seed, labels version) so consecutive
    rounds of one run draw fresh batches while staying reproducible.
    """
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    pool = _unlabeled_uuids(data_objects, labels)
    if not pool:
        return []
    rng = make_generator(seed, labels_version)
    picked = rng.permutation(len(pool))[: min(batch_size, len(pool))]
    return [pool[i] for i in sorted(picked)]


# ---------------------------------------------------------------------------
# k-means clustering

def kmeans(
    X: np.ndarray, k: int, rng: np.random.Generator, max_iter: int = 100
) -> tuple[np.ndarray, np.ndarray, list[float]]:
    """Lloyd's algorithm with k-means++ seeding.

    Returns (centroids, assignments, objective trace). The objective is
    the sum of squared distances to assigned centroids; it is
    non-increasing across iterations.
    """
    n = X.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}]")

    # k-means++ seeding
    centroids = np.empty((k, X.shape[1]))
    first = int(rng.integers(n))
    centroids[0] = X[first]
    closest_sq = np.sum((X - centroids[0]) ** 2, axis=1)
    for j in range(1, k):
        total = closest_sq.sum()
        if total <= 0.0:
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=closest_sq / total))
        centroids[j] = X[idx]
        closest_sq = np.minimum(closest_sq, np.sum((X - centroids[j]) ** 2, axis=1))

    assignments = np.zeros(n, dtype=int)
    objective_trace: list[float] = []
    for _ in range(max_iter):
        dists = np.sum((X[:, None, :] - centroids[None, :, :]) ** 2, axis=2)
        new_assignments = np.argmin(dists, axis=1)
        objective_trace.append(float(dists[np.arange(n), new_assignments].sum()))
        for j in range(k):
            members = X[new_assignments == j]
            if len(members):
                centroids[j] = members.mean(axis=0)
        if np.array_equal(new_assignments, assignments) and len(objective_trace) > 1:
            assignments = new_assignments
            break
        assignments = new_assignments
    return centroids, assignments, objective_trace


def select_cluster(
    features: dict[str, list[float]],
    labels: dict[str, LabelRecord],
    k: int,
    batch_size: int,
    seed: int,
    data_objects: list[DataObject] | None = None,
) -> list[str]:
    """Cluster unlabeled objects and sample nearest-to-centroid first.

    Clusters are visited round-robin in order of descending size, each
    yielding its objects by ascending distance to the cluster centroid.
    """
    if batch_size < 1 or k < 1:
        raise ValueError("batch_size and k must be >= 1")
    if data_objects is not None:
        pool = _unlabeled_uuids(data_objects, labels)
    else:
        pool = [u for u, rec in labels.items() if rec.status == "unlabeled"]
    if not pool:
        return []
    missing = [u for u in pool if u not in features]
    if missing:
        raise MissingFeatures(f"no feature row for unlabeled object(s): {missing[:3]}")

    X = np.asarray([features[u] for u in pool], dtype=float)
    effective_k = min(k, len(pool))
    rng = make_generator(seed)
    centroids, assignments, _ = kmeans(X, effective_k, rng)

    dists = np.sqrt(np.sum((X - centroids[assignments]) ** 2, axis=1))
    clusters: dict[int, list[tuple[float, str]]] = {}
    for i, u in enumerate(pool):
        clusters.setdefault(int(assignments[i]), []).append((float(dists[i]), u))
    ordered_clusters = sorted(clusters, key=lambda j: (-len(clusters[j]), j))
    queues = [sorted(clusters[j]) for j in ordered_clusters]

    picked: list[str] = []
    depth = 0
    while len(picked) < batch_size and any(depth < len(q) for q in queues):
        for q in queues:
            if depth < len(q) and len(picked) < batch_size:
                picked.append(q[depth][1])
        depth += 1
    return picked


# ---------------------------------------------------------------------------
# Uncertainty-based (active learning) selection

ACTIVE_CRITERIA = ("entropy", "leastConfidence", "smallestMargin")


def uncertainty_score(probs: np.ndarray, criterion: str) -> np.ndarray:
    """Per-row uncertainty; larger means selected first."""
    if criterion == "entropy":
        p = np.clip(probs, 1e-12, 1.0)
        return -np.sum(p * np.log(p), axis=1)
    if criterion == "leastConfidence":
        return 1.0 - probs.max(axis=1)
    if criterion == "smallestMargin":
        part = np.sort(probs, axis=1)
        return -(part[:, -1] - part[:, -2])
    raise ValueError(f"unknown criterion {criterion!r}")


def select_active(
    features: dict[str, list[float]],
    labels: dict[str, LabelRecord],
    model: ModelArtifact,
    batch_size: int,
    criterion: str,
    data_objects: list[DataObject] | None = None,
) -> list[str]:
    """Pick the most uncertain unlabeled objects under the model.

    Scores come from the model's predicted class distributions; ties
    break by ascending uuid.
    """
    if criterion not in ACTIVE_CRITERIA:
        raise ValueError(f"unknown criterion {criterion!r}")
    if not model.trained:
        raise UntrainedModel(f"model {model.key!r} is not trained")
    if data_objects is not None:
        pool = _unlabeled_uuids(data_objects, labels)
    else:
        pool = [u for u, rec in labels.items() if rec.status == "unlabeled"]
    if not pool:
        return []
    probs = predict_proba(model, pool, features)
    scores = uncertainty_score(probs, criterion)
    order = sorted(range(len(pool)), key=lambda i: (-scores[i], pool[i]))
    return [pool[i] for i in order[: min(batch_size, len(pool))]]
