"""Feature extraction: truncated SVD projection of raw vectors."""
from __future__ import annotations

import numpy as np

from ..blackboard import DataObject
from .errors import KOutOfRange, NonNumericContent


def svd_basis(X: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Mean vector and top-k right singular vectors of the centered matrix.

    Component signs are fixed so each component's largest-magnitude
    loading is positive, making the projection deterministic.
    """
    d = X.shape[1]
    if not 1 <= k <= d:
        raise KOutOfRange(f"component count k={k} outside [1, {d}]")
    mean = X.mean(axis=0)
    _, _, vt = np.linalg.svd(X - mean, full_matrices=False)
    components = vt[:k].copy()
    for row in components:
        pivot = int(np.argmax(np.abs(row)))
        if row[pivot] < 0:
            row *= -1.0
    return mean, components


def project(X: np.ndarray, mean: np.ndarray, components: np.ndarray) -> np.ndarray:
    return (X - mean) @ components.T


def extract_svd_features(data_objects: list[DataObject], k: int) -> dict[str, list[float]]:
    """Project every data object's vector content onto the top-k SVD basis."""
    rows = []
    for obj in data_objects:
        if "vector" not in obj.content:
            raise NonNumericContent(
                f"data object {obj.uuid} has {obj.content_kind()} content, not a vector"
            )
        rows.append(obj.content["vector"])
    if not rows:
        return {}
    X = np.asarray(rows, dtype=float)
    mean, components = svd_basis(X, k)
    projected = project(X, mean, components)
    return {obj.uuid: [float(v) for v in row] for obj, row in zip(data_objects, projected)}
