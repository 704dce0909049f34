"""Model trainers and prediction.

Three model kinds are supported: multinomial logistic regression
(full-batch gradient descent), CART decision trees (Gini impurity),
and graph-based label propagation. All trainers consume human-labeled
records only and are deterministic for fixed inputs.
"""
from __future__ import annotations

import numpy as np

from ..blackboard import LabelRecord, ModelArtifact
from .errors import InsufficientLabels, MissingFeatures, UntrainedModel


def _human_labeled(
    features: dict[str, list[float]], labels: dict[str, LabelRecord]
) -> tuple[list[str], list[str]]:
    """(uuids, categories) of human-labeled objects, in stable uuid order."""
    pairs = sorted(
        (u, rec.category)
        for u, rec in labels.items()
        if rec.status == "humanLabeled" and rec.category is not None
    )
    uuids = [u for u, _ in pairs]
    missing = [u for u in uuids if u not in features]
    if missing:
        raise MissingFeatures(f"no feature row for labeled object(s): {missing[:3]}")
    return uuids, [c for _, c in pairs]


def _design_matrix(uuids: list[str], features: dict[str, list[float]]) -> np.ndarray:
    missing = [u for u in uuids if u not in features]
    if missing:
        raise MissingFeatures(f"no feature row for object(s): {missing[:3]}")
    return np.asarray([features[u] for u in uuids], dtype=float)


def _softmax(Z: np.ndarray) -> np.ndarray:
    Z = Z - Z.max(axis=1, keepdims=True)
    E = np.exp(Z)
    return E / E.sum(axis=1, keepdims=True)


# ---------------------------------------------------------------------------
# Multinomial logistic regression

def logreg_loss_and_grad(
    W: np.ndarray, b: np.ndarray, X: np.ndarray, Y: np.ndarray, l2: float
) -> tuple[float, np.ndarray, np.ndarray]:
    """Cross-entropy + (l2/2)*||W||^2 and its analytic gradient.

    The bias is not regularized. ``Y`` is one-hot (n x C).
    """
    n = X.shape[0]
    P = _softmax(X @ W + b)
    loss = -float(np.sum(Y * np.log(np.clip(P, 1e-300, None)))) / n
    loss += 0.5 * l2 * float(np.sum(W * W))
    G = (P - Y) / n
    dW = X.T @ G + l2 * W
    db = G.sum(axis=0)
    return loss, dW, db


def train_logreg(
    features: dict[str, list[float]],
    labels: dict[str, LabelRecord],
    learning_rate: float = 0.5,
    l2: float = 1e-4,
    epochs: int = 300,
    seed: int = 0,
    model_key: str = "default",
) -> ModelArtifact:
    """Softmax classifier fit by full-batch gradient descent."""
    uuids, cats = _human_labeled(features, labels)
    class_list = sorted(set(cats))
    if len(class_list) < 2:
        raise InsufficientLabels(
            f"need human labels from >= 2 categories, got {len(class_list)}"
        )
    X = _design_matrix(uuids, features)
    index = {c: i for i, c in enumerate(class_list)}
    Y = np.zeros((len(uuids), len(class_list)))
    Y[np.arange(len(uuids)), [index[c] for c in cats]] = 1.0

    W = np.zeros((X.shape[1], len(class_list)))
    b = np.zeros(len(class_list))
    loss_trace: list[float] = []
    for _ in range(epochs):
        loss, dW, db = logreg_loss_and_grad(W, b, X, Y, l2)
        loss_trace.append(loss)
        W -= learning_rate * dW
        b -= learning_rate * db

    return ModelArtifact(
        key=model_key,
        kind="logisticRegression",
        class_list=tuple(class_list),
        parameters={
            "weights": W.tolist(),
            "bias": b.tolist(),
            "featureDim": X.shape[1],
            "lossTrace": loss_trace,
            "seed": seed,
        },
        trained=True,
    )


# ---------------------------------------------------------------------------
# CART decision tree

def _gini_curve(left_counts: np.ndarray, total_counts: np.ndarray) -> np.ndarray:
    """Weighted child Gini for every candidate split position (vectorized)."""
    n = total_counts.sum()
    nl = left_counts.sum(axis=1)
    nr = n - nl
    right_counts = total_counts[None, :] - left_counts
    with np.errstate(invalid="ignore", divide="ignore"):
        gini_l = 1.0 - np.sum((left_counts / np.maximum(nl, 1)[:, None]) ** 2, axis=1)
        gini_r = 1.0 - np.sum((right_counts / np.maximum(nr, 1)[:, None]) ** 2, axis=1)
    return (nl * gini_l + nr * gini_r) / n


def _grow_tree(
    X: np.ndarray,
    y: np.ndarray,
    n_classes: int,
    max_depth: int | None,
    min_leaf: int,
    depth: int,
    nodes: list[dict],
) -> int:
    counts = np.bincount(y, minlength=n_classes).astype(float)
    n = len(y)
    parent_gini = 1.0 - float(np.sum((counts / n) ** 2))

    def make_leaf() -> int:
        nodes.append({"leaf": True, "probs": (counts / n).tolist()})
        return len(nodes) - 1

    if parent_gini <= 0.0 or (max_depth is not None and depth >= max_depth) or n < 2 * min_leaf:
        return make_leaf()

    best: tuple[float, int, float] | None = None  # (decrease, feature, threshold)
    for f in range(X.shape[1]):
        order = np.argsort(X[:, f], kind="stable")
        vals = X[order, f]
        onehot = np.zeros((n, n_classes))
        onehot[np.arange(n), y[order]] = 1.0
        prefix = np.cumsum(onehot, axis=0)
        # candidate boundaries: between distinct consecutive values
        change = np.nonzero(vals[1:] > vals[:-1])[0]
        if len(change) == 0:
            continue
        sizes = change + 1
        valid = (sizes >= min_leaf) & (n - sizes >= min_leaf)
        change = change[valid]
        if len(change) == 0:
            continue
        child = _gini_curve(prefix[change], counts)
        decrease = parent_gini - child
        i = int(np.argmax(decrease))
        if decrease[i] <= 1e-12:
            continue
        threshold = float((vals[change[i]] + vals[change[i] + 1]) / 2.0)
        # ties between features resolve to the lowest feature index;
        # within a feature argmax already picked the lowest threshold.
        if best is None or decrease[i] > best[0] + 1e-15:
            best = (float(decrease[i]), f, threshold)

    if best is None:
        return make_leaf()

    _, feature, threshold = best
    mask = X[:, feature] <= threshold
    me = len(nodes)
    nodes.append({"leaf": False, "feature": feature, "threshold": threshold,
                  "left": -1, "right": -1})
    nodes[me]["left"] = _grow_tree(X[mask], y[mask], n_classes, max_depth, min_leaf,
                                   depth + 1, nodes)
    nodes[me]["right"] = _grow_tree(X[~mask], y[~mask], n_classes, max_depth, min_leaf,
                                    depth + 1, nodes)
    return me


def train_tree(
    features: dict[str, list[float]],
    labels: dict[str, LabelRecord],
    max_depth: int | None = None,
    min_leaf: int = 1,
    model_key: str = "default",
) -> ModelArtifact:
    """CART with Gini impurity and midpoint thresholds; fully deterministic."""
    uuids, cats = _human_labeled(features, labels)
    class_list = sorted(set(cats))
    if len(class_list) < 2:
        raise InsufficientLabels(
            f"need human labels from >= 2 categories, got {len(class_list)}"
        )
    X = _design_matrix(uuids, features)
    index = {c: i for i, c in enumerate(class_list)}
    y = np.asarray([index[c] for c in cats], dtype=int)
    nodes: list[dict] = []
    root = _grow_tree(X, y, len(class_list), max_depth, min_leaf, 0, nodes)
    return ModelArtifact(
        key=model_key,
        kind="decisionTree",
        class_list=tuple(class_list),
        parameters={"nodes": nodes, "root": root, "featureDim": X.shape[1]},
        trained=True,
    )


def _tree_predict(parameters: dict, X: np.ndarray, n_classes: int) -> np.ndarray:
    nodes = parameters["nodes"]
    out = np.empty((X.shape[0], n_classes))
    for i, row in enumerate(X):
        at = parameters["root"]
        while not nodes[at]["leaf"]:
            node = nodes[at]
            at = node["left"] if row[node["feature"]] <= node["threshold"] else node["right"]
        out[i] = nodes[at]["probs"]
    return out


# ---------------------------------------------------------------------------
# Graph-based label propagation

def propagation_matrix(X: np.ndarray, k_neighbors: int) -> np.ndarray:
    """Symmetrically normalized mutual-kNN Gaussian affinity."""
    n = X.shape[0]
    diff = X[:, None, :] - X[None, :, :]
    dist = np.sqrt(np.sum(diff * diff, axis=2))
    np.fill_diagonal(dist, np.inf)
    k = min(k_neighbors, n - 1)
    if k < 1:
        return np.zeros((n, n))
    neighbor_idx = np.argsort(dist, axis=1, kind="stable")[:, :k]
    is_neighbor = np.zeros((n, n), dtype=bool)
    rows = np.repeat(np.arange(n), k)
    is_neighbor[rows, neighbor_idx.ravel()] = True
    mutual = is_neighbor & is_neighbor.T

    knn_dists = np.take_along_axis(dist, neighbor_idx, axis=1).ravel()
    sigma = float(np.median(knn_dists))
    if sigma <= 0.0:
        sigma = 1e-12
    W = np.where(mutual, np.exp(-(dist ** 2) / (2.0 * sigma ** 2)), 0.0)
    np.fill_diagonal(W, 0.0)
    deg = W.sum(axis=1)
    inv_sqrt = np.where(deg > 0, 1.0 / np.sqrt(np.maximum(deg, 1e-300)), 0.0)
    return W * inv_sqrt[:, None] * inv_sqrt[None, :]


def propagate(
    S: np.ndarray, Y: np.ndarray, alpha: float, tol: float, max_iter: int
) -> np.ndarray:
    """Iterate F <- alpha*S*F + (1-alpha)*Y from F=Y to (near) fixpoint."""
    F = Y.copy()
    for _ in range(max_iter):
        F_next = alpha * (S @ F) + (1.0 - alpha) * Y
        if float(np.max(np.abs(F_next - F))) < tol:
            return F_next
        F = F_next
    return F


def train_label_propagation(
    features: dict[str, list[float]],
    labels: dict[str, LabelRecord],
    alpha: float = 0.95,
    k_neighbors: int = 7,
    tol: float = 1e-8,
    max_iter: int = 2000,
    model_key: str = "default",
) -> ModelArtifact:
    """Transductive label spreading over a mutual-kNN graph.

    The artifact stores per-object scores for every object that had a
    feature row at training time; prediction is a uuid lookup.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must be in (0, 1)")
    uuids = sorted(features)
    labeled = {
        u: rec.category
        for u, rec in labels.items()
        if rec.status == "humanLabeled" and rec.category is not None
    }
    class_list = sorted(set(labeled.values()))
    if not class_list:
        raise InsufficientLabels("need at least one human-labeled object")
    X = np.asarray([features[u] for u in uuids], dtype=float)
    index = {c: i for i, c in enumerate(class_list)}
    Y = np.zeros((len(uuids), len(class_list)))
    for i, u in enumerate(uuids):
        if u in labeled:
            Y[i, index[labeled[u]]] = 1.0

    S = propagation_matrix(X, k_neighbors)
    F = propagate(S, Y, alpha, tol, max_iter)
    return ModelArtifact(
        key=model_key,
        kind="labelPropagation",
        class_list=tuple(class_list),
        parameters={"uuids": uuids, "scores": F.tolist()},
        trained=True,
    )


# ---------------------------------------------------------------------------
# Prediction

def predict_proba(
    model: ModelArtifact, uuids: list[str], features: dict[str, list[float]]
) -> np.ndarray:
    """Class distributions (rows sum to 1) for the given objects."""
    if not model.trained or model.parameters is None:
        raise UntrainedModel(f"model {model.key!r} is not trained")
    params = model.parameters
    if model.kind == "logisticRegression":
        X = _design_matrix(uuids, features)
        W = np.asarray(params["weights"])
        b = np.asarray(params["bias"])
        return _softmax(X @ W + b)
    if model.kind == "decisionTree":
        X = _design_matrix(uuids, features)
        return _tree_predict(params, X, len(model.class_list))
    if model.kind == "labelPropagation":
        position = {u: i for i, u in enumerate(params["uuids"])}
        missing = [u for u in uuids if u not in position]
        if missing:
            raise MissingFeatures(
                f"no propagation estimate for object(s): {missing[:3]}"
            )
        F = np.asarray(params["scores"])[[position[u] for u in uuids]]
        totals = F.sum(axis=1, keepdims=True)
        n_classes = F.shape[1]
        out = np.where(totals > 0, F / np.maximum(totals, 1e-300),
                       np.full_like(F, 1.0 / n_classes))
        return out
    raise UntrainedModel(f"unknown model kind {model.kind!r}")
