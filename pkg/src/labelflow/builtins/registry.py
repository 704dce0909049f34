"""Registry of built-in module implementations.

Each entry declares the module function it implements, the input
states it actually reads (a subset of the function's permitted
inputs), its configuration schema, and whether it runs as an
algorithm or as a human interface. The checker validates node input
declarations against this registry; the engine dispatches through it.

Algorithmic entries are bootstrap-tolerant at node level: trainers
leave the model untrained while too few human labels exist,
model-based selection falls back to seeded random sampling, and
default labeling is a no-op until the model is trained. The
underlying library functions still raise on direct misuse.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable

from ..blackboard import LabelRecord, ModelArtifact
from ..states import PERMITTED_INPUTS, ModuleFunction, StateName
from . import defaults, features, selection, training


@dataclass
class ExecutionContext:
    """Everything an algorithmic implementation sees when it runs."""

    states: dict[StateName, Any]
    config: dict[str, Any]
    seed: int
    versions: dict[StateName, int]


@dataclass(frozen=True)
class ImplementationDescriptor:
    key: str
    function: ModuleFunction
    declared_inputs: frozenset[StateName]
    config_schema: dict[str, dict[str, Any]]
    execution: str  # "algorithmic" | "interface"
    run: Callable[[ExecutionContext], dict[StateName, Any]] | None = None
    interface_layout: str | None = None  # gridMatrix | singleObject (interface only)

    def __post_init__(self) -> None:
        bad = self.declared_inputs - PERMITTED_INPUTS[self.function]
        if bad:
            raise ValueError(f"{self.key}: inputs {bad} not permitted for {self.function}")

    def effective_config(self, node_config: dict[str, Any]) -> dict[str, Any]:
        merged = {name: spec.get("default") for name, spec in self.config_schema.items()}
        merged.update(node_config)
        return merged


def _model_from_state(ctx: ExecutionContext) -> tuple[str, ModelArtifact]:
    key = ctx.config.get("modelKey", "default")
    model_state: dict[str, ModelArtifact] = ctx.states[StateName.MODEL]
    artifact = model_state.get(key, ModelArtifact(key=key, kind="decisionTree"))
    return key, artifact


def _run_select_random(ctx: ExecutionContext) -> dict[StateName, Any]:
    picked = selection.select_random(
        ctx.states[StateName.DATA_OBJECTS],
        ctx.states[StateName.LABELS],
        batch_size=int(ctx.config["batchSize"]),
        seed=ctx.seed,
        labels_version=ctx.versions[StateName.LABELS],
    )
    return {StateName.SAMPLES: picked}


def _run_select_cluster(ctx: ExecutionContext) -> dict[StateName, Any]:
    picked = selection.select_cluster(
        ctx.states[StateName.FEATURES],
        ctx.states[StateName.LABELS],
        k=int(ctx.config["clusterCount"]),
        batch_size=int(ctx.config["batchSize"]),
        seed=ctx.seed,
    )
    return {StateName.SAMPLES: picked}


def _make_run_select_active(criterion: str):
    def _run(ctx: ExecutionContext) -> dict[StateName, Any]:
        _, artifact = _model_from_state(ctx)
        if not artifact.trained:
            # Cold start: no model yet, fall back to random sampling.
            picked = selection.select_random(
                _objects_from_labels(ctx),
                ctx.states[StateName.LABELS],
                batch_size=int(ctx.config["batchSize"]),
                seed=ctx.seed,
                labels_version=ctx.versions[StateName.LABELS],
            )
        else:
            picked = selection.select_active(
                ctx.states[StateName.FEATURES],
                ctx.states[StateName.LABELS],
                artifact,
                batch_size=int(ctx.config["batchSize"]),
                criterion=criterion,
            )
        return {StateName.SAMPLES: picked}

    return _run


def _objects_from_labels(ctx: ExecutionContext):
    # Selection by model reads labels/features only; synthesize the uuid
    # universe for the random fallback from the labels map.
    from ..blackboard import DataObject

    return [DataObject(uuid=u, content={"text": ""}) for u in sorted(ctx.states[StateName.LABELS])]


def _run_svd(ctx: ExecutionContext) -> dict[StateName, Any]:
    rows = features.extract_svd_features(
        ctx.states[StateName.DATA_OBJECTS], k=int(ctx.config["components"])
    )
    return {StateName.FEATURES: rows}


def _count_human_classes(labels: dict[str, LabelRecord]) -> int:
    return len({
        rec.category for rec in labels.values()
        if rec.status == "humanLabeled" and rec.category is not None
    })


def _make_run_trainer(kind: str):
    def _run(ctx: ExecutionContext) -> dict[StateName, Any]:
        key, previous = _model_from_state(ctx)
        labels = ctx.states[StateName.LABELS]
        feats = ctx.states[StateName.FEATURES]
        have = _count_human_classes(labels)
        needed = 1 if kind == "labelPropagation" else 2
        if have < needed:
            # Cold start: keep whatever artifact is there (still untrained).
            artifact = previous if previous.kind == kind else ModelArtifact(key=key, kind=kind)
        elif kind == "logisticRegression":
            artifact = training.train_logreg(
                feats, labels,
                learning_rate=float(ctx.config["learningRate"]),
                l2=float(ctx.config["l2"]),
                epochs=int(ctx.config["epochs"]),
                seed=ctx.seed,
                model_key=key,
            )
        elif kind == "decisionTree":
            raw_depth = ctx.config.get("maxDepth")
            artifact = training.train_tree(
                feats, labels,
                max_depth=None if raw_depth in (None, 0) else int(raw_depth),
                min_leaf=int(ctx.config["minLeaf"]),
                model_key=key,
            )
        else:
            artifact = training.train_label_propagation(
                feats, labels,
                alpha=float(ctx.config["alpha"]),
                k_neighbors=int(ctx.config["kNeighbors"]),
                tol=float(ctx.config["tol"]),
                max_iter=int(ctx.config["maxIter"]),
                model_key=key,
            )
        model_state = dict(ctx.states[StateName.MODEL])
        model_state[key] = artifact
        return {StateName.MODEL: model_state}

    return _run


def _run_default_label(ctx: ExecutionContext) -> dict[StateName, Any]:
    _, artifact = _model_from_state(ctx)
    labels = ctx.states[StateName.LABELS]
    samples = ctx.states[StateName.SAMPLES]
    if not artifact.trained or not samples:
        # Nothing to predict with/on yet; annotators label from scratch.
        return {StateName.LABELS: dict(labels)}
    updated = defaults.default_label(artifact, ctx.states[StateName.FEATURES], samples, labels)
    return {StateName.LABELS: updated}


def _run_stoppage_all(ctx: ExecutionContext) -> dict[StateName, Any]:
    value = defaults.stoppage_all_labeled(
        ctx.states[StateName.DATA_OBJECTS], ctx.states[StateName.LABELS]
    )
    return {StateName.STOP: value}


def _run_stoppage_rate(ctx: ExecutionContext) -> dict[StateName, Any]:
    value = defaults.stoppage_rate(
        ctx.states[StateName.DATA_OBJECTS],
        ctx.states[StateName.LABELS],
        rate=float(ctx.config["rate"]),
    )
    return {StateName.STOP: value}


def _batch(default: int = 16) -> dict[str, Any]:
    return {"type": "int", "default": default, "min": 1}


REGISTRY: dict[str, ImplementationDescriptor] = {}


def _register(descriptor: ImplementationDescriptor) -> None:
    REGISTRY[descriptor.key] = descriptor


_register(ImplementationDescriptor(
    key="builtin.selection.random",
    function=ModuleFunction.DATA_OBJECT_SELECTION,
    declared_inputs=frozenset({StateName.DATA_OBJECTS, StateName.LABELS}),
    config_schema={"batchSize": _batch(), "seed": {"type": "int", "default": None}},
    execution="algorithmic",
    run=_run_select_random,
))

_register(ImplementationDescriptor(
    key="builtin.selection.cluster",
    function=ModuleFunction.DATA_OBJECT_SELECTION,
    declared_inputs=frozenset({StateName.FEATURES, StateName.LABELS}),
    config_schema={
        "batchSize": _batch(),
        "clusterCount": {"type": "int", "default": 10, "min": 1},
        "seed": {"type": "int", "default": None},
    },
    execution="algorithmic",
    run=_run_select_cluster,
))

for _criterion in selection.ACTIVE_CRITERIA:
    _register(ImplementationDescriptor(
        key=f"builtin.selection.{_criterion}",
        function=ModuleFunction.DATA_OBJECT_SELECTION,
        declared_inputs=frozenset({StateName.FEATURES, StateName.LABELS, StateName.MODEL}),
        config_schema={
            "batchSize": _batch(),
            "modelKey": {"type": "string", "default": "default"},
            "seed": {"type": "int", "default": None},
        },
        execution="algorithmic",
        run=_make_run_select_active(_criterion),
    ))

_register(ImplementationDescriptor(
    key="builtin.features.svd",
    function=ModuleFunction.FEATURE_EXTRACTION,
    declared_inputs=frozenset({StateName.DATA_OBJECTS}),
    config_schema={"components": {"type": "int", "default": 16, "min": 1}},
    execution="algorithmic",
    run=_run_svd,
))

_register(ImplementationDescriptor(
    key="builtin.train.logreg",
    function=ModuleFunction.MODEL_TRAINING,
    declared_inputs=frozenset({StateName.FEATURES, StateName.LABELS, StateName.MODEL}),
    config_schema={
        "learningRate": {"type": "float", "default": 0.5, "min": 0.0},
        "l2": {"type": "float", "default": 1e-4, "min": 0.0},
        "epochs": {"type": "int", "default": 300, "min": 1},
        "modelKey": {"type": "string", "default": "default"},
        "seed": {"type": "int", "default": None},
    },
    execution="algorithmic",
    run=_make_run_trainer("logisticRegression"),
))

_register(ImplementationDescriptor(
    key="builtin.train.tree",
    function=ModuleFunction.MODEL_TRAINING,
    declared_inputs=frozenset({StateName.FEATURES, StateName.LABELS, StateName.MODEL}),
    config_schema={
        "maxDepth": {"type": "int", "default": None},
        "minLeaf": {"type": "int", "default": 1, "min": 1},
        "modelKey": {"type": "string", "default": "default"},
    },
    execution="algorithmic",
    run=_make_run_trainer("decisionTree"),
))

_register(ImplementationDescriptor(
    key="builtin.train.labelPropagation",
    function=ModuleFunction.MODEL_TRAINING,
    declared_inputs=frozenset({StateName.FEATURES, StateName.LABELS, StateName.MODEL}),
    config_schema={
        "alpha": {"type": "float", "default": 0.95, "min": 0.0, "max": 1.0},
        "kNeighbors": {"type": "int", "default": 7, "min": 1},
        "tol": {"type": "float", "default": 1e-8, "min": 0.0},
        "maxIter": {"type": "int", "default": 2000, "min": 1},
        "modelKey": {"type": "string", "default": "default"},
    },
    execution="algorithmic",
    run=_make_run_trainer("labelPropagation"),
))

_register(ImplementationDescriptor(
    key="builtin.defaultLabel.modelPrediction",
    function=ModuleFunction.DEFAULT_LABELING,
    declared_inputs=frozenset({StateName.SAMPLES, StateName.MODEL, StateName.FEATURES}),
    config_schema={"modelKey": {"type": "string", "default": "default"}},
    execution="algorithmic",
    run=_run_default_label,
))

_register(ImplementationDescriptor(
    key="builtin.stoppage.allLabeled",
    function=ModuleFunction.STOPPAGE_ANALYSIS,
    declared_inputs=frozenset({StateName.DATA_OBJECTS, StateName.LABELS}),
    config_schema={},
    execution="algorithmic",
    run=_run_stoppage_all,
))

_register(ImplementationDescriptor(
    key="builtin.stoppage.rate",
    function=ModuleFunction.STOPPAGE_ANALYSIS,
    declared_inputs=frozenset({StateName.DATA_OBJECTS, StateName.LABELS}),
    config_schema={"rate": {"type": "float", "default": 1.0, "min": 0.0, "max": 1.0}},
    execution="algorithmic",
    run=_run_stoppage_rate,
))

_register(ImplementationDescriptor(
    key="builtin.interface.gridMatrixClassification",
    function=ModuleFunction.INTERACTIVE_LABELING,
    declared_inputs=frozenset({
        StateName.DATA_OBJECTS, StateName.LABELS, StateName.SAMPLES, StateName.CATEGORIES,
    }),
    config_schema={
        "rows": {"type": "int", "default": 4, "min": 1},
        "columns": {"type": "int", "default": 4, "min": 1},
    },
    execution="interface",
    interface_layout="gridMatrix",
))

_register(ImplementationDescriptor(
    key="builtin.interface.singleObjectClassification",
    function=ModuleFunction.INTERACTIVE_LABELING,
    declared_inputs=frozenset({
        StateName.DATA_OBJECTS, StateName.LABELS, StateName.SAMPLES, StateName.CATEGORIES,
    }),
    config_schema={},
    execution="interface",
    interface_layout="singleObject",
))

_register(ImplementationDescriptor(
    key="builtin.interface.labelIdeationPanel",
    function=ModuleFunction.LABEL_IDEATION,
    declared_inputs=frozenset({StateName.DATA_OBJECTS, StateName.CATEGORIES}),
    config_schema={"previewCount": {"type": "int", "default": 9, "min": 1}},
    execution="interface",
    interface_layout="gridMatrix",
))

_register(ImplementationDescriptor(
    key="builtin.interface.qualityAssuranceReview",
    function=ModuleFunction.QUALITY_ASSURANCE,
    declared_inputs=frozenset({StateName.DATA_OBJECTS, StateName.LABELS}),
    config_schema={
        "rows": {"type": "int", "default": 4, "min": 1},
        "columns": {"type": "int", "default": 4, "min": 1},
    },
    execution="interface",
    interface_layout="gridMatrix",
))


def get_descriptor(key: str) -> ImplementationDescriptor:
    if key not in REGISTRY:
        raise KeyError(f"unknown implementation {key!r}")
    return REGISTRY[key]


def implementations_for(function: ModuleFunction) -> list[ImplementationDescriptor]:
    return sorted(
        (d for d in REGISTRY.values() if d.function == function), key=lambda d: d.key
    )
