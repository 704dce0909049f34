"""Built-in workflow template gallery.

Three classification templates ship with the tool:

* ``minimal-labeling`` — random sampling, grid labeling, all-labeled
  stoppage; the smallest useful tool.
* ``mixed-initiative-classification`` — SVD features, cluster sampling,
  model-based default labels corrected in a grid, per-round decision
  tree retraining.
* ``active-learning-classification`` — label-propagation model retrained
  each round, entropy-based sampling, rate-based stoppage.

Every template passes the full checker with zero errors.
"""
from __future__ import annotations

from typing import Any

from .builtins.registry import get_descriptor
from .model import Edge, Node, WorkflowGraph, decision_node, exit_node, init_node, process_node
from .states import StateName


class UnknownTemplate(KeyError):
    pass


class UnknownOverrideKey(KeyError):
    pass


def _builtin(node_id: str, key: str, *, label: str, config: dict[str, Any] | None = None,
             blocking: bool = True, persistent: bool = False) -> Node:
    descriptor = get_descriptor(key)
    return process_node(
        node_id,
        descriptor.function,
        key,
        descriptor.declared_inputs,
        label=label,
        config=config,
        blocking=blocking,
        persistent=persistent,
    )


def _minimal_labeling() -> WorkflowGraph:
    nodes = [
        init_node("initialization",
                  {StateName.DATA_OBJECTS, StateName.LABELS, StateName.CATEGORIES},
                  label="initialization"),
        _builtin("sampling", "builtin.selection.random", label="random sampling",
                 config={"batchSize": 16}),
        _builtin("labeling", "builtin.interface.gridMatrixClassification",
                 label="interactive labeling", config={"rows": 4, "columns": 4}),
        _builtin("stoppage", "builtin.stoppage.allLabeled", label="check all labeled"),
        decision_node("stop", label="stop?"),
        exit_node("exit", label="exit"),
    ]
    edges = [
        Edge("initialization", "sampling"),
        Edge("sampling", "labeling"),
        Edge("labeling", "stoppage"),
        Edge("stoppage", "stop"),
        Edge("stop", "exit", branch=True),
        Edge("stop", "sampling", branch=False),
    ]
    return WorkflowGraph(nodes=nodes, edges=edges)


def _mixed_initiative() -> WorkflowGraph:
    nodes = [
        init_node("initialization",
                  {StateName.DATA_OBJECTS, StateName.LABELS, StateName.CATEGORIES,
                   StateName.MODEL},
                  label="initialization"),
        _builtin("features", "builtin.features.svd", label="SVD features",
                 config={"components": 16}),
        _builtin("sampling", "builtin.selection.cluster", label="cluster sampling",
                 config={"batchSize": 16, "clusterCount": 10}),
        _builtin("prelabel", "builtin.defaultLabel.modelPrediction",
                 label="decision tree prelabel"),
        _builtin("labeling", "builtin.interface.gridMatrixClassification",
                 label="grid matrix labeling", config={"rows": 4, "columns": 4},
                 persistent=True),
        _builtin("stoppage", "builtin.stoppage.allLabeled", label="check all labeled"),
        decision_node("stop", label="stop?"),
        _builtin("training", "builtin.train.tree", label="model training"),
        exit_node("exit", label="exit"),
    ]
    edges = [
        Edge("initialization", "features"),
        Edge("features", "sampling"),
        Edge("sampling", "prelabel"),
        Edge("prelabel", "labeling"),
        Edge("labeling", "stoppage"),
        Edge("stoppage", "stop"),
        Edge("stop", "exit", branch=True),
        Edge("stop", "training", branch=False),
        Edge("training", "sampling"),
    ]
    return WorkflowGraph(nodes=nodes, edges=edges)


def _active_learning() -> WorkflowGraph:
    nodes = [
        init_node("initialization",
                  {StateName.DATA_OBJECTS, StateName.LABELS, StateName.CATEGORIES,
                   StateName.MODEL},
                  label="initialization"),
        _builtin("features", "builtin.features.svd", label="SVD features",
                 config={"components": 16}),
        _builtin("training", "builtin.train.labelPropagation",
                 label="label propagation training"),
        _builtin("sampling", "builtin.selection.entropy", label="entropy sampling",
                 config={"batchSize": 16}),
        _builtin("labeling", "builtin.interface.gridMatrixClassification",
                 label="grid matrix labeling", config={"rows": 4, "columns": 4},
                 persistent=True),
        _builtin("stoppage", "builtin.stoppage.rate", label="check labeled rate",
                 config={"rate": 1.0}),
        decision_node("stop", label="stop?"),
        exit_node("exit", label="exit"),
    ]
    edges = [
        Edge("initialization", "features"),
        Edge("features", "training"),
        Edge("training", "sampling"),
        Edge("sampling", "labeling"),
        Edge("labeling", "stoppage"),
        Edge("stoppage", "stop"),
        Edge("stop", "exit", branch=True),
        Edge("stop", "training", branch=False),
    ]
    return WorkflowGraph(nodes=nodes, edges=edges)


_TEMPLATES = {
    "minimal-labeling": _minimal_labeling,
    "mixed-initiative-classification": _mixed_initiative,
    "active-learning-classification": _active_learning,
}

TEMPLATE_NAMES = tuple(sorted(_TEMPLATES))


def instantiate_template(name: str, overrides: dict[str, Any] | None = None) -> WorkflowGraph:
    """Build a template graph, applying config overrides.

    Override keys are either a bare parameter name (applied to every
    node whose config carries that parameter) or ``nodeId.param`` for a
    single node.
    """
    if name not in _TEMPLATES:
        raise UnknownTemplate(name)
    graph = _TEMPLATES[name]()
    for key, value in (overrides or {}).items():
        node_id, _, param = key.rpartition(".")
        matched = False
        nodes = []
        for node in graph.nodes:
            config = dict(node.config)
            applies = (
                node.node_type == "process"
                and (not node_id or node.id == node_id)
                and param in _known_params(node)
            )
            if applies:
                config[param] = value
                matched = True
                node = process_node(
                    node.id, node.function, node.implementation, node.inputs,
                    label=node.label, config=config, blocking=node.blocking,
                    persistent=node.persistent,
                )
            nodes.append(node)
        if not matched:
            raise UnknownOverrideKey(key)
        graph = WorkflowGraph(nodes=nodes, edges=graph.edges,
                              dataset_binding=graph.dataset_binding,
                              categories_config=graph.categories_config)
    return graph


def _known_params(node: Node) -> set[str]:
    if node.implementation is None:
        return set(node.config)
    try:
        schema = get_descriptor(node.implementation).config_schema
    except KeyError:
        return set(node.config)
    return set(schema) | set(node.config)
