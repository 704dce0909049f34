"""Workflow graph data model and the on-disk JSON format.

A workflow is a directed graph of four node kinds (initialization,
process, decision, exit) whose edges define execution order only.
Graphs round-trip through a canonical JSON form: ``parse_workflow``
and ``serialize_workflow`` are inverse up to canonical ordering.

Parsing enforces type-level well-formedness (closed state vocabulary,
node kind field rules, resolvable edges). Semantic validity of the
graph as a labeling tool is the checker's job, not the parser's.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

from .states import (
    CANONICAL_OUTPUT,
    PERMITTED_INPUTS,
    PREDICATE_READS,
    ModuleFunction,
    StateName,
    sort_states,
)

FORMAT_VERSION = "1.0"

NODE_TYPES = ("initialization", "process", "decision", "exit")
DATASET_FORMATS = ("csv-vectors", "jsonl-objects", "image-directory")


class ParseError(ValueError):
    """Raised for a malformed workflow file; carries a location pointer."""

    def __init__(self, message: str, *, line: int | None = None, pointer: str | None = None):
        self.line = line
        self.pointer = pointer
        loc = ""
        if line is not None:
            loc = f" (line {line})"
        elif pointer:
            loc = f" (at {pointer})"
        super().__init__(message + loc)


@dataclass(frozen=True)
class Node:
    """A workflow graph node.

    ``inputs`` and ``outputs`` are stored explicitly for every node but
    are derived for non-process kinds: initialization outputs equal
    ``init_outputs``, decision inputs equal the states its predicate
    reads, exit nodes touch nothing. Use the ``*_node`` constructors to
    keep these consistent.
    """

    id: str
    label: str
    node_type: str
    function: ModuleFunction | None = None
    implementation: str | None = None
    inputs: frozenset[StateName] = frozenset()
    outputs: frozenset[StateName] = frozenset()
    blocking: bool = True
    persistent: bool = False
    config: dict[str, Any] = field(default_factory=dict)
    init_outputs: frozenset[StateName] = frozenset()
    predicate: str | None = None

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Node):
            return NotImplemented
        return (
            self.id == other.id
            and self.label == other.label
            and self.node_type == other.node_type
            and self.function == other.function
            and self.implementation == other.implementation
            and self.inputs == other.inputs
            and self.outputs == other.outputs
            and self.blocking == other.blocking
            and self.persistent == other.persistent
            and self.config == other.config
            and self.init_outputs == other.init_outputs
            and self.predicate == other.predicate
        )

    def __hash__(self) -> int:
        return hash((self.id, self.node_type))


def init_node(node_id: str, init_outputs, label: str | None = None) -> Node:
    outs = frozenset(init_outputs)
    return Node(
        id=node_id,
        label=label or node_id,
        node_type="initialization",
        outputs=outs,
        init_outputs=outs,
    )


def process_node(
    node_id: str,
    function: ModuleFunction,
    implementation: str | None,
    inputs,
    *,
    label: str | None = None,
    config: dict[str, Any] | None = None,
    blocking: bool = True,
    persistent: bool = False,
) -> Node:
    ins = frozenset(inputs)
    bad = ins - PERMITTED_INPUTS[function]
    if bad:
        names = ", ".join(s.value for s in sort_states(bad))
        raise ValueError(f"states not permitted as inputs of {function.value}: {names}")
    return Node(
        id=node_id,
        label=label or node_id,
        node_type="process",
        function=function,
        implementation=implementation,
        inputs=ins,
        outputs=frozenset({CANONICAL_OUTPUT[function]}),
        blocking=blocking,
        persistent=persistent,
        config=dict(config or {}),
    )


def decision_node(node_id: str, predicate: str = "stopIsTrue", label: str | None = None) -> Node:
    if predicate not in PREDICATE_READS:
        raise ValueError(f"unknown decision predicate: {predicate!r}")
    return Node(
        id=node_id,
        label=label or node_id,
        node_type="decision",
        inputs=PREDICATE_READS[predicate],
        predicate=predicate,
    )


def exit_node(node_id: str, label: str | None = None) -> Node:
    return Node(id=node_id, label=label or node_id, node_type="exit")


@dataclass(frozen=True)
class Edge:
    """Execution-order edge; ``branch`` is set iff the source is a decision."""

    source: str
    target: str
    branch: bool | None = None

    def describe(self) -> str:
        suffix = "" if self.branch is None else f"[{str(self.branch).lower()}]"
        return f"{self.source}->{self.target}{suffix}"


@dataclass
class WorkflowGraph:
    """A parsed workflow: nodes, edges, and optional dataset/category config."""

    version: str = FORMAT_VERSION
    nodes: list[Node] = field(default_factory=list)
    edges: list[Edge] = field(default_factory=list)
    dataset_binding: dict[str, Any] | None = None
    categories_config: list[str] | None = None

    def node_map(self) -> dict[str, Node]:
        return {n.id: n for n in self.nodes}

    def node(self, node_id: str) -> Node:
        for n in self.nodes:
            if n.id == node_id:
                return n
        raise KeyError(node_id)

    def nodes_of_type(self, node_type: str) -> list[Node]:
        return [n for n in self.nodes if n.node_type == node_type]

    def out_edges(self, node_id: str) -> list[Edge]:
        return [e for e in self.edges if e.source == node_id]

    def in_edges(self, node_id: str) -> list[Edge]:
        return [e for e in self.edges if e.target == node_id]

    def __eq__(self, other: object) -> bool:
        # Structural equality: node/edge order is irrelevant.
        if not isinstance(other, WorkflowGraph):
            return NotImplemented
        return (
            self.version == other.version
            and sorted(self.nodes, key=lambda n: n.id) == sorted(other.nodes, key=lambda n: n.id)
            and set(self.edges) == set(other.edges)
            and self.dataset_binding == other.dataset_binding
            and self.categories_config == other.categories_config
        )


# ---------------------------------------------------------------------------
# Parsing

def _require(obj: dict, key: str, pointer: str) -> Any:
    if key not in obj:
        raise ParseError(f"missing required field {key!r}", pointer=pointer)
    return obj[key]


def _parse_state_set(raw: Any, pointer: str) -> frozenset[StateName]:
    if not isinstance(raw, list):
        raise ParseError("expected a list of state names", pointer=pointer)
    states = []
    for item in raw:
        try:
            states.append(StateName(item))
        except ValueError:
            raise ParseError(f"unknown state name {item!r}", pointer=pointer) from None
    return frozenset(states)


_NODE_KEYS = {
    "id", "label", "type", "function", "implementation", "inputs",
    "blocking", "persistent", "config", "initOutputs", "predicate",
}


def _parse_node(raw: Any, pointer: str) -> Node:
    if not isinstance(raw, dict):
        raise ParseError("node must be an object", pointer=pointer)
    unknown = set(raw) - _NODE_KEYS
    if unknown:
        raise ParseError(f"unknown node field(s): {sorted(unknown)}", pointer=pointer)
    node_id = _require(raw, "id", pointer)
    if not isinstance(node_id, str) or not node_id:
        raise ParseError("node id must be a non-empty string", pointer=pointer)
    node_type = _require(raw, "type", pointer)
    if node_type not in NODE_TYPES:
        raise ParseError(f"unknown node type {node_type!r}", pointer=pointer)
    label = raw.get("label", node_id)
    if not isinstance(label, str):
        raise ParseError("label must be a string", pointer=pointer)

    def forbid(*keys: str) -> None:
        for key in keys:
            if key in raw:
                raise ParseError(
                    f"field {key!r} is not allowed on a {node_type} node", pointer=pointer
                )

    if node_type == "initialization":
        forbid("function", "implementation", "inputs", "predicate", "config",
               "blocking", "persistent")
        outs = _parse_state_set(raw.get("initOutputs", []), pointer + ".initOutputs")
        return init_node(node_id, outs, label=label)

    if node_type == "process":
        forbid("initOutputs", "predicate")
        fn_raw = _require(raw, "function", pointer)
        try:
            function = ModuleFunction(fn_raw)
        except ValueError:
            raise ParseError(f"unknown module function {fn_raw!r}", pointer=pointer) from None
        implementation = raw.get("implementation")
        if implementation is not None and not isinstance(implementation, str):
            raise ParseError("implementation must be a string or null", pointer=pointer)
        inputs = _parse_state_set(raw.get("inputs", []), pointer + ".inputs")
        bad = inputs - PERMITTED_INPUTS[function]
        if bad:
            names = ", ".join(s.value for s in sort_states(bad))
            raise ParseError(
                f"state(s) not permitted as inputs of {function.value}: {names}",
                pointer=pointer + ".inputs",
            )
        config = raw.get("config", {})
        if not isinstance(config, dict):
            raise ParseError("config must be an object", pointer=pointer + ".config")
        blocking = raw.get("blocking", True)
        persistent = raw.get("persistent", False)
        if not isinstance(blocking, bool) or not isinstance(persistent, bool):
            raise ParseError("blocking/persistent must be booleans", pointer=pointer)
        return process_node(
            node_id, function, implementation, inputs,
            label=label, config=config, blocking=blocking, persistent=persistent,
        )

    if node_type == "decision":
        forbid("function", "implementation", "inputs", "initOutputs", "config",
               "blocking", "persistent")
        predicate = _require(raw, "predicate", pointer)
        if predicate not in PREDICATE_READS:
            raise ParseError(f"unknown decision predicate {predicate!r}", pointer=pointer)
        return decision_node(node_id, predicate, label=label)

    # exit
    forbid("function", "implementation", "inputs", "initOutputs", "predicate",
           "config", "blocking", "persistent")
    return exit_node(node_id, label=label)


def _parse_edge(raw: Any, pointer: str, nodes: dict[str, Node]) -> Edge:
    if not isinstance(raw, dict):
        raise ParseError("edge must be an object", pointer=pointer)
    unknown = set(raw) - {"source", "target", "branch"}
    if unknown:
        raise ParseError(f"unknown edge field(s): {sorted(unknown)}", pointer=pointer)
    source = _require(raw, "source", pointer)
    target = _require(raw, "target", pointer)
    for endpoint, name in ((source, "source"), (target, "target")):
        if not isinstance(endpoint, str) or endpoint not in nodes:
            raise ParseError(f"edge {name} {endpoint!r} names no node", pointer=pointer)
    branch = raw.get("branch")
    if nodes[source].node_type == "decision":
        if not isinstance(branch, bool):
            raise ParseError(
                "edge from a decision node requires a boolean 'branch'", pointer=pointer
            )
    elif branch is not None:
        raise ParseError(
            "'branch' is only allowed on edges leaving a decision node", pointer=pointer
        )
    return Edge(source=source, target=target, branch=branch)


def parse_workflow(text: str) -> WorkflowGraph:
    """Parse workflow file contents into a graph, or raise ``ParseError``."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", line=exc.lineno) from None
    if not isinstance(doc, dict):
        raise ParseError("workflow document must be a JSON object")
    unknown = set(doc) - {"version", "nodes", "edges", "datasetBinding", "categoriesConfig"}
    if unknown:
        raise ParseError(f"unknown top-level field(s): {sorted(unknown)}")
    version = _require(doc, "version", "$")
    if version != FORMAT_VERSION:
        raise ParseError(f"unsupported format version {version!r}", pointer="version")

    raw_nodes = _require(doc, "nodes", "$")
    raw_edges = _require(doc, "edges", "$")
    if not isinstance(raw_nodes, list) or not isinstance(raw_edges, list):
        raise ParseError("'nodes' and 'edges' must be lists")

    nodes: list[Node] = []
    seen: dict[str, int] = {}
    for i, raw in enumerate(raw_nodes):
        node = _parse_node(raw, f"nodes[{i}]")
        if node.id in seen:
            raise ParseError(
                f"duplicate node id {node.id!r} (first at nodes[{seen[node.id]}])",
                pointer=f"nodes[{i}]",
            )
        seen[node.id] = i
        nodes.append(node)

    node_map = {n.id: n for n in nodes}
    edges: list[Edge] = []
    edge_keys: set[tuple[str, str, bool | None]] = set()
    for i, raw in enumerate(raw_edges):
        edge = _parse_edge(raw, f"edges[{i}]", node_map)
        key = (edge.source, edge.target, edge.branch)
        if key in edge_keys:
            raise ParseError(f"duplicate edge {edge.describe()}", pointer=f"edges[{i}]")
        edge_keys.add(key)
        edges.append(edge)

    binding = doc.get("datasetBinding")
    if binding is not None:
        if not isinstance(binding, dict):
            raise ParseError("datasetBinding must be an object", pointer="datasetBinding")
        fmt = binding.get("format")
        if fmt is not None and fmt not in DATASET_FORMATS:
            raise ParseError(f"unknown dataset format {fmt!r}", pointer="datasetBinding.format")

    categories = doc.get("categoriesConfig")
    if categories is not None:
        if not isinstance(categories, list) or not all(isinstance(c, str) for c in categories):
            raise ParseError("categoriesConfig must be a list of strings",
                             pointer="categoriesConfig")

    return WorkflowGraph(
        version=version,
        nodes=nodes,
        edges=edges,
        dataset_binding=binding,
        categories_config=list(categories) if categories is not None else None,
    )


# ---------------------------------------------------------------------------
# Canonical serialization

def _node_to_json(node: Node) -> dict[str, Any]:
    out: dict[str, Any] = {"id": node.id, "label": node.label, "type": node.node_type}
    if node.node_type == "initialization":
        out["initOutputs"] = [s.value for s in sort_states(node.init_outputs)]
    elif node.node_type == "process":
        out["function"] = node.function.value
        out["implementation"] = node.implementation
        out["inputs"] = [s.value for s in sort_states(node.inputs)]
        out["blocking"] = node.blocking
        out["persistent"] = node.persistent
        out["config"] = {k: node.config[k] for k in sorted(node.config)}
    elif node.node_type == "decision":
        out["predicate"] = node.predicate
    return out


def serialize_workflow(graph: WorkflowGraph) -> str:
    """Render a graph in canonical form: equal graphs yield equal bytes."""
    def edge_key(e: Edge) -> tuple:
        return (e.source, e.target, e.branch is not None, bool(e.branch))

    doc: dict[str, Any] = {
        "version": graph.version,
        "nodes": [_node_to_json(n) for n in sorted(graph.nodes, key=lambda n: n.id)],
        "edges": [
            {"source": e.source, "target": e.target, **({} if e.branch is None else {"branch": e.branch})}
            for e in sorted(graph.edges, key=edge_key)
        ],
    }
    if graph.dataset_binding is not None:
        doc["datasetBinding"] = {k: graph.dataset_binding[k] for k in sorted(graph.dataset_binding)}
    if graph.categories_config is not None:
        doc["categoriesConfig"] = list(graph.categories_config)
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"
