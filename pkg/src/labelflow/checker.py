"""Static checking of workflow graphs.

Implements the composition constraints as graph analyses over the
parsed workflow: structural flowchart rules, a forward must-initialized
dataflow analysis, redundancy checks (pointless revisits and dead
outputs), and the requirement that every run passes through interactive
labeling. Each finding is a ranked ``Diagnostic`` carrying mechanically
applicable ``FixSuggestion``s: applying any suggested fix removes the
diagnostic that proposed it.

Rule severities: structural rules, input initialization, and the
labeling requirement are errors; both redundancy rules are warnings
(a redundant tool still works, it is just wasteful). While structural
errors are present, the semantic diagnostics are suppressed from the
ranked output since they may be artifacts of a broken graph shape.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Iterable

from .builtins.registry import REGISTRY, implementations_for
from .model import Edge, Node, WorkflowGraph, init_node, process_node
from .states import PRODUCERS_OF, ModuleFunction, StateName, sort_states

SEVERITY_ERROR = "error"
SEVERITY_WARNING = "warning"

# Closed diagnostic catalogue.
STRUCTURAL_CODES = (
    "no-parallel-edges",
    "one-initialization-node",
    "one-exit-node",
    "process-outdegree-one",
    "decision-outdegree-two",
    "initialization-degree",
    "exit-outdegree-zero",
    "no-self-loops",
    "node-on-init-exit-walk",
    "unique-node-id",
    "implementation-chosen",
    "decision-branches-distinct",
    "valid-edge-endpoint",
)
SEMANTIC_CODES = (
    "no-uninitialized-inputs",
    "no-redundant-revisit",
    "no-dead-output",
    "involve-interactive-labeling",
)
ALL_CODES = STRUCTURAL_CODES + SEMANTIC_CODES

_WARNING_CODES = {"no-redundant-revisit", "no-dead-output"}


@dataclass(frozen=True)
class FixSuggestion:
    """A mechanically applicable edit resolving a diagnostic."""

    kind: str  # declare-init-output | insert-producer-node | add-edge |
    #            remove-node | remove-edge | set-implementation | relabel-branch
    detail: dict[str, Any]

    def to_json(self) -> dict[str, Any]:
        return {"kind": self.kind, "detail": self.detail}


@dataclass(frozen=True)
class Diagnostic:
    code: str
    severity: str
    message: str
    subjects: tuple[str, ...] = ()
    fixes: tuple[FixSuggestion, ...] = ()

    def to_json(self) -> dict[str, Any]:
        return {
            "code": self.code,
            "severity": self.severity,
            "message": self.message,
            "subjects": list(self.subjects),
            "fixes": [f.to_json() for f in self.fixes],
        }


def _diag(code: str, message: str, subjects: Iterable[str] = (),
          fixes: Iterable[FixSuggestion] = ()) -> Diagnostic:
    severity = SEVERITY_WARNING if code in _WARNING_CODES else SEVERITY_ERROR
    return Diagnostic(code=code, severity=severity, message=message,
                      subjects=tuple(subjects), fixes=tuple(fixes))


def _remove_edges_fix(edges: Iterable[Edge]) -> FixSuggestion:
    return FixSuggestion(
        kind="remove-edge",
        detail={"edges": [
            {"source": e.source, "target": e.target, "branch": e.branch} for e in edges
        ]},
    )


def _remove_node_fix(node_id: str) -> FixSuggestion:
    return FixSuggestion(kind="remove-node", detail={"node": node_id})


def _add_edge_fix(source: str, target: str, branch: bool | None = None) -> FixSuggestion:
    return FixSuggestion(kind="add-edge",
                         detail={"source": source, "target": target, "branch": branch})


# ---------------------------------------------------------------------------
# Graph helpers

def _has_duplicate_ids(graph: WorkflowGraph) -> bool:
    ids = [n.id for n in graph.nodes]
    return len(set(ids)) != len(ids)


def _valid_edges(graph: WorkflowGraph) -> list[Edge]:
    ids = {n.id for n in graph.nodes}
    return [e for e in graph.edges if e.source in ids and e.target in ids]


def _successors(edges: Iterable[Edge]) -> dict[str, list[str]]:
    out: dict[str, list[str]] = {}
    for e in edges:
        out.setdefault(e.source, []).append(e.target)
    return out


def _predecessors(edges: Iterable[Edge]) -> dict[str, list[str]]:
    out: dict[str, list[str]] = {}
    for e in edges:
        out.setdefault(e.target, []).append(e.source)
    return out


def _reachable(starts: Iterable[str], adjacency: dict[str, list[str]]) -> set[str]:
    seen = set(starts)
    stack = list(seen)
    while stack:
        for nxt in adjacency.get(stack.pop(), ()):
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return seen


def _on_walk_nodes(graph: WorkflowGraph) -> set[str]:
    """Nodes lying on some initialization-to-exit walk."""
    edges = _valid_edges(graph)
    inits = [n.id for n in graph.nodes_of_type("initialization")]
    exits = [n.id for n in graph.nodes_of_type("exit")]
    if not inits or not exits:
        return set()
    forward = _reachable(inits, _successors(edges))
    backward = _reachable(exits, _predecessors(edges))
    return forward & backward


# ---------------------------------------------------------------------------
# Structural rules

def check_structure(graph: WorkflowGraph) -> list[Diagnostic]:
    diags: list[Diagnostic] = []

    # unique-node-id: all other analyses assume ids identify nodes.
    by_id: dict[str, list[Node]] = {}
    for node in graph.nodes:
        by_id.setdefault(node.id, []).append(node)
    for node_id, group in sorted(by_id.items()):
        if len(group) > 1:
            diags.append(_diag(
                "unique-node-id",
                f"node id {node_id!r} is used by {len(group)} nodes; node id should be unique",
                [node_id],
                [FixSuggestion(kind="remove-node", detail={"node": node_id, "keep": "first"})],
            ))
    if diags:
        return diags

    node_map = graph.node_map()
    valid_edges = _valid_edges(graph)

    for e in graph.edges:
        if e.source not in node_map or e.target not in node_map:
            diags.append(_diag(
                "valid-edge-endpoint",
                f"edge {e.describe()} references a node that does not exist",
                [e.describe()],
                [_remove_edges_fix([e])],
            ))

    seen_pairs: dict[tuple[str, str], list[Edge]] = {}
    for e in valid_edges:
        seen_pairs.setdefault((e.source, e.target), []).append(e)
    for (source, target), group in sorted(seen_pairs.items()):
        if len(group) > 1:
            diags.append(_diag(
                "no-parallel-edges",
                f"the graph contains {len(group)} parallel edges from "
                f"\"{node_map[source].label}\" to \"{node_map[target].label}\"",
                [e.describe() for e in group],
                [_remove_edges_fix(group[1:])],
            ))

    inits = graph.nodes_of_type("initialization")
    exits = graph.nodes_of_type("exit")
    if len(inits) != 1:
        fixes = [_remove_node_fix(n.id) for n in inits[1:]]
        diags.append(_diag(
            "one-initialization-node",
            f"the graph must contain one initialization node, found {len(inits)}",
            [n.id for n in inits],
            fixes,
        ))
    if len(exits) != 1:
        fixes = [_remove_node_fix(n.id) for n in exits[1:]]
        diags.append(_diag(
            "one-exit-node",
            f"the graph must contain one exit node, found {len(exits)}",
            [n.id for n in exits],
            fixes,
        ))

    out_by_node = _successors(valid_edges)
    in_by_node = _predecessors(valid_edges)
    exit_id = exits[0].id if len(exits) == 1 else None

    for node in graph.nodes:
        out_edges = [e for e in valid_edges if e.source == node.id]
        in_degree = len(in_by_node.get(node.id, ()))
        out_degree = len(out_edges)

        if node.node_type == "process":
            if out_degree != 1:
                fixes = []
                if out_degree > 1:
                    fixes.append(_remove_edges_fix(out_edges[1:]))
                elif exit_id is not None and exit_id != node.id:
                    fixes.append(_add_edge_fix(node.id, exit_id))
                diags.append(_diag(
                    "process-outdegree-one",
                    f"process node \"{node.label}\" has outdegree {out_degree}, expected 1",
                    [node.id],
                    fixes,
                ))
            impl_diag = _implementation_diagnostic(node)
            if impl_diag is not None:
                diags.append(impl_diag)

        elif node.node_type == "decision":
            if out_degree != 2:
                fixes = []
                if out_degree > 2:
                    keep: list[Edge] = []
                    for want in (True, False):
                        for e in out_edges:
                            if e.branch is want and all(k is not e for k in keep):
                                keep.append(e)
                                break
                    extras = [e for e in out_edges if e not in keep][: out_degree - 2]
                    fixes.append(_remove_edges_fix(extras))
                elif exit_id is not None:
                    present = {e.branch for e in out_edges}
                    missing = True if True not in present else False
                    fixes.append(_add_edge_fix(node.id, exit_id, branch=missing))
                diags.append(_diag(
                    "decision-outdegree-two",
                    f"decision node \"{node.label}\" has outdegree {out_degree}, expected 2",
                    [node.id],
                    fixes,
                ))
            elif out_degree == 2:
                branches = sorted(bool(e.branch) for e in out_edges)
                if branches != [False, True]:
                    dup = out_edges[1]
                    flipped = not bool(dup.branch)
                    diags.append(_diag(
                        "decision-branches-distinct",
                        f"decision node \"{node.label}\" must have one true and one "
                        f"false branch",
                        [node.id],
                        [FixSuggestion(
                            kind="relabel-branch",
                            detail={"source": dup.source, "target": dup.target,
                                    "branch": dup.branch, "newBranch": flipped},
                        )],
                    ))

        elif node.node_type == "initialization":
            if in_degree != 0 or out_degree != 1:
                fixes = []
                if in_degree > 0:
                    fixes.append(_remove_edges_fix(
                        [e for e in valid_edges if e.target == node.id]
                    ))
                if out_degree > 1:
                    fixes.append(_remove_edges_fix(out_edges[1:]))
                elif out_degree == 0 and exit_id is not None:
                    fixes.append(_add_edge_fix(node.id, exit_id))
                diags.append(_diag(
                    "initialization-degree",
                    f"initialization node \"{node.label}\" must have indegree 0 and "
                    f"outdegree 1 (found indegree {in_degree}, outdegree {out_degree})",
                    [node.id],
                    fixes,
                ))

        elif node.node_type == "exit":
            if out_degree != 0:
                diags.append(_diag(
                    "exit-outdegree-zero",
                    f"exit node \"{node.label}\" has outdegree {out_degree}, expected 0",
                    [node.id],
                    [_remove_edges_fix(out_edges)],
                ))

        self_loops = [e for e in out_edges if e.target == node.id]
        if self_loops:
            diags.append(_diag(
                "no-self-loops",
                f"node \"{node.label}\" has an edge to itself",
                [node.id],
                [_remove_edges_fix(self_loops)],
            ))

    # Every node must lie on an initialization-to-exit walk.
    if len(inits) == 1 and len(exits) == 1:
        forward = _reachable([inits[0].id], out_by_node)
        backward = _reachable([exits[0].id], in_by_node)
        for node in graph.nodes:
            in_deg = len(in_by_node.get(node.id, ()))
            out_deg = len(out_by_node.get(node.id, ()))
            if node.id not in forward:
                detail = (f"computation node with label \"{node.label}\" has indegree 0; "
                          if in_deg == 0 and node.node_type == "process"
                          else f"node \"{node.label}\": ")
                diags.append(_diag(
                    "node-on-init-exit-walk",
                    detail + "it cannot be reached from the initialization node",
                    [node.id],
                    [_add_edge_fix(inits[0].id, node.id), _remove_node_fix(node.id)],
                ))
            if node.id not in backward:
                detail = (f"computation node with label \"{node.label}\" has outdegree 0; "
                          if out_deg == 0 and node.node_type == "process"
                          else f"node \"{node.label}\": ")
                branch = True if node.node_type == "decision" else None
                diags.append(_diag(
                    "node-on-init-exit-walk",
                    detail + "the exit node cannot be reached from it",
                    [node.id],
                    [_add_edge_fix(node.id, exits[0].id, branch=branch),
                     _remove_node_fix(node.id)],
                ))
    return diags


def _implementation_diagnostic(node: Node) -> Diagnostic | None:
    def set_impl_fix(key: str) -> FixSuggestion:
        return FixSuggestion(kind="set-implementation",
                             detail={"node": node.id, "implementation": key})

    candidates = implementations_for(node.function)
    fallback = candidates[0].key if candidates else None
    if node.implementation is None:
        fixes = [set_impl_fix(fallback)] if fallback else []
        return _diag(
            "implementation-chosen",
            f"an implementation should be chosen for node \"{node.label}\"",
            [node.id], fixes,
        )
    descriptor = REGISTRY.get(node.implementation)
    if descriptor is None:
        fixes = [set_impl_fix(fallback)] if fallback else []
        return _diag(
            "implementation-chosen",
            f"node \"{node.label}\" names unknown implementation "
            f"{node.implementation!r}",
            [node.id], fixes,
        )
    if descriptor.function != node.function:
        fixes = [set_impl_fix(fallback)] if fallback else []
        return _diag(
            "implementation-chosen",
            f"implementation {node.implementation!r} implements "
            f"{descriptor.function.value}, but node \"{node.label}\" is "
            f"{node.function.value}",
            [node.id], fixes,
        )
    if descriptor.declared_inputs != node.inputs:
        want = ", ".join(s.value for s in sort_states(descriptor.declared_inputs)) or "none"
        got = ", ".join(s.value for s in sort_states(node.inputs)) or "none"
        return _diag(
            "implementation-chosen",
            f"node \"{node.label}\" declares inputs ({got}) but implementation "
            f"{node.implementation!r} reads ({want})",
            [node.id],
            [set_impl_fix(node.implementation)],
        )
    return None


# ---------------------------------------------------------------------------
# Must-initialized dataflow analysis

def must_initialized_states(graph: WorkflowGraph) -> dict[str, frozenset[StateName]]:
    """For each node, the states initialized on entry along every path.

    Forward must-analysis: initialization nodes enter with nothing, every
    node adds its outputs on exit, and a node's entry set is the
    intersection of its predecessors' exit sets. Transfer functions only
    add states, so the fixpoint equals the meet over all walks.
    """
    all_states = frozenset(StateName)
    node_map = graph.node_map()
    edges = _valid_edges(graph)
    preds = _predecessors(edges)

    entry: dict[str, frozenset[StateName]] = {}
    for node in graph.nodes:
        entry[node.id] = frozenset() if node.node_type == "initialization" else all_states

    changed = True
    while changed:
        changed = False
        for node in graph.nodes:
            if node.node_type == "initialization":
                continue
            p = preds.get(node.id)
            if not p:
                continue
            met = all_states
            for pid in p:
                met = met & (entry[pid] | node_map[pid].outputs)
            if met != entry[node.id]:
                entry[node.id] = met
                changed = True
    return entry


def uninitialized_input_violations(graph: WorkflowGraph) -> set[tuple[str, StateName]]:
    """(node id, state) pairs where an input may be read uninitialized."""
    entry = must_initialized_states(graph)
    on_walk = _on_walk_nodes(graph)
    return {
        (node.id, state)
        for node in graph.nodes
        if node.id in on_walk
        for state in node.inputs - entry[node.id]
    }


def check_uninitialized_inputs(graph: WorkflowGraph) -> list[Diagnostic]:
    node_map = graph.node_map()
    inits = graph.nodes_of_type("initialization")
    init_id = inits[0].id if len(inits) == 1 else None
    diags: list[Diagnostic] = []
    for node_id, state in sorted(uninitialized_input_violations(graph),
                                 key=lambda v: (v[0], v[1].value)):
        node = node_map[node_id]
        fixes = []
        if init_id is not None:
            fixes.append(FixSuggestion(
                kind="declare-init-output",
                detail={"node": init_id, "state": state.value},
            ))
        producer = _producer_fix(node_id, state)
        if producer is not None:
            fixes.append(producer)
        diags.append(_diag(
            "no-uninitialized-inputs",
            f"node \"{node.label}\" reads state '{state.value}' which is not "
            f"initialized on every path to it",
            [node_id],
            fixes,
        ))
    return diags


def _producer_fix(before: str, state: StateName) -> FixSuggestion | None:
    """Insert-a-producer fix, or None for states no module function writes."""
    producers = PRODUCERS_OF[state]
    if not producers:
        return None
    function = producers[0]
    candidates = implementations_for(function)
    return FixSuggestion(
        kind="insert-producer-node",
        detail={
            "before": before,
            "state": state.value,
            "function": function.value,
            "implementation": candidates[0].key if candidates else None,
        },
    )


# ---------------------------------------------------------------------------
# Redundancy rules

def redundant_revisit_violations(graph: WorkflowGraph) -> set[str]:
    """Process nodes that can be revisited before any of their inputs changed.

    A node violates the rule iff some cycle returns to it whose interior
    writes none of its inputs; equivalently, the node is reachable from
    one of its successors in the subgraph that deletes every other node
    writing any of its inputs.
    """
    edges = _valid_edges(graph)
    on_walk = _on_walk_nodes(graph)
    violations: set[str] = set()
    for node in graph.nodes:
        if node.node_type != "process" or node.id not in on_walk:
            continue
        deleted = {
            other.id
            for other in graph.nodes
            if other.id != node.id and other.outputs & node.inputs
        }
        sub_edges = [e for e in edges if e.source not in deleted and e.target not in deleted]
        starts = [e.target for e in sub_edges if e.source == node.id]
        if starts and node.id in _reachable(starts, _successors(sub_edges)):
            violations.add(node.id)
    return violations


def check_redundant_revisit(graph: WorkflowGraph) -> list[Diagnostic]:
    node_map = graph.node_map()
    diags: list[Diagnostic] = []
    for node_id in sorted(redundant_revisit_violations(graph)):
        node = node_map[node_id]
        fixes: list[FixSuggestion] = []
        for state in sort_states(node.inputs):
            producer = _producer_fix(node_id, state)
            if producer is not None:
                fixes.append(producer)
                break
        fixes.append(_remove_node_fix(node_id))
        diags.append(_diag(
            "no-redundant-revisit",
            f"process node \"{node.label}\" can be revisited before any of its "
            f"inputs changed",
            [node_id],
            fixes,
        ))
    return diags


def dead_output_violations(graph: WorkflowGraph) -> set[tuple[str, StateName]]:
    """(node id, state) pairs whose write can go unused.

    A write of state s by node v is dead on some run iff, from one of
    v's successors, the exit node or another writer of s can be reached
    without first passing a reader of s (read-write nodes count as
    readers).
    """
    edges = _valid_edges(graph)
    on_walk = _on_walk_nodes(graph)
    exits = {n.id for n in graph.nodes_of_type("exit")}
    violations: set[tuple[str, StateName]] = set()
    for node in graph.nodes:
        if node.id not in on_walk:
            continue
        for state in node.outputs:
            readers = {n.id for n in graph.nodes if state in n.inputs}
            rewriters = {
                n.id for n in graph.nodes
                if state in n.outputs and state not in n.inputs
            }
            targets = (exits | rewriters) - readers
            sub_edges = [
                e for e in edges if e.source not in readers and e.target not in readers
            ]
            starts = [e.target for e in edges if e.source == node.id and e.target not in readers]
            if starts and _reachable(starts, _successors(sub_edges)) & targets:
                violations.add((node.id, state))
    return violations


def check_dead_output(graph: WorkflowGraph) -> list[Diagnostic]:
    node_map = graph.node_map()
    diags: list[Diagnostic] = []
    for node_id, state in sorted(dead_output_violations(graph),
                                 key=lambda v: (v[0], v[1].value)):
        node = node_map[node_id]
        diags.append(_diag(
            "no-dead-output",
            f"the '{state.value}' output of node \"{node.label}\" can go "
            f"unused before the run exits or the state is overwritten",
            [node_id],
            [_remove_node_fix(node_id)],
        ))
    return diags


def labeling_bypass_exists(graph: WorkflowGraph) -> bool:
    """True iff some initialization-to-exit walk avoids interactive labeling."""
    inits = [n.id for n in graph.nodes_of_type("initialization")]
    exits = [n.id for n in graph.nodes_of_type("exit")]
    if not inits or not exits:
        return False
    labeling = {
        n.id for n in graph.nodes if n.function == ModuleFunction.INTERACTIVE_LABELING
    }
    sub_edges = [
        e for e in _valid_edges(graph)
        if e.source not in labeling and e.target not in labeling
    ]
    reached = _reachable([i for i in inits if i not in labeling], _successors(sub_edges))
    return any(x in reached for x in exits)


def check_involves_labeling(graph: WorkflowGraph) -> list[Diagnostic]:
    """Interactive labeling must occur on every initialization-to-exit walk."""
    if labeling_bypass_exists(graph):
        exits = [n.id for n in graph.nodes_of_type("exit")]
        return [_diag(
            "involve-interactive-labeling",
            "the exit node can be reached without ever visiting an interactive "
            "labeling node",
            [exits[0]],
            [FixSuggestion(
                kind="insert-producer-node",
                detail={
                    "before": exits[0],
                    "state": StateName.LABELS.value,
                    "function": ModuleFunction.INTERACTIVE_LABELING.value,
                    "implementation": "builtin.interface.gridMatrixClassification",
                },
            )],
        )]
    return []


# ---------------------------------------------------------------------------
# Orchestration

def rank_diagnostics(diags: list[Diagnostic]) -> list[Diagnostic]:
    """Deduplicate, order by severity, and hide semantic findings while
    structural errors are present."""
    unique: dict[tuple, Diagnostic] = {}
    for d in diags:
        unique.setdefault((d.code, d.severity, d.subjects, d.message), d)
    result = list(unique.values())
    if any(d.code in STRUCTURAL_CODES for d in result):
        result = [d for d in result if d.code in STRUCTURAL_CODES]
    result.sort(key=lambda d: (
        0 if d.severity == SEVERITY_ERROR else 1,
        d.code,
        d.subjects[0] if d.subjects else "",
        d.message,
    ))
    return result


def check(graph: WorkflowGraph) -> list[Diagnostic]:
    """Run every rule and return the ranked diagnostic list."""
    diags = check_structure(graph)
    if not _has_duplicate_ids(graph):
        diags += check_uninitialized_inputs(graph)
        diags += check_redundant_revisit(graph)
        diags += check_dead_output(graph)
        diags += check_involves_labeling(graph)
    return rank_diagnostics(diags)


def has_errors(diags: list[Diagnostic]) -> bool:
    return any(d.severity == SEVERITY_ERROR for d in diags)


# ---------------------------------------------------------------------------
# Fix application (used to verify fix closure; never applied automatically)

def apply_fix(graph: WorkflowGraph, fix: FixSuggestion) -> WorkflowGraph:
    """Return a new graph with the suggested edit applied."""
    nodes = list(graph.nodes)
    edges = list(graph.edges)
    detail = fix.detail

    if fix.kind == "remove-node":
        target = detail["node"]
        if detail.get("keep") == "first":
            seen = False
            kept = []
            for n in nodes:
                if n.id == target:
                    if not seen:
                        kept.append(n)
                        seen = True
                else:
                    kept.append(n)
            nodes = kept
        else:
            nodes = [n for n in nodes if n.id != target]
            edges = [e for e in edges if e.source != target and e.target != target]

    elif fix.kind == "remove-edge":
        doomed = {(d["source"], d["target"], d.get("branch")) for d in detail["edges"]}
        edges = [e for e in edges if (e.source, e.target, e.branch) not in doomed]

    elif fix.kind == "add-edge":
        edges.append(Edge(source=detail["source"], target=detail["target"],
                          branch=detail.get("branch")))

    elif fix.kind == "relabel-branch":
        edges = [
            Edge(e.source, e.target, detail["newBranch"])
            if (e.source, e.target, e.branch) == (detail["source"], detail["target"],
                                                  detail.get("branch"))
            else e
            for e in edges
        ]

    elif fix.kind == "declare-init-output":
        state = StateName(detail["state"])
        nodes = [
            init_node(n.id, n.init_outputs | {state}, label=n.label)
            if n.id == detail["node"] and n.node_type == "initialization"
            else n
            for n in nodes
        ]

    elif fix.kind == "set-implementation":
        key = detail["implementation"]
        descriptor = REGISTRY[key]
        nodes = [
            process_node(
                n.id, descriptor.function, key, descriptor.declared_inputs,
                label=n.label, config=n.config, blocking=n.blocking,
                persistent=n.persistent,
            )
            if n.id == detail["node"]
            else n
            for n in nodes
        ]

    elif fix.kind == "insert-producer-node":
        before = detail["before"]
        state = StateName(detail["state"])
        function = ModuleFunction(detail["function"]) if detail.get("function") \
            else PRODUCERS_OF[state][0]
        impl_key = detail.get("implementation")
        if impl_key is None:
            candidates = implementations_for(function)
            impl_key = candidates[0].key if candidates else None
        existing = {n.id for n in nodes}
        new_id = f"producer-{state.value}"
        bump = 2
        while new_id in existing:
            new_id = f"producer-{state.value}-{bump}"
            bump += 1
        declared = REGISTRY[impl_key].declared_inputs if impl_key in REGISTRY else frozenset()
        producer = process_node(new_id, function, impl_key, declared,
                                label=f"{state.value} producer")
        nodes.append(producer)
        edges = [
            Edge(e.source, new_id, e.branch) if e.target == before else e
            for e in edges
        ]
        edges.append(Edge(new_id, before, None))

    else:
        raise ValueError(f"unknown fix kind {fix.kind!r}")

    return WorkflowGraph(
        version=graph.version,
        nodes=nodes,
        edges=edges,
        dataset_binding=graph.dataset_binding,
        categories_config=graph.categories_config,
    )
