"""Workflow interpreter.

Executes a validated workflow graph against a blackboard: visits nodes
along edges, runs algorithmic implementations inline, routes interface
nodes through the interaction gateway, evaluates decision predicates,
and records a replayable execution trace. Each session is one logical
execution strand; non-blocking completions and gateway responses are
consumed only at node boundaries, preserving single-writer atomicity.
"""
from __future__ import annotations

import json
from concurrent.futures import Future, ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any

from . import checker
from .blackboard import Blackboard, DataObject, LabelRecord, ModelArtifact
from .builtins.errors import BuiltinError
from .builtins.registry import ExecutionContext, get_descriptor
from .gateway import Gateway, GatewayClosed, InteractionRequest, InteractionResponse
from .model import Node, WorkflowGraph
from .rng import fold_key
from .states import PREDICATE_READS, StateName, sort_states

DEFAULT_ITERATION_GUARD = 100_000

# Write order satisfying referential dependencies (labels/features/samples
# validate against dataObjects and categories).
_INIT_WRITE_ORDER = (
    StateName.DATA_OBJECTS,
    StateName.CATEGORIES,
    StateName.LABELS,
    StateName.FEATURES,
    StateName.MODEL,
    StateName.SAMPLES,
    StateName.STOP,
)

_TRAINER_KINDS = {
    "builtin.train.logreg": "logisticRegression",
    "builtin.train.tree": "decisionTree",
    "builtin.train.labelPropagation": "labelPropagation",
}


class EngineError(RuntimeError):
    pass


class InvalidWorkflow(EngineError):
    """The graph has checker errors; execution refused."""

    def __init__(self, diagnostics):
        self.diagnostics = diagnostics
        lines = "; ".join(f"{d.code}: {d.message}" for d in diagnostics[:3])
        super().__init__(f"workflow has {len(diagnostics)} error(s): {lines}")


class ImplementationError(EngineError):
    """A node's implementation failed; carries the node id."""

    def __init__(self, node_id: str, message: str):
        self.node_id = node_id
        super().__init__(f"node '{node_id}': {message}")


class IterationGuardExceeded(EngineError):
    pass


class UnknownNode(EngineError):
    pass


@dataclass(frozen=True)
class TraceEntry:
    seq: int
    mark: str  # start | end | apply | warning | error
    node: str | None = None
    deltas: tuple[tuple[str, int], ...] = ()
    requests: tuple[str, ...] = ()
    branch: bool | None = None
    detail: str | None = None

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {"seq": self.seq, "mark": self.mark}
        if self.node is not None:
            out["node"] = self.node
        if self.deltas:
            out["deltas"] = [[state, version] for state, version in self.deltas]
        if self.requests:
            out["requests"] = list(self.requests)
        if self.branch is not None:
            out["branch"] = self.branch
        if self.detail is not None:
            out["detail"] = self.detail
        return out


@dataclass
class ExecutionTrace:
    entries: list[TraceEntry] = field(default_factory=list)
    _seq: int = 0

    def record(self, mark: str, **kwargs: Any) -> TraceEntry:
        self._seq += 1
        entry = TraceEntry(seq=self._seq, mark=mark, **kwargs)
        self.entries.append(entry)
        return entry

    def to_jsonl(self) -> str:
        return "".join(
            json.dumps(e.to_json(), ensure_ascii=False, sort_keys=True) + "\n"
            for e in self.entries
        )


@dataclass
class StepResult:
    node_id: str
    deltas: tuple[tuple[str, int], ...]
    requests: tuple[str, ...]
    next_cursor: str | None
    status: str


def evaluate_decision(board: Blackboard, predicate: str) -> bool:
    """Evaluate a decision predicate against the board."""
    if predicate not in PREDICATE_READS:
        raise EngineError(f"unknown decision predicate {predicate!r}")
    return bool(board.get_state(StateName.STOP))


class Session:
    """One executing workflow instance."""

    def __init__(
        self,
        graph: WorkflowGraph,
        data_objects: list[DataObject],
        gateway: Gateway,
        seed: int = 0,
        *,
        session_id: str | None = None,
        iteration_guard: int = DEFAULT_ITERATION_GUARD,
        interaction_timeout: float | None = None,
        skip_validation: bool = False,
    ) -> None:
        if not skip_validation:
            diags = checker.check(graph)
            errors = [d for d in diags if d.severity == checker.SEVERITY_ERROR]
            if errors:
                raise InvalidWorkflow(errors)
        self.graph = graph
        self.data_objects = list(data_objects)
        self.gateway = gateway
        self.seed = seed
        self.session_id = session_id or f"run-{seed}"
        self.iteration_guard = iteration_guard
        self.interaction_timeout = interaction_timeout
        self.board = Blackboard()
        self.trace = ExecutionTrace()
        self.status = "ready"
        self.pending_requests: set[str] = set()
        self._nodes = graph.node_map()
        inits = graph.nodes_of_type("initialization")
        self.cursor: str | None = inits[0].id if inits else None
        self._visits = 0
        self._request_counter = 0
        self._registered_panels: set[str] = set()
        self._executor: ThreadPoolExecutor | None = None
        # Non-blocking completions, consumed at node boundaries.
        self._inflight: list[tuple[str, Future | None, dict[StateName, Any] | None]] = []
        self._awaiting_responses: list[tuple[str, str]] = []  # (node_id, request_id)

    # -- public API --------------------------------------------------------

    def run(self) -> ExecutionTrace:
        while self.status not in ("finished", "failed"):
            self.step()
        return self.trace

    def step(self) -> StepResult:
        """Execute exactly one node and pause."""
        if self.status in ("finished", "failed"):
            raise EngineError(f"session is {self.status}")
        if self.cursor is None:
            raise EngineError("no initialization node to start from")
        self._apply_ready_completions()

        self._visits += 1
        if self._visits > self.iteration_guard:
            self.status = "failed"
            self.trace.record("error", detail=f"iteration guard exceeded "
                                              f"({self.iteration_guard} node visits)")
            raise IterationGuardExceeded(
                f"exceeded {self.iteration_guard} node visits"
            )

        node = self._nodes[self.cursor]
        self.status = "running"
        self.trace.record("start", node=node.id)
        before_log = len(self.board.delta_log)
        requests: tuple[str, ...] = ()
        branch: bool | None = None
        try:
            if node.node_type == "initialization":
                self._execute_initialization(node)
                next_cursor = self._single_successor(node)
            elif node.node_type == "process":
                requests = self._execute_process(node)
                next_cursor = self._single_successor(node)
            elif node.node_type == "decision":
                self._check_inputs_initialized(node)
                branch = evaluate_decision(self.board, node.predicate)
                next_cursor = self._branch_target(node, branch)
            else:  # exit
                next_cursor = None
        except EngineError:
            self.status = "failed"
            raise
        except BuiltinError as exc:
            self.status = "failed"
            self.trace.record("error", node=node.id, detail=str(exc))
            raise ImplementationError(node.id, str(exc)) from exc

        deltas = tuple(
            (entry["stateName"], entry["version"])
            for entry in self.board.delta_log[before_log:]
        )
        self.trace.record("end", node=node.id, deltas=deltas, requests=requests,
                          branch=branch)

        if node.node_type == "exit":
            self.status = "finished"
            self._discard_late_completions()
        else:
            self.status = "ready"
        self.cursor = next_cursor
        return StepResult(node_id=node.id, deltas=deltas, requests=requests,
                          next_cursor=next_cursor, status=self.status)

    def set_entry(self, node_id: str) -> None:
        """Force the control flow to continue from an arbitrary node."""
        if node_id not in self._nodes:
            raise UnknownNode(node_id)
        self.cursor = node_id
        if self.status in ("finished", "failed"):
            self.status = "ready"
        self.trace.record(
            "warning", node=node_id,
            detail="entry forced here; statically checked initialization "
                   "guarantees no longer hold",
        )

    def handle_nonblocking_completion(self, node_id: str, outputs: dict[StateName, Any]) -> None:
        """Queue a non-blocking node's outputs for the next node boundary.

        Completions arriving after the run exited are discarded with a
        trace warning.
        """
        if self.status in ("finished", "failed"):
            self.trace.record(
                "warning", node=node_id,
                detail="non-blocking completion arrived after exit; outputs discarded",
            )
            return
        self._inflight.append((node_id, None, outputs))

    def progress(self) -> dict[str, Any]:
        labels: dict[str, LabelRecord] = self.board.get_state(StateName.LABELS)
        total = len(self.data_objects)
        human = sum(1 for rec in labels.values() if rec.status == "humanLabeled")
        return {"total": total, "humanLabeled": human,
                "fraction": (human / total) if total else 0.0}

    # -- node execution ------------------------------------------------------

    def _execute_initialization(self, node: Node) -> None:
        values = self._initial_values()
        for state in _INIT_WRITE_ORDER:
            if state in node.init_outputs:
                self.board.set_state(state, values[state])

    def _initial_values(self) -> dict[StateName, Any]:
        labels = {obj.uuid: LabelRecord(uuid=obj.uuid) for obj in self.data_objects}
        model: dict[str, ModelArtifact] = {}
        for other in self.graph.nodes:
            kind = _TRAINER_KINDS.get(other.implementation or "")
            if kind is not None:
                key = other.config.get("modelKey", "default")
                model.setdefault(key, ModelArtifact(key=key, kind=kind))
        if not model:
            model = {"default": ModelArtifact(key="default", kind="decisionTree")}
        return {
            StateName.DATA_OBJECTS: self.data_objects,
            StateName.CATEGORIES: list(self.graph.categories_config or []),
            StateName.LABELS: labels,
            StateName.FEATURES: {},
            StateName.MODEL: model,
            StateName.SAMPLES: [],
            StateName.STOP: False,
        }

    def _execute_process(self, node: Node) -> tuple[str, ...]:
        self._check_inputs_initialized(node)
        descriptor = get_descriptor(node.implementation)
        if descriptor.execution == "interface":
            return self._execute_interface(node, descriptor)
        ctx = self._build_context(node, descriptor)
        if node.blocking:
            outputs = descriptor.run(ctx)
            self._write_outputs(node, outputs)
            return ()
        # Non-blocking: run on a worker; outputs land at a later boundary.
        if self._executor is None:
            self._executor = ThreadPoolExecutor(max_workers=2)
        future = self._executor.submit(descriptor.run, ctx)
        self._inflight.append((node.id, future, None))
        return ()

    def _execute_interface(self, node: Node, descriptor) -> tuple[str, ...]:
        request = self._build_request(node, descriptor)
        if request is None:
            self.trace.record("warning", node=node.id,
                              detail="no objects to present; interaction skipped")
            return ()
        self.pending_requests.add(request.request_id)
        self.gateway.submit_request(request)
        if not node.blocking:
            self._awaiting_responses.append((node.id, request.request_id))
            return (request.request_id,)
        self.status = "awaitingInteraction"
        try:
            response = self.gateway.await_response(
                request.request_id, timeout=self.interaction_timeout
            )
        except GatewayClosed:
            self.status = "failed"
            self.trace.record("error", node=node.id,
                              detail="gateway closed while awaiting interaction")
            raise
        finally:
            self.pending_requests.discard(request.request_id)
        self.status = "running"
        self._apply_response(node, response)
        return (request.request_id,)

    def _build_context(self, node: Node, descriptor) -> ExecutionContext:
        wanted = set(node.inputs) | set(node.outputs)
        states = {s: self.board.get_state(s) for s in wanted}
        config = descriptor.effective_config(node.config)
        seed = config.get("seed")
        if seed is None:
            seed = fold_key(self.seed, node.id)
        return ExecutionContext(
            states=states, config=config, seed=int(seed),
            versions=dict(self.board.versions),
        )

    def _write_outputs(self, node: Node, outputs: dict[StateName, Any]) -> None:
        unexpected = set(outputs) - set(node.outputs)
        if unexpected:
            raise ImplementationError(
                node.id, f"implementation wrote undeclared state(s): "
                         f"{[s.value for s in unexpected]}"
            )
        for state in sort_states(outputs):
            self.board.set_state(state, outputs[state])

    def _check_inputs_initialized(self, node: Node) -> None:
        for state in sort_states(node.inputs):
            if self.board.versions[state] < 1:
                raise ImplementationError(
                    node.id,
                    f"reads state '{state.value}' which was never initialized",
                )

    # -- interaction plumbing -----------------------------------------------

    def _build_request(self, node: Node, descriptor) -> InteractionRequest | None:
        config = descriptor.effective_config(node.config)
        labels: dict[str, LabelRecord] = self.board.get_state(StateName.LABELS)
        categories = self.board.get_state(StateName.CATEGORIES)
        objects = {obj.uuid: obj for obj in self.data_objects}

        function = node.function.value
        if function == "interactiveLabeling":
            uuids = list(self.board.get_state(StateName.SAMPLES))
        elif function == "qualityAssurance":
            uuids = [
                obj.uuid for obj in self.data_objects
                if labels.get(obj.uuid, LabelRecord(obj.uuid)).status != "unlabeled"
            ]
        elif function == "labelIdeation":
            uuids = [obj.uuid for obj in self.data_objects[: int(config.get("previewCount", 9))]]
        else:
            uuids = [obj.uuid for obj in self.data_objects]
        if not uuids and function in ("interactiveLabeling", "qualityAssurance"):
            return None

        items = [
            {
                "uuid": uuid,
                "content": _content_for_client(objects[uuid]),
                "currentLabel": labels.get(uuid, LabelRecord(uuid)).to_json(),
            }
            for uuid in uuids
        ]
        if descriptor.interface_layout == "gridMatrix":
            hints = {"layout": "gridMatrix", "rows": int(config.get("rows", 4)),
                     "columns": int(config.get("columns", 4))}
        else:
            hints = {"layout": "singleObject"}
        self._request_counter += 1
        request = InteractionRequest(
            request_id=f"{self.session_id}-req{self._request_counter:04d}",
            session_id=self.session_id,
            node_id=node.id,
            function=function,
            implementation_key=node.implementation,
            persistent=node.persistent,
            payload={
                "sampledObjects": items,
                "categories": list(categories),
                "interfaceHints": hints,
            },
        )
        return request

    def _apply_response(self, node: Node, response: InteractionResponse) -> None:
        kind = response.output_kind()
        if kind == "labels":
            labels: dict[str, LabelRecord] = self.board.get_state(StateName.LABELS)
            for entry in response.labels:
                labels[entry["uuid"]] = LabelRecord(
                    uuid=entry["uuid"],
                    status="humanLabeled",
                    category=entry["category"],
                    free_text=entry.get("freeText"),
                )
            self.board.set_state(StateName.LABELS, labels)
        elif kind == "categories":
            self.board.set_state(StateName.CATEGORIES, list(response.categories))
        else:
            self.board.set_state(StateName.SAMPLES, list(response.samples))

    # -- non-blocking boundaries ----------------------------------------------

    def _apply_ready_completions(self) -> None:
        remaining = []
        for node_id, future, outputs in self._inflight:
            if future is not None:
                if not future.done():
                    remaining.append((node_id, future, outputs))
                    continue
                outputs = future.result()
            before = len(self.board.delta_log)
            try:
                self._write_outputs(self._nodes[node_id], outputs)
            except ImplementationError as exc:
                self.trace.record("error", node=node_id, detail=str(exc))
                continue
            deltas = tuple(
                (entry["stateName"], entry["version"])
                for entry in self.board.delta_log[before:]
            )
            self.trace.record("apply", node=node_id, deltas=deltas)
        self._inflight = remaining

        still_waiting = []
        for node_id, request_id in self._awaiting_responses:
            response = self.gateway.poll_response(request_id)
            if response is None:
                still_waiting.append((node_id, request_id))
                continue
            before = len(self.board.delta_log)
            self._apply_response(self._nodes[node_id], response)
            self.pending_requests.discard(request_id)
            deltas = tuple(
                (entry["stateName"], entry["version"])
                for entry in self.board.delta_log[before:]
            )
            self.trace.record("apply", node=node_id, deltas=deltas,
                              requests=(request_id,))
        self._awaiting_responses = still_waiting

    def _discard_late_completions(self) -> None:
        for node_id, future, _outputs in self._inflight:
            if future is not None:
                try:
                    future.result(timeout=10.0)
                except Exception:
                    pass
            self.trace.record(
                "warning", node=node_id,
                detail="non-blocking completion arrived after exit; outputs discarded",
            )
        self._inflight = []
        for node_id, request_id in self._awaiting_responses:
            self.trace.record(
                "warning", node=node_id,
                detail=f"response to {request_id} unresolved at exit; discarded",
            )
        self._awaiting_responses = []
        if self._executor is not None:
            self._executor.shutdown(wait=False)

    # -- graph navigation ------------------------------------------------------

    def _single_successor(self, node: Node) -> str:
        targets = [e.target for e in self.graph.out_edges(node.id)]
        if len(targets) != 1:
            raise ImplementationError(node.id, f"expected exactly one out-edge, "
                                               f"found {len(targets)}")
        return targets[0]

    def _branch_target(self, node: Node, branch: bool) -> str:
        for e in self.graph.out_edges(node.id):
            if e.branch is branch:
                return e.target
        raise ImplementationError(node.id, f"no {branch} branch edge")


def _content_for_client(obj: DataObject) -> dict[str, Any]:
    """Embed displayable content so clients need no separate data store."""
    if "imageBase64" in obj.display:
        return {"kind": "image", "imageBase64": obj.display["imageBase64"]}
    kind = obj.content_kind()
    if kind == "vector":
        values = obj.content["vector"]
        return {"kind": "vector", "values": values[:32], "length": len(values)}
    if kind == "text":
        return {"kind": "text", "text": obj.content["text"]}
    return {"kind": "image", "imageRef": obj.content["imageRef"]}


def run_workflow(
    graph: WorkflowGraph,
    data_objects: list[DataObject],
    gateway: Gateway,
    seed: int = 0,
    **session_kwargs: Any,
) -> Session:
    """Validate, execute to completion, and return the finished session."""
    session = Session(graph, data_objects, gateway, seed, **session_kwargs)
    session.run()
    return session
