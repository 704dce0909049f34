"""Engine semantics: runs, stepping, determinism, non-blocking boundaries."""
from __future__ import annotations

import numpy as np
import pytest

from labelflow.blackboard import DataObject, snapshot_to_json, replay_deltas, Blackboard
from labelflow.engine import (
    ImplementationError,
    InvalidWorkflow,
    IterationGuardExceeded,
    Session,
    UnknownNode,
    evaluate_decision,
    run_workflow,
)
from labelflow.gateway import Gateway
from labelflow.model import WorkflowGraph
from labelflow.oracles import OracleAnnotator
from labelflow.states import StateName
from labelflow.templates import instantiate_template
from checker_fixtures import fixture_no_self_loops


def make_objects(n, dims=3, seed=0):
    rng = np.random.Generator(np.random.PCG64(seed))
    return [
        DataObject(uuid=f"obj-{i:04d}",
                   content={"vector": [float(v) for v in rng.normal(size=dims)]})
        for i in range(n)
    ]


def truth_for(objects, categories=("a", "b")):
    return {o.uuid: categories[i % len(categories)] for i, o in enumerate(objects)}


def oracle_session(graph, objects, truth, seed=0, **kwargs) -> Session:
    graph.categories_config = sorted(set(truth.values()))
    gateway = Gateway()
    gateway.auto_responder = OracleAnnotator(truth)
    return Session(graph, objects, gateway, seed, **kwargs)


class TestRun:
    def test_minimal_run_labels_everything(self):
        objects = make_objects(40)
        truth = truth_for(objects)
        graph = instantiate_template("minimal-labeling", {"batchSize": 16})
        session = oracle_session(graph, objects, truth, seed=3)
        session.run()
        assert session.status == "finished"
        labels = session.board.get_state(StateName.LABELS)
        assert all(rec.status == "humanLabeled" for rec in labels.values())
        assert all(rec.category == truth[u] for u, rec in labels.items())
        # 40 objects / batch 16 -> 3 labeling interactions
        requests = [e for e in session.trace.entries if e.requests]
        assert len(requests) == 3

    def test_invalid_workflow_refused_before_execution(self):
        graph = fixture_no_self_loops()
        with pytest.raises(InvalidWorkflow):
            Session(graph, make_objects(4), Gateway(), 0)

    def test_deterministic_traces(self):
        objects = make_objects(40)
        truth = truth_for(objects)
        traces = []
        for _ in range(2):
            graph = instantiate_template("minimal-labeling", {"batchSize": 16})
            session = oracle_session(graph, objects, truth, seed=11)
            session.run()
            traces.append(session.trace.to_jsonl())
        assert traces[0] == traces[1]

    def test_iteration_guard(self):
        objects = make_objects(6)
        truth = truth_for(objects)
        graph = instantiate_template("minimal-labeling", {"batchSize": 2})
        # An oracle that never finishes: answer with ground truth but the
        # stoppage sees unlabeled objects forever because the guard is tiny.
        session = oracle_session(graph, objects, truth, seed=0, iteration_guard=5)
        with pytest.raises(IterationGuardExceeded):
            session.run()
        assert session.status == "failed"
        assert any(e.mark == "error" for e in session.trace.entries)

    def test_trace_board_consistency(self):
        objects = make_objects(24)
        truth = truth_for(objects)
        graph = instantiate_template("minimal-labeling", {"batchSize": 8})
        session = oracle_session(graph, objects, truth, seed=5)
        session.run()
        replayed = replay_deltas(Blackboard().snapshot(), session.board.delta_log)
        assert snapshot_to_json(replayed) == snapshot_to_json(session.board.snapshot())
        # trace deltas mirror the delta log exactly, in order
        trace_deltas = [d for e in session.trace.entries for d in e.deltas]
        log_deltas = [(d["stateName"], d["version"]) for d in session.board.delta_log]
        assert trace_deltas == log_deltas

    def test_input_versions_positive_at_every_execution(self):
        objects = make_objects(24)
        truth = truth_for(objects)
        graph = instantiate_template("mixed-initiative-classification",
                                     {"batchSize": 8, "clusterCount": 3,
                                      "components": 2})
        session = oracle_session(graph, objects, truth, seed=5)
        node_inputs = {n.id: n.inputs for n in graph.nodes}
        while session.status not in ("finished", "failed"):
            at = session.cursor
            versions = dict(session.board.versions)
            session.step()
            for state in node_inputs.get(at, ()):  # inputs seen by the node
                assert versions[state] >= 1 or at == "initialization"

    def test_run_workflow_convenience(self):
        objects = make_objects(8)
        truth = truth_for(objects)
        graph = instantiate_template("minimal-labeling", {"batchSize": 8})
        graph.categories_config = sorted(set(truth.values()))
        gateway = Gateway()
        gateway.auto_responder = OracleAnnotator(truth)
        session = run_workflow(graph, objects, gateway, seed=1)
        assert session.status == "finished"


class TestStep:
    def test_initialization_writes_exactly_init_outputs(self):
        objects = make_objects(5)
        truth = truth_for(objects)
        graph = instantiate_template("minimal-labeling")
        session = oracle_session(graph, objects, truth)
        result = session.step()
        written = {state for state, _ in result.deltas}
        declared = {s.value for s in graph.node("initialization").init_outputs}
        assert written == declared

    def test_decision_follows_false_branch(self):
        objects = make_objects(6)
        truth = truth_for(objects)
        graph = instantiate_template("minimal-labeling", {"batchSize": 2})
        session = oracle_session(graph, objects, truth)
        result = session.step()
        while result.node_id != "stop":
            result = session.step()
        # first pass: only 2 of 6 labeled -> stop is false -> loop back
        assert result.next_cursor == "sampling"

    def test_step_concatenation_equals_run(self):
        objects = make_objects(20)
        truth = truth_for(objects)

        graph1 = instantiate_template("minimal-labeling", {"batchSize": 8})
        stepped = oracle_session(graph1, objects, truth, seed=9)
        while stepped.status not in ("finished", "failed"):
            stepped.step()

        graph2 = instantiate_template("minimal-labeling", {"batchSize": 8})
        ran = oracle_session(graph2, objects, truth, seed=9)
        ran.run()

        assert stepped.trace.to_jsonl() == ran.trace.to_jsonl()


class TestSetEntry:
    def test_jump_to_exit_finishes_immediately(self):
        objects = make_objects(4)
        truth = truth_for(objects)
        graph = instantiate_template("minimal-labeling")
        session = oracle_session(graph, objects, truth)
        session.set_entry("exit")
        session.step()
        assert session.status == "finished"

    def test_unknown_node(self):
        objects = make_objects(4)
        graph = instantiate_template("minimal-labeling")
        graph.categories_config = ["a"]
        session = Session(graph, objects, Gateway(), 0)
        with pytest.raises(UnknownNode):
            session.set_entry("nowhere")

    def test_uninitialized_read_fails_with_state_name(self):
        objects = make_objects(4)
        truth = truth_for(objects)
        graph = instantiate_template("minimal-labeling")
        session = oracle_session(graph, objects, truth)
        session.set_entry("sampling")  # dataObjects/labels never initialized
        with pytest.raises(ImplementationError, match="dataObjects"):
            session.step()

    def test_warning_recorded(self):
        objects = make_objects(4)
        truth = truth_for(objects)
        graph = instantiate_template("minimal-labeling")
        session = oracle_session(graph, objects, truth)
        session.set_entry("labeling")
        assert any(e.mark == "warning" for e in session.trace.entries)


class TestDecisionPredicate:
    def test_stop_value_decides(self):
        board = Blackboard()
        assert evaluate_decision(board, "stopIsTrue") is False
        board.set_state(StateName.STOP, True)
        assert evaluate_decision(board, "stopIsTrue") is True

    def test_composition_with_stoppage(self):
        from labelflow.blackboard import LabelRecord
        from labelflow.builtins.defaults import stoppage_all_labeled

        objects = make_objects(3)
        board = Blackboard()
        board.set_state(StateName.DATA_OBJECTS, objects)
        board.set_state(StateName.CATEGORIES, ["a"])
        board.set_state(StateName.LABELS, {
            o.uuid: LabelRecord(uuid=o.uuid, status="humanLabeled", category="a")
            for o in objects
        })
        board.set_state(StateName.STOP, stoppage_all_labeled(
            board.get_state(StateName.DATA_OBJECTS), board.get_state(StateName.LABELS)))
        assert evaluate_decision(board, "stopIsTrue") is True


class TestNonBlocking:
    def test_completion_applies_at_next_boundary(self):
        objects = make_objects(6)
        truth = truth_for(objects)
        graph = instantiate_template("minimal-labeling", {"batchSize": 6})
        session = oracle_session(graph, objects, truth)
        session.step()  # initialization
        before = session.board.versions[StateName.STOP]
        session.handle_nonblocking_completion("stoppage", {StateName.STOP: False})
        # not applied until the next boundary
        assert session.board.versions[StateName.STOP] == before
        session.step()  # sampling; boundary drain applies the completion first
        assert session.board.versions[StateName.STOP] == before + 1
        applies = [e for e in session.trace.entries if e.mark == "apply"]
        assert applies and applies[0].node == "stoppage"

    def test_completion_after_exit_discarded_with_warning(self):
        objects = make_objects(4)
        truth = truth_for(objects)
        graph = instantiate_template("minimal-labeling", {"batchSize": 4})
        session = oracle_session(graph, objects, truth)
        session.run()
        assert session.status == "finished"
        before = session.board.versions[StateName.STOP]
        session.handle_nonblocking_completion("stoppage", {StateName.STOP: True})
        assert session.board.versions[StateName.STOP] == before
        assert any(e.mark == "warning" and "discarded" in (e.detail or "")
                   for e in session.trace.entries)

    def test_completion_before_exit_applies_at_the_exit_boundary(self):
        objects = make_objects(4)
        truth = truth_for(objects)
        graph = instantiate_template("minimal-labeling", {"batchSize": 4})
        session = oracle_session(graph, objects, truth)
        while session.cursor != "exit":
            session.step()
        session.handle_nonblocking_completion("stoppage", {StateName.STOP: True})
        before = session.board.versions[StateName.STOP]
        session.step()  # boundary before exit is still a node boundary
        assert session.status == "finished"
        assert session.board.versions[StateName.STOP] == before + 1

    def test_blocking_runs_produce_no_apply_entries(self):
        objects = make_objects(12)
        truth = truth_for(objects)
        for name in ("minimal-labeling", "mixed-initiative-classification"):
            graph = instantiate_template(
                name, {"batchSize": 4, "components": 2, "clusterCount": 2}
                if name != "minimal-labeling" else {"batchSize": 4})
            session = oracle_session(graph, objects, truth, seed=2)
            session.run()
            assert not [e for e in session.trace.entries if e.mark == "apply"]

    def test_nonblocking_trainer_thread_applies_eventually(self):
        # Mark the trainer non-blocking; its model write must appear in an
        # `apply` entry at some node boundary, never inside another node.
        objects = make_objects(24)
        truth = truth_for(objects)
        graph = instantiate_template("mixed-initiative-classification",
                                     {"batchSize": 8, "clusterCount": 2,
                                      "components": 2})
        from labelflow.model import process_node
        nodes = [
            process_node(n.id, n.function, n.implementation, n.inputs, label=n.label,
                         config=n.config, blocking=False, persistent=n.persistent)
            if n.id == "training" else n
            for n in graph.nodes
        ]
        graph = WorkflowGraph(nodes=nodes, edges=graph.edges,
                              categories_config=graph.categories_config)
        session = oracle_session(graph, objects, truth, seed=4)
        session.run()
        assert session.status == "finished"
        training_entries = [e for e in session.trace.entries
                            if e.node == "training" and e.mark == "end"]
        assert all(e.deltas == () for e in training_entries)
        applied = [e for e in session.trace.entries
                   if e.mark in ("apply", "warning") and e.node == "training"]
        assert applied


class TestPersistentPanels:
    def test_one_registration_one_activation_per_visit(self):
        objects = make_objects(12)
        truth = truth_for(objects)
        graph = instantiate_template("mixed-initiative-classification",
                                     {"batchSize": 4, "clusterCount": 2,
                                      "components": 2})
        session = oracle_session(graph, objects, truth, seed=8)
        session.run()
        gateway = session.gateway
        panels = gateway.list_panels()
        assert len(panels) == 1 and panels[0].node_id == "labeling"
        visits = [e for e in session.trace.entries
                  if e.node == "labeling" and e.mark == "end"]
        activations = [e for e in visits if e.requests]
        assert len(activations) == len(visits) == 3  # 12 objects / batch 4
