"""Semantic analyses vs the brute-force walk-enumeration oracle.

The analyses decide walk-quantified properties by reachability and
dataflow; the oracle enumerates initialization-to-exit walks outright.
On the seeded corpus the two must agree exactly.
"""
from __future__ import annotations

import numpy as np

from graphgen import random_structured_graph
from labelflow import checker
from walk_oracle import walk_oracle

CORPUS_SEED = 2023


def _compare(graph, max_edges=None):
    report = walk_oracle(graph, max_edges=max_edges)
    assert checker.uninitialized_input_violations(graph) == report.uninitialized
    assert checker.redundant_revisit_violations(graph) == report.revisits
    assert checker.dead_output_violations(graph) == report.dead_outputs
    assert checker.labeling_bypass_exists(graph) == report.labeling_bypass
    return report


def test_oracle_equivalence_200_graphs():
    rng = np.random.Generator(np.random.PCG64(CORPUS_SEED))
    hits = 0
    for _ in range(200):
        graph = random_structured_graph(rng)
        assert len(graph.nodes) <= 8 and len(graph.edges) <= 12
        report = _compare(graph)
        if report.uninitialized or report.revisits or report.dead_outputs \
                or report.labeling_bypass:
            hits += 1
    # The corpus must actually exercise the rules.
    assert hits > 100


def test_oracle_equivalence_with_larger_bound():
    # The 2|V|-edge bound can in principle miss witnesses that need a
    # third pass around a loop; spot-check against a 4|V| oracle too.
    rng = np.random.Generator(np.random.PCG64(CORPUS_SEED + 1))
    for _ in range(50):
        graph = random_structured_graph(rng)
        _compare(graph, max_edges=4 * len(graph.nodes))


def test_templates_agree_with_oracle():
    from labelflow.templates import TEMPLATE_NAMES, instantiate_template

    for name in TEMPLATE_NAMES:
        graph = instantiate_template(name)
        report = _compare(graph)
        assert not report.uninitialized and not report.revisits
        assert not report.dead_outputs and not report.labeling_bypass
