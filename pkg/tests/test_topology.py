import itertools
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from georesilience.fixtures import fig3_graph, random50_graph
from georesilience.geometry import Point, segment_segment_distance
from georesilience.topology import (DeploymentArea, GenerationFailure, InfeasibleRequest,
                                    InvariantViolation, NetworkGraph, ParseError, UnknownNode,
                                    emit_topology, generate_random_planar,
                                    load_topology, shortest_path)

from conftest import AREA, simple_paths


def test_two_node_file():
    g = load_topology("area 10 10\nnode 0 1 1\nnode 1 5 5\nlink 0 1\n")
    assert len(g.nodes) == 2 and len(g.links) == 1
    assert g.weight(0, 1) == pytest.approx(math.hypot(4, 4))


def test_explicit_weight_and_comments():
    g = load_topology("# demo\narea 10 10\nnode 0 1 1  # a\nnode 1 5 5\nlink 1 0 2.5\n")
    assert g.weight(0, 1) == 2.5


@pytest.mark.parametrize("text,lineno", [
    ("area 10 10\nnode 0 1 1\nnode 1 5 5\nlink 0 1\nlink 1 0\n", 5),
    ("area 10 10\nnode 0 1 1\nnode 0 5 5\n", 3),
    ("area 10 10\nnode 0 1\n", 2),
    ("area 10 10\nnode 0 1 1\nlink 0 7\n", 3),
    ("area 10 10\nbogus 1\n", 2),
    ("area 10 10\nnode x 1 1\n", 2),
])
def test_parse_errors_carry_line_numbers(text, lineno):
    with pytest.raises(ParseError) as exc:
        load_topology(text)
    assert exc.value.lineno == lineno


@pytest.mark.parametrize("text", [
    "area 10 10\nnode 0 1 1\nnode 1 5 5\nnode 2 8 8\nlink 0 1\n",                  # disconnected
    "area 10 10\nnode 0 0 0\nnode 1 4 4\nnode 2 0 4\nnode 3 4 0\nlink 0 1\nlink 2 3\nlink 0 2\n",
    "area 10 10\nnode 0 1 1\nnode 1 50 5\nlink 0 1\n",                               # outside area
    "area 10 10\nnode 0 0 0\nnode 1 2 2\nnode 2 4 4\nlink 0 2\nlink 0 1\n",          # through a node
    "area 10 10\nnode 0 1 1\nnode 1 5 5\nlink 0 1 -1\n",
])
def test_invariant_violations(text):
    with pytest.raises(InvariantViolation):
        load_topology(text)


def test_round_trip_fixture_and_random():
    for g in (fig3_graph(), random50_graph()):
        assert load_topology(emit_topology(g)) == g
    g = load_topology("area 10 10\nnode 0 1 1\nnode 1 5 5\nlink 0 1 0.1\n")
    assert load_topology(emit_topology(g)) == g


def test_bundled_random50_shape():
    g = random50_graph()
    assert len(g.nodes) == 50 and len(g.links) == 120
    assert g.area == DeploymentArea(1200.0, 1200.0)


def _assert_invariants(g, n, m):
    assert len(g.nodes) == n and len(g.links) == m
    assert g.is_connected()
    assert all(g.area.contains(p) for p in g.nodes.values())
    segs = [(e, g.segment(*e)) for e in g.links]
    for (e1, s1), (e2, s2) in itertools.combinations(segs, 2):
        if not set(e1) & set(e2):
            assert segment_segment_distance(s1, s2) > 0


def test_generate_random50_paper_sizes():
    g = generate_random_planar(50, 120, AREA, 7)
    _assert_invariants(g, 50, 120)
    assert generate_random_planar(50, 120, AREA, 7) == g


def test_generate_random100_shape():
    _assert_invariants(generate_random_planar(100, 211, AREA, 3), 100, 211)


def test_generate_two_nodes():
    g = generate_random_planar(2, 1, AREA, 0)
    assert list(g.links) == [(0, 1)]


@pytest.mark.parametrize("n,m", [(1, 0), (10, 8), (10, 25), (2, 2)])
def test_generate_infeasible(n, m):
    with pytest.raises(InfeasibleRequest):
        generate_random_planar(n, m, AREA, 0)


def test_generation_failure_when_retries_exhausted():
    with pytest.raises(GenerationFailure):
        generate_random_planar(6, 12, AREA, 0, max_retries=1)


def test_generator_many_seeds():
    for seed in range(100):
        _assert_invariants(generate_random_planar(20, 35, AREA, seed), 20, 35)


def test_shortest_path_fig3():
    g = fig3_graph()
    assert shortest_path(g, 1, 3) == [1, 2, 3]
    assert shortest_path(g, 1, 1) == [1]
    with pytest.raises(UnknownNode):
        shortest_path(g, 1, 99)


def test_shortest_path_unit_weights_lexicographic_ties():
    g = fig3_graph()
    unit = {e: 1.0 for e in g.links}
    # 1-2-3 and 1-4-5-3 differ in length; 6->3 has three 3-hop routes, smallest sequence wins
    assert shortest_path(g, 1, 3, unit) == [1, 2, 3]
    assert shortest_path(g, 6, 3, unit) == [6, 1, 2, 3]


def test_shortest_path_absent_when_disconnected():
    g = fig3_graph()
    w = {e: x for e, x in g.links.items() if 3 not in e}
    assert shortest_path(g, 1, 3, w) is None


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(5, 8))
def test_shortest_path_matches_brute_force(seed, n):
    m = min(3 * n - 6, n + 3)
    g = generate_random_planar(n, m, AREA, seed)
    for s, t in itertools.combinations(g.nodes, 2):
        best = min(g.path_weight(p) for p in simple_paths(g.adj, s, t))
        p = shortest_path(g, s, t)
        assert g.path_weight(p) == pytest.approx(best)
        assert g.path_weight(shortest_path(g, t, s)) == pytest.approx(g.path_weight(p))


def test_constructor_rejects_parallel_and_self_loops():
    nodes = {0: Point(0, 0), 1: Point(1, 1)}
    with pytest.raises(InvariantViolation):
        NetworkGraph(nodes, {(0, 1): 1.0, (1, 0): 1.0}, AREA)
    with pytest.raises(InvariantViolation):
        NetworkGraph(nodes, {(0, 0): 1.0, (0, 1): 1.0}, AREA)
