import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from georesilience.backup_routes import (InvalidRange, all_pairs, emit_plans,
                                         generate_backup_routes, load_plans, penalty_weight,
                                         plan_all_pairs, radius_schedule)
from georesilience.fixtures import fig3_backups, fig3_graph
from georesilience.geometry import VulnerableZone, zones_intersect
from georesilience.mrc import InfeasibleK, LinkState, generate_backup_topologies
from georesilience.topology import UnknownNode, link_key, shortest_path

from conftest import random_biconnected, simple_paths


def test_schedule_examples():
    assert radius_schedule(50, 150, 6).values == pytest.approx((50, 70, 90, 110, 130, 150))
    assert radius_schedule(100, 100, 4).values == (100.0,) * 4
    assert radius_schedule(50, 150, 2).values == (50.0, 150.0)
    assert radius_schedule(50, 150, 1).values == (50.0,)


@pytest.mark.parametrize("a,b,k", [(0, 10, 3), (20, 10, 3), (10, 20, 0), (-1, 5, 2)])
def test_schedule_invalid(a, b, k):
    with pytest.raises(InvalidRange):
        radius_schedule(a, b, k)


@given(st.floats(1, 500), st.floats(0, 500), st.integers(2, 20))
def test_schedule_properties(a, span, k):
    v = radius_schedule(a, a + span, k).values
    assert v[0] == a and v[-1] == pytest.approx(a + span)
    assert all(x <= y + 1e-9 for x, y in zip(v, v[1:]))


def test_fig3_region_disjoint_g3_backup():
    g, b = fig3_graph(), fig3_backups()
    sched = radius_schedule(50, 150, 3)
    plan = generate_backup_routes(g, b, 6, 3, sched)
    assert plan.primary == (6, 7, 5, 3)
    assert plan.path(3) == (6, 1, 2, 3)
    plain = generate_backup_routes(g, b, 6, 3, sched, penalize=False)
    assert plain.path(3) == (6, 7, 5, 3)


def test_fig3_g1_reroute_of_1_to_3():
    g, b = fig3_graph(), fig3_backups()
    plan = generate_backup_routes(g, b, 1, 3, radius_schedule(50, 150, 3), penalize=False)
    assert plan.primary == (1, 2, 3)
    assert plan.path(1) == (1, 4, 7, 8, 3)


def test_tiny_radius_equals_plain_mrc():
    g = random_biconnected(20, 40, 3)
    bts = generate_backup_topologies(g, 4)
    tiny = radius_schedule(1e-6, 1e-6, 4)
    pen = plan_all_pairs(g, bts, tiny)
    plain = plan_all_pairs(g, bts, None, penalize=False)
    # links sharing a node always touch, so only non-adjacent links could differ
    for d in pen:
        for i in range(1, 5):
            p, q = pen[d].path(i), plain[d].path(i)
            if p != q:
                hops = {link_key(a, b) for a, b in zip(q, q[1:])}
                prim_nodes = set(pen[d].primary)
                assert any(set(e) & prim_nodes for e in hops)


def test_errors():
    g, b = fig3_graph(), fig3_backups()
    sched = radius_schedule(50, 150, 3)
    with pytest.raises(UnknownNode):
        generate_backup_routes(g, b, 1, 42, sched)
    with pytest.raises(ValueError):
        generate_backup_routes(g, b, 1, 1, sched)


def _usable(bts, i):
    return lambda a, b: bts[i].state(a, b) is not LinkState.ISOLATED


def _penalised_set(g, bts, i, primary, r):
    pz = VulnerableZone.of_path([g.nodes[u] for u in primary], r)
    return {e for e in g.links if bts[i].state(*e) is LinkState.NORMAL
            and zones_intersect(VulnerableZone.of_link(g.segment(*e), r), pz)}


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 5000))
def test_penalised_links_only_without_disjoint_alternative(seed):
    # restricted hops outrank penalties, so the comparison is among the
    # usable paths with the fewest restricted hops
    g = random_biconnected(8, 13, seed)
    try:
        bts = generate_backup_topologies(g, 4)
    except InfeasibleK:
        assume(False)
    sched = radius_schedule(40, 160, 4)
    for s, t in all_pairs(g):
        plan = generate_backup_routes(g, bts, s, t, sched)
        for i in range(1, 5):
            pen = _penalised_set(g, bts, i, plan.primary, sched.values[i - 1])

            def n_pen(p):
                return len({link_key(a, b) for a, b in zip(p, p[1:])} & pen)

            def n_res(p):
                return sum(bts[i].state(a, b) is LinkState.RESTRICTED for a, b in zip(p, p[1:]))

            paths = simple_paths(g.adj, s, t, _usable(bts, i))
            fewest = min(map(n_res, paths))
            y = plan.path(i)
            assert n_res(y) == fewest
            if any(n_pen(p) == 0 for p in paths if n_res(p) == fewest):
                assert n_pen(y) == 0


def test_plan_invariants_fig3_and_random():
    cases = [(fig3_graph(), fig3_backups())]
    for seed in range(20):
        g = random_biconnected(30, 65, seed)
        cases.append((g, generate_backup_topologies(g, 5)))
    for g, bts in cases:
        plans = plan_all_pairs(g, bts, radius_schedule(50, 150, bts.k))
        for (s, t), plan in plans.items():
            assert g.path_weight(plan.primary) == pytest.approx(
                g.path_weight(shortest_path(g, s, t)))
            for i in range(1, bts.k + 1):
                p = plan.path(i)
                assert p[0] == s and p[-1] == t and len(set(p)) == len(p)
                assert all(bts[i].state(a, b) is not LinkState.ISOLATED
                           for a, b in zip(p, p[1:]))


def test_vectorised_matches_scalar():
    g = random_biconnected(20, 40, 8)
    bts = generate_backup_topologies(g, 4)
    sched = radius_schedule(50, 150, 4)
    plans = plan_all_pairs(g, bts, sched)
    for s, t in all_pairs(g)[::7]:
        assert generate_backup_routes(g, bts, s, t, sched) == plans[(s, t)]
    plain = plan_all_pairs(g, bts, sched, penalize=False)
    for s, t in all_pairs(g)[::11]:
        assert generate_backup_routes(g, bts, s, t, sched, penalize=False) == plain[(s, t)]


def test_penalty_dominates_any_simple_path():
    g = random_biconnected(20, 40, 1)
    assert penalty_weight(g, 3) > sum(g.links.values())


def test_plans_text_round_trip():
    g, b = fig3_graph(), fig3_backups()
    plans = plan_all_pairs(g, b, radius_schedule(50, 150, 3))
    assert load_plans(emit_plans(plans), 3) == plans
    with pytest.raises(ValueError):
        load_plans("path 1 2 0 1 2\n", 3)
