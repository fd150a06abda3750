import pytest
from hypothesis import given, settings, strategies as st

from portagent.drivers import OpError, RPathDriver
from portagent.graphs import GraphFamilySpec, from_edges, generate
from portagent.rpath import (
    BLUE, DIR_BGT, DIR_BLT, RED, RPATH_FIELDS, ShadowPath, check_consistency,
)
from portagent.tasks import fuzz_rpath


def k2():
    return from_edges(2, [(0, 0, 1, 0)])


def strong(d, idx, target):
    return check_consistency(d.graph, d.session.storage, d.ns_base(idx),
                             d.sources[idx], target)


def test_instance_costs_five_bits():
    assert sum(w for _, w in RPATH_FIELDS) == 5


def test_init_base_case():
    d = RPathDriver(k2(), instances=1)
    d.init(0, 0)
    assert d.inpath_nodes(0) == {0}
    assert d.target_of(0) == 0
    assert all(v == 0 for v in d.session.storage[1])
    rep = strong(d, 0, 0)
    assert rep.strong and not rep.violations


def test_double_init_rejected():
    d = RPathDriver(k2(), instances=1)
    d.init(0, 0)
    with pytest.raises(OpError):
        d.init(0, 0)


def test_move_to_top_after_init_stays():
    d = RPathDriver(k2(), instances=1)
    d.init(0, 0)
    d.move_to_top(0)
    assert d.node == 0


def test_extend_by_one_edge():
    d = RPathDriver(k2(), instances=1)
    d.init(0, 0)
    d.modify_move(0, 1)
    assert d.inpath_nodes(0) == {0, 1}
    assert d.target_of(0) == 1
    assert d.node == 1
    assert strong(d, 0, 1).strong


def test_shortcut_drops_tail_edge():
    g = generate(GraphFamilySpec("path", 3))
    d = RPathDriver(g, instances=1)
    d.init(0, 0)
    d.modify_move(0, 1)
    d.modify_move(0, 2)
    assert d.inpath_nodes(0) == {0, 1, 2}
    d.modify_move(0, 1)          # new target already on the path
    assert d.inpath_nodes(0) == {0, 1}
    assert d.target_of(0) == 1
    assert strong(d, 0, 1).strong


def test_triangle_branching_node_is_source():
    g = generate(GraphFamilySpec("complete", 3))
    d = RPathDriver(g, instances=1)
    d.init(0, 0)
    d.modify_move(0, 1)
    d.modify_move(0, 2)          # 2 adjacent to 0: re-anchor at the source
    assert d.inpath_nodes(0) == {0, 2}
    assert d.target_of(0) == 2
    assert strong(d, 0, 2).strong


def test_move_one_hop_and_move_target():
    g = generate(GraphFamilySpec("path", 4))
    d = RPathDriver(g, instances=1)
    d.init(0, 0)
    for v in (1, 2, 3):
        d.modify_move(0, v)
    d.move_to_top(0)
    assert d.node == 0
    d.move_one_hop_forward(0)
    assert d.node == 1
    d.move_target(0)
    assert d.node == 3
    d.move_target(0)             # already there: no-op
    assert d.node == 3
    with pytest.raises(OpError):
        d.move_one_hop_forward(0)


def test_delete_examples():
    g = generate(GraphFamilySpec("path", 3))
    d = RPathDriver(g, instances=1)
    d.init(0, 0)
    d.delete(0)                  # length-0 path: no-op
    assert d.inpath_nodes(0) == {0}
    d.modify_move(0, 1)
    d.modify_move(0, 2)
    d.delete(0)
    assert d.inpath_nodes(0) == {0}
    assert d.target_of(0) == 0
    assert d.node == 0
    # post-state equals a fresh init
    base = d.ns_base(0)
    fresh = RPathDriver(g, instances=1)
    fresh.init(0, 0)
    assert [r[base:base + 4] for r in d.session.storage] == \
        [r[fresh.ns_base(0):fresh.ns_base(0) + 4]
         for r in fresh.session.storage]


def test_copy_examples():
    g = generate(GraphFamilySpec("complete", 4))
    d = RPathDriver(g, instances=2)
    d.init(0, 0)
    d.init(1, 0)
    d.copy(0, 1)                 # single-node path
    assert d.inpath_nodes(1) == {0}
    d.modify_move(0, 1)
    d.modify_move(0, 2)
    d.move_target(0)
    d.copy(0, 1)
    assert d.inpath_nodes(1) == d.inpath_nodes(0)
    assert d.target_of(1) == d.target_of(0)
    assert d.node == d.target_of(0)
    assert strong(d, 1, d.target_of(1)).strong


def test_consistency_rejects_cycle():
    g = generate(GraphFamilySpec("complete", 3))
    d = RPathDriver(g, instances=1)
    d.init(0, 0)
    base = d.ns_base(0)
    for v in range(3):
        d.session.storage[v][base + 1] = 1      # inPath on a triangle
    rep = check_consistency(g, d.session.storage, base, 0, 0)
    assert not rep.strong
    assert any("cycle" in v or "path" in v for v in rep.violations)


def test_consistency_rejects_bad_direction():
    g = generate(GraphFamilySpec("path", 4))
    d = RPathDriver(g, instances=1)
    d.init(0, 0)
    for v in (1, 2, 3):
        d.modify_move(0, v)
    base = d.ns_base(0)
    rep = check_consistency(g, d.session.storage, base, 0, 3)
    assert rep.strong
    d.session.storage[1][base + 2] ^= 1          # flip an interior direction
    rep = check_consistency(g, d.session.storage, base, 0, 3)
    assert not rep.strong
    assert any("direction" in v for v in rep.violations)


def test_branching_direction_update_matches_ports():
    """After re-anchoring, the branching node's direction bit must compare
    the ports of its two new path neighbors."""
    g = generate(GraphFamilySpec("complete", 4))
    d = RPathDriver(g, instances=1)
    d.init(0, 0)
    d.modify_move(0, 1)
    d.modify_move(0, 2)
    d.modify_move(0, 3)          # path re-anchors; 3 adjacent to everything
    rep = strong(d, 0, 3)
    assert rep.strong, rep.violations


def test_midop_fragments_stay_consistent():
    """Conditions 2-3 hold at every activation during a full retarget."""
    g = generate(GraphFamilySpec("random-connected", 9, 4, 17))
    d = RPathDriver(g, instances=1)
    d.init(0, 0)
    sh = ShadowPath(g, 0)
    import random
    rng = random.Random(5)
    for _ in range(6):
        d.move_target(0)
        t2 = rng.choice(list(g.nbr[sh.target]))
        d.modify_move(0, t2)
        sh.modify_move(t2)

    base = d.ns_base(0)
    seen = []

    def hook(k, node, pin, state):
        rep = check_consistency(g, d.session.storage, base, 0, sh.target,
                                require_target_flag=False)
        seen.append(1)
        assert rep.consistent, rep.violations

    d.move_target(0)
    t2 = rng.choice([v for v in g.nbr[sh.target] if v not in sh.nodes]
                    or list(g.nbr[sh.target]))
    port = g.port_to(sh.target, t2)
    d._bounce(port)
    tr = d.session.run(d.program, entry="rp_mm",
                       args={"ns": d.instances[0]}, step_hook=hook,
                       step_limit=10 ** 6)
    assert seen, "hook must observe activations"


def test_fuzz_small_graphs():
    graphs = [generate(GraphFamilySpec("complete", 4)),
              generate(GraphFamilySpec("cycle", 5)),
              generate(GraphFamilySpec("random-connected", 10, 4, 3))]
    rep = fuzz_rpath(graphs, seed=7, sequences_per_graph=15,
                     ops_per_sequence=7)
    assert rep.ok, rep.failures[:3]
    assert rep.colorings > 0


@given(st.integers(min_value=3, max_value=9),
       st.integers(min_value=0, max_value=10 ** 6))
@settings(max_examples=12, deadline=None)
def test_fuzz_hypothesis(n, seed):
    g = generate(GraphFamilySpec("random-connected", n, None, seed))
    rep = fuzz_rpath([g], seed=seed, sequences_per_graph=2,
                     ops_per_sequence=5, include_succpred=False)
    assert rep.ok, rep.failures[:3]
