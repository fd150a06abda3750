import pytest
from hypothesis import given, settings, strategies as st

from portagent.graphs import (
    GraphFamilySpec, GraphFormatError, InfeasibleSpec, dumps, from_edges,
    generate, loads, permute_ports, validate,
)


def k2():
    return from_edges(2, [(0, 0, 1, 0)])


def test_k2_is_valid():
    assert validate(k2()).ok


def test_self_loop_rejected():
    g = from_edges(2, [(0, 0, 1, 0), (0, 1, 0, 2)])
    rep = validate(g)
    assert not rep.ok
    assert any("self-loop at node 0" in v for v in rep.violations)


def test_disconnected_rejected():
    g = from_edges(4, [(0, 0, 1, 0), (2, 0, 3, 0)])
    rep = validate(g)
    assert not rep.ok
    assert any("disconnected" in v for v in rep.violations)


def test_canonical_path_ports():
    g = generate(GraphFamilySpec("path", 3))
    assert g.port_to(0, 1) == 0
    assert g.port_to(1, 0) == 0
    assert g.port_to(1, 2) == 1
    assert g.port_to(2, 1) == 0


def test_canonical_complete_ports():
    g = generate(GraphFamilySpec("complete", 3))
    for v in range(3):
        nbrs = sorted(u for u in range(3) if u != v)
        for p, u in enumerate(nbrs):
            assert g.port_to(v, u) == p


def test_random_family_deterministic():
    a = generate(GraphFamilySpec("random-connected", 20, 4, 7))
    b = generate(GraphFamilySpec("random-connected", 20, 4, 7))
    assert a == b
    assert validate(a).ok
    assert all(g_deg <= 4 for g_deg in (a.degree(v) for v in range(a.n)))


def test_single_node_allowed():
    g = generate(GraphFamilySpec("path", 1))
    assert g.n == 1 and g.degree(0) == 0
    assert validate(g).ok


def test_infeasible_specs():
    with pytest.raises(InfeasibleSpec):
        generate(GraphFamilySpec("cycle", 2))
    with pytest.raises(InfeasibleSpec):
        generate(GraphFamilySpec("random-connected", 10, 1, 3))
    with pytest.raises(InfeasibleSpec):
        generate(GraphFamilySpec("random-tree", 5))  # missing seed


def test_pg_round_trip():
    g = generate(GraphFamilySpec("random-connected", 15, 5, 11))
    assert loads(dumps(g)) == g


def test_pg_round_trip_is_canonical():
    g = k2()
    assert dumps(loads(dumps(g))) == dumps(g)


def test_pg_rejects_duplicate_port():
    text = "pg 1\n3 2\n0 0 1 0\n0 0 2 0\n"
    with pytest.raises(GraphFormatError, match="duplicate port"):
        loads(text)


def test_pg_rejects_bad_header():
    with pytest.raises(GraphFormatError, match="header"):
        loads("pg 2\n1 0\n")


def test_pg_rejects_port_gap():
    # node 0 uses ports 0 and 2: not a bijection onto 0..deg-1
    text = "pg 1\n3 2\n0 0 1 0\n0 2 2 0\n"
    with pytest.raises(GraphFormatError):
        loads(text)


def test_pg_rejects_disconnected():
    text = "pg 1\n4 2\n0 0 1 0\n2 0 3 0\n"
    with pytest.raises(GraphFormatError, match="disconnected"):
        loads(text)


def test_permute_ports_keeps_graph():
    g = generate(GraphFamilySpec("random-connected", 12, 4, 5))
    h = permute_ports(g, 99)
    assert validate(h).ok
    assert {frozenset((u, v)) for u in range(g.n) for v in g.nbr[u]} == \
        {frozenset((u, v)) for u in range(h.n) for v in h.nbr[u]}


@given(st.sampled_from(["path", "cycle", "star", "complete", "random-tree",
                        "random-connected"]),
       st.integers(min_value=1, max_value=24),
       st.integers(min_value=0, max_value=2 ** 20))
@settings(max_examples=60, deadline=None)
def test_generated_graphs_always_validate(family, n, seed):
    if family == "cycle" and n < 3:
        n = 3
    cap = 4 if family == "random-connected" else None
    g = generate(GraphFamilySpec(family, n, cap, seed))
    assert validate(g).ok
    # port symmetry, exhaustively
    for v in range(g.n):
        assert sorted(range(g.degree(v))) == list(range(g.degree(v)))
        for p in range(g.degree(v)):
            u, q = g.step(v, p)
            assert g.step(u, q) == (v, p)
    assert loads(dumps(g)) == g
