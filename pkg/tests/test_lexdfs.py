import random

from hypothesis import given, settings, strategies as st

from portagent.graphs import GraphFamilySpec, from_edges, generate
from portagent.lexdfs import (
    D_BLACK, D_GREEN, D_GREY, build_dldfs_program, check_lemma1,
    oracle_lexdfs, path_to_root,
)
from portagent.runtime import Session
from portagent.tasks import atlas_connected, run_dldfs


def test_oracle_path3_rooted_mid():
    # path 0-1-2 rooted at 1: port 0 of node 1 leads to node 0
    g = generate(GraphFamilySpec("path", 3))
    res = oracle_lexdfs(g, 1)
    assert res.preorder == [1, 0, 2]
    assert res.parent == [1, -1, 1]


def test_oracle_star_visits_ports_ascending():
    g = generate(GraphFamilySpec("star", 6))
    res = oracle_lexdfs(g, 0)
    assert res.preorder == [0] + [g.nbr[0][p] for p in range(5)]


def test_oracle_tree_parent_is_tree():
    g = generate(GraphFamilySpec("random-tree", 12, None, 3))
    res = oracle_lexdfs(g, 0)
    for v in range(1, 12):
        assert res.parent[v] in g.nbr[v]


def test_dldfs_single_node():
    g = generate(GraphFamilySpec("path", 1))
    tr, visits = run_dldfs(g)
    assert visits == [0]
    assert tr.moves == 0 and tr.halted


def test_dldfs_triangle():
    g = generate(GraphFamilySpec("complete", 3))
    _, visits = run_dldfs(g)
    assert visits == [0, 1, 2]


def test_dldfs_matches_oracle_on_atlas():
    for g in atlas_connected(1, 5):
        _, visits = run_dldfs(g)
        assert visits == oracle_lexdfs(g, 0).preorder


def test_dldfs_other_roots():
    g = generate(GraphFamilySpec("random-connected", 9, 4, 41))
    for root in range(g.n):
        _, visits = run_dldfs(g, start=root)
        assert visits == oracle_lexdfs(g, root).preorder


@given(st.integers(min_value=1, max_value=24),
       st.integers(min_value=0, max_value=10 ** 6))
@settings(max_examples=30, deadline=None)
def test_dldfs_matches_oracle_random(n, seed):
    g = generate(GraphFamilySpec("random-connected", n, 5, seed))
    _, visits = run_dldfs(g)
    assert visits == oracle_lexdfs(g, 0).preorder


def test_grey_set_is_always_the_head_path():
    g = generate(GraphFamilySpec("random-connected", 8, 4, 23))
    built = build_dldfs_program()
    res = oracle_lexdfs(g, 0)
    col = built.dfs_base
    sess = Session(g, built.program.schema)

    depth = {}
    for v in res.preorder:
        depth[v] = 0 if v == 0 else depth[res.parent[v]] + 1

    def hook(k, node, pin, state):
        greys = {v for v in range(g.n)
                 if sess.storage[v][col] in (D_GREY, D_GREEN)}
        if not greys:
            return
        head = max(greys, key=lambda v: depth[v])
        assert greys == set(path_to_root(res.parent, head, 0))

    sess.run(built.program, start=0, step_hook=hook, step_limit=10 ** 7)


def test_reset_restores_all_white_and_is_involutive():
    g = generate(GraphFamilySpec("random-connected", 10, 4, 31))
    built = build_dldfs_program()
    sess = Session(g, built.program.schema)
    sess.run(built.program, start=0, step_limit=10 ** 7)
    assert all(sess.storage[v][built.dfs_base] == D_BLACK
               for v in range(g.n))
    sess.run(built.program, entry="reset", step_limit=10 ** 7)
    assert all(all(x == 0 for x in row) for row in sess.storage)
    # a second full run plus reset is the identity again
    sess.run(built.program, start=0, step_limit=10 ** 7)
    sess.run(built.program, entry="reset", step_limit=10 ** 7)
    assert all(all(x == 0 for x in row) for row in sess.storage)


def test_lemma1_holds_on_atlas():
    for g in atlas_connected(2, 5):
        assert check_lemma1(g, 0) == []


def test_lemma1_negative_control():
    # on K4 the path 0 -> 2 -> 1 visits port 1 from the root while the
    # later path node 1 sits behind port 0: a definite violation
    g = generate(GraphFamilySpec("complete", 4))
    bad_parent = [-1, 2, 0, 2]
    assert check_lemma1(g, 0, parent_override=bad_parent) != []


def test_move_counts_polynomial_slope():
    import math
    pts = []
    for n in (8, 16, 32, 64):
        g = generate(GraphFamilySpec("path", n))
        tr, _ = run_dldfs(g)
        pts.append((math.log(n), math.log(tr.moves)))
    slope = (pts[-1][1] - pts[0][1]) / (pts[-1][0] - pts[0][0])
    assert slope <= 5
