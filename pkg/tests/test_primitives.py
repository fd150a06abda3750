import random

from hypothesis import given, settings, strategies as st

from portagent.graphs import GraphFamilySpec, from_edges, generate
from portagent.primitives import (
    G_FLAG, SearchOrder, call_ff, call_mark_pred, install_primitives,
)
from portagent.programs import (
    M_ABS, OP_RET, Proc, StackProgram, StorageSchema,
)
from portagent.runtime import Session
from portagent.drivers import bounce_program


def make_probe_program():
    """One marker bit per node; entry procs run one find_first/mark_pred."""
    schema = StorageSchema()
    mark = schema.add_field("m", 1)
    prog = StackProgram("probe", schema, {G_FLAG: 1})
    install_primitives(prog)
    prog.add_pred("marked", lambda row, b: row[0] == 1)
    wid = prog.add_winstr("setmark", [(M_ABS, 0, 1)])
    wid2 = prog.add_winstr("clearmark", [(M_ABS, 0, 0)])

    for order in SearchOrder:
        p = Proc(f"ff_{order.name}", regs={})
        call_ff(p, order, 0, 0)
        p.emit(OP_RET)
        prog.add_proc(p)
    p = Proc("mark", regs={})
    call_mark_pred(p, wid, 0)
    p.emit(OP_RET)
    prog.add_proc(p)
    p = Proc("unmark", regs={})
    call_mark_pred(p, wid2, 0)
    p.emit(OP_RET)
    prog.add_proc(p)
    prog.seal("ff_HEAD_ASCEND")
    return prog


def brute_force(g, u, marked, order, pin):
    deg = g.degree(u)
    if order is SearchOrder.HEAD_ASCEND:
        ports = range(deg)
    elif order is SearchOrder.TAIL_DESCEND:
        ports = range(deg - 1, -1, -1)
    elif order is SearchOrder.MIDDLE_ASCEND:
        ports = range(pin + 1, deg)
    else:
        ports = range(pin - 1, -1, -1)
    for p in ports:
        if g.nbr[u][p] in marked:
            return p
    return None


def drive_ff(g, u, marked, order, pin):
    prog = make_probe_program()
    sess = Session(g, prog.schema)
    for v in marked:
        sess.set_field(v, "m", 1)
    sess.node = u
    sess.pin = -1
    if pin is not None:
        sess.run(bounce_program(prog.schema, pin), step_limit=8)
        assert sess.pin == pin
    before = sess.snapshot()
    tr = sess.run(prog, entry=f"ff_{order.name}", step_limit=10 ** 5)
    flag = tr.final_state[0][prog.gidx(G_FLAG)]
    assert sess.snapshot() == before, "probing must not touch storage"
    assert tr.moves <= 2 * g.degree(u), "probe cost bound"
    assert sess.node == u, "probe must return to its start node"
    return (sess.pin if flag else None)


def test_triangle_head_ascend_example():
    g = generate(GraphFamilySpec("complete", 3))
    # marker only at node 1, which sits behind port 0 of node 0
    assert drive_ff(g, 0, {1}, SearchOrder.HEAD_ASCEND, None) == 0


def test_no_match_any_order():
    g = generate(GraphFamilySpec("star", 5))
    for order in SearchOrder:
        pin = 1 if order in (SearchOrder.MIDDLE_ASCEND,
                             SearchOrder.MIDDLE_DESCEND) else None
        assert drive_ff(g, 0, set(), order, pin) is None


def test_middle_ascend_is_exclusive_and_non_cyclic():
    # star center with degree 4, entered through port 2, marker behind port
    # 0: the ascending middle search probes only port 3 and fails
    g = generate(GraphFamilySpec("star", 5))
    leaf_behind_port0 = g.nbr[0][0]
    assert drive_ff(g, 0, {leaf_behind_port0},
                    SearchOrder.MIDDLE_ASCEND, 2) is None


def test_isolated_node_fails():
    g = generate(GraphFamilySpec("path", 1))
    assert drive_ff(g, 0, set(), SearchOrder.HEAD_ASCEND, None) is None


@given(st.integers(min_value=2, max_value=14),
       st.integers(min_value=0, max_value=10 ** 6),
       st.data())
@settings(max_examples=80, deadline=None)
def test_find_first_matches_brute_force(n, seed, data):
    g = generate(GraphFamilySpec("random-connected", n, None, seed))
    rng = random.Random(seed + 1)
    u = data.draw(st.integers(min_value=0, max_value=n - 1))
    marked = {v for v in range(n) if rng.random() < 0.4}
    order = data.draw(st.sampled_from(list(SearchOrder)))
    if order in (SearchOrder.MIDDLE_ASCEND, SearchOrder.MIDDLE_DESCEND):
        pin = data.draw(st.integers(min_value=0, max_value=g.degree(u) - 1))
    else:
        pin = None
    got = drive_ff(g, u, marked, order, pin)
    want = brute_force(g, u, marked, order, pin if pin is not None else -1)
    assert got == want


def test_mark_pred_k2_example():
    g = from_edges(2, [(0, 0, 1, 0)])
    prog = make_probe_program()
    sess = Session(g, prog.schema)
    sess.node = 0
    sess.run(bounce_program(prog.schema, 0), step_limit=8)
    assert (sess.node, sess.pin) == (0, 0)
    sess.run(prog, entry="mark")
    assert sess.field_value(1, "m") == 1
    assert (sess.node, sess.pin) == (0, 0), "position and pin preserved"
    # involution: applying the inverse write restores storage
    sess.run(prog, entry="unmark")
    assert sess.field_value(1, "m") == 0
    assert (sess.node, sess.pin) == (0, 0)


def test_mark_pred_multiple_writes_atomic():
    schema = StorageSchema()
    schema.add_field("a", 1)
    schema.add_field("b", 1)
    prog = StackProgram("mp2", schema, {G_FLAG: 1})
    install_primitives(prog)
    wid = prog.add_winstr("both", [(M_ABS, 0, 1), (M_ABS, 1, 1)])
    p = Proc("mark2", regs={})
    call_mark_pred(p, wid, 0)
    p.emit(OP_RET)
    prog.add_proc(p)
    prog.seal("mark2")
    g = from_edges(2, [(0, 0, 1, 0)])
    sess = Session(g, prog.schema)
    sess.node = 0
    sess.run(bounce_program(prog.schema, 0), step_limit=8)
    tr = sess.run(prog, entry="mark2")
    assert sess.storage[1] == [1, 1]
    assert tr.moves == 2, "one visit applies every write"
