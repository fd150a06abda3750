"""Lexicographic DFS by a constant-memory agent, plus centralized oracles.

The agent explores forward by always entering the unvisited neighbor with
the minimum port, marking it grey.  Backtracking has no parent pointers to
follow: the grey nodes are exactly the root-to-head path, and that path can
be replayed from the root because at every prefix node the next path node is
the not-yet-replayed grey neighbor with the minimum port (the green head
itself counts as the final path node, which is how the parent is detected).
One traversal flags the replayed nodes; a second traversal with the flag
roles inverted erases them.  A companion path instance keeps a walkable
root-to-head path at all times so the replay can start from the root.

Coloring the whole graph black is undone by rerunning the search with the
meanings of black and white swapped.
"""

from __future__ import annotations

from dataclasses import dataclass

from .graphs import PortGraph
from .primitives import (
    NS_BITS, SearchOrder, call_ff, call_mark_pred, install_primitives,
    G_FLAG,
)
from .programs import (
    C_GLOB_EQ, C_REG_EQ, M_ABS, M_NS,
    OP_GK, OP_GXOR, OP_HALT, OP_MV_PIN, OP_RCOPY, OP_RET, OP_RG, OP_RK,
    OP_SR, OP_SW, OP_SWR,
    Proc, StackProgram, StorageSchema,
)
from . import rpath
from .rpath import OFF_IN, OFF_TGT, install_rpath_procs

# dfs colors
D_WHITE, D_GREY, D_BLACK, D_GREEN = 0, 1, 2, 3

DFS_FIELDS = [("color", 2), ("traversal", 1)]

# hook modes for the embedded search
HOOK_NONE, HOOK_SUCC, HOOK_PRED = 0, 1, 2

G_FIRED = "fired"
G_ERR = "err"
G_PAR = "par"

DLDFS_GLOBALS = {G_FLAG: 1, G_FIRED: 1, G_ERR: 1, G_PAR: 1}


def install_dldfs(prog: StackProgram, dfs_ns: int, x_ns: int,
                  xaux_ns: int) -> None:
    """Install the search and the successor/predecessor retargeting ops.

    ``dfs_ns`` names the color/traversal field group; ``x_ns`` the internal
    path instance tracking the head; ``xaux_ns`` the auxiliary instance the
    retargeting ops use to remember the previous head.
    """
    col = prog.schema.ns_base[dfs_ns]
    trav = col + 1
    flag = prog.gidx(G_FLAG)
    fired = prog.gidx(G_FIRED)
    err = prog.gidx(G_ERR)
    par = prog.gidx(G_PAR)

    p_unvis_n = prog.add_pred("dfs_unvis_n", lambda row, b: row[col] == D_WHITE)
    p_unvis_s = prog.add_pred("dfs_unvis_s", lambda row, b: row[col] == D_BLACK)
    p_walk0 = prog.add_pred(
        "dfs_walk0",
        lambda row, b: (row[col] == D_GREY and row[trav] == 0)
        or row[col] == D_GREEN)
    p_walk1 = prog.add_pred(
        "dfs_walk1",
        lambda row, b: (row[col] == D_GREY and row[trav] == 1)
        or row[col] == D_GREEN)
    w_grey = prog.add_winstr("w_dfs_grey", [(M_ABS, col, D_GREY)])

    p = Proc("dldfs", regs={"swap": 1, "hook": 2, "xdd": NS_BITS, "t": 2,
                            "hroot": 1, "wfirst": 1, "proot": 1})
    rswap, rhook, rxdd, rt, rhroot, rwfirst, rproot = (
        p.reg(n) for n in ("swap", "hook", "xdd", "t", "hroot", "wfirst",
                           "proot"))
    (l_main, l_ff_swap, l_fwd, l_visit_done, l_succ, l_pred, l_succ_upd,
     l_succ_fire, l_pred_upd, l_back, l_w1, l_w1_done, l_w2, l_w2_done,
     l_black_n, l_head_moved, l_fin, l_fin_white, l_fin_done,
     l_ret) = (p.label() for _ in range(20))

    # init the head-tracking instance; color the root grey; root parity
    p.emit(OP_SW, M_ABS, 0, OFF_TGT + _ns_off(prog, x_ns), 1)
    p.emit(OP_SW, M_ABS, 0, OFF_IN + _ns_off(prog, x_ns), 1)
    p.emit(OP_SW, M_ABS, 0, col, D_GREY)
    p.emit(OP_GXOR, par, 1)
    p.emit(OP_RK, rhroot, 1)

    p.here(l_main)
    p.br(C_REG_EQ, rswap, 1, l_ff_swap)
    call_ff(p, SearchOrder.HEAD_ASCEND, p_unvis_n, 0)
    p.jmp(l_fwd)
    p.here(l_ff_swap)
    call_ff(p, SearchOrder.HEAD_ASCEND, p_unvis_s, 0)
    p.here(l_fwd)
    p.br(C_GLOB_EQ, flag, 0, l_back)
    # forward move: grey the found neighbor, retarget the head instance
    call_mark_pred(p, w_grey, 0)
    p.call("rp_mm", ns=x_ns)
    p.emit(OP_RK, rhroot, 0)
    p.emit(OP_GXOR, par, 1)                       # first visit
    p.br(C_REG_EQ, rhook, HOOK_SUCC, l_succ)
    p.br(C_REG_EQ, rhook, HOOK_PRED, l_pred)
    p.jmp(l_main)

    # successor hook: fire when the previous head carries the target flag
    p.here(l_succ)
    p.br(C_GLOB_EQ, fired, 1, l_succ_upd)
    p.call("seek", ns=x_ns, top=1)
    p.call("seek", ns=xaux_ns, top=0)
    p.emit(OP_SR, rt, M_NS, rxdd, OFF_TGT)
    p.br(C_REG_EQ, rt, 1, l_succ_fire)
    p.call("seek", ns=xaux_ns, top=1)
    p.call("seek", ns=x_ns, top=0)
    p.jmp(l_succ_upd)
    p.here(l_succ_fire)
    p.emit(OP_GK, fired, 1)
    p.call("seek", ns=xaux_ns, top=1)
    p.call("rp_copy", src=x_ns, dst=("r", "xdd"))
    p.here(l_succ_upd)
    p.call("rp_copy", src=x_ns, dst=xaux_ns)      # remember current head
    p.jmp(l_main)

    # predecessor hook: fire when the new head carries the target flag
    p.here(l_pred)
    p.emit(OP_SR, rt, M_NS, rxdd, OFF_TGT)
    p.br(C_REG_EQ, rt, 0, l_pred_upd)
    p.emit(OP_GK, fired, 1)
    p.call("seek", ns=x_ns, top=1)
    p.call("rp_copy", src=xaux_ns, dst=("r", "xdd"))
    p.call("seek", ns=xaux_ns, top=1)
    p.call("seek", ns=x_ns, top=0)
    p.here(l_pred_upd)
    p.call("rp_copy", src=x_ns, dst=xaux_ns)
    p.jmp(l_main)

    # backtrack: replay the grey path from the root twice
    p.here(l_back)
    p.br(C_REG_EQ, rhroot, 1, l_fin)
    p.emit(OP_SW, M_ABS, 0, col, D_GREEN)         # head goes green
    p.call("seek", ns=x_ns, top=1)
    p.emit(OP_SW, M_ABS, 0, trav, 1)              # flag the root
    p.emit(OP_RK, rwfirst, 1)
    p.here(l_w1)
    call_ff(p, SearchOrder.HEAD_ASCEND, p_walk0, 0)
    p.emit(OP_MV_PIN)
    p.emit(OP_SR, rt, M_ABS, 0, col)
    p.br(C_REG_EQ, rt, D_GREEN, l_w1_done)
    p.emit(OP_SW, M_ABS, 0, trav, 1)
    p.emit(OP_RK, rwfirst, 0)
    p.jmp(l_w1)
    p.here(l_w1_done)                             # at the green head; pin -> parent
    p.emit(OP_RCOPY, rproot, rwfirst)
    p.call("rp_mm", ns=x_ns)                      # head instance now targets parent
    p.call("seek", ns=x_ns, top=1)
    p.emit(OP_SW, M_ABS, 0, trav, 0)              # unflag the root
    p.here(l_w2)
    call_ff(p, SearchOrder.HEAD_ASCEND, p_walk1, 0)
    p.emit(OP_MV_PIN)
    p.emit(OP_SR, rt, M_ABS, 0, col)
    p.br(C_REG_EQ, rt, D_GREEN, l_w2_done)
    p.emit(OP_SW, M_ABS, 0, trav, 0)
    p.jmp(l_w2)
    p.here(l_w2_done)                             # at the green head again
    p.br(C_REG_EQ, rswap, 0, l_black_n)
    p.emit(OP_SW, M_ABS, 0, col, D_WHITE)
    p.jmp(l_head_moved)
    p.here(l_black_n)
    p.emit(OP_SW, M_ABS, 0, col, D_BLACK)
    p.here(l_head_moved)
    p.emit(OP_MV_PIN)                             # to the parent, the new head
    p.emit(OP_RCOPY, rhroot, rproot)
    p.jmp(l_main)

    # exhausted root: finish and clear the head instance
    p.here(l_fin)
    p.br(C_REG_EQ, rswap, 1, l_fin_white)
    p.emit(OP_SW, M_ABS, 0, col, D_BLACK)
    p.jmp(l_fin_done)
    p.here(l_fin_white)
    p.emit(OP_SW, M_ABS, 0, col, D_WHITE)
    p.here(l_fin_done)
    p.emit(OP_SW, M_ABS, 0, OFF_TGT + _ns_off(prog, x_ns), 0)
    p.emit(OP_SW, M_ABS, 0, OFF_IN + _ns_off(prog, x_ns), 0)
    p.emit(OP_SW, M_ABS, 0, rpath.OFF_DIR + _ns_off(prog, x_ns), 0)
    p.emit(OP_RET)
    prog.add_proc(p)

    # target retargeting along the search order
    p = Proc("succpred", regs={"xdd": NS_BITS, "mode": 2, "swap": 1})
    rxdd, rmode, rswap = p.reg("xdd"), p.reg("mode"), p.reg("swap")
    l_ok = p.label()
    l_n = p.label()
    l_run = p.label()
    p.emit(OP_GK, fired, 0)
    p.call("seek", ns=("r", "xdd"), top=1)        # to the common source/root
    p.emit(OP_SW, M_ABS, 0, OFF_TGT + _ns_off(prog, xaux_ns), 1)
    p.emit(OP_SW, M_ABS, 0, OFF_IN + _ns_off(prog, xaux_ns), 1)
    p.br(C_REG_EQ, rswap, 1, l_n)
    p.call("dldfs", swap=0, hook=("r", "mode"), xdd=("r", "xdd"))
    p.call("dldfs", swap=1, hook=HOOK_NONE, xdd=("r", "xdd"))
    p.jmp(l_run)
    p.here(l_n)
    p.call("dldfs", swap=1, hook=("r", "mode"), xdd=("r", "xdd"))
    p.call("dldfs", swap=0, hook=HOOK_NONE, xdd=("r", "xdd"))
    p.here(l_run)
    p.call("rp_delete", ns=xaux_ns)
    p.emit(OP_SW, M_ABS, 0, OFF_TGT + _ns_off(prog, xaux_ns), 0)
    p.emit(OP_SW, M_ABS, 0, OFF_IN + _ns_off(prog, xaux_ns), 0)
    p.emit(OP_SW, M_ABS, 0, rpath.OFF_DIR + _ns_off(prog, xaux_ns), 0)
    p.br(C_GLOB_EQ, fired, 1, l_ok)
    p.emit(OP_GK, err, 1)
    p.emit(OP_HALT)
    p.here(l_ok)
    p.emit(OP_RET)
    prog.add_proc(p)


def _ns_off(prog: StackProgram, ns: int) -> int:
    return prog.schema.ns_base[ns]


# ---------------------------------------------------------------------------
# Program builders
# ---------------------------------------------------------------------------

@dataclass
class DldfsProgram:
    program: StackProgram
    dfs_base: int
    x_ns: int
    xaux_ns: int
    out_slot: int | None = None
    user_ns: tuple[int, ...] = ()


def build_dldfs_program(parity: bool = False,
                        extra_instances: int = 0) -> DldfsProgram:
    """A runnable program whose entry performs one full search from the
    start node, optionally writing the visit-count parity to an output
    register at the final node.  ``extra_instances`` adds caller-usable path
    instances (for retargeting-op drivers)."""
    schema = StorageSchema()
    dfs_ns = schema.add_group("dfs", DFS_FIELDS)
    x_ns = rpath.add_instance(schema, "x")
    xaux_ns = rpath.add_instance(schema, "xaux")
    user_ns = [rpath.add_instance(schema, f"u{i}")
               for i in range(extra_instances)]
    out_slot = schema.add_field("out", 1) if parity else None

    prog = StackProgram("dldfs", schema, dict(DLDFS_GLOBALS))
    install_primitives(prog)
    install_rpath_procs(prog)
    install_dldfs(prog, dfs_ns, x_ns, xaux_ns)
    dfs_base = schema.ns_base[dfs_ns]

    main = Proc("main", regs={"t": 1})
    main.call("dldfs", swap=0, hook=HOOK_NONE, xdd=0)
    if parity:
        rt = main.reg("t")
        main.emit(OP_RG, rt, prog.gidx(G_PAR))
        main.emit(OP_SWR, M_ABS, 0, out_slot, rt)
    main.emit(OP_RET)
    prog.add_proc(main)

    reset = Proc("reset", regs={})
    reset.call("dldfs", swap=1, hook=HOOK_NONE, xdd=0)
    reset.emit(OP_RET)
    prog.add_proc(reset)

    prog.seal("main")
    return DldfsProgram(prog, dfs_base, x_ns, xaux_ns, out_slot,
                        tuple(user_ns))


# ---------------------------------------------------------------------------
# Centralized oracles (global view; test and verification only)
# ---------------------------------------------------------------------------

@dataclass
class LexDfsResult:
    preorder: list[int]
    parent: list[int]


def oracle_lexdfs(graph: PortGraph, root: int) -> LexDfsResult:
    """Reference search: always expand the minimum-port unvisited neighbor."""
    n = graph.n
    visited = [False] * n
    parent = [-1] * n
    preorder = [root]
    visited[root] = True
    stack = [(root, 0)]
    while stack:
        v, i = stack.pop()
        nbrs = graph.nbr[v]
        while i < len(nbrs) and visited[nbrs[i]]:
            i += 1
        if i == len(nbrs):
            continue
        u = nbrs[i]
        stack.append((v, i + 1))
        visited[u] = True
        parent[u] = v
        preorder.append(u)
        stack.append((u, 0))
    return LexDfsResult(preorder, parent)


def path_to_root(parent: list[int], v: int, root: int) -> list[int]:
    path = [v]
    while path[-1] != root:
        path.append(parent[path[-1]])
    path.reverse()
    return path


def check_lemma1(graph: PortGraph, root: int,
                 parent_override: list[int] | None = None) -> list[str]:
    """Brute-force the grey-path replay property on every tree path.

    For P(u) = u_0..u_k and each i < k, the port from u_i to u_{i+1} must be
    the minimum port from u_i to any later path node adjacent to it.
    """
    res = oracle_lexdfs(graph, root)
    parent = parent_override if parent_override is not None else res.parent
    violations = []
    for u in res.preorder:
        if u == root:
            continue
        path = path_to_root(parent, u, root)
        for i in range(len(path) - 1):
            ui = path[i]
            later = {path[j] for j in range(i + 1, len(path))}
            cand = [graph.port_to(ui, w) for w in graph.nbr[ui] if w in later]
            if path[i + 1] not in graph.nbr[ui]:
                violations.append(f"P({u}): {ui} not adjacent to next")
                continue
            want = min(cand)
            got = graph.port_to(ui, path[i + 1])
            if got != want:
                violations.append(
                    f"P({u}): at {ui} next-port {got} != min {want}")
    return violations
