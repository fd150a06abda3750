"""The R-path structure: a dynamically retargetable source-to-target path.

Each instance spends five storage bits per node: a target flag, a path
membership flag, one direction bit comparing the ports of a node's two path
neighbors, and a two-bit working color.  The membership flags always induce
a path subgraph (no chords), so "the node's other path neighbor" is always
well defined and one direction bit suffices to walk either way.

Retargeting walks from the source looking for the first path node adjacent
to the new target (the branching node), splices there, and deletes the
expired suffix; red/blue working colors defer the branching node's direction
update until the new edge is in place.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .graphs import PortGraph
from .primitives import (
    NS_BITS, SearchOrder, call_ff, call_mark_pred, install_primitives,
    G_FLAG, PRED_BITS, WI_BITS,
)
from .programs import (
    C_GLOB_EQ, C_REG_EQ, M_NS,
    OP_MV_PIN, OP_RET, OP_SR, OP_SW, Proc, StackProgram, StorageSchema,
)

# field offsets within an instance's group
OFF_TGT = 0
OFF_IN = 1
OFF_DIR = 2
OFF_COL = 3

# colors
WHITE, RED, BLUE, YELLOW = 0, 1, 2, 3
# direction: 1 means the backward neighbor's port exceeds the forward one's
DIR_BGT = 1
DIR_BLT = 0

RPATH_FIELDS = [("target", 1), ("inPath", 1), ("direction", 1), ("color", 2)]


def add_instance(schema: StorageSchema, name: str) -> int:
    """Add one R-path instance's field group; returns its namespace id."""
    return schema.add_group(name, RPATH_FIELDS)


# --- predicate kinds (ns-relative) -------------------------------------------

def install_rpath_preds(prog: StackProgram) -> dict[str, int]:
    ids = {}
    ids["inpath"] = prog.add_pred(
        "rp_inpath", lambda row, b: row[b + OFF_IN] == 1)
    ids["inpath_yellow"] = prog.add_pred(
        "rp_inpath_yellow",
        lambda row, b: row[b + OFF_IN] == 1 and row[b + OFF_COL] == YELLOW)
    ids["yellow"] = prog.add_pred(
        "rp_yellow", lambda row, b: row[b + OFF_COL] == YELLOW)
    ids["red"] = prog.add_pred(
        "rp_red", lambda row, b: row[b + OFF_COL] == RED)
    ids["blue"] = prog.add_pred(
        "rp_blue", lambda row, b: row[b + OFF_COL] == BLUE)
    ids["target"] = prog.add_pred(
        "rp_target", lambda row, b: row[b + OFF_TGT] == 1)
    return ids


def install_rpath_winstrs(prog: StackProgram) -> dict[str, int]:
    ids = {}
    ids["yellow"] = prog.add_winstr("w_yellow", [(M_NS, OFF_COL, YELLOW)])
    ids["target_white"] = prog.add_winstr(
        "w_target_white", [(M_NS, OFF_TGT, 1), (M_NS, OFF_COL, WHITE)])
    ids["dir_bgt"] = prog.add_winstr("w_dir_bgt", [(M_NS, OFF_DIR, DIR_BGT)])
    ids["dir_blt"] = prog.add_winstr("w_dir_blt", [(M_NS, OFF_DIR, DIR_BLT)])
    ids["col_white"] = prog.add_winstr("w_col_white", [(M_NS, OFF_COL, WHITE)])
    ids["inpath_on"] = prog.add_winstr("w_inpath_on", [(M_NS, OFF_IN, 1)])
    # leaving the path also retires the node's direction bit, so that a
    # deleted instance's fields read all-zero
    ids["inpath_off"] = prog.add_winstr(
        "w_inpath_off", [(M_NS, OFF_IN, 0), (M_NS, OFF_DIR, 0)])
    return ids


def install_rpath_procs(prog: StackProgram) -> None:
    """Add init/seek/hop/modify_move/delete/copy procedures.

    Requires :func:`install_primitives` plus the predicate and write tables.
    """
    preds = install_rpath_preds(prog)
    wis = install_rpath_winstrs(prog)
    flag = prog.gidx(G_FLAG)
    P_IN = preds["inpath"]

    # rp_init: at the source with the instance's fields all zero
    p = Proc("rp_init", regs={"ns": NS_BITS})
    rns = p.reg("ns")
    p.emit(OP_SW, M_NS, rns, OFF_TGT, 1)
    p.emit(OP_SW, M_NS, rns, OFF_IN, 1)
    p.emit(OP_RET)
    prog.add_proc(p)

    # hop_fwd: one step toward the target (caller must not be at the target)
    p = Proc("hop_fwd", regs={"ns": NS_BITS, "t": 1})
    rns, rt = p.reg("ns"), p.reg("t")
    l_head, l_mv = p.label(), p.label()
    p.emit(OP_SR, rt, M_NS, rns, OFF_DIR)
    p.br(C_REG_EQ, rt, DIR_BGT, l_head)
    call_ff(p, SearchOrder.TAIL_DESCEND, P_IN, ("r", "ns"))
    p.jmp(l_mv)
    p.here(l_head)
    call_ff(p, SearchOrder.HEAD_ASCEND, P_IN, ("r", "ns"))
    p.here(l_mv)
    p.emit(OP_MV_PIN)
    p.emit(OP_RET)
    prog.add_proc(p)

    # seek: walk to the target; with to_top, continue backward to the source.
    # Walking backward, a node with a single in-path neighbor is the source
    # (we always arrive from the forward side, so the lone neighbor test is
    # unambiguous); the direction bit resolves interior nodes.  The forward
    # hop is inlined rather than called: seek sits on the hottest call
    # chains and every frame level costs declared memory width.
    p = Proc("seek", regs={"ns": NS_BITS, "top": 1, "t": 1})
    rns, rtop, rt = p.reg("ns"), p.reg("top"), p.reg("t")
    (l_fwd, l_fwd_head, l_fwd_mv, l_at_tgt, l_back, l_back_tail, l_back_mv,
     l_ret) = (p.label() for _ in range(8))
    p.here(l_fwd)
    p.emit(OP_SR, rt, M_NS, rns, OFF_TGT)
    p.br(C_REG_EQ, rt, 1, l_at_tgt)
    p.emit(OP_SR, rt, M_NS, rns, OFF_DIR)
    p.br(C_REG_EQ, rt, DIR_BGT, l_fwd_head)
    call_ff(p, SearchOrder.TAIL_DESCEND, P_IN, ("r", "ns"))
    p.jmp(l_fwd_mv)
    p.here(l_fwd_head)
    call_ff(p, SearchOrder.HEAD_ASCEND, P_IN, ("r", "ns"))
    p.here(l_fwd_mv)
    p.emit(OP_MV_PIN)
    p.jmp(l_fwd)
    p.here(l_at_tgt)
    p.br(C_REG_EQ, rtop, 0, l_ret)
    call_ff(p, SearchOrder.HEAD_ASCEND, P_IN, ("r", "ns"))
    p.br(C_GLOB_EQ, flag, 0, l_ret)          # single-node path
    p.emit(OP_MV_PIN)                        # to back(target)
    p.here(l_back)
    call_ff(p, SearchOrder.HEAD_ASCEND, P_IN, ("r", "ns"))
    call_ff(p, SearchOrder.MIDDLE_ASCEND, P_IN, ("r", "ns"))
    p.br(C_GLOB_EQ, flag, 0, l_ret)          # lone path neighbor: source
    p.emit(OP_SR, rt, M_NS, rns, OFF_DIR)
    p.br(C_REG_EQ, rt, DIR_BGT, l_back_tail)
    call_ff(p, SearchOrder.HEAD_ASCEND, P_IN, ("r", "ns"))
    p.jmp(l_back_mv)
    p.here(l_back_tail)
    call_ff(p, SearchOrder.TAIL_DESCEND, P_IN, ("r", "ns"))
    p.here(l_back_mv)
    p.emit(OP_MV_PIN)
    p.jmp(l_back)
    p.here(l_ret)
    p.emit(OP_RET)
    prog.add_proc(p)

    # modify_move: retarget to the neighbor behind pin and move there
    p = Proc("rp_mm", regs={"ns": NS_BITS, "t": 2})
    rns, rt = p.reg("ns"), p.reg("t")
    (l_full, l_find, l_branch, l_bgt, l_del, l_del_loop, l_remove,
     l_blue, l_cleanup) = (p.label() for _ in range(9))
    call_mark_pred(p, wis["yellow"], ("r", "ns"))
    call_ff(p, SearchOrder.HEAD_ASCEND, preds["inpath_yellow"], ("r", "ns"))
    p.br(C_GLOB_EQ, flag, 0, l_full)
    # shortcut: the new target is the old one's path predecessor
    p.emit(OP_SW, M_NS, rns, OFF_TGT, 0)
    p.emit(OP_SW, M_NS, rns, OFF_IN, 0)
    p.emit(OP_SW, M_NS, rns, OFF_DIR, 0)
    call_mark_pred(p, wis["target_white"], ("r", "ns"))
    p.emit(OP_MV_PIN)
    p.emit(OP_RET)

    p.here(l_full)
    p.call("seek", ns=("r", "ns"), top=1)
    p.here(l_find)                            # find phase, walking from source
    call_ff(p, SearchOrder.HEAD_ASCEND, preds["yellow"], ("r", "ns"))
    p.br(C_GLOB_EQ, flag, 1, l_branch)
    p.call("hop_fwd", ns=("r", "ns"))
    p.jmp(l_find)

    p.here(l_branch)                          # at the branching node; pin = yellow port
    p.emit(OP_SW, M_NS, rns, OFF_COL, RED)
    p.emit(OP_SR, rt, M_NS, rns, OFF_DIR)
    p.br(C_REG_EQ, rt, DIR_BGT, l_bgt)
    call_ff(p, SearchOrder.MIDDLE_DESCEND, P_IN, ("r", "ns"))
    p.br(C_GLOB_EQ, flag, 0, l_del)
    p.emit(OP_SW, M_NS, rns, OFF_COL, BLUE)
    p.jmp(l_del)
    p.here(l_bgt)
    call_ff(p, SearchOrder.MIDDLE_ASCEND, P_IN, ("r", "ns"))
    p.br(C_GLOB_EQ, flag, 1, l_del)
    p.emit(OP_SW, M_NS, rns, OFF_COL, BLUE)

    p.here(l_del)                             # delete phase
    p.emit(OP_SR, rt, M_NS, rns, OFF_TGT)
    p.br(C_REG_EQ, rt, 1, l_remove)           # branching node was the target
    p.call("hop_fwd", ns=("r", "ns"))
    p.here(l_del_loop)
    p.emit(OP_SR, rt, M_NS, rns, OFF_TGT)
    p.br(C_REG_EQ, rt, 1, l_remove)
    p.call("hop_fwd", ns=("r", "ns"))
    call_mark_pred(p, wis["inpath_off"], ("r", "ns"))
    p.jmp(l_del_loop)

    p.here(l_remove)                          # at the expired target
    p.emit(OP_SW, M_NS, rns, OFF_TGT, 0)
    p.emit(OP_SW, M_NS, rns, OFF_IN, 0)
    p.emit(OP_SW, M_NS, rns, OFF_DIR, 0)
    call_ff(p, SearchOrder.HEAD_ASCEND, preds["yellow"], ("r", "ns"))
    p.emit(OP_MV_PIN)                         # to the new target
    p.emit(OP_SW, M_NS, rns, OFF_COL, WHITE)
    p.emit(OP_SW, M_NS, rns, OFF_IN, 1)
    p.emit(OP_SW, M_NS, rns, OFF_TGT, 1)
    call_ff(p, SearchOrder.HEAD_ASCEND, preds["red"], ("r", "ns"))
    p.br(C_GLOB_EQ, flag, 0, l_blue)
    call_mark_pred(p, wis["dir_bgt"], ("r", "ns"))
    p.jmp(l_cleanup)
    p.here(l_blue)
    call_ff(p, SearchOrder.HEAD_ASCEND, preds["blue"], ("r", "ns"))
    call_mark_pred(p, wis["dir_blt"], ("r", "ns"))
    p.here(l_cleanup)
    call_mark_pred(p, wis["col_white"], ("r", "ns"))
    call_mark_pred(p, wis["inpath_on"], ("r", "ns"))
    p.emit(OP_RET)
    prog.add_proc(p)

    # rp_delete: shrink the path to its source by retargeting backward one
    # hop at a time.  Each retarget is the "new target already on the path"
    # case with the known path predecessor, so it is spelled out here
    # directly instead of going through the general retargeting procedure.
    p = Proc("rp_delete", regs={"ns": NS_BITS})
    rns = p.reg("ns")
    l_loop, l_ret = p.label(), p.label()
    p.call("seek", ns=("r", "ns"), top=0)
    p.here(l_loop)
    call_ff(p, SearchOrder.HEAD_ASCEND, P_IN, ("r", "ns"))
    p.br(C_GLOB_EQ, flag, 0, l_ret)
    p.emit(OP_SW, M_NS, rns, OFF_TGT, 0)
    p.emit(OP_SW, M_NS, rns, OFF_IN, 0)
    p.emit(OP_SW, M_NS, rns, OFF_DIR, 0)
    call_mark_pred(p, wis["target_white"], ("r", "ns"))
    p.emit(OP_MV_PIN)
    p.jmp(l_loop)
    p.here(l_ret)
    p.emit(OP_SW, M_NS, rns, OFF_DIR, 0)   # endpoint bit; fresh-init parity
    p.emit(OP_RET)
    prog.add_proc(p)

    # rp_copy: make dst maintain src's exact node sequence
    p = Proc("rp_copy", regs={"src": NS_BITS, "dst": NS_BITS, "t": 1})
    rsrc, rdst, rt = p.reg("src"), p.reg("dst"), p.reg("t")
    l_loop, l_head, l_mm, l_ret = (p.label() for _ in range(4))
    p.call("seek", ns=("r", "src"), top=1)
    p.call("rp_delete", ns=("r", "dst"))
    p.here(l_loop)
    p.emit(OP_SR, rt, M_NS, rsrc, OFF_TGT)
    p.br(C_REG_EQ, rt, 1, l_ret)
    p.emit(OP_SR, rt, M_NS, rsrc, OFF_DIR)    # find src-forward port, stay put
    p.br(C_REG_EQ, rt, DIR_BGT, l_head)
    call_ff(p, SearchOrder.TAIL_DESCEND, P_IN, ("r", "src"))
    p.jmp(l_mm)
    p.here(l_head)
    call_ff(p, SearchOrder.HEAD_ASCEND, P_IN, ("r", "src"))
    p.here(l_mm)
    p.call("rp_mm", ns=("r", "dst"))          # extend dst one hop
    p.jmp(l_loop)
    p.here(l_ret)
    p.emit(OP_RET)
    prog.add_proc(p)


# ---------------------------------------------------------------------------
# Global-view consistency oracle (test only)
# ---------------------------------------------------------------------------

@dataclass
class ConsistencyReport:
    strong: bool
    consistent: bool
    violations: list[str] = field(default_factory=list)


def check_consistency(graph: PortGraph, storage, base: int,
                      source: int, target: int,
                      require_target_flag: bool = True) -> ConsistencyReport:
    """Check the three path-structure conditions from a global viewpoint.

    1. the target flag sits exactly on the expected target;
    2. every component induced by the membership flags is a path graph;
    3. interior direction bits match the port comparison of the two path
       neighbors (endpoints carry no constraint).

    Strong means additionally that there is exactly one component and it
    connects source to target.
    """
    rep = ConsistencyReport(strong=False, consistent=True)
    nodes = [v for v in range(graph.n) if storage[v][base + OFF_IN] == 1]
    node_set = set(nodes)

    if require_target_flag:
        flagged = [v for v in range(graph.n)
                   if storage[v][base + OFF_TGT] == 1]
        if flagged != [target]:
            rep.violations.append(
                f"target flag at {flagged}, expected [{target}]")
        if source not in node_set:
            rep.violations.append(f"source {source} not on the path")
        if target not in node_set:
            rep.violations.append(f"target {target} not on the path")

    inpath_nbrs = {v: [u for u in graph.nbr[v] if u in node_set]
                   for v in nodes}
    for v in nodes:
        if len(inpath_nbrs[v]) > 2:
            rep.violations.append(f"node {v} has {len(inpath_nbrs[v])} "
                                  "path neighbors (not a path graph)")

    # decompose into components; each must be a simple path
    comps: list[list[int]] = []
    unseen = set(nodes)
    while unseen and not rep.violations:
        start = min(unseen)
        comp = {start}
        stack = [start]
        while stack:
            v = stack.pop()
            for u in inpath_nbrs[v]:
                if u not in comp:
                    comp.add(u)
                    stack.append(u)
        unseen -= comp
        ends = [v for v in comp if len(inpath_nbrs[v]) <= 1]
        edge_count = sum(len(inpath_nbrs[v]) for v in comp) // 2
        if edge_count != len(comp) - 1:
            rep.violations.append(f"component {sorted(comp)} contains a cycle")
            break
        # order the component from one endpoint
        if len(comp) == 1:
            comps.append([next(iter(comp))])
            continue
        head = min(ends)
        order = [head]
        prev = None
        while True:
            nxt = [u for u in inpath_nbrs[order[-1]] if u != prev]
            if not nxt:
                break
            prev = order[-1]
            order.append(nxt[0])
        comps.append(order)

    def dir_ok(order: list[int]) -> bool:
        for i in range(1, len(order) - 1):
            v = order[i]
            back_p = graph.port_to(v, order[i - 1])
            fwd_p = graph.port_to(v, order[i + 1])
            want = DIR_BGT if back_p > fwd_p else DIR_BLT
            if storage[v][base + OFF_DIR] != want:
                return False
        return True

    for order in comps:
        if len(order) < 3:
            continue
        anchored = source in (order[0], order[-1])
        if anchored:
            if order[-1] == source:
                order = order[::-1]
            if not dir_ok(order):
                rep.violations.append(
                    f"direction bit wrong on component {order}")
        else:
            if not (dir_ok(order) or dir_ok(order[::-1])):
                rep.violations.append(
                    f"direction bit wrong on component {order}")

    rep.consistent = not rep.violations
    if rep.consistent and require_target_flag and len(comps) == 1:
        comp = comps[0]
        if (source in (comp[0], comp[-1]) and target in (comp[0], comp[-1])
                and (len(comp) == 1) == (source == target)):
            rep.strong = True
        elif source == target and comp == [source]:
            rep.strong = True
        else:
            rep.violations.append(
                f"single component {comp} does not join source {source} "
                f"to target {target}")
            rep.consistent = False
    return rep


class ShadowPath:
    """Reference model: the maintained path as an explicit node list."""

    def __init__(self, graph: PortGraph, source: int):
        self.graph = graph
        self.nodes = [source]

    @property
    def source(self) -> int:
        return self.nodes[0]

    @property
    def target(self) -> int:
        return self.nodes[-1]

    def modify_move(self, new_target: int) -> None:
        g = self.graph
        assert new_target in g.nbr[self.target]
        if new_target in self.nodes:
            assert new_target == self.nodes[-2], "path subgraph is induced"
            self.nodes.pop()
            return
        for i, v in enumerate(self.nodes):
            if new_target in g.nbr[v]:
                self.nodes = self.nodes[: i + 1] + [new_target]
                return
        raise AssertionError("new target adjacent to no path node")

    def delete(self) -> None:
        self.nodes = [self.nodes[0]]

    def copy_from(self, other: "ShadowPath") -> None:
        assert self.source == other.source
        self.nodes = list(other.nodes)
