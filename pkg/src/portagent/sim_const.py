"""Simulating a linear-memory machine agent with constant agent memory.

The serialized order of nodes under the lexicographic DFS addresses one cell
of each machine tape per node; path instances rooted at the start node track
the simulated agent's location, the five tape heads, and a scratch position
used while sweeping neighbors.  The simulator's own memory holds only the
machine's control state and a handful of flags, so its width is independent
of the graph.

One simulated step runs three phases: initialize tapes 2-4 (storage image,
degree and incoming port in unary, the latter two written by probing the
marked node's neighbors in ascending port order while a scratch instance
remembers how far the probe got), run the machine to termination against the
distributed cells, then decode tape 5 by advancing the scratch instance one
neighbor per consumed one.  The node left behind keeps a ``past`` flag so
the next step can reconstruct the incoming port.
"""

from __future__ import annotations

from dataclasses import dataclass

from .graphs import PortGraph
from .lexdfs import (
    DFS_FIELDS, DLDFS_GLOBALS, G_ERR, HOOK_SUCC, HOOK_PRED, install_dldfs,
    oracle_lexdfs,
)
from .primitives import (
    NS_BITS, SearchOrder, call_ff, call_mark_pred, install_primitives,
    G_FLAG,
)
from .programs import (
    C_DEG_EQ, C_GLOB_EQ, C_PIN_LAST, C_REG_EQ, C_REG_NE, M_ABS,
    OP_GK, OP_HALT, OP_MV_K, OP_MV_PIN, OP_MV_PIN_D, OP_PY, OP_RET,
    OP_RK, OP_SR, OP_SW, OP_TRAP, Proc, StackProgram, StorageSchema,
)
from . import rpath
from .rpath import install_rpath_procs
from .runtime import Session
from .turing import (
    BLANK, RIGHT, S0, S1, MachineError, TuringAgentProgram,
    TuringMachineSpec,
)


class SimulationError(RuntimeError):
    pass


TRAP_BOUNDARY = 0   # a simulated step is about to begin
TRAP_LOCAL = 1      # tapes initialized, machine about to run


@dataclass
class SimConst:
    """A built simulator program for one machine.

    The main loop carries a trap at its head, so harnesses can observe the
    instant each simulated step begins.
    """

    machine: TuringMachineSpec
    program: StackProgram
    schema: StorageSchema
    slots: dict[str, int]
    ns: dict[str, int]


TAPE_NAMES = ("t1", "t2", "t3", "t4", "t5")


def build_simconst(machine: TuringMachineSpec) -> SimConst:
    m = machine
    h = m.storage_cells
    if h < 1:
        raise SimulationError("machine needs at least one storage cell")

    schema = StorageSchema()
    slots = {}
    slots["ast"] = schema.add_field("ast", h)
    for t in TAPE_NAMES:
        slots[t] = schema.add_field(t, 2)
    slots["past"] = schema.add_field("past", 1)
    slots["mark"] = schema.add_field("mark", 1)
    slots["tmp"] = schema.add_field("tmp", 1)
    slots["isroot"] = schema.add_field("isroot", 1)
    dfs_ns = schema.add_group("dfs", DFS_FIELDS)
    ns = {}
    for name in ("x", "xaux", "xcur", "xv", "xt1", "xt2", "xt3", "xt4",
                 "xt5"):
        ns[name] = rpath.add_instance(schema, name)

    state_bits = max(1, (m.n_states - 1).bit_length())
    pos2_bits = max(1, (h + 1).bit_length())
    globals_ = dict(DLDFS_GLOBALS)
    globals_.update({
        "tmstate": state_bits,
        "sym1": 2, "sym2": 2, "sym3": 2, "sym4": 2, "sym5": 2,
        "mvdir": 1, "t5w": 1, "first": 1, "done": 1,
        "t2img": h, "pos2": pos2_bits,
    })

    prog = StackProgram(f"simconst[{m.name}]", schema, globals_)
    install_primitives(prog)
    install_rpath_procs(prog)
    install_dldfs(prog, dfs_ns, ns["x"], ns["xaux"])

    p_mark = prog.add_pred("sc_mark",
                           lambda row, b, s=slots["mark"]: row[s] == 1)
    p_tmp = prog.add_pred("sc_tmp",
                          lambda row, b, s=slots["tmp"]: row[s] == 1)
    w_tmp_off = prog.add_winstr("w_tmp_off", [(M_ABS, slots["tmp"], 0)])
    w_unmark_past = prog.add_winstr(
        "w_unmark_past", [(M_ABS, slots["mark"], 0), (M_ABS, slots["past"], 1)])

    g = prog.gidx
    tape_ns = [ns[f"xt{j}"] for j in range(1, 6)]
    tape_slot = {ns[f"xt{j}"]: slots[f"t{j}"] for j in range(1, 6)}
    delta = m.delta

    # --- small helpers ------------------------------------------------------
    def seek(p, inst, top):
        p.call("seek", ns=inst, top=top)

    # scratch-instance advance: retarget xv from the probed neighbor back to
    # the marked node; afterwards pin names the probed neighbor's port
    p = Proc("sweepadv", regs={})
    p.emit(OP_SW, M_ABS, 0, slots["tmp"], 1)
    call_ff(p, SearchOrder.HEAD_ASCEND, p_mark, 0)
    p.call("rp_mm", ns=ns["xv"])
    call_ff(p, SearchOrder.HEAD_ASCEND, p_tmp, 0)
    call_mark_pred(p, w_tmp_off, 0)
    p.emit(OP_RET)
    prog.add_proc(p)

    # appending a one at a tape's write position is inlined into the sweeps
    # (via _emit_append) to keep the deepest call chain flat
    def _emit_append(p: Proc, tns: int) -> None:
        slot = tape_slot[tns]
        seek(p, ns["xv"], 1)
        p.call("seek", ns=tns, top=0)
        p.emit(OP_SW, M_ABS, 0, slot, S1)
        p.call("succpred", xdd=tns, mode=HOOK_SUCC, swap=0)
        seek(p, ns["xv"], 0)

    # blank out ones left beyond a tape's fresh content; start and end at the
    # serialization root
    p = Proc("erasetail", regs={"tns": NS_BITS, "t": 2})
    rtns, rt = p.reg("tns"), p.reg("t")
    l_loop, l_done = p.label(), p.label()

    def read_cell(ctx, table=tape_slot, r=rtns, d=rt):
        ctx.regs[d] = ctx.row[table[ctx.regs[r]]]

    def blank_cell(ctx, table=tape_slot, r=rtns):
        ctx.row[table[ctx.regs[r]]] = BLANK

    p.here(l_loop)
    p.call("seek", ns=("r", "tns"), top=0)
    p.emit(OP_PY, read_cell)
    p.br(C_REG_NE, rt, S1, l_done)
    p.emit(OP_PY, blank_cell)
    p.call("succpred", xdd=("r", "tns"), mode=HOOK_SUCC, swap=0)
    p.jmp(l_loop)
    p.here(l_done)
    p.call("seek", ns=("r", "tns"), top=1)
    p.emit(OP_RET)
    prog.add_proc(p)

    # write the storage image into the distributed second tape
    p = Proc("t2init", regs={"i": max(1, (h + 1).bit_length())})
    ri = p.reg("i")
    l_loop, l_done = p.label(), p.label()

    def write_t2(ctx, s=slots["t2"], gi=g("t2img"), r=ri):
        bit = (ctx.globs[gi] >> ctx.regs[r]) & 1
        ctx.row[s] = S1 if bit else S0

    p.emit(OP_PY, write_t2)
    p.emit(OP_RK, ri, 1)
    p.here(l_loop)
    p.br(C_REG_EQ, ri, h, l_done)
    p.call("succpred", xdd=ns["xt2"], mode=HOOK_SUCC, swap=0)
    seek(p, ns["xt2"], 0)
    p.emit(OP_PY, write_t2)
    p.emit(OP_PY, lambda ctx, r=ri: ctx.regs.__setitem__(r, ctx.regs[r] + 1))
    p.jmp(l_loop)
    p.here(l_done)
    seek(p, ns["xt2"], 1)
    p.call("rp_delete", ns=ns["xt2"])
    p.emit(OP_RET)
    prog.add_proc(p)

    # degree sweep: one appended one per neighbor of the marked node
    p = Proc("sweep3", regs={})
    l_vis, l_ret = p.label(), p.label()
    p.br(C_DEG_EQ, 0, 0, l_ret)
    p.emit(OP_MV_K, 0)
    p.emit(OP_MV_PIN)
    p.call("rp_mm", ns=ns["xv"])
    p.here(l_vis)
    _emit_append(p, ns["xt3"])
    p.call("sweepadv")
    p.br(C_PIN_LAST, 0, 0, l_ret)
    p.emit(OP_MV_PIN_D, 1)
    p.emit(OP_MV_PIN)
    p.call("rp_mm", ns=ns["xv"])
    p.jmp(l_vis)
    p.here(l_ret)
    p.emit(OP_RET)
    prog.add_proc(p)

    # incoming-port sweep: append through the neighbor holding the past flag
    p = Proc("sweep4", regs={"t": 1})
    rt = p.reg("t")
    l_vis, l_found, l_ret, l_err = (p.label() for _ in range(4))
    p.br(C_DEG_EQ, 0, 0, l_ret)
    p.emit(OP_MV_K, 0)
    p.emit(OP_MV_PIN)
    p.call("rp_mm", ns=ns["xv"])
    p.here(l_vis)
    p.emit(OP_SR, rt, M_ABS, 0, slots["past"])
    p.br(C_REG_EQ, rt, 1, l_found)
    _emit_append(p, ns["xt4"])
    p.call("sweepadv")
    p.br(C_PIN_LAST, 0, 0, l_err)
    p.emit(OP_MV_PIN_D, 1)
    p.emit(OP_MV_PIN)
    p.call("rp_mm", ns=ns["xv"])
    p.jmp(l_vis)
    p.here(l_found)
    _emit_append(p, ns["xt4"])
    seek(p, ns["xv"], 0)
    p.emit(OP_SW, M_ABS, 0, slots["past"], 0)
    p.call("sweepadv")
    p.here(l_ret)
    p.emit(OP_RET)
    p.here(l_err)
    p.emit(OP_GK, g(G_ERR), 1)
    p.emit(OP_HALT)
    prog.add_proc(p)

    # --- phases ---------------------------------------------------------------
    p = Proc("initph", regs={})

    def read_ast(ctx, s=slots["ast"], gi=g("t2img"), gp=g("pos2")):
        ctx.globs[gi] = ctx.row[s]
        ctx.globs[gp] = 0

    l_skip4, l_t5 = p.label(), p.label()
    p.emit(OP_PY, read_ast)
    p.emit(OP_SW, M_ABS, 0, slots["mark"], 1)
    seek(p, ns["xcur"], 1)
    p.call("rp_delete", ns=ns["xt2"])
    p.call("t2init")
    p.call("rp_delete", ns=ns["xt1"])
    p.call("rp_delete", ns=ns["xt3"])
    seek(p, ns["xcur"], 0)
    p.call("rp_copy", src=ns["xcur"], dst=ns["xv"])
    p.call("sweep3")
    seek(p, ns["xv"], 1)
    p.call("erasetail", tns=ns["xt3"])
    p.call("rp_delete", ns=ns["xt3"])
    p.br(C_GLOB_EQ, g("first"), 1, l_skip4)
    p.call("rp_delete", ns=ns["xt4"])
    seek(p, ns["xcur"], 0)
    p.call("rp_copy", src=ns["xcur"], dst=ns["xv"])
    p.call("sweep4")
    seek(p, ns["xv"], 1)
    p.call("erasetail", tns=ns["xt4"])
    p.call("rp_delete", ns=ns["xt4"])
    p.jmp(l_t5)
    p.here(l_skip4)
    p.emit(OP_GK, g("first"), 0)
    p.call("rp_delete", ns=ns["xt4"])
    p.here(l_t5)
    p.call("rp_delete", ns=ns["xt5"])
    p.call("rp_delete", ns=ns["xv"])
    seek(p, ns["xcur"], 0)
    p.emit(OP_SW, M_ABS, 0, slots["mark"], 0)
    p.emit(OP_RET)
    prog.add_proc(p)

    # local simulation: run the machine against the distributed cells
    p = Proc("localph", regs={"t": 2})
    rt = p.reg("t")
    l_step, l_ret = p.label(), p.label()
    p.emit(OP_TRAP, TRAP_LOCAL)
    p.emit(OP_GK, g("tmstate"), m.q0)
    p.emit(OP_GK, g("t5w"), 0)
    seek(p, ns["xcur"], 1)
    p.here(l_step)
    p.br(C_GLOB_EQ, g("tmstate"), m.q1, l_ret)
    for j in range(1, 6):
        seek(p, tape_ns[j - 1], 0)
        p.emit(OP_SR, rt, M_ABS, 0, slots[f"t{j}"])
        p.emit(OP_PY, lambda ctx, gi=g(f"sym{j}"), r=rt:
               ctx.globs.__setitem__(gi, ctx.regs[r]))
        seek(p, tape_ns[j - 1], 1)

    syms_g = [g(f"sym{j}") for j in range(1, 6)]

    def transition(ctx, gs=g("tmstate"), syms=syms_g, d=delta):
        key = (ctx.globs[gs],
               tuple(1 if ctx.globs[s] == S1 else 0 for s in syms))
        if key not in d:
            raise MachineError(f"missing transition {key}")
        return d[key]

    for j in range(1, 6):
        l_succ, l_skip, l_next = p.label(), p.label(), p.label()

        def apply_j(ctx, j=j, s=slots[f"t{j}"], gm=g("mvdir"),
                    g5=g("t5w"), gi=g("t2img"), gp=g("pos2")):
            state2, writes, moves = transition(ctx)
            w = writes[j - 1]
            cur = ctx.row[s]
            exposed = 1 if cur == S1 else 0
            if w != exposed:
                if j in (3, 4):
                    raise MachineError(f"write to read-only tape {j}")
                if j == 2:
                    pos = ctx.globs[gp]
                    if pos >= h:
                        raise MachineError("tape 2 write beyond storage cells")
                    ctx.globs[gi] = (ctx.globs[gi] & ~(1 << pos)) | (w << pos)
                ctx.row[s] = S1 if w else S0
            if j == 5 and w == 1:
                ctx.globs[g5] = 1
            if j == 2:
                pos = ctx.globs[gp]
                ctx.globs[gp] = min(pos + 1, h) if moves[1] == RIGHT \
                    else max(pos - 1, 0)
            ctx.globs[gm] = moves[j - 1]

        seek(p, tape_ns[j - 1], 0)
        p.emit(OP_PY, apply_j)
        p.br(C_GLOB_EQ, g("mvdir"), RIGHT, l_succ)
        p.emit(OP_SR, rt, M_ABS, 0, slots["isroot"])
        p.br(C_REG_EQ, rt, 1, l_skip)
        p.call("succpred", xdd=tape_ns[j - 1], mode=HOOK_PRED, swap=0)
        p.jmp(l_next)
        p.here(l_succ)
        p.call("succpred", xdd=tape_ns[j - 1], mode=HOOK_SUCC, swap=0)
        p.jmp(l_next)
        p.here(l_skip)
        seek(p, tape_ns[j - 1], 1)
        p.here(l_next)

    def next_state(ctx, gs=g("tmstate")):
        ctx.globs[gs] = transition(ctx)[0]

    p.emit(OP_PY, next_state)
    p.jmp(l_step)
    p.here(l_ret)
    p.emit(OP_RET)
    prog.add_proc(p)

    # movement: write back the storage image, decode tape 5, relocate
    p = Proc("moveph", regs={"t": 2})
    rt = p.reg("t")
    l_dec, l_more, l_halt, l_err, l_fin = (p.label() for _ in range(5))

    def writeback(ctx, s=slots["ast"], gi=g("t2img")):
        ctx.row[s] = ctx.globs[gi]

    def blank_t5(ctx, s=slots["t5"]):
        ctx.row[s] = BLANK

    seek(p, ns["xcur"], 0)
    p.emit(OP_PY, writeback)
    p.br(C_GLOB_EQ, g("t5w"), 0, l_halt)
    p.emit(OP_SW, M_ABS, 0, slots["mark"], 1)
    seek(p, ns["xcur"], 1)
    p.call("rp_delete", ns=ns["xt5"])
    p.emit(OP_SR, rt, M_ABS, 0, slots["t5"])
    p.br(C_REG_NE, rt, S1, l_err)
    p.emit(OP_PY, blank_t5)
    p.call("succpred", xdd=ns["xt5"], mode=HOOK_SUCC, swap=0)
    seek(p, ns["xcur"], 0)
    p.call("rp_copy", src=ns["xcur"], dst=ns["xv"])
    p.br(C_DEG_EQ, 0, 0, l_err)
    p.emit(OP_MV_K, 0)
    p.emit(OP_MV_PIN)
    p.call("rp_mm", ns=ns["xv"])
    p.here(l_dec)
    seek(p, ns["xv"], 1)
    seek(p, ns["xt5"], 0)
    p.emit(OP_SR, rt, M_ABS, 0, slots["t5"])
    p.br(C_REG_EQ, rt, S1, l_more)
    seek(p, ns["xt5"], 1)
    p.call("rp_copy", src=ns["xv"], dst=ns["xcur"])
    p.call("rp_delete", ns=ns["xv"])
    seek(p, ns["xcur"], 0)
    call_ff(p, SearchOrder.HEAD_ASCEND, p_mark, 0)
    call_mark_pred(p, w_unmark_past, 0)
    p.emit(OP_RET)
    p.here(l_more)
    p.emit(OP_PY, blank_t5)
    p.call("succpred", xdd=ns["xt5"], mode=HOOK_SUCC, swap=0)
    seek(p, ns["xv"], 0)
    p.call("sweepadv")
    p.br(C_PIN_LAST, 0, 0, l_err)
    p.emit(OP_MV_PIN_D, 1)
    p.emit(OP_MV_PIN)
    p.call("rp_mm", ns=ns["xv"])
    p.jmp(l_dec)
    p.here(l_halt)
    p.emit(OP_GK, g("done"), 1)
    p.emit(OP_RET)
    p.here(l_err)
    p.emit(OP_GK, g(G_ERR), 1)
    p.emit(OP_HALT)
    prog.add_proc(p)

    # main loop
    p = Proc("main", regs={})
    for inst in ns.values():
        base = schema.ns_base[inst]
        p.emit(OP_SW, M_ABS, 0, base + rpath.OFF_TGT, 1)
        p.emit(OP_SW, M_ABS, 0, base + rpath.OFF_IN, 1)
    p.emit(OP_SW, M_ABS, 0, slots["isroot"], 1)
    p.emit(OP_GK, g("first"), 1)
    l_step, l_end = p.label(), p.label()
    p.here(l_step)
    p.emit(OP_TRAP, TRAP_BOUNDARY)
    p.call("initph")
    p.call("localph")
    p.call("moveph")
    p.br(C_GLOB_EQ, g("done"), 1, l_end)
    p.jmp(l_step)
    p.here(l_end)
    p.emit(OP_HALT)
    prog.add_proc(p)

    prog.seal("main")
    return SimConst(m, prog, schema, slots, ns)


# ---------------------------------------------------------------------------
# Drivers and the lock-step oracle
# ---------------------------------------------------------------------------

class _StopSim(Exception):
    pass


@dataclass
class SimConstRun:
    sim: SimConst
    session: Session
    boundaries: list[dict]
    halted: bool
    errored: bool
    steps: int
    moves: int
    max_mem_bits: int | None = None


def _snapshot(sim: SimConst, sess: Session, node: int, pin: int) -> dict:
    g = sess.graph
    storage = sess.storage
    slots = sim.slots
    heads = []
    for j in range(1, 6):
        base = sim.schema.ns_base[sim.ns[f"xt{j}"]]
        heads.append(tuple(v for v in range(g.n)
                           if storage[v][base + rpath.OFF_TGT] == 1))
    return {
        "node": node,
        "pin": pin,
        "storages": tuple(storage[v][slots["ast"]] for v in range(g.n)),
        "pasts": tuple(storage[v][slots["past"]] for v in range(g.n)),
        "marks": sum(storage[v][slots["mark"]] + storage[v][slots["tmp"]]
                     for v in range(g.n)),
        "tapes": tuple(tuple(storage[v][slots[t]] for v in range(g.n))
                       for t in TAPE_NAMES),
        "heads": tuple(heads),
    }


def run_simconst(machine: TuringMachineSpec, graph: PortGraph, start: int,
                 sim_steps: int | None = None,
                 step_limit: int = 10 ** 8,
                 boundary_hook=None, local_hook=None,
                 sim: SimConst | None = None,
                 measure: bool = False) -> SimConstRun:
    """Run the simulator, stopping after ``sim_steps`` simulated steps.

    ``boundary_hook(k, snapshot)`` fires at the instant simulated step k is
    about to begin; ``local_hook(k, snapshot)`` fires within step k once the
    tapes are initialized and the machine is about to run.
    """
    if machine.mem_cells > graph.n:
        raise SimulationError("machine memory tape exceeds node count")
    if sim is None:
        sim = build_simconst(machine)
    sess = Session(graph, sim.schema)
    boundaries: list[dict] = []

    def trap(tag, ctx):
        if tag == TRAP_LOCAL:
            if local_hook is not None:
                local_hook(len(boundaries) - 1,
                           _snapshot(sim, sess, ctx.node, ctx.pin))
            return
        snap = _snapshot(sim, sess, ctx.node, ctx.pin)
        if boundary_hook is not None:
            boundary_hook(len(boundaries), snap)
        boundaries.append(snap)
        if sim_steps is not None and len(boundaries) > sim_steps:
            raise _StopSim()

    sim.program.trap_hook = trap
    halted = False
    errored = False
    run_obj = SimConstRun(sim, sess, boundaries, False, False, -1, -1)
    try:
        tr = sess.run(sim.program, start=start, step_limit=step_limit,
                      measure=measure)
        errored = bool(tr.final_state[0][sim.program.gidx(G_ERR)])
        halted = tr.halted and not errored
        steps, moves = tr.steps, tr.moves
        run_obj.max_mem_bits = tr.max_mem_bits
    except _StopSim:
        steps = moves = -1
    except MachineError:
        errored = True
        steps = moves = -1
    finally:
        sim.program.trap_hook = None
    run_obj.halted = halted
    run_obj.errored = errored
    run_obj.steps = steps
    run_obj.moves = moves
    return run_obj


@dataclass
class DirectRun:
    boundaries: list[dict]
    halted: bool
    errored: bool


def run_direct(machine: TuringMachineSpec, graph: PortGraph, start: int,
               max_steps: int) -> DirectRun:
    """Reference execution of the machine as a plain agent program.

    Records a boundary snapshot before every activation, mirroring the
    simulator's trap instants.
    """
    prog = TuringAgentProgram(machine)
    sess = Session(graph, prog.schema)
    st = prog.st_slot
    node, pin = start, -1
    state = prog.new_state()
    boundaries = []
    halted = False
    errored = False
    for _ in range(max_steps + 1):
        boundaries.append({
            "node": node,
            "pin": pin,
            "storages": tuple(sess.storage[v][st] for v in range(graph.n)),
            "memory": tuple(state),
        })
        try:
            action = prog.activate(state, sess.storage[node],
                                   graph.degree(node), pin)
        except MachineError:
            errored = True
            break
        if action == -1:
            halted = True
            break
        node, pin = graph.step(node, action)
    return DirectRun(boundaries, halted, errored)


def check_simconst_lockstep(machine: TuringMachineSpec, graph: PortGraph,
                            start: int, sim_steps: int,
                            step_limit: int = 10 ** 8) -> list[str]:
    """Compare simulated and direct executions at every step boundary.

    Checks location, incoming port, every node's simulated storage, the
    distributed memory tape against the reference tape-1 content, reset head
    positions, the past flag's placement, and that no scratch marks survive
    between steps.  An empty list means lock-step equivalence held for
    ``sim_steps`` steps or until both executions ended the same way.
    """
    if machine.mem_cells > graph.n:
        return []          # tape does not fit; out of scope for this graph
    violations: list[str] = []
    direct = run_direct(machine, graph, start, sim_steps)
    order = oracle_lexdfs(graph, start).preorder
    sim = build_simconst(machine)

    def on_boundary(k, snap):
        if k >= len(direct.boundaries):
            violations.append(f"step {k}: simulator ran past direct's end")
            return
        ref = direct.boundaries[k]
        if snap["node"] != ref["node"]:
            violations.append(
                f"step {k}: node {snap['node']} != {ref['node']}")
        if snap["pin"] != ref["pin"]:
            violations.append(f"step {k}: pin {snap['pin']} != {ref['pin']}")
        if snap["storages"] != ref["storages"]:
            violations.append(f"step {k}: storages differ")
        if snap["marks"] != 0:
            violations.append(f"step {k}: scratch marks survive")
        tape1 = tuple(snap["tapes"][0][v] for v in order)
        want = tuple(ref["memory"]) + (BLANK,) * (graph.n - len(ref["memory"]))
        if tape1 != want[: graph.n]:
            violations.append(f"step {k}: memory tape differs")
        want_past = tuple(
            1 if k > 0 and v == direct.boundaries[k - 1]["node"] else 0
            for v in range(graph.n))
        if snap["pasts"] != want_past:
            violations.append(f"step {k}: past flags wrong")

    def on_local(k, snap):
        # tapes just initialized: heads must sit on the first cell and the
        # unary inputs must encode the degree and incoming port exactly
        if k >= len(direct.boundaries):
            return
        ref = direct.boundaries[k]
        for j in range(5):
            if snap["heads"][j] != (order[0],):
                violations.append(f"step {k}: tape {j + 1} head not at cell 0")
        def tape(j):
            return [snap["tapes"][j][v] for v in order]
        deg = graph.degree(ref["node"])
        if tape(2) != [S1] * deg + [BLANK] * (graph.n - deg):
            violations.append(f"step {k}: degree tape wrong")
        ones = ref["pin"] + 1 if ref["pin"] >= 0 else 0
        if tape(3) != [S1] * ones + [BLANK] * (graph.n - ones):
            violations.append(f"step {k}: incoming-port tape wrong")
        if any(s != BLANK for s in tape(4)):
            violations.append(f"step {k}: output tape not blank")
        img = ref["storages"][ref["node"]]
        h = machine.storage_cells
        want2 = [S1 if (img >> i) & 1 else S0 for i in range(h)]
        want2 += [BLANK] * (graph.n - h)
        if tape(1) != want2[: graph.n]:
            violations.append(f"step {k}: storage tape wrong")

    run = run_simconst(machine, graph, start, sim_steps=sim_steps,
                       step_limit=step_limit, boundary_hook=on_boundary,
                       local_hook=on_local, sim=sim)
    if len(run.boundaries) <= sim_steps:
        # the simulation ended before the budget: endings must agree
        if direct.errored != run.errored:
            violations.append(
                f"error mismatch: direct={direct.errored} sim={run.errored}")
        elif direct.halted != run.halted:
            violations.append(
                f"halt mismatch: direct={direct.halted} sim={run.halted}")
    return violations
