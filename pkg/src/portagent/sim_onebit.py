"""Simulating a constant-memory agent with a single bit of agent memory.

The simulated program's memory lives in a per-node ``mem`` field; moving it
across an edge costs one bit per trip.  A signed per-node counter ``trans``
(zigzag-coded so fresh storage decodes to zero) tells a visiting agent which
role it is playing: positive counts mark the destination collecting bits,
negative counts mark the departure node handing them out.  The agent itself
remembers nothing but the one bit in flight.

Case analysis at a node u with counter value t (c = memory width):

* arrival with t = c-1, or the very first activation: the transfer is
  complete; deposit the carried final bit, reset t, run the simulated
  program natively against this node's ``mem``/storage, fetch bit 0, set
  t = -1, and move out through the computed port (with c = 1 the whole
  memory is the carried bit and every activation takes this branch).
* 0 <= t < c-1: destination; store the carried bit at position t,
  increment, bounce back.
* -(c-1) < t < 0: departure; fetch bit -t, decrement, bounce back.
* t = -(c-1): departure, last fetch; carry bit c-1, reset t, move out.

The final bit rides along on the last crossing (fetched at t = -(c-1) and
deposited at t = c-1); without that the top memory bit would never arrive.
One simulated step therefore costs exactly 2c-1 simulator moves for c >= 2
and exactly 1 for c = 1.
"""

from __future__ import annotations

from dataclasses import dataclass

from .graphs import PortGraph
from .programs import FlatProgram, HALT, StorageSchema
from .runtime import DEFAULT_STEP_LIMIT, Session
from .sim_const import SimConst, build_simconst
from .turing import MachineError, TuringMachineSpec


class OneBitError(RuntimeError):
    pass


def moves_per_step(c: int) -> int:
    """Simulator moves per simulated step, from the case analysis above."""
    return 2 * c - 1 if c >= 2 else 1


def _zig(t: int) -> int:
    return 2 * t if t >= 0 else -2 * t - 1


def _zag(e: int) -> int:
    return e // 2 if e % 2 == 0 else -(e + 1) // 2


@dataclass
class OneBitSim:
    inner: object                  # the simulated AgentProgram
    program: FlatProgram
    schema: StorageSchema
    c: int
    mem_slot: int
    trans_slot: int


def build_onebit(inner) -> OneBitSim:
    """Wrap a constant-memory agent program for one-bit simulation.

    The inner program's storage fields sit first in the combined schema, so
    its slot numbering stays valid when its activation runs natively against
    a node's row.
    """
    c = max(1, inner.memory_bits)
    schema = StorageSchema()
    for name, width in inner.schema.fields:
        schema.add_field(name, width)
    schema.ns_base = list(inner.schema.ns_base)
    schema.ns_name = list(inner.schema.ns_name)
    mem_slot = schema.add_field("mem", c)
    trans_bits = max(1, (2 * c - 2).bit_length()) if c >= 2 else 0
    trans_slot = schema.add_field("trans", trans_bits)
    cm1 = c - 1

    def step(state, row, degree, pin):
        t = _zag(row[trans_slot])
        if pin < 0 or t == cm1:
            # transfer complete (or the very first activation, which carries
            # nothing): deposit the final bit, then run one simulated step
            if pin >= 0:
                if c >= 2:
                    row[mem_slot] = (row[mem_slot] & ~(1 << cm1)) | (
                        state[0] << cm1)
                else:
                    row[mem_slot] = state[0]
                astate = inner.deserialize(row[mem_slot], inner.memory_bits)
            else:
                # first activation: the zero memory field denotes the
                # simulated program's fresh state
                astate = inner.new_state()
            row[trans_slot] = _zig(0)
            action = inner.activate(astate, row, degree, pin)
            row[mem_slot], _ = inner.serialize(astate)
            if action == HALT:
                return HALT
            state[0] = row[mem_slot] & 1
            if c >= 2:
                row[trans_slot] = _zig(-1)
            return action
        if 0 <= t < cm1:                    # destination, collecting bits
            row[mem_slot] = (row[mem_slot] & ~(1 << t)) | (state[0] << t)
            row[trans_slot] = _zig(t + 1)
            return pin
        if -cm1 < t < 0:                    # departure, handing bits out
            state[0] = (row[mem_slot] >> (-t)) & 1
            row[trans_slot] = _zig(t - 1)
            return pin
        # t == -(c-1): last fetch at the departure node
        state[0] = (row[mem_slot] >> cm1) & 1
        row[trans_slot] = _zig(0)
        return pin

    prog = FlatProgram(f"onebit[{inner.name}]", schema, {"a": 1}, step)
    return OneBitSim(inner, prog, schema, c, mem_slot, trans_slot)


def is_boundary(sim: OneBitSim, row, pin: int) -> bool:
    """True when the next activation at this node begins a simulated step."""
    t = _zag(row[sim.trans_slot])
    if pin < 0:
        return True
    return t == sim.c - 1


def build_cwalker(c: int) -> FlatProgram:
    """A sample constant-memory program with a busy c-bit memory.

    Scrambles its memory from the incoming port each step, walks out through
    ``memory mod degree``, tags nodes with the memory's low bit, and halts
    on the third visit to any one node (which bounds every run by 3n+1
    steps).
    """
    if c < 1:
        raise ValueError("c must be >= 1")
    schema = StorageSchema()
    visits = schema.add_field("visits", 2)
    tag = schema.add_field("tag", 1)
    mask = (1 << c) - 1

    def step(state, row, degree, pin):
        if row[visits] == 3:
            return HALT
        row[visits] += 1
        m = (state[0] * 5 + (pin if pin >= 0 else 0) + 3) & mask
        state[0] = m
        row[tag] = m & 1
        if degree == 0:
            return HALT
        return m % degree

    return FlatProgram(f"cwalker{c}", schema, {"m": c}, step)


# ---------------------------------------------------------------------------
# Reference execution and invariant checking
# ---------------------------------------------------------------------------

@dataclass
class OneBitCheck:
    violations: list[str]
    sim_steps: int
    per_step_moves: list[int]
    halted: bool


def run_inner_direct(inner, graph: PortGraph, start: int, max_steps: int):
    """Reference list of (node, pin, memory-bits, storage snapshot)."""
    sess = Session(graph, inner.schema)
    node, pin = start, -1
    state = inner.new_state()
    out = []
    halted = False
    first = True
    for _ in range(max_steps + 1):
        # before the first step the zero memory field denotes the fresh state
        mem = 0 if first else inner.serialize(state)[0]
        first = False
        out.append({
            "node": node,
            "pin": pin,
            "mem": mem,
            "storages": tuple(tuple(r) for r in sess.storage),
        })
        action = inner.activate(state, sess.storage[node],
                                graph.degree(node), pin)
        if action == HALT:
            halted = True
            break
        node, pin = graph.step(node, action)
    return out, halted


def check_onebit_lockstep(inner, graph: PortGraph, start: int,
                          sim_steps: int,
                          step_limit: int = DEFAULT_STEP_LIMIT) -> OneBitCheck:
    """Drive the one-bit simulator checking the three step invariants.

    At every simulated-step boundary: every other node's transfer counter is
    zero and its storage matches direct execution; the current node's memory
    field (completed by the carried bit) equals the simulated agent's
    memory; and position and incoming port agree with direct execution.
    Also verifies the exact per-step move cost.
    """
    sim = build_onebit(inner)
    ref, ref_halted = run_inner_direct(inner, graph, start, sim_steps)
    n_inner_slots = len(inner.schema.fields)
    sess = Session(graph, sim.schema)
    violations: list[str] = []
    per_step_moves: list[int] = []
    node, pin = start, -1
    state = sim.program.new_state()
    k = 0
    moves = 0
    last_boundary_move = 0
    steps = 0
    halted = False
    while steps < step_limit:
        row = sess.storage[node]
        if is_boundary(sim, row, pin):
            if k > 0:
                per_step_moves.append(moves - last_boundary_move)
            last_boundary_move = moves
            if k < len(ref):
                r = ref[k]
                if node != r["node"] or pin != r["pin"]:
                    violations.append(
                        f"step {k}: at ({node},{pin}) expected "
                        f"({r['node']},{r['pin']})")
                for v in range(graph.n):
                    st = tuple(sess.storage[v][:n_inner_slots])
                    if st != r["storages"][v]:
                        violations.append(f"step {k}: storage differs at {v}")
                        break
                    if v != node and _zag(sess.storage[v][sim.trans_slot]):
                        violations.append(f"step {k}: trans({v}) != 0")
                        break
                mem = row[sim.mem_slot]
                t = _zag(row[sim.trans_slot])
                if t == sim.c - 1 and pin >= 0 and sim.c >= 2:
                    mem = (mem & ~(1 << (sim.c - 1))) | (
                        state[0] << (sim.c - 1))
                elif sim.c == 1 and pin >= 0:
                    mem = state[0]
                if mem != r["mem"]:
                    violations.append(
                        f"step {k}: mem {mem:#x} != {r['mem']:#x}")
            else:
                violations.append(f"step {k}: simulator ran past direct end")
                break
            k += 1
        action = sim.program.activate(state, row, graph.degree(node), pin)
        steps += 1
        if action == HALT:
            halted = True
            break
        node, pin = graph.step(node, action)
        moves += 1
        if k > sim_steps:
            break
    if halted != ref_halted and k <= sim_steps:
        violations.append(f"halt mismatch: sim={halted} direct={ref_halted}")
    want = moves_per_step(sim.c)
    for i, mv in enumerate(per_step_moves):
        if mv != want:
            violations.append(f"step {i}: cost {mv} != {want}")
    return OneBitCheck(violations, k - 1 if k else 0, per_step_moves, halted)


# ---------------------------------------------------------------------------
# Full chain: machine -> constant-memory simulator -> one-bit simulator
# ---------------------------------------------------------------------------

class _StopChain(Exception):
    pass


@dataclass
class ChainRun:
    sim: OneBitSim
    inner_sim: SimConst
    session: Session
    steps: int
    halted: bool
    errored: bool
    final_node: int
    machine_steps: int = 0


def build_chain(machine: TuringMachineSpec) -> tuple[OneBitSim, SimConst]:
    inner = build_simconst(machine)
    return build_onebit(inner.program), inner


def run_chain_fast(machine: TuringMachineSpec, graph: PortGraph, start: int,
                   step_limit: int = DEFAULT_STEP_LIMIT,
                   built: tuple[OneBitSim, SimConst] | None = None,
                   machine_steps: int | None = None,
                   machine_hook=None) -> ChainRun:
    """Hand-inlined executor for the one-bit protocol around any program.

    Identical semantics to running the wrapped program through the generic
    runtime (cross-checked in the test suite); the protocol's bounce moves
    dominate chain runs, so they are executed without per-step dispatch
    overhead.  ``machine_hook(k, node, pin, storage)`` fires each time the
    innermost machine begins a simulated step; ``machine_steps`` stops the
    run after that many machine steps.
    """
    sim, inner_sim = built if built is not None else build_chain(machine)
    inner = sim.inner
    c = sim.c
    cm1 = c - 1
    mem_slot, trans_slot = sim.mem_slot, sim.trans_slot
    sess = Session(graph, sim.schema)
    storage = sess.storage
    nbr, rev = graph.nbr, graph.rev
    node, pin = start, -1
    a = 0
    steps = 0
    halted = False
    errored = False
    zig0 = _zig(0)
    zigm1 = _zig(-1) if c >= 2 else 0
    msteps = 0

    if inner_sim is not None and (machine_hook is not None
                                  or machine_steps is not None):
        from .sim_const import TRAP_BOUNDARY

        def trap(tag, ctx):
            nonlocal msteps
            if tag != TRAP_BOUNDARY:
                return
            if machine_hook is not None:
                machine_hook(msteps, ctx.node, ctx.pin, storage)
            msteps += 1
            if machine_steps is not None and msteps > machine_steps:
                raise _StopChain()

        inner_sim.program.trap_hook = trap

    try:
        while steps < step_limit:
            row = storage[node]
            e = row[trans_slot]
            t = e // 2 if e % 2 == 0 else -(e + 1) // 2
            steps += 1
            if pin < 0 or t == cm1:
                if pin >= 0:
                    if c >= 2:
                        row[mem_slot] = (row[mem_slot] & ~(1 << cm1)) | (
                            a << cm1)
                    else:
                        row[mem_slot] = a
                    astate = inner.deserialize(row[mem_slot],
                                               inner.memory_bits)
                else:
                    astate = inner.new_state()
                row[trans_slot] = zig0
                action = inner.activate(astate, row, len(nbr[node]), pin,
                                        node)
                row[mem_slot], _ = inner.serialize(astate)
                if action == HALT:
                    halted = True
                    break
                a = row[mem_slot] & 1
                if c >= 2:
                    row[trans_slot] = zigm1
                pin_next = rev[node][action]
                node = nbr[node][action]
                pin = pin_next
                continue
            if 0 <= t < cm1:
                row[mem_slot] = (row[mem_slot] & ~(1 << t)) | (a << t)
                row[trans_slot] = _zig(t + 1)
            elif -cm1 < t < 0:
                a = (row[mem_slot] >> (-t)) & 1
                row[trans_slot] = _zig(t - 1)
            else:
                a = (row[mem_slot] >> cm1) & 1
                row[trans_slot] = zig0
            pin_next = rev[node][pin]
            node = nbr[node][pin]
            pin = pin_next
    except MachineError:
        errored = True
    except _StopChain:
        pass
    finally:
        if inner_sim is not None:
            inner_sim.program.trap_hook = None
    if inner_sim is not None and not errored and halted:
        from .lexdfs import G_ERR
        astate = inner.deserialize(storage[node][mem_slot],
                                   inner.memory_bits)
        errored = bool(astate[0][inner_sim.program.gidx(G_ERR)])
        halted = not errored
    return ChainRun(sim, inner_sim, sess, steps, halted, errored, node,
                    msteps)


def check_chain_lockstep(machine: TuringMachineSpec, graph: PortGraph,
                         start: int, machine_steps: int,
                         step_limit: int = DEFAULT_STEP_LIMIT,
                         built=None) -> list[str]:
    """Compare the chained simulation against direct machine execution.

    At every machine-step boundary (observed through the inner simulator's
    loop trap) the location, incoming port, and all simulated storages must
    match; runs that end early must end the same way.
    """
    from .sim_const import run_direct
    direct = run_direct(machine, graph, start, machine_steps)
    violations: list[str] = []
    if built is None:
        built = build_chain(machine)
    sim, inner_sim = built
    ast_slot = inner_sim.slots["ast"]

    def hook(k, node, pin, storage):
        if k >= len(direct.boundaries):
            violations.append(f"mstep {k}: chain ran past direct's end")
            return
        ref = direct.boundaries[k]
        if node != ref["node"] or pin != ref["pin"]:
            violations.append(
                f"mstep {k}: at ({node},{pin}) expected "
                f"({ref['node']},{ref['pin']})")
        st = tuple(storage[v][ast_slot] for v in range(graph.n))
        if st != ref["storages"]:
            violations.append(f"mstep {k}: storages differ")

    run = run_chain_fast(machine, graph, start, step_limit=step_limit,
                         built=built, machine_steps=machine_steps,
                         machine_hook=hook)
    if run.machine_steps <= machine_steps:
        if direct.errored != run.errored:
            violations.append(
                f"error mismatch: direct={direct.errored} chain={run.errored}")
        elif direct.halted != run.halted:
            violations.append(
                f"halt mismatch: direct={direct.halted} chain={run.halted}")
        if run.halted and direct.halted:
            st = tuple(run.session.storage[v][ast_slot]
                       for v in range(graph.n))
            if st != direct.boundaries[-1]["storages"]:
                violations.append("final storages differ")
            if run.final_node != direct.boundaries[-1]["node"]:
                violations.append("final locations differ")
    return violations
