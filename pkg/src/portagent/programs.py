"""Agent programs as explicit small state machines.

An agent program's persistent memory is exactly what survives between
activations: a set of 1-to-few-bit global registers plus, for structured
programs, a call stack of (procedure, program counter, local registers)
frames.  The runtime serializes that state to a bit string after every step,
which is what makes memory budgets measurable rather than asserted.

Procedures are written against a tiny instruction set.  Local computation
(register moves, branches, storage reads/writes at the current node) is free
within an activation; an activation ends when the program emits a move or
halts.  Port numbers are never stored in registers: any port an instruction
needs is derived from the incoming port of the current activation, which is
how the underlying model avoids log-degree memory.
"""

from __future__ import annotations

from dataclasses import dataclass, field

HALT = -1          # action value returned by activate()
INITIAL = -1       # pin value at the very first activation

# --- opcodes ----------------------------------------------------------------
OP_J = 0           # (target,)
OP_B = 1           # (cond, a, b, target)
OP_RK = 2          # (reg, const)
OP_GK = 3          # (gidx, const)
OP_RG = 4          # (reg, gidx)
OP_GR = 5          # (gidx, reg)
OP_SR = 6          # (reg, mode, a, off)    reg := storage field
OP_SW = 7          # (mode, a, off, const)  storage field := const
OP_SWR = 8         # (mode, a, off, reg)    storage field := reg
OP_PRED = 9        # (kind_reg, ns_reg, gidx)  globals[gidx] = pred(row, base)
OP_WI = 10         # (instr_reg, ns_reg)    apply write-instruction table entry
OP_CALL = 11       # (proc_id, args)  args = ((callee_reg, is_reg, src), ...)
OP_RET = 12        # ()
OP_MV_PIN = 13     # ()
OP_MV_K = 14       # (port,)
OP_MV_PIN_D = 15   # (delta,)
OP_MV_LAST = 16    # ()
OP_HALT = 17       # ()
OP_PY = 18         # (fn,)   fn(ctx) for local computation
OP_RCOPY = 19      # (dst_reg, src_reg)
OP_GXOR = 20       # (gidx, const)
OP_TRAP = 21       # (tag,)  invoke the program's trap hook, if any

# --- branch condition kinds --------------------------------------------------
C_REG_EQ = 0       # regs[a] == b
C_REG_NE = 1
C_GLOB_EQ = 2
C_GLOB_NE = 3
C_PIN_LAST = 4     # pin == degree - 1
C_PIN_EQ = 5       # pin == b
C_DEG_EQ = 6       # degree == b
C_PIN_INITIAL = 7  # pin < 0
C_TRUE = 8
C_PY = 9           # b(ctx) truthy  (a unused, fn in b)

# storage addressing modes
M_ABS = 0          # slot = off
M_NS = 1           # slot = ns_base[regs[a]] + off


class BudgetError(RuntimeError):
    """A register write exceeded its declared width."""


@dataclass
class StorageSchema:
    """Fixed per-node bit-field layout shared by all nodes.

    Fields are flat (name -> width); groups of related fields are addressed
    through numbered namespaces whose base slots live in ``ns_base``.
    """

    fields: list[tuple[str, int]] = field(default_factory=list)
    ns_base: list[int] = field(default_factory=list)
    ns_name: list[str] = field(default_factory=list)

    def add_field(self, name: str, width: int) -> int:
        slot = len(self.fields)
        self.fields.append((name, width))
        return slot

    def add_group(self, name: str, group_fields: list[tuple[str, int]]) -> int:
        """Add a namespaced field group; returns its namespace id."""
        ns = len(self.ns_base)
        self.ns_base.append(len(self.fields))
        self.ns_name.append(name)
        for fname, width in group_fields:
            self.add_field(f"{name}.{fname}", width)
        return ns

    @property
    def n_slots(self) -> int:
        return len(self.fields)

    @property
    def total_bits(self) -> int:
        return sum(w for _, w in self.fields)

    def slot(self, name: str) -> int:
        for i, (fname, _) in enumerate(self.fields):
            if fname == name:
                return i
        raise KeyError(name)

    def new_storage(self, n_nodes: int) -> list[list[int]]:
        k = self.n_slots
        return [[0] * k for _ in range(n_nodes)]


class Label:
    __slots__ = ("pos",)

    def __init__(self) -> None:
        self.pos: int | None = None


class Proc:
    """One procedure: named local registers plus an instruction list."""

    def __init__(self, name: str, regs: dict[str, int] | None = None):
        self.name = name
        self.reg_names: list[str] = list(regs or {})
        self.reg_widths: list[int] = list((regs or {}).values())
        self.code: list[tuple] = []
        self.calls: set[str] = set()
        self._patches: list[tuple[int, int, Label]] = []

    # -- assembly helpers ------------------------------------------------
    def reg(self, name: str) -> int:
        return self.reg_names.index(name)

    def label(self) -> Label:
        return Label()

    def here(self, lab: Label) -> None:
        lab.pos = len(self.code)

    def emit(self, *instr) -> None:
        self.code.append(tuple(instr))

    def jmp(self, lab: Label) -> None:
        self._patches.append((len(self.code), 1, lab))
        self.emit(OP_J, lab)

    def br(self, cond: int, a, b, lab: Label) -> None:
        self._patches.append((len(self.code), 4, lab))
        self.emit(OP_B, cond, a, b, lab)

    def call(self, proc_name: str, **args) -> None:
        """Args: callee reg name -> ('r', caller reg name) or int constant."""
        self.calls.add(proc_name)
        self.emit(OP_CALL, proc_name, tuple(args.items()))

    def seal(self, proc_ids: dict[str, int], pred_ids=None) -> None:
        for pos, argi, lab in self._patches:
            if lab.pos is None:
                raise ValueError(f"{self.name}: unresolved label")
            instr = list(self.code[pos])
            instr[argi] = lab.pos
            self.code[pos] = tuple(instr)
        self._patches.clear()
        for i, instr in enumerate(self.code):
            if instr[0] == OP_CALL:
                name, args = instr[1], instr[2]
                resolved = []
                for reg_name, src in args:
                    # resolution to callee reg index happens at build time
                    resolved.append((reg_name, src))
                self.code[i] = (OP_CALL, proc_ids[name], tuple(resolved))


class StackProgram:
    """An agent program made of composable procedures.

    ``globals_`` are program-wide registers (success flags, parity bits, a
    simulated machine's control state).  The serialized memory snapshot is
    globals plus the frame stack; its declared width is computed from the
    static call graph, which is acyclic by construction.
    """

    def __init__(self, name: str, schema: StorageSchema,
                 globals_: dict[str, int] | None = None):
        self.name = name
        self.schema = schema
        self.glob_names: list[str] = list(globals_ or {})
        self.glob_widths: list[int] = list((globals_ or {}).values())
        self.procs: list[Proc] = []
        self.proc_ids: dict[str, int] = {}
        self.preds: list = []          # kind id -> fn(row, base) -> bool
        self.pred_names: dict[str, int] = {}
        self.winstrs: list[tuple] = []  # instruction id -> ((mode, off, val), ...)
        self.winstr_names: dict[str, int] = {}
        self.entry = 0
        self.sealed = False
        self.memory_bits = 0
        self.trap_hook = None    # harness instrumentation; not agent state
        self._pc_bits: list[int] = []
        self._frame_fixed_bits: list[int] = []

    # -- construction ------------------------------------------------------
    def gidx(self, name: str) -> int:
        return self.glob_names.index(name)

    def add_proc(self, proc: Proc) -> Proc:
        self.proc_ids[proc.name] = len(self.procs)
        self.procs.append(proc)
        return proc

    def add_pred(self, name: str, fn) -> int:
        kid = len(self.preds)
        if kid >= 16:
            raise ValueError("predicate table exceeds its register width")
        self.preds.append(fn)
        self.pred_names[name] = kid
        return kid

    def add_winstr(self, name: str, writes: list[tuple[int, int, int]]) -> int:
        wid = len(self.winstrs)
        if wid >= 16:
            raise ValueError("write-instruction table exceeds its register width")
        self.winstrs.append(tuple(writes))
        self.winstr_names[name] = wid
        return wid

    def seal(self, entry: str) -> None:
        for p in self.procs:
            p.seal(self.proc_ids)
        # resolve CALL arg names to callee reg indices
        for p in self.procs:
            for i, instr in enumerate(p.code):
                if instr[0] == OP_CALL:
                    pid, args = instr[1], instr[2]
                    callee = self.procs[pid]
                    resolved = tuple(
                        (callee.reg(rn),
                         1 if isinstance(src, tuple) else 0,
                         p.reg(src[1]) if isinstance(src, tuple) else src)
                        for rn, src in args)
                    p.code[i] = (OP_CALL, pid, resolved)
        self.entry = self.proc_ids[entry]
        nprocs = max(1, len(self.procs))
        self._proc_bits = max(1, (nprocs - 1).bit_length())
        self._pc_bits = [max(1, (max(1, len(p.code)) - 1).bit_length())
                         for p in self.procs]
        self._frame_fixed_bits = [
            self._proc_bits + self._pc_bits[i] + sum(p.reg_widths)
            for i, p in enumerate(self.procs)]
        self.memory_bits = self._static_memory_bits()
        self.sealed = True

    def _static_memory_bits(self) -> int:
        # deepest chain over the static (acyclic) call graph, any entry
        memo: dict[int, int] = {}
        fmemo: dict[int, int] = {}

        def depth_bits(pid: int) -> int:
            if pid in memo:
                return memo[pid]
            memo[pid] = 0  # guard; call graph must be acyclic
            fmemo[pid] = 0
            best = 0
            bestf = 0
            p = self.procs[pid]
            for instr in p.code:
                if instr[0] == OP_CALL:
                    b = depth_bits(instr[1])
                    if b > best:
                        best = b
                    bestf = max(bestf, fmemo[instr[1]])
            memo[pid] = self._frame_fixed_bits[pid] + best
            fmemo[pid] = 1 + bestf
            return memo[pid]

        worst = max(depth_bits(pid) for pid in range(len(self.procs)))
        max_frames = max(fmemo.values())
        self._depth_bits = max(1, max_frames.bit_length())
        return sum(self.glob_widths) + self._depth_bits + worst

    # -- runtime interface ---------------------------------------------------
    def new_state(self, entry: str | None = None, **args):
        pid = self.entry if entry is None else self.proc_ids[entry]
        proc = self.procs[pid]
        regs = [0] * len(proc.reg_widths)
        for name, val in args.items():
            regs[proc.reg(name)] = val
        return [[0] * len(self.glob_widths), [[pid, 0, regs]]]

    def activate(self, state, row, degree, pin, node=-1) -> int:
        """Run micro-ops until a move or halt; mutates state and row.

        ``node`` exists only so trap hooks can correlate global state; no
        instruction can observe it (anonymity is preserved by construction).
        """
        globs, stack = state
        frame = stack[-1]
        procs = self.procs
        code = procs[frame[0]].code
        pc = frame[1]
        regs = frame[2]
        preds = self.preds
        winstrs = self.winstrs
        ns_base = self.schema.ns_base or (0,)
        while True:
            op = code[pc]
            o = op[0]
            if o == OP_B:
                cond, a, b, target = op[1], op[2], op[3], op[4]
                if cond == C_REG_EQ:
                    t = regs[a] == b
                elif cond == C_REG_NE:
                    t = regs[a] != b
                elif cond == C_GLOB_EQ:
                    t = globs[a] == b
                elif cond == C_GLOB_NE:
                    t = globs[a] != b
                elif cond == C_PIN_LAST:
                    t = pin == degree - 1
                elif cond == C_PIN_EQ:
                    t = pin == b
                elif cond == C_DEG_EQ:
                    t = degree == b
                elif cond == C_PIN_INITIAL:
                    t = pin < 0
                elif cond == C_TRUE:
                    t = True
                else:  # C_PY
                    t = b(_Ctx(globs, regs, row, degree, pin, node))
                pc = target if t else pc + 1
            elif o == OP_SR:
                reg, mode, a, off = op[1], op[2], op[3], op[4]
                regs[reg] = row[off if mode == M_ABS else ns_base[regs[a]] + off]
                pc += 1
            elif o == OP_J:
                pc = op[1]
            elif o == OP_MV_PIN:
                frame[1] = pc + 1
                return pin
            elif o == OP_SW:
                mode, a, off, val = op[1], op[2], op[3], op[4]
                row[off if mode == M_ABS else ns_base[regs[a]] + off] = val
                pc += 1
            elif o == OP_PRED:
                kind_reg, ns_reg, gidx = op[1], op[2], op[3]
                globs[gidx] = 1 if preds[regs[kind_reg]](row, ns_base[regs[ns_reg]]) else 0
                pc += 1
            elif o == OP_RK:
                regs[op[1]] = op[2]
                pc += 1
            elif o == OP_GK:
                globs[op[1]] = op[2]
                pc += 1
            elif o == OP_MV_PIN_D:
                frame[1] = pc + 1
                return pin + op[1]
            elif o == OP_CALL:
                frame[1] = pc + 1
                pid, args = op[1], op[2]
                nregs = [0] * len(procs[pid].reg_widths)
                for dst, is_reg, src in args:
                    nregs[dst] = regs[src] if is_reg else src
                frame = [pid, 0, nregs]
                stack.append(frame)
                code = procs[pid].code
                pc = 0
                regs = nregs
            elif o == OP_RET:
                stack.pop()
                if not stack:
                    return HALT
                frame = stack[-1]
                code = procs[frame[0]].code
                pc = frame[1]
                regs = frame[2]
            elif o == OP_MV_K:
                frame[1] = pc + 1
                return op[1]
            elif o == OP_MV_LAST:
                frame[1] = pc + 1
                return degree - 1
            elif o == OP_RG:
                regs[op[1]] = globs[op[2]]
                pc += 1
            elif o == OP_GR:
                globs[op[1]] = regs[op[2]]
                pc += 1
            elif o == OP_SWR:
                mode, a, off, reg = op[1], op[2], op[3], op[4]
                row[off if mode == M_ABS else ns_base[regs[a]] + off] = regs[reg]
                pc += 1
            elif o == OP_WI:
                instr_reg, ns_reg = op[1], op[2]
                base = ns_base[regs[ns_reg]]
                for mode, off, val in winstrs[regs[instr_reg]]:
                    row[off if mode == M_ABS else base + off] = val
                pc += 1
            elif o == OP_RCOPY:
                regs[op[1]] = regs[op[2]]
                pc += 1
            elif o == OP_GXOR:
                globs[op[1]] ^= op[2]
                pc += 1
            elif o == OP_PY:
                op[1](_Ctx(globs, regs, row, degree, pin, node))
                pc += 1
            elif o == OP_TRAP:
                if self.trap_hook is not None:
                    self.trap_hook(op[1], _Ctx(globs, regs, row, degree, pin,
                                               node))
                pc += 1
            elif o == OP_HALT:
                frame[1] = pc
                return HALT
            else:
                raise RuntimeError(f"bad opcode {o}")

    def serialize(self, state) -> tuple[int, int]:
        """Pack memory to (value, nbits); globals in the low bits."""
        globs, stack = state
        value = 0
        pos = 0
        for v, w in zip(globs, self.glob_widths):
            value |= (v & ((1 << w) - 1)) << pos
            pos += w
        value |= len(stack) << pos
        pos += self._depth_bits
        for pid, pc, regs in stack:
            value |= pid << pos
            pos += self._proc_bits
            value |= pc << pos
            pos += self._pc_bits[pid]
            for v, w in zip(regs, self.procs[pid].reg_widths):
                value |= (v & ((1 << w) - 1)) << pos
                pos += w
        return value, pos

    def deserialize(self, value: int, nbits: int):
        globs = []
        pos = 0
        for w in self.glob_widths:
            globs.append((value >> pos) & ((1 << w) - 1))
            pos += w
        depth = (value >> pos) & ((1 << self._depth_bits) - 1)
        pos += self._depth_bits
        stack = []
        for _ in range(depth):
            pid = (value >> pos) & ((1 << self._proc_bits) - 1)
            pos += self._proc_bits
            pc = (value >> pos) & ((1 << self._pc_bits[pid]) - 1)
            pos += self._pc_bits[pid]
            regs = []
            for w in self.procs[pid].reg_widths:
                regs.append((value >> pos) & ((1 << w) - 1))
                pos += w
            stack.append([pid, pc, regs])
        return [globs, stack]


class _Ctx:
    """Context handed to OP_PY / C_PY / trap callbacks.

    ``node`` is harness plumbing for traps; program logic must not read it.
    """

    __slots__ = ("globs", "regs", "row", "degree", "pin", "node")

    def __init__(self, globs, regs, row, degree, pin, node=-1):
        self.globs = globs
        self.regs = regs
        self.row = row
        self.degree = degree
        self.pin = pin
        self.node = node


class FlatProgram:
    """An agent program whose activation needs no inter-step control state.

    Memory is exactly the declared global registers; ``step`` is a pure
    function of (memory, storage row, degree, pin) that mutates the row in
    place and returns (new memory values, action).
    """

    def __init__(self, name: str, schema: StorageSchema,
                 globals_: dict[str, int], step_fn):
        self.name = name
        self.schema = schema
        self.glob_names = list(globals_)
        self.glob_widths = list(globals_.values())
        self.memory_bits = sum(self.glob_widths)
        self._step = step_fn

    def new_state(self):
        return [0] * len(self.glob_widths)

    def activate(self, state, row, degree, pin, node=-1) -> int:
        return self._step(state, row, degree, pin)

    def serialize(self, state) -> tuple[int, int]:
        value = 0
        pos = 0
        for v, w in zip(state, self.glob_widths):
            value |= (v & ((1 << w) - 1)) << pos
            pos += w
        return value, pos

    def deserialize(self, value: int, nbits: int):
        state = []
        pos = 0
        for w in self.glob_widths:
            state.append((value >> pos) & ((1 << w) - 1))
            pos += w
        return state
