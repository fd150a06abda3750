"""Five-tape Turing machines formalizing an agent's local computation.

Tape 1 is the agent's persistent memory; tape 2 images the current node's
storage; tapes 3 and 4 carry the degree and the incoming port in unary;
tape 5 receives the outgoing port in unary.  Every activation starts the
machine in its initial state with all heads at cell 0; tape 1 keeps its
content across activations, the others are re-initialized.

Unary conventions.  Tape 3 holds ``degree`` ones.  Tapes 4 and 5 are
one-shifted: incoming port ``q`` arrives as ``q+1`` ones (an empty tape 4
therefore unambiguously encodes the very first activation, which has no
incoming port), and a machine emits port ``p`` by writing ``p+1`` ones, so
an untouched tape 5 cleanly means "halt" rather than colliding with port 0.

The transition function reads and writes bits only; a blank cell reads as 0
and writing the value just read leaves the cell untouched (so heads may
drift over unused tapes without consuming tape cells).  Tapes 3 and 4 are
read-only: a transition that would change one of their cells is rejected.
A left move at cell 0 stays put.
"""

from __future__ import annotations

from dataclasses import dataclass, field

# tape cell symbols
BLANK, S0, S1 = 0, 1, 2
LEFT, RIGHT = 0, 1

N_TAPES = 5
HALT = -1


class MachineError(RuntimeError):
    pass


class MachineFormatError(ValueError):
    pass


def _expose(sym: int) -> int:
    return 1 if sym == S1 else 0


@dataclass
class TuringMachineSpec:
    """Transition table plus declared tape budgets.

    ``delta`` maps (state, exposed-bits-tuple) to (state', written-bits,
    moves); ``mem_cells`` and ``storage_cells`` bound tape-1 and tape-2
    usage (the g and h of the memory/storage complexity).
    """

    name: str
    n_states: int
    q0: int
    q1: int
    delta: dict[tuple[int, tuple[int, ...]], tuple[int, tuple[int, ...], tuple[int, ...]]]
    mem_cells: int = 0
    storage_cells: int = 1

    def validate(self) -> None:
        for (s, reads), (s2, writes, moves) in self.delta.items():
            if not (0 <= s < self.n_states and 0 <= s2 < self.n_states):
                raise MachineFormatError(f"state out of range in {s}->{s2}")
            if s == self.q1:
                raise MachineFormatError("terminal state has outgoing transition")
            if len(reads) != N_TAPES or len(writes) != N_TAPES \
                    or len(moves) != N_TAPES:
                raise MachineFormatError("transition arity != 5")


def unary_encode(value: int) -> list[int]:
    """Value k as k ones."""
    return [S1] * value


def unary_decode(tape: list[int]) -> int:
    """Count leading ones; anything after the first non-one must be blank."""
    k = 0
    while k < len(tape) and tape[k] == S1:
        k += 1
    for sym in tape[k:]:
        if sym == S1:
            raise MachineError("non-contiguous unary tape")
    return k


def tm_step(spec: TuringMachineSpec, tapes: list[list[int]],
            heads: list[int], state: int) -> int:
    """Apply one transition in place; returns the new state."""
    if state == spec.q1:
        raise MachineError("step from terminal state")
    reads = tuple(_expose(tapes[j][heads[j]]) if heads[j] < len(tapes[j])
                  else 0 for j in range(N_TAPES))
    key = (state, reads)
    if key not in spec.delta:
        raise MachineError(f"missing transition for state {state} reads {reads}")
    state2, writes, moves = spec.delta[key]
    for j in range(N_TAPES):
        h = heads[j]
        tape = tapes[j]
        while h >= len(tape):
            tape.append(BLANK)
        cur = tape[h]
        w = writes[j]
        if w != _expose(cur):
            if j in (2, 3):
                raise MachineError(f"write to read-only tape {j + 1}")
            tape[h] = S1 if w else S0
        heads[j] = h + 1 if moves[j] == RIGHT else max(0, h - 1)
    return state2


@dataclass
class ActivationResult:
    memory: list[int]          # tape-1 content after the run
    storage_bits: int          # tape-2 image packed low-bit-first
    action: int                # out port, or HALT
    tm_steps: int
    tapes: list[list[int]] | None = None


def run_activation(spec: TuringMachineSpec, memory: list[int],
                   storage_bits: int, degree: int, pin: int,
                   tm_step_limit: int = 10 ** 6,
                   keep_tapes: bool = False,
                   step_hook=None) -> ActivationResult:
    """One agent step's local computation.

    ``pin`` may be -1 for the very first activation (tape 4 left empty).
    """
    h = spec.storage_cells
    tapes = [
        list(memory),
        [S1 if (storage_bits >> i) & 1 else S0 for i in range(h)],
        unary_encode(degree),
        unary_encode(pin + 1) if pin >= 0 else [],
        [],
    ]
    heads = [0] * N_TAPES
    state = spec.q0
    steps = 0
    while state != spec.q1:
        if steps >= tm_step_limit:
            raise MachineError(f"TM step limit {tm_step_limit} exceeded")
        if step_hook is not None:
            step_hook(steps, state, tapes, heads)
        state = tm_step(spec, tapes, heads, state)
        steps += 1
        if len(tapes[0]) > spec.mem_cells and any(
                s != BLANK for s in tapes[0][spec.mem_cells:]):
            raise MachineError("tape 1 exceeded declared mem_cells")
        if len(tapes[1]) > h and any(s != BLANK for s in tapes[1][h:]):
            raise MachineError("tape 2 exceeded declared storage_cells")
    ones = unary_decode(tapes[4])
    if ones == 0:
        action = HALT
    else:
        action = ones - 1
        if action >= degree:
            raise MachineError(f"emitted port {action} >= degree {degree}")
    new_storage = 0
    for i in range(h):
        if i < len(tapes[1]) and tapes[1][i] == S1:
            new_storage |= 1 << i
    mem = list(tapes[0][:spec.mem_cells])
    while len(mem) < spec.mem_cells:
        mem.append(BLANK)
    return ActivationResult(mem, new_storage, action, steps,
                            tapes if keep_tapes else None)


# ---------------------------------------------------------------------------
# Builder
# ---------------------------------------------------------------------------

class MachineBuilder:
    """Assemble transition tables from partially specified rows.

    A row fixes some tapes' read bits (others are wildcards), the bits to
    write (None writes back what was read), and all five head moves.
    Wildcards expand to every bit combination, which keeps the table total
    over reachable configurations without spelling out 32 rows by hand.
    """

    def __init__(self, name: str):
        self.name = name
        self._n = 0
        self.rows: list[tuple] = []

    def state(self) -> int:
        self._n += 1
        return self._n - 1

    def on(self, state: int, reads: dict[int, int], nxt: int,
           writes: dict[int, int] | None = None,
           moves: str = "RRRRR") -> None:
        """reads/writes keyed by tape index 0..4; moves as a 5-char L/R string."""
        self.rows.append((state, dict(reads), nxt, dict(writes or {}),
                          moves))

    def build(self, q0: int, q1: int, mem_cells: int = 0,
              storage_cells: int = 1) -> TuringMachineSpec:
        delta = {}
        for state, reads, nxt, writes, moves in self.rows:
            mv = tuple(RIGHT if c == "R" else LEFT for c in moves)
            free = [j for j in range(N_TAPES) if j not in reads]
            for mask in range(1 << len(free)):
                rb = [0] * N_TAPES
                for j, b in reads.items():
                    rb[j] = b
                for k, j in enumerate(free):
                    rb[j] = (mask >> k) & 1
                wb = list(rb)
                for j, b in writes.items():
                    wb[j] = b
                key = (state, tuple(rb))
                val = (nxt, tuple(wb), mv)
                if key in delta and delta[key] != val:
                    raise MachineFormatError(f"conflicting rows for {key}")
                delta[key] = val
        spec = TuringMachineSpec(self.name, self._n, q0, q1, delta,
                                 mem_cells, storage_cells)
        spec.validate()
        return spec


def build_bouncer() -> TuringMachineSpec:
    """Echo the incoming port; on the very first activation take port 0.

    Terminal transitions move left so head excursions stay within the
    degree, which keeps the machine runnable on distributed tapes of n
    cells.
    """
    b = MachineBuilder("bouncer")
    q0, qc, q1 = b.state(), b.state(), b.state()
    b.on(q0, {3: 0}, q1, {4: 1}, moves="LLLLL")  # first activation: port 0
    b.on(q0, {3: 1}, qc, {4: 1})                 # copy tape 4 to tape 5
    b.on(qc, {3: 1}, qc, {4: 1})
    b.on(qc, {3: 0}, q1, moves="LLLLL")
    return b.build(q0, q1, mem_cells=0, storage_cells=1)


def build_port_zero_walker() -> TuringMachineSpec:
    """Exit port 0, flagging each node; halt on a node already flagged."""
    b = MachineBuilder("port-zero-walker")
    q0, q1 = b.state(), b.state()
    b.on(q0, {1: 1}, q1, moves="LLLLL")               # flag set: halt
    b.on(q0, {1: 0}, q1, {1: 1, 4: 1}, moves="LLLLL")  # set flag, port 0
    return b.build(q0, q1, mem_cells=0, storage_cells=1)


def build_rotor_walker() -> TuringMachineSpec:
    """Exit port (pin + 1) mod degree (port 0 on the first activation).

    Plants a one-cell sentinel on tape 1 so the rewind can find cell 0, then
    scans tapes 3 and 4 together to detect wraparound, rewinds, and emits.
    """
    b = MachineBuilder("rotor-walker")
    q0 = b.state()
    qscan = b.state()
    qrw_nw = b.state()    # rewind, no wrap
    qrw_w = b.state()     # rewind, wrap
    qem = b.state()       # emit pin+2 ones
    q1 = b.state()
    b.on(q0, {3: 0}, q1, {4: 1}, moves="LLLLL")  # first activation: port 0
    b.on(q0, {3: 1}, qscan, {0: 1})              # sentinel, start scan
    b.on(qscan, {3: 1}, qscan)
    b.on(qscan, {3: 0, 2: 1}, qrw_nw, moves="LLLLL")
    b.on(qscan, {3: 0, 2: 0}, qrw_w, moves="LLLLL")
    b.on(qrw_nw, {0: 0}, qrw_nw, moves="LLLLL")
    b.on(qrw_w, {0: 0}, qrw_w, moves="LLLLL")
    b.on(qrw_nw, {0: 1}, qem, {4: 1})            # cell 0: first emitted one
    b.on(qrw_w, {0: 1}, q1, {4: 1}, moves="LLLLL")  # wrap: one one = port 0
    b.on(qem, {3: 1}, qem, {4: 1})
    b.on(qem, {3: 0}, q1, {4: 1}, moves="LLLLL")    # the trailing +1 one
    return b.build(q0, q1, mem_cells=1, storage_cells=1)


SAMPLE_MACHINES = {
    "bouncer": build_bouncer,
    "portzero": build_port_zero_walker,
    "rotor": build_rotor_walker,
}


# ---------------------------------------------------------------------------
# File format: line 1 "tm 1"; line 2 "q0 <id> q1 <id> states <n> mem <g>
# storage <h>"; then one line per transition: "<s> <r5> -> <s'> <w5> <m5>"
# with r5/w5 five bits and m5 five letters from {L,R}.
# ---------------------------------------------------------------------------

def machine_dumps(spec: TuringMachineSpec) -> str:
    lines = ["tm 1",
             f"q0 {spec.q0} q1 {spec.q1} states {spec.n_states} "
             f"mem {spec.mem_cells} storage {spec.storage_cells}"]
    for (s, reads), (s2, writes, moves) in sorted(spec.delta.items()):
        r = "".join(str(b) for b in reads)
        w = "".join(str(b) for b in writes)
        m = "".join("R" if x == RIGHT else "L" for x in moves)
        lines.append(f"{s} {r} -> {s2} {w} {m}")
    return "\n".join(lines) + "\n"


def machine_loads(text: str, name: str = "machine") -> TuringMachineSpec:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0].strip() != "tm 1":
        raise MachineFormatError("line 1: expected 'tm 1'")
    hdr = lines[1].split()
    try:
        kv = {hdr[i]: int(hdr[i + 1]) for i in range(0, len(hdr), 2)}
        q0, q1 = kv["q0"], kv["q1"]
        n_states, mem, stor = kv["states"], kv["mem"], kv["storage"]
    except (KeyError, ValueError, IndexError):
        raise MachineFormatError("line 2: bad header") from None
    delta = {}
    for i, ln in enumerate(lines[2:], start=3):
        parts = ln.split()
        if len(parts) != 6 or parts[2] != "->":
            raise MachineFormatError(f"line {i}: expected 's r5 -> s w5 m5'")
        s, r, _, s2, w, m = parts
        if len(r) != 5 or len(w) != 5 or len(m) != 5 \
                or set(r) - {"0", "1"} or set(w) - {"0", "1"} \
                or set(m) - {"L", "R"}:
            raise MachineFormatError(f"line {i}: malformed fields")
        delta[(int(s), tuple(int(c) for c in r))] = (
            int(s2), tuple(int(c) for c in w),
            tuple(RIGHT if c == "R" else LEFT for c in m))
    spec = TuringMachineSpec(name, n_states, q0, q1, delta, mem, stor)
    spec.validate()
    return spec


class TuringAgentProgram:
    """Run a machine as an agent program; memory is the tape-1 content."""

    def __init__(self, spec: TuringMachineSpec,
                 tm_step_limit: int = 10 ** 6):
        from .programs import StorageSchema
        self.spec = spec
        self.name = spec.name
        self.schema = StorageSchema()
        self.st_slot = self.schema.add_field("st", spec.storage_cells)
        self.memory_bits = 2 * spec.mem_cells
        self.tm_step_limit = tm_step_limit

    def new_state(self):
        return [BLANK] * self.spec.mem_cells

    def activate(self, state, row, degree, pin, node=-1) -> int:
        res = run_activation(self.spec, state, row[self.st_slot], degree,
                             pin, tm_step_limit=self.tm_step_limit)
        state[:] = res.memory
        row[self.st_slot] = res.storage_bits
        return res.action

    def serialize(self, state):
        value = 0
        for i, sym in enumerate(state):
            value |= sym << (2 * i)
        return value, 2 * len(state)

    def deserialize(self, value, nbits):
        return [(value >> (2 * i)) & 3 for i in range(self.spec.mem_cells)]


def machine_save(spec: TuringMachineSpec, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(machine_dumps(spec))


def machine_load(path: str) -> TuringMachineSpec:
    import os
    with open(path, "r", encoding="utf-8") as fh:
        return machine_loads(fh.read(), os.path.splitext(
            os.path.basename(path))[0])
