"""Single-agent execution loop over a port-numbered graph.

Per step the agent observes (storage of the current node, its degree, the
incoming port), runs its activation, writes storage, then moves through the
emitted port or halts.  Node identities never reach the program; everything
it learns arrives through those three observables.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .graphs import PortGraph
from .programs import HALT, INITIAL

DEFAULT_STEP_LIMIT = 10 ** 8


class AgentError(RuntimeError):
    pass


class StepLimitExceeded(AgentError):
    pass


class InvalidMove(AgentError):
    pass


@dataclass
class StepRecord:
    step: int
    node: int
    pin: int
    pout: int           # port, or HALT
    mem_hex: str
    writes: list[tuple[str, int, int]]  # (field, old, new)


@dataclass
class ExecutionTrace:
    """Outcome of a run; per-step records only when tracing was requested."""

    steps: int = 0
    moves: int = 0
    halted: bool = False
    truncated: bool = False
    final_node: int = 0
    final_pin: int = INITIAL
    max_mem_bits: int | None = None
    declared_mem_bits: int = 0
    storage_bits: int = 0
    final_state: object = None
    records: list[StepRecord] = field(default_factory=list)

    def dumps(self) -> str:
        lines = []
        for r in self.records:
            w = ",".join(f"{name}:{new}" for name, _, new in r.writes) or "-"
            pout = "H" if r.pout == HALT else str(r.pout)
            lines.append(f"step={r.step} node={r.node} pin={r.pin} "
                         f"pout={pout} mem_hex={r.mem_hex} writes={w}")
        lines.append(f"summary steps={self.steps} moves={self.moves} "
                     f"halted={int(self.halted)} truncated={int(self.truncated)} "
                     f"final_node={self.final_node} "
                     f"mem_bits={self.max_mem_bits if self.max_mem_bits is not None else self.declared_mem_bits} "
                     f"storage_bits={self.storage_bits}")
        return "\n".join(lines) + "\n"


class _HookedRow(list):
    """Storage row that reports writes to an observer."""

    __slots__ = ("node", "hook", "schema")

    def __setitem__(self, slot, value):
        old = list.__getitem__(self, slot)
        if old != value:
            self.hook(self.node, slot, old, value)
        list.__setitem__(self, slot, value)


class Session:
    """A graph plus persistent storage plus the agent's position.

    Lets test drivers run several programs in sequence against one storage
    state (the whiteboards persist; the agent's memory does not survive
    across programs unless the caller re-injects it).
    """

    def __init__(self, graph: PortGraph, schema, write_hook=None):
        self.graph = graph
        self.schema = schema
        self.storage = schema.new_storage(graph.n)
        self.node = 0
        self.pin = INITIAL
        self.write_hook = None
        if write_hook is not None:
            self.set_write_hook(write_hook)

    def set_write_hook(self, hook) -> None:
        self.write_hook = hook
        if hook is None:
            self.storage = [list(r) for r in self.storage]
            return
        schema = self.schema

        def slot_hook(node, slot, old, new):
            hook(node, schema.fields[slot][0], old, new)

        rows = []
        for i, r in enumerate(self.storage):
            hr = _HookedRow(r)
            hr.node = i
            hr.hook = slot_hook
            hr.schema = schema
            rows.append(hr)
        self.storage = rows

    def field_value(self, node: int, name: str) -> int:
        return self.storage[node][self.schema.slot(name)]

    def set_field(self, node: int, name: str, value: int) -> None:
        self.storage[node][self.schema.slot(name)] = value

    def snapshot(self) -> list[list[int]]:
        return [list(r) for r in self.storage]

    def run(self, program, start: int | None = None,
            step_limit: int = DEFAULT_STEP_LIMIT, trace: bool = False,
            measure: bool = False, step_hook=None, entry: str | None = None,
            args: dict | None = None) -> ExecutionTrace:
        if start is not None:
            self.node = start
            self.pin = INITIAL
        if entry is None and args is None:
            state = program.new_state()
        else:
            state = program.new_state(entry, **(args or {}))
        tr = execute(program, self.graph, self.storage, state,
                     self.node, self.pin, step_limit,
                     trace=trace, measure=measure, step_hook=step_hook)
        self.node = tr.final_node
        self.pin = tr.final_pin
        return tr


def execute(program, graph: PortGraph, storage, state, node: int, pin: int,
            step_limit: int, trace: bool = False, measure: bool = False,
            step_hook=None) -> ExecutionTrace:
    """Drive one program until halt or step limit.

    With ``trace``/``measure``/``step_hook`` unset the loop stays allocation
    free per step, which matters for the simulation layers.
    """

    tr = ExecutionTrace(declared_mem_bits=program.memory_bits,
                        storage_bits=program.schema.total_bits)
    activate = program.activate
    nbr = graph.nbr
    rev = graph.rev
    steps = 0
    moves = 0
    max_bits = 0
    fancy = trace or measure or step_hook is not None
    while steps < step_limit:
        row = storage[node]
        degree = len(nbr[node])
        if fancy:
            if step_hook is not None:
                step_hook(steps, node, pin, state)
            before = list(row) if trace else None
            action = activate(state, row, degree, pin, node)
            value, nbits = program.serialize(state)
            if value.bit_length() > max_bits:
                max_bits = value.bit_length()
            if nbits > program.memory_bits:
                raise AgentError(
                    f"memory snapshot {nbits} bits exceeds declared "
                    f"{program.memory_bits}")
            if trace:
                writes = [(program.schema.fields[i][0], before[i], row[i])
                          for i in range(len(row)) if before[i] != row[i]]
                tr.records.append(StepRecord(steps, node, pin, action,
                                             format(value, "x"), writes))
        else:
            action = activate(state, row, degree, pin, node)
        steps += 1
        if action == HALT:
            tr.halted = True
            break
        if not 0 <= action < degree:
            raise InvalidMove(
                f"step {steps - 1}: port {action} out of range at node "
                f"{node} (degree {degree})")
        pin = rev[node][action]
        node = nbr[node][action]
        moves += 1
    else:
        tr.truncated = True
    tr.steps = steps
    tr.moves = moves
    tr.final_node = node
    tr.final_pin = pin
    tr.final_state = state
    if fancy:
        tr.max_mem_bits = max_bits
    return tr


def run(program, graph: PortGraph, start: int,
        step_limit: int = DEFAULT_STEP_LIMIT, trace: bool = False,
        measure: bool = False, write_hook=None, step_hook=None,
        session: Session | None = None) -> ExecutionTrace:
    """Fresh-storage convenience wrapper around :class:`Session`."""
    sess = session or Session(graph, program.schema, write_hook=write_hook)
    tr = sess.run(program, start=start, step_limit=step_limit, trace=trace,
                  measure=measure, step_hook=step_hook)
    if tr.truncated:
        raise StepLimitExceeded(f"step limit {step_limit} reached")
    return tr


@dataclass
class BudgetReport:
    rows: list[tuple[int, int, int]]   # (n, max_mem_bits, storage_bits)
    declared_mem_bits: int
    constant: bool

    def __str__(self) -> str:
        body = "\n".join(f"  n={n}: mem={m} storage={s}"
                         for n, m, s in self.rows)
        return (f"declared mem bits: {self.declared_mem_bits}\n{body}\n"
                f"CONSTANT: {self.constant}")


def audit_budget(make_run, graphs: list[PortGraph],
                 declared_mem_bits: int) -> BudgetReport:
    """Measure memory/storage bits of a program across graph sizes.

    ``make_run(graph)`` must run the program with measurement on and return
    the ExecutionTrace.  CONSTANT means both the observed memory bits and the
    storage schema bits agree across all graphs.
    """
    sizes = {g.n for g in graphs}
    if len(sizes) < 2:
        raise ValueError("audit needs at least two distinct graph sizes")
    rows = []
    for g in graphs:
        tr = make_run(g)
        rows.append((g.n, tr.max_mem_bits, tr.storage_bits))
    mems = {m for _, m, _ in rows}
    stores = {s for _, _, s in rows}
    return BudgetReport(rows, declared_mem_bits,
                        len(mems) == 1 and len(stores) == 1)
