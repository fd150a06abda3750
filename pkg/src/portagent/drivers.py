"""Test drivers: invoke individual agent operations against live storage.

A driver owns a Session and launches agent procedures one at a time.  The
driver itself may use global knowledge (it is harness code, not an agent),
but everything it launches runs under the normal anonymous-agent rules; the
only liberty taken is injecting literal-port bounce programs to set up the
incoming port an operation expects, which any agent could perform given the
same port value.
"""

from __future__ import annotations

from .graphs import PortGraph
from .lexdfs import G_ERR, HOOK_PRED, HOOK_SUCC, build_dldfs_program
from .programs import FlatProgram, HALT
from .runtime import DEFAULT_STEP_LIMIT, Session


class OpError(RuntimeError):
    """An operation signalled failure (e.g. no successor to move to)."""


def bounce_program(schema, port: int) -> FlatProgram:
    """Two moves: out through ``port`` and straight back."""

    def step(state, row, degree, pin):
        if state[0] == 0:
            state[0] = 1
            return port
        if state[0] == 1:
            state[0] = 2
            return pin
        return HALT

    return FlatProgram("bounce", schema, {"phase": 2}, step)


class RPathDriver:
    """Drive path-instance operations over one persistent storage state."""

    def __init__(self, graph: PortGraph, instances: int = 1,
                 write_hook=None, step_limit: int = DEFAULT_STEP_LIMIT):
        built = build_dldfs_program(extra_instances=instances)
        self.built = built
        self.program = built.program
        self.instances = built.user_ns
        self.session = Session(graph, self.program.schema,
                               write_hook=write_hook)
        self.graph = graph
        self.step_limit = step_limit
        self.sources: dict[int, int] = {}
        self.moves = 0

    # -- helpers -----------------------------------------------------------
    def _run(self, entry: str, **args):
        tr = self.session.run(self.program, step_limit=self.step_limit,
                              entry=entry, args=args)
        self.moves += tr.moves
        if tr.final_state[0][self.program.gidx(G_ERR)]:
            raise OpError(f"{entry} failed")
        return tr

    def _bounce(self, port: int):
        tr = self.session.run(bounce_program(self.program.schema, port),
                              step_limit=16)
        self.moves += tr.moves

    def ns_base(self, idx: int) -> int:
        return self.program.schema.ns_base[self.instances[idx]]

    @property
    def node(self) -> int:
        return self.session.node

    # -- operations ----------------------------------------------------------
    def init(self, idx: int, source: int) -> None:
        if idx in self.sources:
            raise OpError(f"instance {idx} already initialized")
        self.session.node = source
        self.session.pin = -1
        self._run("rp_init", ns=self.instances[idx])
        self.sources[idx] = source

    def move_to_top(self, idx: int) -> None:
        self._run("seek", ns=self.instances[idx], top=1)

    def move_target(self, idx: int) -> None:
        self._run("seek", ns=self.instances[idx], top=0)

    def move_one_hop_forward(self, idx: int) -> None:
        base = self.ns_base(idx)
        if self.session.storage[self.session.node][base] == 1:
            raise OpError("move_one_hop_forward at the target")
        self._run("hop_fwd", ns=self.instances[idx])

    def modify_move(self, idx: int, new_target: int) -> None:
        t = self.session.node
        self._bounce(self.graph.port_to(t, new_target))
        self._run("rp_mm", ns=self.instances[idx])

    def delete(self, idx: int) -> None:
        self._run("rp_delete", ns=self.instances[idx])

    def copy(self, src: int, dst: int) -> None:
        if self.sources.get(src) != self.sources.get(dst):
            raise OpError("copy requires a common source")
        self._run("rp_copy", src=self.instances[src], dst=self.instances[dst])

    def modify_successor(self, idx: int) -> None:
        self._run("succpred", xdd=self.instances[idx], mode=HOOK_SUCC, swap=0)

    def modify_predecessor(self, idx: int) -> None:
        self._run("succpred", xdd=self.instances[idx], mode=HOOK_PRED, swap=0)

    # -- global inspection (harness only) -------------------------------------
    def inpath_nodes(self, idx: int) -> set[int]:
        base = self.ns_base(idx)
        return {v for v in range(self.graph.n)
                if self.session.storage[v][base + 1] == 1}

    def target_of(self, idx: int) -> int | None:
        base = self.ns_base(idx)
        hits = [v for v in range(self.graph.n)
                if self.session.storage[v][base] == 1]
        return hits[0] if len(hits) == 1 else None
