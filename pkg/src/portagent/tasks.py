"""Decision tasks, the verification corpus, and the bench harness."""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass, field

from .graphs import (
    GraphFamilySpec, PortGraph, derive_seed, from_edges, generate,
    permute_ports,
)
from .lexdfs import (
    G_PAR, build_dldfs_program, check_lemma1, oracle_lexdfs, D_GREY,
)
from .drivers import OpError, RPathDriver
from .rpath import BLUE, RED, ShadowPath, YELLOW, check_consistency
from .runtime import Session, audit_budget
from .sim_const import check_simconst_lockstep
from .sim_onebit import (
    build_cwalker, check_chain_lockstep, check_onebit_lockstep,
)
from .turing import (
    SAMPLE_MACHINES, TuringAgentProgram, build_bouncer,
    build_port_zero_walker, build_rotor_walker,
)

VERIFY_TARGETS = ("dldfs", "rpath", "simconst", "simonebit", "chain",
                  "parity")


# ---------------------------------------------------------------------------
# Corpus
# ---------------------------------------------------------------------------

def atlas_connected(min_n: int = 1, max_n: int = 6) -> list[PortGraph]:
    """Every connected graph on min_n..max_n nodes (one per isomorphism
    class), with canonical ports."""
    from networkx.generators.atlas import graph_atlas_g
    import networkx as nx
    out = []
    for G in graph_atlas_g():
        n = G.number_of_nodes()
        if n < min_n or n > max_n:
            continue
        if n > 1 and not nx.is_connected(G):
            continue
        if n == 0:
            continue
        nbrs = [set(G.neighbors(v)) for v in range(n)]
        edges = []
        order = [sorted(s) for s in nbrs]
        for u in range(n):
            for pu, v in enumerate(order[u]):
                if u < v:
                    edges.append((u, pu, v, order[v].index(u)))
        out.append(from_edges(n, edges))
    return out


@dataclass
class CorpusEntry:
    name: str
    graph: PortGraph


def default_corpus(seed: int = 0, max_random: int = 500) -> list[CorpusEntry]:
    """Exhaustive tiny graphs, port-permuted mid-size graphs, and seeded
    random graphs up to 64 nodes with degree at most 8."""
    entries = [CorpusEntry(f"atlas{i}(n={g.n})", g)
               for i, g in enumerate(atlas_connected(1, 5))]
    rng = random.Random(derive_seed(seed, "corpus"))
    for n in (6, 7, 8):
        for i in range(50):
            base = generate(GraphFamilySpec("random-connected", n, None,
                                            seed=rng.randrange(2 ** 30)))
            g = permute_ports(base, rng.randrange(2 ** 30))
            entries.append(CorpusEntry(f"perm{n}.{i}", g))
    for i in range(max_random):
        n = rng.randint(1, 64)
        g = generate(GraphFamilySpec("random-connected", n, 8,
                                     seed=rng.randrange(2 ** 30)))
        entries.append(CorpusEntry(f"rand{i}(n={g.n})", g))
    return entries


# ---------------------------------------------------------------------------
# The parity task
# ---------------------------------------------------------------------------

def parity_oracle(graph: PortGraph) -> int:
    return graph.n % 2


def run_parity(graph: PortGraph, start: int = 0,
               step_limit: int = 10 ** 8) -> tuple[int, Session]:
    """Search the whole graph, toggling one memory bit per first visit, and
    write the result to the output register at the final node."""
    built = build_dldfs_program(parity=True)
    sess = Session(graph, built.program.schema)
    tr = sess.run(built.program, start=start, step_limit=step_limit)
    if not tr.halted:
        raise RuntimeError("parity agent did not halt")
    out = sess.storage[tr.final_node][built.out_slot]
    return out, sess


def run_dldfs(graph: PortGraph, start: int = 0, step_limit: int = 10 ** 8,
              trace: bool = False, measure: bool = False):
    """Run the search; returns (trace, visit order)."""
    built = build_dldfs_program()
    visits: list[int] = []
    col_name = "dfs.color"

    def hook(node, fieldname, old, new):
        if fieldname == col_name and new == D_GREY:
            visits.append(node)

    sess = Session(graph, built.program.schema, write_hook=hook)
    tr = sess.run(built.program, start=start, step_limit=step_limit,
                  trace=trace, measure=measure)
    return tr, visits


# ---------------------------------------------------------------------------
# Randomized path-structure driving with a shadow model
# ---------------------------------------------------------------------------

@dataclass
class FuzzReport:
    sequences: int = 0
    ops: int = 0
    colorings: int = 0
    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def fuzz_rpath(graphs: list[PortGraph], seed: int = 0,
               sequences_per_graph: int = 20, ops_per_sequence: int = 8,
               check_every_op: bool = True,
               include_succpred: bool = True) -> FuzzReport:
    """Drive random operation sequences against the shadow model.

    After every public operation the structure must be strongly consistent,
    its membership set must equal the shadow list, and every branching-node
    coloring observed during the run must match the global port comparison.
    """
    rep = FuzzReport()
    rng = random.Random(seed)
    for g in graphs:
        pre = oracle_lexdfs(g, 0).preorder
        for _ in range(sequences_per_graph):
            rep.sequences += 1
            events: list[tuple[int, int]] = []

            def hook(node, fname, old, new, events=events):
                if fname.startswith("u") and fname.endswith(".color") \
                        and new in (RED, BLUE):
                    events.append((node, new))

            d = RPathDriver(g, instances=2, write_hook=hook)
            d.init(0, 0)
            d.init(1, 0)
            shadows = [ShadowPath(g, 0), ShadowPath(g, 0)]
            ops = ["mm"] * 6 + ["top", "tgt", "hop", "delete", "copy"]
            if include_succpred and g.n <= 16:
                ops += ["succ", "pred"]
            for _ in range(ops_per_sequence):
                idx = rng.randrange(2)
                sh = shadows[idx]
                op = rng.choice(ops)
                before = list(sh.nodes)
                del events[:]
                try:
                    if op == "mm":
                        d.move_target(idx)
                        t = sh.target
                        cands = list(g.nbr[t])
                        if not cands:
                            continue
                        t2 = rng.choice(cands)
                        d.modify_move(idx, t2)
                        sh.modify_move(t2)
                    elif op == "top":
                        d.move_to_top(idx)
                        if d.node != sh.source:
                            rep.failures.append(f"top landed at {d.node}")
                    elif op == "tgt":
                        d.move_target(idx)
                        if d.node != sh.target:
                            rep.failures.append(f"tgt landed at {d.node}")
                    elif op == "hop":
                        d.move_to_top(idx)
                        if len(sh.nodes) >= 2:
                            d.move_one_hop_forward(idx)
                            if d.node != sh.nodes[1]:
                                rep.failures.append("hop landed wrong")
                    elif op == "delete":
                        d.delete(idx)
                        sh.delete()
                    elif op == "copy":
                        d.move_target(idx)
                        d.copy(idx, 1 - idx)
                        shadows[1 - idx].copy_from(sh)
                        if d.node != sh.target:
                            rep.failures.append("copy ended off-target")
                    elif op == "succ":
                        i = pre.index(sh.target)
                        if i == g.n - 1:
                            continue
                        d.move_target(idx)
                        d.modify_successor(idx)
                        sh.nodes = _headpath_at_first_visit(g, 0, pre[i + 1])
                    elif op == "pred":
                        i = pre.index(sh.target)
                        if i == 0:
                            continue
                        d.move_target(idx)
                        d.modify_predecessor(idx)
                        sh.nodes = _headpath_at_first_visit(g, 0, pre[i - 1])
                except OpError as e:
                    rep.failures.append(f"{op}: {e}")
                    break
                rep.ops += 1
                # branching-node coloring vs global port comparison
                if events and op == "mm":
                    u, color = events[-1]
                    if u in before and u != before[0]:
                        back = before[before.index(u) - 1]
                        # the yellow node is the new target (its mark is
                        # cleaned up by the time the operation returns)
                        newt = sh.nodes[-1]
                        want_red = g.port_to(u, newt) < g.port_to(u, back)
                        if (color == RED) != want_red:
                            rep.failures.append(
                                f"coloring at {u}: {color} vs yellow port "
                                f"{g.port_to(u, newt)} back {g.port_to(u, back)}")
                        rep.colorings += 1
                if check_every_op:
                    for j, shj in enumerate(shadows):
                        r = check_consistency(g, d.session.storage,
                                              d.ns_base(j), 0, shj.target)
                        if not r.strong:
                            rep.failures.append(
                                f"after {op}: not strong: {r.violations}")
                        if d.inpath_nodes(j) != set(shj.nodes):
                            rep.failures.append(
                                f"after {op}: membership != shadow")
                if rep.failures:
                    return rep
    return rep


def _headpath_at_first_visit(g: PortGraph, root: int,
                             target_node: int) -> list[int]:
    """The maintained path the moment ``target_node`` is first visited.

    The head-tracking instance is updated by one retargeting per head move
    (forward visits and backtracks alike), so its node set is the result of
    replaying the minimal-path update rule over that move sequence; the
    successor/predecessor operations copy it verbatim.
    """
    sh = ShadowPath(g, root)
    if target_node == root:
        return list(sh.nodes)
    visited = {root}
    stack = [(root, 0)]
    while stack:
        v, i = stack.pop()
        nbrs = g.nbr[v]
        while i < len(nbrs) and nbrs[i] in visited:
            i += 1
        if i == len(nbrs):
            if stack:
                sh.modify_move(stack[-1][0])
            continue
        u = nbrs[i]
        stack.append((v, i + 1))
        visited.add(u)
        sh.modify_move(u)
        if u == target_node:
            return list(sh.nodes)
        stack.append((u, 0))
    raise AssertionError("target never visited")


# ---------------------------------------------------------------------------
# verify: oracle-equivalence suites per target
# ---------------------------------------------------------------------------

@dataclass
class VerifyResult:
    target: str
    checked: int
    failures: list[str]

    @property
    def ok(self) -> bool:
        return not self.failures


def _small(entries, max_n):
    return [e for e in entries if e.graph.n <= max_n]


def verify(target: str, seed: int = 0, corpus: list[CorpusEntry] | None = None,
           fault_injection: bool = False) -> VerifyResult:
    """Run one target's oracle-equivalence and invariant suite."""
    if corpus is None:
        corpus = default_corpus(seed)
    failures: list[str] = []
    checked = 0

    if target == "dldfs":
        for e in corpus:
            tr, visits = run_dldfs(e.graph)
            want = oracle_lexdfs(e.graph, 0).preorder
            if visits != want:
                failures.append(f"{e.name}: visit order diverges")
            bad = check_lemma1(e.graph, 0)
            if fault_injection and e.graph.n >= 3:
                par = list(oracle_lexdfs(e.graph, 0).parent)
                par[want[-1]] = want[-1]
                if not check_lemma1(e.graph, 0, parent_override=par):
                    failures.append(f"{e.name}: corrupted parents accepted")
            if bad:
                failures.append(f"{e.name}: {bad[0]}")
            checked += 1
            if failures:
                break
    elif target == "rpath":
        graphs = [e.graph for e in _small(corpus, 12)[:20]]
        if fault_injection:
            g = graphs[0] if graphs[0].n >= 3 else generate(
                GraphFamilySpec("complete", 3))
            d = RPathDriver(g, instances=1)
            d.init(0, 0)
            d.session.set_field(1, "u0.inPath", 1)  # injected damage
            r = check_consistency(g, d.session.storage, d.ns_base(0), 0, 0)
            if r.strong:
                failures.append("fault injection not detected")
            checked += 1
        else:
            rep = fuzz_rpath(graphs, seed=seed, sequences_per_graph=10,
                             ops_per_sequence=6)
            checked += rep.ops
            failures.extend(rep.failures)
    elif target == "simconst":
        machines = [build_bouncer(), build_port_zero_walker(),
                    build_rotor_walker()]
        for e in _small(corpus, 8)[:40]:
            for m in machines:
                bad = check_simconst_lockstep(m, e.graph, 0, 8)
                if bad:
                    failures.append(f"{e.name}/{m.name}: {bad[0]}")
                checked += 1
            if failures:
                break
    elif target == "simonebit":
        for e in _small(corpus, 16)[:25]:
            for c in (1, 2, 4, 8):
                chk = check_onebit_lockstep(build_cwalker(c), e.graph, 0, 100)
                if chk.violations:
                    failures.append(f"{e.name}/c={c}: {chk.violations[0]}")
                checked += 1
            if failures:
                break
    elif target == "chain":
        machines = [(build_bouncer(), 2), (build_port_zero_walker(), 50)]
        for e in _small(corpus, 4)[:12]:
            for m, k in machines:
                bad = check_chain_lockstep(m, e.graph, 0, k)
                if bad:
                    failures.append(f"{e.name}/{m.name}: {bad[0]}")
                checked += 1
            if failures:
                break
    elif target == "parity":
        rng = random.Random(derive_seed(seed, "parity"))
        for i in range(100):
            n = rng.randint(1, 100)
            g = generate(GraphFamilySpec("random-connected", n, None,
                                         seed=rng.randrange(2 ** 30)))
            out, _ = run_parity(g)
            if out != parity_oracle(g):
                failures.append(f"n={n}: parity {out} != {n % 2}")
            checked += 1
    else:
        raise ValueError(f"unknown verify target {target!r}")
    return VerifyResult(target, checked, failures)


# ---------------------------------------------------------------------------
# bench
# ---------------------------------------------------------------------------

# ---------------------------------------------------------------------------
# Picklable jobs for worker pools (graphs are plain tuples, so they ship)
# ---------------------------------------------------------------------------

def job_dldfs_oracle(arg) -> str | None:
    name, g = arg
    _, visits = run_dldfs(g)
    want = oracle_lexdfs(g, 0).preorder
    if visits != want:
        return f"{name}: dldfs visit order diverges from the oracle"
    return None


def job_lemma1(arg) -> str | None:
    name, g = arg
    bad = check_lemma1(g, 0)
    return f"{name}: {bad[0]}" if bad else None


def job_fuzz(arg) -> list[str]:
    g, seed, seqs, ops = arg
    rep = fuzz_rpath([g], seed=seed, sequences_per_graph=seqs,
                     ops_per_sequence=ops)
    out = list(rep.failures)
    out.append(f"#stats {rep.sequences} {rep.ops} {rep.colorings}")
    return out


def job_succwalk(arg) -> str | None:
    name, g = arg
    pre = oracle_lexdfs(g, 0).preorder
    d = RPathDriver(g, instances=1)
    d.init(0, 0)
    seen = [d.target_of(0)]
    for _ in range(g.n - 1):
        d.modify_successor(0)
        seen.append(d.target_of(0))
    if seen != pre:
        return f"{name}: successor walk {seen} != preorder {pre}"
    if g.n >= 2:
        snap = d.session.snapshot()
        d.modify_predecessor(0)
        d.modify_successor(0)
        if d.session.snapshot() != snap:
            return f"{name}: predecessor then successor is not the identity"
    return None


def job_simconst(arg) -> str | None:
    name, g, machine_name, steps = arg
    m = SAMPLE_MACHINES[machine_name]()
    bad = check_simconst_lockstep(m, g, 0, steps)
    return f"{name}/{machine_name}: {bad[0]}" if bad else None


def job_onebit(arg) -> str | None:
    name, g, c, steps = arg
    chk = check_onebit_lockstep(build_cwalker(c), g, 0, steps)
    if chk.violations:
        return f"{name}/c={c}: {chk.violations[0]}"
    return None


def job_chain(arg) -> str | None:
    name, g, machine_name, steps = arg
    m = SAMPLE_MACHINES[machine_name]()
    bad = check_chain_lockstep(m, g, 0, steps)
    return f"{name}/{machine_name}: {bad[0]}" if bad else None


def job_parity(arg) -> str | None:
    name, g = arg
    out, _ = run_parity(g)
    if out != g.n % 2:
        return f"{name}: parity {out} != {g.n % 2}"
    return None


# ---------------------------------------------------------------------------
# bench
# ---------------------------------------------------------------------------

BENCH_HEADER = "family,n,seed,moves,mem_bits,storage_bits,ms"


@dataclass
class BenchReport:
    rows: list[tuple[str, int, int, int, int, int, float]]

    def dumps(self) -> str:
        lines = [BENCH_HEADER]
        for fam, n, seed, moves, mem, stor, ms in self.rows:
            lines.append(f"{fam},{n},{seed},{moves},{mem},{stor},{ms:.1f}")
        return "\n".join(lines) + "\n"

    def slope(self, family: str) -> float:
        """Least-squares slope of log(moves) against log(n)."""
        pts = [(math.log(n), math.log(moves))
               for fam, n, _, moves, _, _, _ in self.rows
               if fam == family and moves > 0 and n > 1]
        if len(pts) < 2:
            return 0.0
        mx = sum(x for x, _ in pts) / len(pts)
        my = sum(y for _, y in pts) / len(pts)
        num = sum((x - mx) * (y - my) for x, y in pts)
        den = sum((x - mx) ** 2 for x, _ in pts)
        return num / den


def bench(target: str, families: list[str], ns: list[int],
          seed: int = 0) -> BenchReport:
    rows = []
    for fam in families:
        for n in ns:
            if fam == "cycle" and n < 3:
                continue
            g = generate(GraphFamilySpec(fam, n, 8 if "random" in fam else None,
                                         seed=seed))
            t0 = time.perf_counter()
            if target == "dldfs":
                tr, _ = run_dldfs(g, measure=True)
                moves, mem = tr.moves, tr.max_mem_bits
                stor = tr.storage_bits
            elif target == "simonebit":
                c = 4
                prog = build_cwalker(c)
                chk = check_onebit_lockstep(prog, g, 0, 10 ** 6)
                moves = sum(chk.per_step_moves)
                mem, stor = 1, None
                from .sim_onebit import build_onebit
                stor = build_onebit(prog).schema.total_bits
            else:
                raise ValueError(f"unknown bench target {target!r}")
            ms = (time.perf_counter() - t0) * 1000
            rows.append((fam, n, seed, moves, mem, stor, ms))
    return BenchReport(rows)
