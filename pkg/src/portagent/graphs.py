"""Anonymous port-numbered graphs: representation, generation, validation, file I/O.

A port-numbered graph is a simple connected undirected graph where each node
labels its incident edges with local ports 0..deg-1.  Node ids exist only for
construction, storage and debugging; agent programs never see them.
"""

from __future__ import annotations

import random
import zlib
from dataclasses import dataclass, field


def derive_seed(*parts) -> int:
    """Deterministic sub-seed from arbitrary hashable parts."""
    return zlib.crc32(repr(parts).encode())


class GraphFormatError(ValueError):
    """Raised when a .pg file cannot be parsed or fails validation."""


@dataclass(frozen=True)
class PortGraph:
    """Simple connected undirected graph with per-node local port numbering.

    ``nbr[v][p]`` is the neighbor reached from ``v`` through port ``p`` and
    ``rev[v][p]`` the port of that edge at the neighbor, so that
    ``nbr[nbr[v][p]][rev[v][p]] == v``.
    """

    n: int
    nbr: tuple[tuple[int, ...], ...]
    rev: tuple[tuple[int, ...], ...]

    @property
    def m(self) -> int:
        return sum(len(a) for a in self.nbr) // 2

    def degree(self, v: int) -> int:
        return len(self.nbr[v])

    def port_to(self, v: int, u: int) -> int:
        """Port at v of the edge (v, u).  Raises if not adjacent."""
        return self.nbr[v].index(u)

    def step(self, v: int, port: int) -> tuple[int, int]:
        """Traverse port from v; returns (destination, incoming port there)."""
        return self.nbr[v][port], self.rev[v][port]

    def edges(self) -> list[tuple[int, int, int, int]]:
        """Edges as (u, pu, v, pv) with u < v, sorted."""
        out = []
        for u in range(self.n):
            for pu, v in enumerate(self.nbr[u]):
                if u < v:
                    out.append((u, pu, v, self.rev[u][pu]))
        out.sort()
        return out


@dataclass
class ValidityReport:
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def from_edges(n: int, edges: list[tuple[int, int, int, int]]) -> PortGraph:
    """Build a PortGraph from (u, pu, v, pv) tuples.  Caller must validate."""
    adj_n: list[list[int]] = [[] for _ in range(n)]
    adj_r: list[list[int]] = [[] for _ in range(n)]
    deg = [0] * n
    for u, pu, v, pv in edges:
        deg[u] = max(deg[u], pu + 1)
        deg[v] = max(deg[v], pv + 1)
    for d, a, r in zip(deg, adj_n, adj_r):
        a.extend([-1] * d)
        r.extend([-1] * d)
    for u, pu, v, pv in edges:
        adj_n[u][pu] = v
        adj_r[u][pu] = pv
        adj_n[v][pv] = u
        adj_r[v][pv] = pu
    return PortGraph(n, tuple(tuple(a) for a in adj_n), tuple(tuple(r) for r in adj_r))


def validate(g: PortGraph) -> ValidityReport:
    """Check simplicity, connectivity, port bijection and port symmetry."""
    rep = ValidityReport()
    if g.n < 1:
        rep.violations.append("node count must be >= 1")
        return rep
    for v in range(g.n):
        seen: set[int] = set()
        for p, u in enumerate(g.nbr[v]):
            if not (0 <= u < g.n) :
                rep.violations.append(f"node {v} port {p}: neighbor {u} out of range")
                continue
            if u == v:
                rep.violations.append(f"self-loop at node {v}")
            if u in seen:
                rep.violations.append(f"parallel edge {v}-{u}")
            seen.add(u)
            q = g.rev[v][p]
            if not (0 <= q < len(g.nbr[u])):
                rep.violations.append(f"node {v} port {p}: reverse port {q} out of range")
            elif g.nbr[u][q] != v or g.rev[u][q] != p:
                rep.violations.append(f"port symmetry broken at node {v} port {p}")
    # connectivity
    if g.n > 0 and not rep.violations:
        seen_nodes = {0}
        stack = [0]
        while stack:
            v = stack.pop()
            for u in g.nbr[v]:
                if u not in seen_nodes:
                    seen_nodes.add(u)
                    stack.append(u)
        if len(seen_nodes) != g.n:
            rep.violations.append("disconnected")
    return rep


# ---------------------------------------------------------------------------
# Generation
# ---------------------------------------------------------------------------

FAMILIES = ("path", "cycle", "star", "complete", "random-tree", "random-connected")


@dataclass(frozen=True)
class GraphFamilySpec:
    family: str
    n: int
    max_degree: int | None = None
    seed: int | None = None


class InfeasibleSpec(ValueError):
    pass


def _canonical_ports(n: int, nbrs: list[set[int]]) -> PortGraph:
    """Assign port p to the p-th smallest neighbor id at every node."""
    edges = []
    order = [sorted(s) for s in nbrs]
    for u in range(n):
        for pu, v in enumerate(order[u]):
            if u < v:
                edges.append((u, pu, v, order[v].index(u)))
    return from_edges(n, edges)


def _shuffled_ports(n: int, nbrs: list[set[int]], rng: random.Random) -> PortGraph:
    edges = []
    order = [sorted(s) for s in nbrs]
    for o in order:
        rng.shuffle(o)
    for u in range(n):
        for pu, v in enumerate(order[u]):
            if u < v:
                edges.append((u, pu, v, order[v].index(u)))
    return from_edges(n, edges)


def permute_ports(g: PortGraph, seed: int) -> PortGraph:
    """Reassign every node's ports by a seeded shuffle; same underlying graph."""
    rng = random.Random(seed)
    nbrs = [set(a) for a in g.nbr]
    return _shuffled_ports(g.n, nbrs, rng)


def generate(spec: GraphFamilySpec) -> PortGraph:
    """Deterministically generate a graph for the given family spec."""
    n = spec.n
    if n < 1:
        raise InfeasibleSpec("n must be >= 1")
    fam = spec.family
    nbrs: list[set[int]] = [set() for _ in range(n)]

    def link(a: int, b: int) -> None:
        nbrs[a].add(b)
        nbrs[b].add(a)

    if fam == "path":
        for i in range(n - 1):
            link(i, i + 1)
        return _canonical_ports(n, nbrs)
    if fam == "cycle":
        if n < 3:
            raise InfeasibleSpec("cycle needs n >= 3")
        for i in range(n):
            link(i, (i + 1) % n)
        return _canonical_ports(n, nbrs)
    if fam == "star":
        for i in range(1, n):
            link(0, i)
        return _canonical_ports(n, nbrs)
    if fam == "complete":
        for i in range(n):
            for j in range(i + 1, n):
                link(i, j)
        return _canonical_ports(n, nbrs)

    if spec.seed is None:
        raise InfeasibleSpec(f"family {fam!r} requires a seed")
    rng = random.Random(derive_seed(spec.seed, fam, n, spec.max_degree))
    cap = spec.max_degree
    if cap is not None and cap < 2 and n > 2:
        raise InfeasibleSpec("degree cap too small for connectivity")

    if fam == "random-tree":
        for v in range(1, n):
            choices = [u for u in range(v) if cap is None or len(nbrs[u]) < cap]
            if not choices:
                raise InfeasibleSpec("degree cap too small for a tree")
            link(rng.choice(choices), v)
        return _shuffled_ports(n, nbrs, rng)

    if fam == "random-connected":
        # random spanning tree, then extra edges up to the degree cap
        for v in range(1, n):
            choices = [u for u in range(v) if cap is None or len(nbrs[u]) < cap]
            if not choices:
                raise InfeasibleSpec("degree cap too small for a tree")
            link(rng.choice(choices), v)
        if n > 2:
            extra = rng.randint(0, n)
            for _ in range(extra):
                u = rng.randrange(n)
                v = rng.randrange(n)
                if u == v or v in nbrs[u]:
                    continue
                if cap is not None and (len(nbrs[u]) >= cap or len(nbrs[v]) >= cap):
                    continue
                link(u, v)
        return _shuffled_ports(n, nbrs, rng)

    raise InfeasibleSpec(f"unknown family {fam!r}")


# ---------------------------------------------------------------------------
# .pg file format: line 1 "pg 1"; line 2 "<n> <m>"; then one line per edge
# "<u> <pu> <v> <pv>" with u < v.
# ---------------------------------------------------------------------------

def dumps(g: PortGraph) -> str:
    lines = [f"pg 1", f"{g.n} {g.m}"]
    for u, pu, v, pv in g.edges():
        lines.append(f"{u} {pu} {v} {pv}")
    return "\n".join(lines) + "\n"


def loads(text: str) -> PortGraph:
    lines = text.splitlines()
    if not lines or lines[0].split() != ["pg", "1"]:
        raise GraphFormatError("line 1: expected header 'pg 1'")
    try:
        n_s, m_s = lines[1].split()
        n, m = int(n_s), int(m_s)
    except (IndexError, ValueError):
        raise GraphFormatError("line 2: expected '<n> <m>'") from None
    edges = []
    seen_ports: set[tuple[int, int]] = set()
    for i, line in enumerate(lines[2:2 + m], start=3):
        try:
            u, pu, v, pv = (int(x) for x in line.split())
        except ValueError:
            raise GraphFormatError(f"line {i}: expected '<u> <pu> <v> <pv>'") from None
        if not (0 <= u < v < n):
            raise GraphFormatError(f"line {i}: node ids must satisfy 0 <= u < v < n")
        for node, port in ((u, pu), (v, pv)):
            if port < 0:
                raise GraphFormatError(f"line {i}: negative port")
            if (node, port) in seen_ports:
                raise GraphFormatError(f"line {i}: duplicate port {port} at node {node}")
            seen_ports.add((node, port))
        edges.append((u, pu, v, pv))
    if len(edges) != m:
        raise GraphFormatError(f"expected {m} edge lines, found {len(edges)}")
    g = from_edges(n, edges)
    for v in range(n):
        for p, u in enumerate(g.nbr[v]):
            if u == -1:
                raise GraphFormatError(f"node {v}: ports are not 0..deg-1 (gap at {p})")
    rep = validate(g)
    if not rep.ok:
        raise GraphFormatError("; ".join(rep.violations))
    return g


def save(g: PortGraph, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(g))


def load(path: str) -> PortGraph:
    with open(path, "r", encoding="utf-8") as fh:
        return loads(fh.read())
