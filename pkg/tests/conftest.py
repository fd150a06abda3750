from portagent.graphs import from_edges


def oriented_cycle(n: int):
    """Cycle with port 0 pointing forward at every node (port 1 back).

    The canonical numbering ranks neighbors by id, which on a cycle makes
    port 0 point backward at most nodes; several hand-simulated fixtures
    assume the oriented labeling instead.
    """
    edges = []
    for v in range(n):
        w = (v + 1) % n
        pv, pw = 0, 1
        if v < w:
            edges.append((v, pv, w, pw))
        else:
            edges.append((w, pw, v, pv))
    return from_edges(n, edges)
