import pytest

from conftest import oriented_cycle
from portagent.graphs import GraphFamilySpec, from_edges, generate
from portagent.runtime import audit_budget
from portagent.sim_const import (
    SimulationError, build_simconst, check_simconst_lockstep, run_direct,
    run_simconst,
)
from portagent.turing import (
    build_bouncer, build_port_zero_walker, build_rotor_walker,
)


def test_bouncer_alternates_on_k2():
    g = from_edges(2, [(0, 0, 1, 0)])
    run = run_simconst(build_bouncer(), g, 0, sim_steps=4)
    assert [b["node"] for b in run.boundaries] == [0, 1, 0, 1, 0]
    assert [b["pin"] for b in run.boundaries] == [-1, 0, 0, 0, 0]


def test_portzero_on_oriented_c4_full_circle():
    g = oriented_cycle(4)
    bad = check_simconst_lockstep(build_port_zero_walker(), g, 0, 20)
    assert bad == []
    direct = run_direct(build_port_zero_walker(), g, 0, 20)
    assert direct.halted
    assert [b["node"] for b in direct.boundaries] == [0, 1, 2, 3, 0]


def test_rotor_per_step_ports_match_direct():
    g = generate(GraphFamilySpec("complete", 3))
    run = run_simconst(build_rotor_walker(), g, 0, sim_steps=6)
    direct = run_direct(build_rotor_walker(), g, 0, 6)
    assert [b["node"] for b in run.boundaries] == \
        [b["node"] for b in direct.boundaries]
    assert [b["pin"] for b in run.boundaries] == \
        [b["pin"] for b in direct.boundaries]


@pytest.mark.parametrize("mk", [build_bouncer, build_port_zero_walker,
                                build_rotor_walker])
@pytest.mark.parametrize("spec", [
    GraphFamilySpec("path", 2),
    GraphFamilySpec("path", 1),
    GraphFamilySpec("star", 5),
    GraphFamilySpec("cycle", 4),
    GraphFamilySpec("random-connected", 7, 4, 11),
])
def test_lockstep_small(mk, spec):
    g = generate(spec)
    assert check_simconst_lockstep(mk(), g, 0, 8) == []


def test_tape_overflow_surfaces_as_error():
    # a machine that runs its heads right forever overflows the n-cell tape
    from portagent.turing import MachineBuilder
    b = MachineBuilder("runaway")
    q0, qa, q1 = b.state(), b.state(), b.state()
    b.on(q0, {}, qa, {4: 1})
    b.on(qa, {0: 0}, qa, {0: 0})
    b.on(qa, {0: 1}, q1)
    spec = b.build(q0, q1, mem_cells=0, storage_cells=1)
    g = from_edges(2, [(0, 0, 1, 0)])
    run = run_simconst(spec, g, 0, sim_steps=2, step_limit=10 ** 6)
    assert run.errored


def test_mem_cells_must_fit():
    from portagent.turing import MachineBuilder
    b = MachineBuilder("wide")
    q0, q1 = b.state(), b.state()
    b.on(q0, {}, q1, moves="LLLLL")
    spec = b.build(q0, q1, mem_cells=10, storage_cells=1)
    g = from_edges(2, [(0, 0, 1, 0)])
    with pytest.raises(SimulationError):
        run_simconst(spec, g, 0, sim_steps=1)


def test_budget_constant_across_sizes():
    m = build_bouncer()
    sim = build_simconst(m)

    def make_run(g):
        # fixed activation window: covers several simulated steps at these
        # sizes and returns normally with measurements
        return run_simconst(m, g, 0, sim=sim, measure=True,
                            step_limit=40_000)

    graphs = [generate(GraphFamilySpec("random-connected", n, 3, 5))
              for n in (4, 6, 8)]
    reports = [make_run(g) for g in graphs]
    bits = {r.max_mem_bits for r in reports}
    assert len(bits) == 1, bits
    assert sim.program.memory_bits >= max(bits)
