import random

import pytest
from hypothesis import given, settings, strategies as st

from conftest import oriented_cycle
from portagent.graphs import GraphFamilySpec, from_edges, generate
from portagent.runtime import Session
from portagent.turing import (
    BLANK, HALT, LEFT, RIGHT, S0, S1, MachineBuilder, MachineError,
    MachineFormatError, TuringAgentProgram, build_bouncer,
    build_port_zero_walker, build_rotor_walker, machine_dumps, machine_loads,
    run_activation, tm_step, unary_decode, unary_encode,
)


def test_unary_round_trip():
    for k in range(0, 40):
        assert unary_decode(unary_encode(k)) == k


def test_unary_rejects_gaps():
    with pytest.raises(MachineError):
        unary_decode([S1, BLANK, S1])


def identity_machine():
    b = MachineBuilder("ident")
    q0, q1 = b.state(), b.state()
    b.on(q0, {}, q1)
    return b.build(q0, q1, mem_cells=2)


def test_tm_step_advances_heads():
    spec = identity_machine()
    tapes = [[S1, S0], [], [], [], []]
    heads = [0] * 5
    state = tm_step(spec, tapes, heads, spec.q0)
    assert state == spec.q1
    assert heads == [1] * 5
    assert tapes[0] == [S1, S0]


def test_tm_step_terminal_state_refuses():
    spec = identity_machine()
    with pytest.raises(MachineError, match="terminal"):
        tm_step(spec, [[], [], [], [], []], [0] * 5, spec.q1)


def test_left_move_clamps_at_zero():
    b = MachineBuilder("lefty")
    q0, q1 = b.state(), b.state()
    b.on(q0, {}, q1, moves="LLLLL")
    spec = b.build(q0, q1)
    heads = [0] * 5
    tm_step(spec, [[], [], [], [], []], heads, spec.q0)
    assert heads == [0] * 5


def test_read_only_tapes_reject_changes():
    b = MachineBuilder("vandal")
    q0, q1 = b.state(), b.state()
    b.on(q0, {}, q1, {2: 1})        # writes a one onto the degree tape
    spec = b.build(q0, q1)
    with pytest.raises(MachineError, match="read-only"):
        run_activation(spec, [], 0, degree=0, pin=-1)


def test_tape2_write_beyond_storage_cells():
    b = MachineBuilder("overflow")
    q0, qa, q1 = b.state(), b.state(), b.state()
    b.on(q0, {}, qa)
    b.on(qa, {}, q1, {1: 1})        # writes tape 2 at cell 1 with h = 1
    spec = b.build(q0, q1, storage_cells=1)
    with pytest.raises(MachineError, match="storage_cells"):
        run_activation(spec, [], 0, degree=1, pin=0)


def test_halt_on_empty_output_tape():
    spec = identity_machine()
    res = run_activation(spec, [BLANK, BLANK], 0, degree=3, pin=1)
    assert res.action == HALT


def test_single_one_is_port_zero():
    b = MachineBuilder("p0")
    q0, q1 = b.state(), b.state()
    b.on(q0, {}, q1, {4: 1}, moves="LLLLL")
    spec = b.build(q0, q1)
    res = run_activation(spec, [], 0, degree=2, pin=0)
    assert res.action == 0


def test_emitted_port_must_fit_degree():
    b = MachineBuilder("big")
    q0, qa, q1 = b.state(), b.state(), b.state()
    b.on(q0, {}, qa, {4: 1})
    b.on(qa, {}, q1, {4: 1}, moves="LLLLL")
    spec = b.build(q0, q1)
    with pytest.raises(MachineError, match="degree"):
        run_activation(spec, [], 0, degree=1, pin=0)


def test_bouncer_echoes_pin():
    spec = build_bouncer()
    for degree in (1, 2, 4, 7):
        for pin in range(degree):
            assert run_activation(spec, [], 0, degree, pin).action == pin
    assert run_activation(spec, [], 0, 3, -1).action == 0


def test_port_zero_walker_rule():
    spec = build_port_zero_walker()
    r = run_activation(spec, [], 0, 2, -1)
    assert r.action == 0 and r.storage_bits == 1
    assert run_activation(spec, [], 1, 2, 0).action == HALT


def test_rotor_walker_rule_directly():
    spec = build_rotor_walker()
    for degree in (1, 2, 3, 5, 8):
        for pin in range(degree):
            got = run_activation(spec, [BLANK], 0, degree, pin).action
            assert got == (pin + 1) % degree, (degree, pin)
    assert run_activation(spec, [BLANK], 0, 4, -1).action == 0


@given(st.integers(min_value=1, max_value=9), st.data())
@settings(max_examples=120, deadline=None)
def test_samples_match_reference_rules(degree, data):
    pin = data.draw(st.integers(min_value=-1, max_value=degree - 1))
    flag = data.draw(st.integers(min_value=0, max_value=1))
    assert run_activation(build_bouncer(), [], flag, degree, pin).action \
        == (pin if pin >= 0 else 0)
    pz = run_activation(build_port_zero_walker(), [], flag, degree, pin)
    assert pz.action == (HALT if flag else 0)
    assert run_activation(build_rotor_walker(), [BLANK], flag, degree,
                          pin).action == ((pin + 1) % degree if pin >= 0
                                          else 0)


def test_machine_file_round_trip():
    for build in (build_bouncer, build_port_zero_walker, build_rotor_walker):
        spec = build()
        text = machine_dumps(spec)
        again = machine_loads(text, spec.name)
        assert again.delta == spec.delta
        assert (again.q0, again.q1, again.n_states) == \
            (spec.q0, spec.q1, spec.n_states)
        assert (again.mem_cells, again.storage_cells) == \
            (spec.mem_cells, spec.storage_cells)


def test_machine_file_rejects_garbage():
    with pytest.raises(MachineFormatError):
        machine_loads("not a machine\n")
    with pytest.raises(MachineFormatError):
        machine_loads("tm 1\nq0 0 q1 1 states 2 mem 0 storage 1\n0 01 -> 1 0 R\n")


def test_port_zero_walker_on_oriented_c4():
    """Flag-setting port-0 walk around the oriented cycle: four moves."""
    g = oriented_cycle(4)
    prog = TuringAgentProgram(build_port_zero_walker())
    sess = Session(g, prog.schema)
    tr = sess.run(prog, start=0)
    assert tr.halted and tr.moves == 4
    assert tr.final_node == 0
    assert all(sess.storage[v][prog.st_slot] == 1 for v in range(4))


def test_bouncer_alternates_on_k2():
    g = from_edges(2, [(0, 0, 1, 0)])
    prog = TuringAgentProgram(build_bouncer())
    locs = []
    sess = Session(g, prog.schema)
    sess.run(prog, step_limit=4, start=0,
             step_hook=lambda k, node, pin, st: locs.append(node))
    assert locs == [0, 1, 0, 1]


def test_tape1_persists_across_activations():
    # the rotor walker plants a sentinel at tape-1 cell 0 on its first
    # activation; it must still be there on the next one
    spec = build_rotor_walker()
    res1 = run_activation(spec, [BLANK], 0, degree=2, pin=0)
    assert res1.memory == [S1]
    res2 = run_activation(spec, res1.memory, 0, degree=2, pin=1)
    assert res2.memory == [S1]
    assert res2.action == 0
