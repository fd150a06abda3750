"""Neighbor probing and one-hop storage writes, as agent procedures.

``find_first`` visits neighbors of the current node in one of four orders,
testing a storage predicate at each, and returns to the caller's node with
the incoming port naming the first match (success recorded in a one-bit
flag; the system has no port ``-1``).  Probing needs no persistent counter:
the next probe port is always derived from the port the agent just returned
through.

``mark_pred`` hops through the incoming port, applies a fixed set of storage
writes at that neighbor, and hops back, leaving position and incoming port
unchanged.
"""

from __future__ import annotations

from enum import IntEnum

from .programs import (
    C_DEG_EQ, C_GLOB_EQ, C_PIN_EQ, C_PIN_LAST, C_REG_EQ,
    OP_MV_K, OP_MV_LAST, OP_MV_PIN, OP_MV_PIN_D, OP_PRED, OP_RET, OP_WI,
    OP_GK, Proc, StackProgram,
)


class SearchOrder(IntEnum):
    HEAD_ASCEND = 0
    MIDDLE_ASCEND = 1
    MIDDLE_DESCEND = 2
    TAIL_DESCEND = 3


# fixed register widths; the program builders assert the caps hold
PRED_BITS = 4    # up to 16 predicate kinds per program
NS_BITS = 4      # up to 16 field groups
WI_BITS = 4      # up to 16 write instructions

G_FLAG = "flag"  # global success flag written by find_first

_ORDER_ARGS = {
    SearchOrder.HEAD_ASCEND: (0, 0),
    SearchOrder.MIDDLE_ASCEND: (0, 1),
    SearchOrder.MIDDLE_DESCEND: (1, 1),
    SearchOrder.TAIL_DESCEND: (1, 0),
}


def install_primitives(prog: StackProgram) -> None:
    """Add the ``ff`` and ``mark_pred`` procedures to a program."""
    flag = prog.gidx(G_FLAG)

    p = Proc("ff", regs={"kind": PRED_BITS, "pns": NS_BITS,
                         "desc": 1, "mid": 1})
    r_kind, r_pns, r_desc, r_mid = (p.reg(n) for n in
                                    ("kind", "pns", "desc", "mid"))
    l_ret = p.label()
    l_mid = p.label()
    l_mid_desc = p.label()
    l_tail = p.label()
    l_probe = p.label()
    l_desc_step = p.label()

    p.emit(OP_GK, flag, 0)
    p.br(C_DEG_EQ, 0, 0, l_ret)
    p.br(C_REG_EQ, r_mid, 1, l_mid)
    p.br(C_REG_EQ, r_desc, 1, l_tail)
    p.emit(OP_MV_K, 0)                      # HeadAscend: start at port 0
    p.jmp(l_probe)
    p.here(l_tail)
    p.emit(OP_MV_LAST)                      # TailDescend: start at top port
    p.jmp(l_probe)
    p.here(l_mid)
    p.br(C_REG_EQ, r_desc, 1, l_mid_desc)
    p.br(C_PIN_LAST, 0, 0, l_ret)           # MiddleAscend from pin+1, non-cyclic
    p.emit(OP_MV_PIN_D, 1)
    p.jmp(l_probe)
    p.here(l_mid_desc)
    p.br(C_PIN_EQ, 0, 0, l_ret)             # MiddleDescend from pin-1
    p.emit(OP_MV_PIN_D, -1)
    p.jmp(l_probe)

    p.here(l_probe)                          # at the probed neighbor
    p.emit(OP_PRED, r_kind, r_pns, flag)
    p.emit(OP_MV_PIN)                        # back; pin = probed port
    p.br(C_GLOB_EQ, flag, 1, l_ret)          # success: pin names the match
    p.br(C_REG_EQ, r_desc, 1, l_desc_step)
    p.br(C_PIN_LAST, 0, 0, l_ret)            # ascending exhausted
    p.emit(OP_MV_PIN_D, 1)
    p.jmp(l_probe)
    p.here(l_desc_step)
    p.br(C_PIN_EQ, 0, 0, l_ret)              # descending exhausted
    p.emit(OP_MV_PIN_D, -1)
    p.jmp(l_probe)

    p.here(l_ret)
    p.emit(OP_RET)
    prog.add_proc(p)

    mp = Proc("mark_pred", regs={"wi": WI_BITS, "wns": NS_BITS})
    mp.emit(OP_MV_PIN)                       # to the neighbor behind pin
    mp.emit(OP_WI, mp.reg("wi"), mp.reg("wns"))
    mp.emit(OP_MV_PIN)                       # back; pin unchanged
    mp.emit(OP_RET)
    prog.add_proc(mp)


def call_ff(p: Proc, order: SearchOrder, kind, pns) -> None:
    """Emit a call to ``ff``; kind/pns may be constants or ('r', regname)."""
    desc, mid = _ORDER_ARGS[order]
    p.call("ff", kind=kind, pns=pns, desc=desc, mid=mid)


def call_mark_pred(p: Proc, wi, wns) -> None:
    p.call("mark_pred", wi=wi, wns=wns)
