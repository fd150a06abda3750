"""Command-line interface.

Subcommands: ``gen`` writes graph files, ``run`` executes an algorithm with
optional tracing, ``verify`` runs a target's oracle suite (exit status 1 on
any failure), ``bench`` emits move-count scaling rows as CSV, and ``sim``
drives the simulation layers over a machine file.
"""

from __future__ import annotations

import argparse
import sys

from . import graphs, tasks
from .graphs import GraphFamilySpec, generate
from .runtime import Session
from .sim_const import run_direct, run_simconst
from .sim_onebit import build_onebit, run_chain_fast
from .turing import TuringAgentProgram, machine_load
from .runtime import DEFAULT_STEP_LIMIT


def _cmd_gen(args) -> int:
    spec = GraphFamilySpec(args.family, args.n, args.max_degree, args.seed)
    g = generate(spec)
    graphs.save(g, args.output)
    print(f"wrote {args.output}: n={g.n} m={g.m}")
    return 0


def _cmd_run(args) -> int:
    g = graphs.load(args.graph)
    if args.alg == "dldfs":
        tr, visits = tasks.run_dldfs(g, start=args.start, trace=bool(args.trace),
                                     step_limit=args.steps)
        print(f"halted={tr.halted} moves={tr.moves} visits={visits}")
    elif args.alg == "parity":
        out, _ = tasks.run_parity(g, start=args.start, step_limit=args.steps)
        print(f"parity={out} (n={g.n})")
        tr = None
    else:
        print(f"unknown algorithm {args.alg!r}", file=sys.stderr)
        return 1
    if args.trace and tr is not None:
        with open(args.trace, "w", encoding="utf-8") as fh:
            fh.write(tr.dumps())
        print(f"trace written to {args.trace}")
    return 0


def _cmd_verify(args) -> int:
    corpus = None
    if args.corpus is not None:
        corpus = tasks.default_corpus(args.seed, max_random=args.corpus)
    res = tasks.verify(args.target, seed=args.seed, corpus=corpus,
                       fault_injection=args.fault_injection)
    status = "PASS" if res.ok else "FAIL"
    print(f"verify {res.target}: {status} ({res.checked} checks)")
    for f in res.failures[:20]:
        print(f"  {f}")
    return 0 if res.ok else 1


def _cmd_bench(args) -> int:
    ns = [int(x) for x in args.ns.split(",")]
    families = args.families.split(",")
    rep = tasks.bench(args.target, families, ns, seed=args.seed)
    text = rep.dumps()
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    for fam in families:
        print(f"# slope[{fam}] = {rep.slope(fam):.2f}", file=sys.stderr)
    return 0


def _cmd_sim(args) -> int:
    machine = machine_load(args.machine)
    g = graphs.load(args.graph)
    if args.layer == "const":
        run = run_simconst(machine, g, args.start, sim_steps=args.steps)
        print(f"simulated steps={len(run.boundaries) - 1} "
              f"locations={[b['node'] for b in run.boundaries]} "
              f"halted={run.halted} errored={run.errored}")
    elif args.layer == "onebit":
        prog = TuringAgentProgram(machine)
        sim = build_onebit(prog)
        sess = Session(g, sim.schema)
        tr = sess.run(sim.program, start=args.start,
                      step_limit=args.steps * max(1, 2 * sim.c))
        print(f"steps={tr.steps} halted={tr.halted} "
              f"final_node={tr.final_node} (c={sim.c})")
    elif args.layer == "chain":
        run = run_chain_fast(machine, g, args.start,
                             step_limit=DEFAULT_STEP_LIMIT,
                             machine_steps=args.steps)
        print(f"simulator steps={run.steps} machine steps={run.machine_steps} "
              f"halted={run.halted} errored={run.errored} "
              f"final_node={run.final_node}")
    else:
        print(f"unknown layer {args.layer!r}", file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="portagent")
    sub = ap.add_subparsers(dest="cmd", required=True)

    g = sub.add_parser("gen", help="generate a graph file")
    g.add_argument("--family", "-f", required=True, choices=graphs.FAMILIES)
    g.add_argument("--n", "-n", type=int, required=True)
    g.add_argument("--max-degree", type=int, default=None)
    g.add_argument("--seed", "-s", type=int, default=0)
    g.add_argument("--output", "-o", required=True)
    g.set_defaults(fn=_cmd_gen)

    r = sub.add_parser("run", help="run an algorithm on a graph file")
    r.add_argument("alg", choices=("dldfs", "parity"))
    r.add_argument("--graph", required=True)
    r.add_argument("--start", type=int, default=0)
    r.add_argument("--steps", type=int, default=DEFAULT_STEP_LIMIT)
    r.add_argument("--trace", default=None, help="trace file path")
    r.set_defaults(fn=_cmd_run)

    v = sub.add_parser("verify", help="run a target's verification suite")
    v.add_argument("target", choices=tasks.VERIFY_TARGETS)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--corpus", type=int, default=None,
                   help="random-graph count for the corpus")
    v.add_argument("--fault-injection", action="store_true")
    v.set_defaults(fn=_cmd_verify)

    b = sub.add_parser("bench", help="move-count scaling")
    b.add_argument("target", choices=("dldfs", "simonebit"))
    b.add_argument("--ns", default="8,16,32,64,128,256")
    b.add_argument("--families", default="path,cycle,random-connected")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--output", "-o", default=None)
    b.set_defaults(fn=_cmd_bench)

    s = sub.add_parser("sim", help="run a simulation layer over a machine")
    s.add_argument("layer", choices=("const", "onebit", "chain"))
    s.add_argument("--machine", required=True)
    s.add_argument("--graph", required=True)
    s.add_argument("--start", type=int, default=0)
    s.add_argument("--steps", type=int, default=20)
    s.set_defaults(fn=_cmd_sim)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
