"""Deterministic single-agent computation on anonymous port-numbered graphs.

A simulation engine for a single agent that observes only per-node storage,
the local degree, and its incoming port.  Includes a constant-memory
lexicographic DFS, a retargetable distributed path structure, a five-tape
machine formalism for local computation, and two memory-compression
simulation layers (linear-to-constant and constant-to-one-bit agent memory),
all verified against centralized oracles.
"""

from .graphs import GraphFamilySpec, PortGraph, generate, load, save, validate
from .runtime import Session, audit_budget, run
from .lexdfs import build_dldfs_program, check_lemma1, oracle_lexdfs
from .turing import (
    TuringAgentProgram, TuringMachineSpec, machine_load, machine_save,
    run_activation,
)
from .sim_const import build_simconst, check_simconst_lockstep, run_simconst
from .sim_onebit import (
    build_chain, build_onebit, check_chain_lockstep, check_onebit_lockstep,
    run_chain_fast,
)
from .tasks import bench, default_corpus, fuzz_rpath, run_dldfs, run_parity, verify

__all__ = [
    "GraphFamilySpec", "PortGraph", "generate", "load", "save", "validate",
    "Session", "audit_budget", "run",
    "build_dldfs_program", "check_lemma1", "oracle_lexdfs",
    "TuringAgentProgram", "TuringMachineSpec", "machine_load", "machine_save",
    "run_activation",
    "build_simconst", "check_simconst_lockstep", "run_simconst",
    "build_chain", "build_onebit", "check_chain_lockstep",
    "check_onebit_lockstep", "run_chain_fast",
    "bench", "default_corpus", "fuzz_rpath", "run_dldfs", "run_parity",
    "verify",
]
