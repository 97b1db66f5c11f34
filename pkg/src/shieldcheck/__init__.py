"""Explicit-state verification of a tamper-detecting asynchronous pipeline.

The package builds labeled transition systems for handshake sequencers
(from an abstract protocol down to gate-level models), composes them,
minimizes them modulo bisimulation and checks how physical attacks show up.
"""
from shieldcheck.aut import AutParseError, load_aut, read_aut, save_aut, write_aut
from shieldcheck.compose import (BudgetExceeded, Network, SyncVector, gateset_par, hide,
                                 hide_except, pipe, pipe_nohide, product, product_stats,
                                 rename)
from shieldcheck.equiv import (Relation, equivalent, minimize, oracle_equivalent,
                               weak_trace_includes)
from shieldcheck.lts import (DIV, TAU, Label, Lts, Voltage, deadlock_states,
                             divergent_states, normalize, run_trace, visible)

__version__ = "0.1.0"

__all__ = [
    "AutParseError", "BudgetExceeded", "DIV", "Label", "Lts", "Network", "Relation",
    "SyncVector", "TAU", "Voltage", "deadlock_states", "divergent_states", "equivalent",
    "gateset_par", "hide", "hide_except", "load_aut", "minimize", "normalize",
    "oracle_equivalent", "pipe", "pipe_nohide", "product", "product_stats", "read_aut",
    "rename", "run_trace", "save_aut", "visible", "weak_trace_includes", "write_aut",
]
