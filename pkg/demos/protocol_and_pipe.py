"""The handshake protocol and why chaining sequencers is safe.

Builds the 8-state protocol, chains copies of it with ``pipe`` and checks
that every chain is divergence-sensitive branching bisimilar to a single
sequencer. Then shows what hiding everything does to the protocol.

    python3 demos/protocol_and_pipe.py
"""
from shieldcheck import Relation, equivalent, hide, minimize, write_aut
from shieldcheck.circuit import build_shield, protocol_lts

p = protocol_lts()
print("protocol:")
print(write_aut(p))

for n in range(1, 6):
    chain = build_shield(n, p)
    same = equivalent(chain, p, Relation.DSBB)
    print(f"{n + 1} sequencers: {chain.num_states:4d} states, "
          f"{chain.num_transitions:4d} transitions, equivalent to one: {bool(same)}")

# with every gate hidden, only an endless internal loop remains
silent = hide(p, p.gates())
print("\nall gates hidden, dsbb quotient:")
print(write_aut(minimize(silent, Relation.DSBB)), end="")
print("same, divergence-blind quotient:")
print(write_aut(minimize(silent, Relation.BRANCHING)), end="")
