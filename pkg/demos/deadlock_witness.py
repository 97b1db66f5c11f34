"""The deadlock of two INTUITIVE sequencers, step by step.

With internal gates left visible (suffixed _L and _R for the two copies),
the trace below is executable and leads to a state from which the pipeline
can get stuck: both sequencers wait for the other to move.

    python3 demos/deadlock_witness.py
"""
from shieldcheck import Relation, deadlock_states, minimize, pipe_nohide, run_trace
from shieldcheck.circuit import SequencerConfig, build_sequencer
from shieldcheck.lts import reachable

seq = minimize(build_sequencer(SequencerConfig.from_code("INTUITIVE", "RV")), Relation.DSBB)
two = pipe_nohide(seq, seq)
print(f"one sequencer, nothing hidden: {seq.num_states} states, {seq.num_transitions} transitions")
print(f"two sequencers:                {two.num_states} states, {two.num_transitions} transitions")

trace = ["R_PRED !UP", "R !UP", "R_SUCC !UP", "G_L !DOWN", "G_R !DOWN", "A_SUCC !UP",
         "R_PRED !UP"]
states = {two.initial}
for step in trace:
    states = {t for s in states for lab, t in two.successors(s) if str(lab) == step}
    print(f"  {step:<12} -> {sorted(states)}")

assert states == run_trace(two, trace)
stuck = reachable(two, states) & deadlock_states(two)
print(f"deadlock states reachable from there: {len(stuck)} of {len(deadlock_states(two))}")
