"""Physical attacks on a pipeline of sequencers and the detection verdict.

Two-sequencer attacks act on the wires between ``C1`` and ``C2``, called
R and A as in :func:`shieldcheck.compose.pipe`. Short-circuits need three
sequencers::

    C1 --R1/A1-- C2 --R2/A2-- C3

A sequencer is modeled by the protocol automaton unless another LTS is
supplied, so that verdicts are about the circuit-level design.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Sequence

from shieldcheck.circuit import protocol_lts
from shieldcheck.compose import (DEFAULT_BUDGET, Network, SyncVector, gateset_network,
                                 hide, product, rename)
from shieldcheck.equiv import Relation, minimize, weak_trace_includes
from shieldcheck.lts import Lts, Voltage, deadlock_states, visible

__all__ = [
    "StuckVariant",
    "CutVariant",
    "ShortPolicy",
    "StuckAt",
    "Cut",
    "Short",
    "Verdict",
    "SHORT_PAIRS",
    "stuckat_lts",
    "stop_lts",
    "apply_stuck_at",
    "apply_cut",
    "short_pipeline",
    "gen_short_vectors",
    "apply_short",
    "apply_attack",
    "detect",
]

UP, DOWN = Voltage.UP, Voltage.DOWN
TWO_WIRES = ("R", "A")
THREE_WIRES = ("R1", "A1", "R2", "A2")
SHORT_PAIRS = (("R1", "R2"), ("R1", "A1"), ("R1", "A2"), ("R2", "A1"), ("R2", "A2"),
               ("A1", "A2"))


class StuckVariant(enum.Enum):
    BOTH = "both"
    RECEIVER = "receiver"


class CutVariant(enum.Enum):
    BLOCK = "block"
    DESYNC = "desync"


class ShortPolicy(enum.Enum):
    NONDET = "nondet"
    MAJORITY = "majority"


def _check_wire(wire: str, allowed) -> None:
    if wire not in allowed:
        raise ValueError(f"unknown wire {wire!r}, expected one of {', '.join(allowed)}")


@dataclass(frozen=True)
class StuckAt:
    wire: str
    value: Voltage
    variant: StuckVariant = StuckVariant.BOTH

    def __post_init__(self):
        _check_wire(self.wire, TWO_WIRES)

    def __str__(self):
        return f"stuckat {self.wire}={self.value.name} ({self.variant.value})"


@dataclass(frozen=True)
class Cut:
    wire: str
    variant: CutVariant = CutVariant.BLOCK

    def __post_init__(self):
        _check_wire(self.wire, TWO_WIRES)

    def __str__(self):
        return f"cut {self.wire} ({self.variant.value})"


@dataclass(frozen=True)
class Short:
    wire_a: str
    wire_b: str
    policy: ShortPolicy = ShortPolicy.NONDET

    def __post_init__(self):
        _check_wire(self.wire_a, THREE_WIRES)
        _check_wire(self.wire_b, THREE_WIRES)
        if self.wire_a == self.wire_b:
            raise ValueError("a short-circuit needs two distinct wires")

    @property
    def gate(self) -> str:
        return self.wire_a + self.wire_b

    def __str__(self):
        return f"short {self.wire_a}-{self.wire_b} ({self.policy.value})"


@dataclass(frozen=True)
class Verdict:
    """``detected`` iff the attacked model cannot perform some protocol trace."""

    detected: bool
    witness: tuple[str, ...] | None
    deadlock: bool

    def __str__(self):
        s = "detected" if self.detected else "undetected"
        if self.witness:
            s += f" (missing: {', '.join(self.witness)})"
        return s + (", deadlock" if self.deadlock else "")


def stuckat_lts(wire: str, value: Voltage) -> Lts:
    """Accepts ``wire !value`` forever and nothing else."""
    return Lts.from_transitions(1, [(0, visible(wire, value), 0)])


def stop_lts() -> Lts:
    return Lts.from_transitions(1, [])


def _pair(seq: Lts | None, seq2: Lts | None = None) -> tuple[Lts, Lts]:
    c1 = seq if seq is not None else protocol_lts()
    c2 = seq2 if seq2 is not None else c1
    return (rename(c1, {"R_SUCC": "R", "A_SUCC": "A"}),
            rename(c2, {"R_PRED": "R", "A_PRED": "A"}))


def _receiver_is_c2(wire: str) -> bool:
    # requests flow left to right, acknowledgments right to left
    return wire == "R"


def apply_stuck_at(spec: StuckAt, seq: Lts | None = None, *,
                   budget: int = DEFAULT_BUDGET) -> Lts:
    """Two sequencers whose wire ``spec.wire`` also synchronizes with a stuck-at process.

    With the RECEIVER variant the sending side does not synchronize on the
    wire at all, so it can emit any value there.
    """
    c1, c2 = _pair(seq)
    s1, s2 = {"R", "A"}, {"R", "A"}
    if spec.variant is StuckVariant.RECEIVER:
        (s1 if _receiver_is_c2(spec.wire) else s2).discard(spec.wire)
    net = gateset_network([(c1, s1), (c2, s2), (stuckat_lts(spec.wire, spec.value), {spec.wire})])
    return hide(product(net, budget=budget, what=str(spec)), {"R", "A"})


def apply_cut(spec: Cut, seq: Lts | None = None, *, budget: int = DEFAULT_BUDGET) -> Lts:
    """BLOCK: the wire also synchronizes with ``stop``. DESYNC: each end uses it on its own."""
    c1, c2 = _pair(seq)
    if spec.variant is CutVariant.BLOCK:
        comps = [(c1, {"R", "A"}), (c2, {"R", "A"}), (stop_lts(), {spec.wire})]
    else:
        keep = {"R", "A"} - {spec.wire}
        comps = [(c1, keep), (c2, set(keep))]
    return hide(product(gateset_network(comps), budget=budget, what=str(spec)), {"R", "A"})


def short_pipeline(seq: Lts | None = None) -> list[Lts]:
    """Three renamed copies of ``seq``, ready for short-circuit vectors."""
    c = seq if seq is not None else protocol_lts()
    return [
        rename(c, {"R_SUCC": "R1", "A_SUCC": "A1"}),
        rename(c, {"R_PRED": "R1", "A_PRED": "A1", "R_SUCC": "R2", "A_SUCC": "A2"}),
        rename(c, {"R_PRED": "R2", "A_PRED": "A2"}),
    ]


def _resolve(values: Sequence[Voltage], policy: ShortPolicy) -> list[Voltage]:
    distinct = sorted(set(values))
    if len(distinct) == 1:
        return distinct
    if policy is ShortPolicy.MAJORITY:
        ups = sum(1 for v in values if v is UP)
        downs = len(values) - ups
        if ups != downs:
            return [UP if ups > downs else DOWN]
    # disagreement without a majority: either value may win
    return [DOWN, UP]


def gen_short_vectors(pipeline: Sequence[Lts], wire_a: str, wire_b: str,
                      policy: ShortPolicy = ShortPolicy.NONDET) -> list[SyncVector]:
    """Vectors for a pipeline in which ``wire_a`` and ``wire_b`` are shorted.

    External gates fire alone and untouched internal wires keep their binary
    rendezvous. Every component touching a shorted wire takes part in the
    merged rendezvous on the fresh gate ``wire_a + wire_b``, each through one
    of its ports on the two wires; ports on the same wire agree on the value.
    """
    if wire_a == wire_b:
        raise ValueError("a short-circuit needs two distinct wires")
    n = len(pipeline)
    gates = [c.gates() for c in pipeline]
    shorted = (wire_a, wire_b)
    merged = wire_a + wire_b
    vectors: list[SyncVector] = []
    for g in sorted(set().union(*gates)):
        if g in shorted:
            continue
        users = [i for i in range(n) if g in gates[i]]
        for v in (DOWN, UP):
            x = visible(g, v)
            slots = tuple(x if i in users else None for i in range(n))
            vectors.append(SyncVector(slots, x))
    touching = [i for i in range(n) if gates[i] & set(shorted)]
    ports = [[w for w in shorted if w in gates[i]] for i in touching]
    for choice in itertools.product(*ports):
        wires = sorted(set(choice), key=shorted.index)
        for vals in itertools.product((DOWN, UP), repeat=len(wires)):
            value = dict(zip(wires, vals))
            slots: list = [None] * n
            for i, w in zip(touching, choice):
                slots[i] = visible(w, value[w])
            for r in _resolve([value[w] for w in choice], policy):
                vectors.append(SyncVector(tuple(slots), visible(merged, r)))
    return vectors


def apply_short(spec: Short, seq: Lts | None = None, *, budget: int = DEFAULT_BUDGET) -> Lts:
    """Three-sequencer pipeline with the short-circuit; internal and merged gates hidden."""
    pipeline = short_pipeline(seq)
    vectors = gen_short_vectors(pipeline, spec.wire_a, spec.wire_b, spec.policy)
    l = product(Network(tuple(pipeline), tuple(vectors)), budget=budget, what=str(spec))
    return hide(l, set(THREE_WIRES) | {spec.gate})


def apply_attack(spec, seq: Lts | None = None, *, budget: int = DEFAULT_BUDGET) -> Lts:
    if isinstance(spec, StuckAt):
        return apply_stuck_at(spec, seq, budget=budget)
    if isinstance(spec, Cut):
        return apply_cut(spec, seq, budget=budget)
    if isinstance(spec, Short):
        return apply_short(spec, seq, budget=budget)
    raise TypeError(f"not an attack: {spec!r}")


def detect(attacked: Lts, expected: Lts | None = None) -> Verdict:
    """Check whether ``expected`` (default: the protocol) survives the attack."""
    expected = expected if expected is not None else protocol_lts()
    reduced = minimize(attacked, Relation.BRANCHING)
    inc = weak_trace_includes(expected, reduced)
    return Verdict(not inc.holds, inc.missing, bool(deadlock_states(reduced)))
