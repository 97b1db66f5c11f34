"""Behavioral models of the sequencer circuit and its building blocks.

Gates come in five styles that differ only in when inputs may arrive
relative to outputs. Wires between gates are either plain shared gates
(``RV``), a buffer whose output is a multiway rendezvous (``ISO``, an
isochronic fork) or a buffer delivering to each branch independently
(``PAR``).
"""
from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass

from shieldcheck.compose import (DEFAULT_BUDGET, EXTERNAL_GATES, Network, SyncVector,
                                 gateset_par, hide_except, pipe, product)
from shieldcheck.equiv import Relation, minimize
from shieldcheck.lts import TAU, Label, Lts, Voltage, normalize, visible

__all__ = [
    "GateStyle",
    "ForkMode",
    "GateFunction",
    "SequencerConfig",
    "FORK_CODES",
    "PROTOCOL_EVENTS",
    "protocol_lts",
    "gate_lts",
    "wire_lts",
    "fork_lts",
    "build_sequencer",
    "sequencer_lts",
    "stub_lts",
    "stub_network",
    "build_stubbed_sequencer",
    "build_shield",
]

UP, DOWN = Voltage.UP, Voltage.DOWN


class GateStyle(enum.Enum):
    INTUITIVE = "INTUITIVE"
    STATE = "STATE"
    PARALLEL = "PARALLEL"
    FREE = "FREE"
    TRANSITION = "TRANSITION"


class ForkMode(enum.Enum):
    RV = "RV"
    ISO = "I"
    PAR = "P"


class GateFunction(enum.Enum):
    AND = "AND"
    NOR = "NOR"
    INV = "INV"
    MULLER = "MULLER"

    @property
    def arity(self) -> int:
        return 1 if self is GateFunction.INV else 2

    def __call__(self, latches, c=None) -> Voltage:
        if self is GateFunction.AND:
            return Voltage(latches[0] & latches[1])
        if self is GateFunction.NOR:
            return Voltage(1 - (latches[0] | latches[1]))
        if self is GateFunction.INV:
            return ~Voltage(latches[0])
        return Voltage(latches[0] if latches[0] == latches[1] else c)


FORK_CODES = ("RV", "III", "IIP", "IPI", "IPP", "PII", "PIP", "PPI", "PPP")

PROTOCOL_EVENTS = (
    ("R_PRED", UP), ("R_SUCC", UP), ("A_SUCC", UP), ("R_SUCC", DOWN),
    ("A_SUCC", DOWN), ("A_PRED", UP), ("R_PRED", DOWN), ("A_PRED", DOWN),
)


@dataclass(frozen=True)
class SequencerConfig:
    style: GateStyle = GateStyle.INTUITIVE
    fork_x: ForkMode = ForkMode.RV
    fork_y: ForkMode = ForkMode.RV
    fork_z: ForkMode = ForkMode.RV
    x1: Voltage = DOWN
    x2: Voltage = DOWN
    init_c: Voltage = DOWN

    def __post_init__(self):
        modes = (self.fork_x, self.fork_y, self.fork_z)
        if ForkMode.RV in modes and any(m is not ForkMode.RV for m in modes):
            raise ValueError("RV wiring must apply to all forks at once")

    @classmethod
    def from_code(cls, style: GateStyle | str, forks: str = "RV", **kw) -> "SequencerConfig":
        """``from_code("FREE", "IIP")``: fork modes for X, Y, Z in that order."""
        style = GateStyle(style.upper()) if isinstance(style, str) else style
        forks = forks.upper()
        if forks == "RV":
            return cls(style, **kw)
        if len(forks) != 3 or set(forks) - {"I", "P"}:
            raise ValueError(f"bad fork code {forks!r}")
        fx, fy, fz = (ForkMode(ch) for ch in forks)
        return cls(style, fx, fy, fz, **kw)

    @property
    def fork_code(self) -> str:
        if self.fork_x is ForkMode.RV:
            return "RV"
        return self.fork_x.value + self.fork_y.value + self.fork_z.value

    def __str__(self) -> str:
        return f"{self.style.value}/{self.fork_code}"


def _explore(init, step) -> Lts:
    """Build an LTS from a hashable initial state and a successor generator."""
    index = {init: 0}
    queue = deque([init])
    trans = []
    while queue:
        s = queue.popleft()
        for label, t in step(s):
            if t not in index:
                index[t] = len(index)
                queue.append(t)
            trans.append((index[s], label, index[t]))
    return normalize(Lts.from_transitions(len(index), trans))


def protocol_lts() -> Lts:
    """The four-phase handshake cycle every correct sequencer must follow."""
    n = len(PROTOCOL_EVENTS)
    return normalize(Lts.from_transitions(
        n, [(k, visible(g, v), (k + 1) % n) for k, (g, v) in enumerate(PROTOCOL_EVENTS)]))


def gate_lts(f: GateFunction, style: GateStyle, inputs, output: str, init) -> Lts:
    """One logic gate.

    ``init`` gives the initial input latches, followed by the initial output
    for a Muller C element. All styles receive both voltages on every input.
    """
    f = GateFunction(f)
    style = GateStyle(style)
    inputs = tuple(inputs)
    k = f.arity
    if len(inputs) != k:
        raise ValueError(f"{f.name} takes {k} input(s)")
    init = tuple(Voltage(v) for v in init)
    muller = f is GateFunction.MULLER
    if len(init) != k + muller:
        raise ValueError(f"{f.name} expects {k + muller} initial value(s)")
    lat0 = init[:k]
    c0 = init[k] if muller else None

    def out(latches, c):
        return f(latches, c)

    def keep_c(o, c):
        # only the Muller element remembers its last output
        return o if muller else c

    def setl(latches, i, v):
        return latches[:i] + (v,) + latches[i + 1:]

    recv = [(i, v) for i in range(k) for v in (DOWN, UP)]

    if style is GateStyle.INTUITIVE:
        def step(s):
            busy, l, c = s
            if not busy:
                for i, v in recv:
                    yield visible(inputs[i], v), (True, setl(l, i, v), c)
            else:
                o = out(l, c)
                yield visible(output, o), (False, l, keep_c(o, c))
        init_s = (False, lat0, c0)
    elif style in (GateStyle.STATE, GateStyle.PARALLEL):
        parallel = style is GateStyle.PARALLEL

        def step(s):
            got, l, c = s
            for i, v in recv:
                if i not in got:
                    yield visible(inputs[i], v), (got | {i}, setl(l, i, v), c)
            if got or parallel:
                o = out(l, c)
                yield visible(output, o), (frozenset(), l, keep_c(o, c))
        init_s = (frozenset(), lat0, c0)
    elif style is GateStyle.FREE:
        def step(s):
            l, c = s
            for i, v in recv:
                l2 = setl(l, i, v)
                # the C element settles as soon as its inputs agree
                yield visible(inputs[i], v), (l2, f(l2, c) if muller else c)
            o = out(l, c)
            yield visible(output, o), (l, keep_c(o, c))
        init_s = (lat0, c0)
    else:
        def step(s):
            pending, l, r = s
            if not pending:
                for i, v in recv:
                    l2 = setl(l, i, v)
                    nr = f(l2, r)
                    yield visible(inputs[i], v), (nr != r, l2, nr)
            else:
                yield visible(output, r), (False, l, r)
        init_s = (False, lat0, f(lat0, c0))
    return _explore(init_s, step)


def wire_lts(inp: str, out: str) -> Lts:
    """Alternates between receiving a voltage and passing it on."""
    def step(s):
        if s is None:
            for v in (DOWN, UP):
                yield visible(inp, v), v
        else:
            yield visible(out, s), None
    return _explore(None, step)


def fork_lts(inp: str, out1: str, out2: str) -> Lts:
    """Receives a voltage, then delivers it on both branches in either order."""
    def step(s):
        if s is None:
            for v in (DOWN, UP):
                yield visible(inp, v), (v, True, True)
            return
        v, p1, p2 = s
        if p1:
            yield visible(out1, v), (v, False, p2) if p2 else None
        if p2:
            yield visible(out2, v), (v, p1, False) if p1 else None
    return _explore(None, step)


def _link(mode: ForkMode, src: str):
    """Component realizing one fork plus the names its two receivers read."""
    if mode is ForkMode.ISO:
        o = src + "2"
        return wire_lts(src, o), {o}, o, o
    o1, o2 = src + "1", src + "2"
    return fork_lts(src, o1, o2), {o1, o2}, o1, o2


def sequencer_components(cfg: SequencerConfig) -> list[tuple[Lts, set[str]]]:
    """Gate processes with their synchronization gate sets."""
    s = cfg.style
    x1, x2, ic = cfg.x1, cfg.x2, cfg.init_c
    G = GateFunction
    if cfg.fork_code == "RV":
        return [
            (gate_lts(G.MULLER, s, ("R_PRED", "A_SUCC"), "G", (x1, x2, ic)),
             {"R_PRED", "A_SUCC", "G"}),
            (gate_lts(G.AND, s, ("R_PRED", "H"), "R_SUCC", (x1, ~ic)), {"R_PRED", "H"}),
            (gate_lts(G.INV, s, ("G",), "H", (ic,)), {"G", "H"}),
            (gate_lts(G.NOR, s, ("A_SUCC", "H"), "A_PRED", (x2, ~ic)), {"A_SUCC", "H"}),
        ]
    fx, sx, mx, ax = _link(cfg.fork_x, "R_PRED")
    fy, sy, my, ny = _link(cfg.fork_y, "A_SUCC")
    fz, sz, az, nz = _link(cfg.fork_z, "H")
    return [
        (gate_lts(G.MULLER, s, (mx, my), "G", (x1, x2, ic)), {mx, my, "G"}),
        (gate_lts(G.AND, s, (ax, az), "R_SUCC", (x1, ~ic)), {ax, az}),
        (gate_lts(G.INV, s, ("G2",), "H", (ic,)), {"G2", "H"}),
        (gate_lts(G.NOR, s, (ny, nz), "A_PRED", (x2, ~ic)), {ny, nz}),
        (fx, sx),
        (fy, sy),
        (fz, sz | {"H"}),
        (wire_lts("G", "G2"), {"G", "G2"}),
    ]


def build_sequencer(cfg: SequencerConfig, *, budget: int = DEFAULT_BUDGET) -> Lts:
    """Gate-level sequencer with every gate visible (hide internals to compare with the protocol)."""
    return gateset_par(sequencer_components(cfg), budget=budget)


def sequencer_lts(cfg: SequencerConfig, relation: Relation = Relation.DSBB, *,
                  budget: int = DEFAULT_BUDGET) -> Lts:
    """Sequencer reduced to its four handshake gates and minimized."""
    return minimize(hide_except(build_sequencer(cfg, budget=budget), EXTERNAL_GATES), relation)


def stub_lts(side: str) -> Lts:
    """Environment of one side of a sequencer.

    ``side="pred"`` drives R_PRED and listens to A_PRED; ``side="succ"``
    listens to R_SUCC and drives A_SUCC. Both follow the four-phase cycle.
    In every phase the stub also accepts the last value seen on the gate it
    listens to, on a separate ``<gate>_REP`` gate, so that a sequencer
    repeating an output is not blocked.
    """
    if side == "pred":
        drive, listen = "R_PRED", "A_PRED"
        cycle = [(drive, UP), (listen, UP), (drive, DOWN), (listen, DOWN)]
    elif side == "succ":
        drive, listen = "A_SUCC", "R_SUCC"
        cycle = [(listen, UP), (drive, UP), (listen, DOWN), (drive, DOWN)]
    else:
        raise ValueError(f"unknown stub side {side!r}")
    trans = []
    for p, (g, v) in enumerate(cycle):
        trans.append((p, visible(g, v), (p + 1) % 4))
        k = p - 1
        while cycle[k % 4][0] != listen:
            k -= 1
        trans.append((p, visible(listen + "_REP", cycle[k % 4][1]), p))
    return normalize(Lts.from_transitions(4, trans))


def stub_network(seq: Lts) -> Network:
    """``seq`` between a predecessor stub and a successor stub; repeated outputs become tau."""
    vectors = []
    for v in (DOWN, UP):
        for g in ("R_PRED", "A_PRED"):
            x = visible(g, v)
            vectors.append(SyncVector((x, x, None), x))
        for g in ("R_SUCC", "A_SUCC"):
            x = visible(g, v)
            vectors.append(SyncVector((x, None, x), x))
        vectors.append(SyncVector((visible("A_PRED", v), visible("A_PRED_REP", v), None), TAU))
        vectors.append(SyncVector((visible("R_SUCC", v), None, visible("R_SUCC_REP", v)), TAU))
    return Network((seq, stub_lts("pred"), stub_lts("succ")), tuple(vectors))


def build_stubbed_sequencer(cfg: SequencerConfig, *, seq: Lts | None = None,
                            budget: int = DEFAULT_BUDGET) -> Lts:
    """Closed system of a (minimized) sequencer and its two stubs, not yet minimized."""
    if seq is None:
        seq = sequencer_lts(cfg, budget=budget)
    return product(stub_network(seq), budget=budget, what=f"stubbed {cfg}")


def build_shield(n: int, base: Lts | SequencerConfig | None = None, *,
                 budget: int = DEFAULT_BUDGET) -> Lts:
    """``n + 1`` copies of ``base`` chained with pipe (``n = 0`` gives ``base`` itself)."""
    if n < 0:
        raise ValueError("n must be non-negative")
    if base is None:
        base = protocol_lts()
    elif isinstance(base, SequencerConfig):
        base = sequencer_lts(base, budget=budget)
    result = base
    for _ in range(n):
        result = pipe(base, result, budget=budget)
    return result
