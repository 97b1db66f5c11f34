import itertools
from collections import deque

import pytest

from _oracles import weak_traces
from shieldcheck import (Relation, Voltage, deadlock_states, equivalent, gateset_par, hide,
                         minimize)
from shieldcheck.circuit import (FORK_CODES, ForkMode, GateFunction, GateStyle,
                                 SequencerConfig, build_sequencer, build_shield,
                                 build_stubbed_sequencer, fork_lts, gate_lts, protocol_lts,
                                 sequencer_lts, stub_lts, wire_lts)
from shieldcheck.report import one_sequencer

UP, DOWN = Voltage.UP, Voltage.DOWN
F = GateFunction


def _expected_output(f, latches, c):
    if f is F.AND:
        return UP if latches == (UP, UP) else DOWN
    if f is F.NOR:
        return UP if latches == (DOWN, DOWN) else DOWN
    if f is F.INV:
        return DOWN if latches[0] is UP else UP
    return latches[0] if latches[0] == latches[1] else c


def _walk(l, f, style, inputs, output, init):
    """Follow every transition while tracking latches; yield (expected, emitted) per output."""
    k = len(inputs)
    lat0 = tuple(init[:k])
    c0 = init[k] if f is F.MULLER else None
    start = (l.initial, lat0, c0)
    seen = {start}
    queue = deque([start])
    succ = {}
    for s, lab, t in l.transitions():
        succ.setdefault(s, []).append((lab, t))
    settles = style in (GateStyle.FREE, GateStyle.TRANSITION)
    while queue:
        s, lat, c = queue.popleft()
        for lab, t in succ.get(s, ()):
            if lab.gate == output:
                yield _expected_output(f, lat, c), lab.value
                nxt = (t, lat, lab.value if f is F.MULLER else c)
            else:
                i = inputs.index(lab.gate)
                lat2 = lat[:i] + (lab.value,) + lat[i + 1:]
                c2 = c
                if f is F.MULLER and settles and lat2[0] == lat2[1]:
                    c2 = lat2[0]
                nxt = (t, lat2, c2)
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)


GATE_CASES = [
    (f, style, init)
    for f in F for style in GateStyle
    for init in itertools.product((DOWN, UP), repeat=f.arity + (f is F.MULLER))
]


@pytest.mark.parametrize("f, style, init", GATE_CASES,
                         ids=[f"{f.name}-{s.name}-{''.join(v.name[0] for v in i)}"
                              for f, s, i in GATE_CASES])
def test_gate_outputs_follow_the_function(f, style, init):
    inputs = ("X", "Y")[:f.arity]
    l = gate_lts(f, style, inputs, "Z", init)
    pairs = list(_walk(l, f, style, inputs, "Z", init))
    assert pairs
    assert all(want == got for want, got in pairs)
    # every input accepts both voltages somewhere
    got = {str(x) for x in l.labels}
    assert {f"{g} !{v.name}" for g in inputs for v in Voltage} <= got


def test_gate_argument_errors():
    with pytest.raises(ValueError, match="input"):
        gate_lts(F.INV, GateStyle.STATE, ("X", "Y"), "Z", (DOWN,))
    with pytest.raises(ValueError, match="initial"):
        gate_lts(F.MULLER, GateStyle.STATE, ("X", "Y"), "Z", (DOWN, DOWN))
    with pytest.raises(ValueError):
        gate_lts(F.AND, "SLOPPY", ("X", "Y"), "Z", (DOWN, DOWN))


def test_config_codes():
    cfg = SequencerConfig.from_code("free", "iip")
    assert (cfg.fork_x, cfg.fork_y, cfg.fork_z) == (ForkMode.ISO, ForkMode.ISO, ForkMode.PAR)
    assert cfg.fork_code == "IIP" and str(cfg) == "FREE/IIP"
    assert SequencerConfig.from_code(GateStyle.STATE).fork_code == "RV"
    with pytest.raises(ValueError, match="RV"):
        SequencerConfig(GateStyle.STATE, ForkMode.RV, ForkMode.ISO, ForkMode.ISO)
    for bad in ("IIX", "II", "RVV"):
        with pytest.raises(ValueError):
            SequencerConfig.from_code("STATE", bad)


def test_protocol_shape():
    p = protocol_lts()
    assert (p.num_states, p.num_transitions) == (8, 8)
    assert p.gates() == {"R_PRED", "A_PRED", "R_SUCC", "A_SUCC"}


def test_isochronic_fork_is_a_buffer_with_shared_output():
    w = wire_lts("X", "X2")
    assert (w.num_states, w.num_transitions) == (3, 4)
    a = gate_lts(F.INV, GateStyle.INTUITIVE, ("X2",), "P", (DOWN,))
    b = gate_lts(F.INV, GateStyle.INTUITIVE, ("X2",), "Q", (DOWN,))
    l = gateset_par([(w, {"X", "X2"}), (a, {"X2"}), (b, {"X2"})])
    # both readers take each value in the same rendezvous
    for s, lab, t in l.transitions():
        if lab.gate == "X2":
            assert not any(x.gate == "X2" for x, _ in l.successors(t))


def test_parallel_fork_branch_hidden_is_a_buffer():
    f = fork_lts("X", "Y", "Z")
    assert equivalent(hide(f, {"Z"}), wire_lts("X", "Y"), Relation.BRANCHING)
    assert not equivalent(hide(f, {"Z"}), wire_lts("X", "Y"), Relation.STRONG)


def test_internal_gate_names_of_iip():
    gates = build_sequencer(SequencerConfig.from_code("INTUITIVE", "IIP")).gates()
    assert {"R_PRED2", "A_SUCC2", "G2", "H1", "H2"} <= gates


@pytest.mark.parametrize("style, forks, want", [
    ("INTUITIVE", "RV", (90, 222)),
    ("TRANSITION", "RV", (34, 112)),
    ("FREE", "III", (384, 2664)),
])
def test_one_sequencer_sizes(style, forks, want):
    m = sequencer_lts(SequencerConfig.from_code(style, forks))
    assert (m.num_states, m.num_transitions) == want


@pytest.mark.parametrize("style, want", [("STATE", (8, 8)), ("FREE", (8, 16))])
def test_stubbed_rv_sizes(style, want):
    cfg = SequencerConfig.from_code(style, "RV")
    closed = build_stubbed_sequencer(cfg, seq=one_sequencer(cfg))
    m = minimize(closed, Relation.DSBB)
    assert (m.num_states, m.num_transitions) == want
    assert not deadlock_states(m)


def test_stubs_follow_the_handshake():
    pred = stub_lts("pred")
    assert weak_traces(hide(pred, {"A_PRED_REP"}), 4) >= {
        ("R_PRED !UP", "A_PRED !UP", "R_PRED !DOWN", "A_PRED !DOWN")}
    assert stub_lts("succ").num_states == 4
    with pytest.raises(ValueError):
        stub_lts("middle")


def test_shield_sizes():
    p = protocol_lts()
    assert build_shield(0, p) is p
    assert equivalent(build_shield(1, p), p, Relation.DSBB)
    two = build_shield(1, SequencerConfig.from_code("INTUITIVE", "RV"))
    assert (two.num_states, two.num_transitions) == (308, 790)
    assert deadlock_states(two)
    with pytest.raises(ValueError):
        build_shield(-1)


CHEAP = [(s, f) for s in ("INTUITIVE", "FREE", "TRANSITION") for f in FORK_CODES]
CHEAP += [(s, "RV") for s in ("STATE", "PARALLEL")]


@pytest.mark.parametrize("style, forks", CHEAP)
def test_first_visible_event_is_a_request(style, forks):
    # inputs accept any voltage, so look at the sequencer inside its environment
    cfg = SequencerConfig.from_code(style, forks)
    closed = build_stubbed_sequencer(cfg, seq=one_sequencer(cfg))
    assert weak_traces(closed, 1) == {(), ("R_PRED !UP",)}
