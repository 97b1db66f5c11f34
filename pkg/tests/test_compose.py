import random

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from _oracles import (enumerate_product, enumerated_graph, isomorphic, random_lts,
                      random_network, to_graph)
from shieldcheck import (TAU, BudgetExceeded, Lts, Network, Relation, SyncVector, Voltage,
                         equivalent, gateset_par, hide, minimize, normalize, pipe,
                         pipe_nohide, product, product_stats, rename, visible)
from shieldcheck.attacks import stuckat_lts
from shieldcheck.circuit import GateFunction, GateStyle, gate_lts, protocol_lts
from shieldcheck.compose import gateset_network

PROPS = settings(max_examples=80, deadline=None, suppress_health_check=[HealthCheck.too_slow])
seeds = st.integers(0, 2**32 - 1)
UP, DOWN = Voltage.UP, Voltage.DOWN


def _matches_enumerator(net: Network) -> bool:
    init, states, trans, raw = enumerate_product(net)
    return isomorphic(to_graph(product(net)), enumerated_graph(init, states, trans))


def test_vector_text_round_trip():
    v = SyncVector.parse('"R1 !UP" * _ * "A2 !DOWN" -> "R1A2 !UP"')
    assert v.slots[1] is None
    assert str(v) == '"R1 !UP" * _ * "A2 !DOWN" -> "R1A2 !UP"'
    assert SyncVector.parse('"R !UP" * "R !UP" -> i').result == TAU


def test_vector_arity_mismatch():
    p = protocol_lts()
    with pytest.raises(ValueError, match="slots"):
        Network((p, p), (SyncVector.parse('"R_PRED !UP" -> "R_PRED !UP"'),))


def test_identity_vectors_give_the_component():
    p = protocol_lts()
    vectors = [SyncVector((l,), l) for l in p.labels]
    assert product(Network((p,), vectors)) == p


def test_toy_product_matches_enumeration():
    a, b = visible("a", UP), visible("b", UP)
    c1 = Lts.from_transitions(3, [(0, a, 1), (1, TAU, 2), (2, b, 0)])
    c2 = Lts.from_transitions(2, [(0, a, 1), (1, b, 0)])
    net = Network((c1, c2), (SyncVector((a, a), a), SyncVector((b, None), b)))
    assert _matches_enumerator(net)
    # c2 never gets to do b on its own: (0, 1) is a deadlock
    assert product(net).num_states == 4


@PROPS
@given(seed=seeds)
def test_product_matches_enumeration(seed):
    net = random_network(random.Random(seed))
    assert _matches_enumerator(net)
    init, states, trans, raw = enumerate_product(net)
    st_ = product_stats(net)
    assert (st_.states, st_.transitions) == (len(states), raw)
    bound = 1
    for c in net.components:
        bound *= c.num_states
    assert st_.states <= bound


@PROPS
@given(seed=seeds)
def test_product_labels_come_from_vectors_or_tau(seed):
    net = random_network(random.Random(seed))
    allowed = {v.result for v in net.vectors} | {TAU}
    assert product(net).used_labels() <= allowed


def test_gateset_single_component_is_unchanged():
    p = protocol_lts()
    assert gateset_par([(p, p.gates())]) == p


def test_and_with_stuck_input_matches_enumeration():
    g = gate_lts(GateFunction.AND, GateStyle.INTUITIVE, ["X", "Y"], "Z", (DOWN, DOWN))
    net = gateset_network([(g, {"X"}), (stuckat_lts("X", UP), {"X"})])
    assert _matches_enumerator(net)
    l = product(net)
    assert visible("X", DOWN) not in l.used_labels()


def test_undeclared_gate_fires_alone_unless_strict():
    a = visible("a", UP)
    c1 = Lts.from_transitions(1, [(0, a, 0)])
    c2 = Lts.from_transitions(2, [(0, a, 1)])
    l = gateset_par([(c1, {"a"}), (c2, set())])
    assert l.num_states == 2
    with pytest.raises(ValueError, match="gate set"):
        gateset_par([(c1, {"a"}), (c2, set())], strict=True)


@PROPS
@given(seed=seeds)
def test_gateset_par_is_commutative(seed):
    rng = random.Random(seed)
    c1, c2 = random_lts(rng, 6, gates=("a", "b")), random_lts(rng, 6, gates=("b", "c"))
    left = gateset_par([(c1, {"a", "b"}), (c2, {"b", "c"})])
    right = gateset_par([(c2, {"b", "c"}), (c1, {"a", "b"})])
    assert equivalent(left, right, Relation.STRONG)


def test_hide_nothing_and_hide_all():
    p = protocol_lts()
    assert hide(p, set()) == p
    cycle = hide(p, p.gates())
    assert cycle.num_states == 8 and all(l.is_tau for l in cycle.labels)
    m = minimize(cycle, Relation.DSBB)
    assert (m.num_states, m.num_transitions) == (1, 1)
    assert minimize(cycle, Relation.BRANCHING).num_transitions == 0


@PROPS
@given(seed=seeds)
def test_hide_composes(seed):
    l = random_lts(random.Random(seed), 20)
    a, b = {"a"}, {"b", "c"}
    assert equivalent(hide(hide(l, a), b), hide(l, a | b), Relation.STRONG)


def test_rename_to_pipe_gates():
    l = rename(protocol_lts(), {"R_SUCC": "R", "A_SUCC": "A"})
    assert "R !UP" in l.label_strings() and "A !DOWN" in l.label_strings()
    with pytest.raises(ValueError):
        rename(protocol_lts(), {"R_SUCC": "i"})
    assert rename(protocol_lts(), {}) == protocol_lts()


@PROPS
@given(seed=seeds)
def test_rename_round_trip(seed):
    rng = random.Random(seed)
    l = normalize(random_lts(rng, 20))
    fresh = ["p", "q", "r"]
    rng.shuffle(fresh)
    fwd = dict(zip(("a", "b", "c"), fresh))
    back = {v: k for k, v in fwd.items()}
    # ties between equal labels may renumber states, so compare as graphs
    assert isomorphic(to_graph(rename(rename(l, fwd), back)), to_graph(l))


def test_pipe_of_protocols():
    p = protocol_lts()
    assert equivalent(pipe(p, p), p, Relation.DSBB)
    left = pipe(p, pipe(p, p))
    right = pipe(pipe(p, p), p)
    assert equivalent(left, right, Relation.DSBB)


def test_pipe_needs_the_four_gates():
    p = protocol_lts()
    with pytest.raises(ValueError, match="A_PRED"):
        pipe(hide(p, {"A_PRED"}), p)
    with pytest.raises(ValueError, match="right"):
        pipe_nohide(p, hide(p, {"R_SUCC"}))


def test_pipe_nohide_keeps_handshake_visible():
    p = protocol_lts()
    l = pipe_nohide(p, p)
    assert {"R", "A"} <= l.gates()


def test_budget_stops_exploration():
    p = protocol_lts()
    with pytest.raises(BudgetExceeded, match="pipe"):
        pipe(p, p, budget=3)
