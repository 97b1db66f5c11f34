import random

from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from _oracles import brute_divergent, brute_reachable, random_lts
from shieldcheck import (TAU, Lts, Voltage, deadlock_states, divergent_states, normalize,
                         run_trace, visible, write_aut)
from shieldcheck.circuit import protocol_lts
from shieldcheck.lts import reachable

PROPS = settings(max_examples=150, deadline=None,
                 suppress_health_check=[HealthCheck.too_slow])

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def _permuted(l: Lts, seed: int) -> Lts:
    rng = random.Random(seed)
    perm = list(range(l.num_states))
    rng.shuffle(perm)
    trans = [(perm[s], lab, perm[t]) for s, lab, t in l.transitions()]
    rng.shuffle(trans)
    return Lts.from_transitions(l.num_states, trans, initial=perm[l.initial])


def test_labels_render_like_aut():
    assert str(TAU) == "i"
    assert str(visible("R_PRED", Voltage.UP)) == "R_PRED !UP"
    assert ~Voltage.UP is Voltage.DOWN


def test_unreachable_state_is_pruned():
    a = visible("a", 1)
    l = Lts.from_transitions(6, [(0, a, 1), (1, a, 2), (2, a, 3), (3, a, 4), (4, a, 0),
                                 (5, a, 0)])
    n = normalize(l)
    assert (n.num_states, n.num_transitions) == (5, 5)


def test_protocol_is_already_normal():
    p = protocol_lts()
    assert normalize(p) is p
    assert write_aut(normalize(_permuted(p, 0))) == write_aut(p)


def test_duplicates_are_merged():
    a = visible("a", 0)
    n = normalize(Lts.from_transitions(2, [(0, a, 1), (0, a, 1), (1, TAU, 0)]))
    assert n.num_transitions == 2


@PROPS
@given(seed=seeds)
def test_normalize_is_idempotent_and_permutation_invariant(seed):
    l = random_lts(random.Random(seed), 25)
    n = normalize(l)
    again = normalize(Lts(n.num_states, n.initial, n.labels, n.src, n.lab, n.dst))
    assert write_aut(again) == write_aut(n)
    assert n.num_states == len(brute_reachable(l))
    # canonical form depends only on the reachable graph, up to ties between equal labels
    p = normalize(_permuted(l, seed + 1))
    assert (p.num_states, p.num_transitions) == (n.num_states, n.num_transitions)


def test_deadlocks_of_stop_and_protocol():
    assert deadlock_states(Lts.from_transitions(1, [])) == {0}
    assert deadlock_states(protocol_lts()) == set()


def test_divergence_of_tau_pair():
    l = Lts.from_transitions(2, [(0, TAU, 1), (1, TAU, 0)])
    assert divergent_states(l) == {0, 1}
    assert divergent_states(protocol_lts()) == set()


@PROPS
@given(seed=seeds)
def test_deadlock_and_divergence_against_brute_force(seed):
    l = random_lts(random.Random(seed), 200, density=1.2)
    sources = {s for s, _, _ in l.transitions()}
    dead = deadlock_states(l)
    assert dead == set(range(l.num_states)) - sources
    assert divergent_states(l) == brute_divergent(l)


def test_run_trace_strong_and_weak():
    a, b = visible("a", 1), visible("b", 0)
    l = Lts.from_transitions(3, [(0, a, 1), (1, TAU, 2), (2, b, 0)])
    assert run_trace(l, ["a !UP"]) == {1}
    assert run_trace(l, ["a !UP", "b !DOWN"]) == set()
    assert run_trace(l, [a, b], weak=True) == {0}
    assert reachable(l, {1}) == {0, 1, 2}


def test_equality_ignores_numbering_details():
    p = protocol_lts()
    assert Lts.from_transitions(p.num_states, list(p.transitions())) == p
    assert p != Lts.from_transitions(1, [])
