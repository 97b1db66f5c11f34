"""Reference implementations the tests compare the library against.

Everything here is deliberately slow and obvious: plain Python sets and
tuples, no numpy kernels, nothing imported from the code under test except
the ``Lts``/``Label`` containers.
"""
from __future__ import annotations

import itertools
import random
from collections import deque

import networkx as nx

from shieldcheck.compose import Network, SyncVector
from shieldcheck.lts import TAU, Lts, Voltage, visible

GATES = ("a", "b", "c")


def random_lts(rng: random.Random, max_states: int = 30, *, gates=GATES,
               tau_weight: float = 0.35, density: float = 1.6) -> Lts:
    """Random LTS with tau-moves, self-loops and cycles; not necessarily reachable everywhere."""
    n = rng.randint(1, max_states)
    m = rng.randint(0, int(density * n) + 1)
    labels = [TAU] + [visible(g, v) for g in gates for v in Voltage]
    out = []
    for _ in range(m):
        s = rng.randrange(n)
        t = s if rng.random() < 0.1 else rng.randrange(n)
        lab = TAU if rng.random() < tau_weight else rng.choice(labels[1:])
        out.append((s, lab, t))
    if n > 2 and rng.random() < 0.3:
        # a tau-cycle, so that divergence shows up often enough
        ring = rng.sample(range(n), rng.randint(1, min(4, n)))
        out += [(ring[i], TAU, ring[(i + 1) % len(ring)]) for i in range(len(ring))]
    return Lts.from_transitions(n, out, initial=rng.randrange(n))


def random_network(rng: random.Random, max_components: int = 4, max_states: int = 6) -> Network:
    k = rng.randint(1, max_components)
    comps = [random_lts(rng, max_states, gates=("a", "b"), density=1.8) for _ in range(k)]
    offered = [sorted({l for _, l, _ in c.transitions() if l.is_visible}, key=str)
               for c in comps]
    vectors = []
    for _ in range(rng.randint(0, 6)):
        active = [i for i in range(k) if offered[i] and rng.random() < 0.6]
        if not active:
            continue
        slots = [rng.choice(offered[i]) if i in active else None for i in range(k)]
        res = TAU if rng.random() < 0.3 else visible(rng.choice(("x", "y")), rng.randint(0, 1))
        vectors.append(SyncVector(tuple(slots), res))
    return Network(tuple(comps), tuple(vectors))


def _moves(c: Lts):
    table: dict[int, list] = {}
    for s, l, t in c.transitions():
        table.setdefault(s, []).append((l, t))
    return table


def enumerate_product(net: Network):
    """Tuple-space exploration of ``net``.

    Returns ``(initial, states, transitions, raw_count)``: a set of tuples,
    a set of ``(tuple, label, tuple)`` triples and the number of transition
    instances generated before duplicates are merged.
    """
    moves = [_moves(c) for c in net.components]
    init = tuple(c.initial for c in net.components)
    seen = {init}
    queue = deque([init])
    trans = set()
    raw = 0
    while queue:
        s = queue.popleft()
        succ = []
        for i, m in enumerate(moves):
            for l, t in m.get(s[i], ()):
                if l.is_tau:
                    succ.append((TAU, s[:i] + (t,) + s[i + 1:]))
        for v in net.vectors:
            options = []
            for i, slot in enumerate(v.slots):
                if slot is None:
                    options.append([s[i]])
                else:
                    options.append([t for l, t in moves[i].get(s[i], ()) if l == slot])
            for target in itertools.product(*options):
                succ.append((v.result, tuple(target)))
        raw += len(succ)
        for l, t in succ:
            trans.add((s, l, t))
            if t not in seen:
                seen.add(t)
                queue.append(t)
    return init, seen, trans, raw


def to_graph(l: Lts) -> nx.DiGraph:
    g = nx.DiGraph()
    g.add_nodes_from(range(l.num_states), init=False)
    g.nodes[l.initial]["init"] = True
    for s, lab, t in l.transitions():
        if g.has_edge(s, t):
            g[s][t]["labels"] = tuple(sorted(set(g[s][t]["labels"]) | {str(lab)}))
        else:
            g.add_edge(s, t, labels=(str(lab),))
    return g


def enumerated_graph(init, states, trans) -> nx.DiGraph:
    g = nx.DiGraph()
    for s in states:
        g.add_node(s, init=s == init)
    for s, lab, t in trans:
        if g.has_edge(s, t):
            g[s][t]["labels"] = tuple(sorted(set(g[s][t]["labels"]) | {str(lab)}))
        else:
            g.add_edge(s, t, labels=(str(lab),))
    return g


def isomorphic(g1: nx.DiGraph, g2: nx.DiGraph) -> bool:
    return nx.is_isomorphic(g1, g2, node_match=lambda a, b: a["init"] == b["init"],
                            edge_match=lambda a, b: a["labels"] == b["labels"])


def brute_divergent(l: Lts) -> set[int]:
    """States with a tau-path longer than the number of states (hence a tau-cycle)."""
    tau_succ: dict[int, set[int]] = {}
    for s, lab, t in l.transitions():
        if lab.is_tau:
            tau_succ.setdefault(s, set()).add(t)
    n = l.num_states
    layer = set(range(n))
    for _ in range(n + 1):
        layer = {s for s in layer if tau_succ.get(s, set()) & layer}
    return layer


def brute_reachable(l: Lts) -> set[int]:
    succ: dict[int, set[int]] = {}
    for s, _, t in l.transitions():
        succ.setdefault(s, set()).add(t)
    seen = {l.initial}
    stack = [l.initial]
    while stack:
        for t in succ.get(stack.pop(), ()):
            if t not in seen:
                seen.add(t)
                stack.append(t)
    return seen


def weak_traces(l: Lts, depth: int) -> set[tuple[str, ...]]:
    """All visible traces of length at most ``depth``, by explicit set expansion."""
    tau: dict[int, set[int]] = {}
    vis: dict[int, list] = {}
    for s, lab, t in l.transitions():
        if lab.is_tau:
            tau.setdefault(s, set()).add(t)
        elif lab.is_visible:
            vis.setdefault(s, []).append((str(lab), t))

    def close(states):
        out = set(states)
        stack = list(states)
        while stack:
            for t in tau.get(stack.pop(), ()):
                if t not in out:
                    out.add(t)
                    stack.append(t)
        return frozenset(out)

    traces = {(): close({l.initial})}
    result = {()}
    frontier = dict(traces)
    for _ in range(depth):
        nxt = {}
        for tr, states in frontier.items():
            step: dict[str, set[int]] = {}
            for s in states:
                for lab, t in vis.get(s, ()):
                    step.setdefault(lab, set()).add(t)
            for lab, ts in step.items():
                nxt[tr + (lab,)] = close(ts)
        result |= set(nxt)
        frontier = nxt
    return result


def _tau_closure_from(tau: dict, s: int, allowed=None) -> set[int]:
    seen = {s}
    stack = [s]
    while stack:
        for t in tau.get(stack.pop(), ()):
            if t not in seen and (allowed is None or t in allowed):
                seen.add(t)
                stack.append(t)
    return seen


def is_bisimulation(l: Lts, block, *, branching: bool, divergence: bool = False) -> bool:
    """Check the definition directly for the equivalence "same entry in ``block``".

    A certificate test: a partition passing it only ever relates states the
    largest relation of that kind also relates.
    """
    block = [int(b) for b in block]
    out: dict[int, list] = {}
    tau: dict[int, set[int]] = {}
    for s, lab, t in l.transitions():
        out.setdefault(s, []).append((str(lab), t))
        if lab.is_tau:
            tau.setdefault(s, set()).add(t)
    members: dict[int, set[int]] = {}
    for s, b in enumerate(block):
        members.setdefault(b, set()).add(s)

    def can_match(q, lab, target_block):
        starts = _tau_closure_from(tau, q) if branching else {q}
        return any(lab2 == lab and block[t] == target_block
                   for q2 in starts for lab2, t in out.get(q2, ()))

    for p in range(l.num_states):
        for lab, p2 in out.get(p, ()):
            if branching and lab == "i" and block[p2] == block[p]:
                continue
            for q in members[block[p]]:
                if not can_match(q, lab, block[p2]):
                    return False
    if divergence:
        for b, ms in members.items():
            flags = set()
            for p in ms:
                inside = _tau_closure_from(tau, p, ms)
                sub = {s: tau.get(s, set()) & ms for s in inside}
                flags.add(bool(brute_divergent_in(sub)))
            if len(flags) > 1:
                return False
    return True


def brute_divergent_in(succ: dict[int, set[int]]) -> set[int]:
    layer = set(succ)
    for _ in range(len(succ) + 1):
        layer = {s for s in layer if succ[s] & layer}
    return layer
