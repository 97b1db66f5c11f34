"""Bisimulation minimization, equivalence checking and weak-trace inclusion.

Branching minimization first collapses tau-strongly-connected components
(all their states are branching bisimilar), which turns the tau-graph into
a DAG. Signatures are then computed successors-first so that a state
inherits the signature of its inert tau-successors. For the divergence
sensitive variant a collapsed tau-cycle becomes an explicit divergence
self-loop that takes part in the signatures like any other label.
"""
from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass

import numpy as np

from shieldcheck import _kernels
from shieldcheck.lts import DIV, TAU, Label, Lts, normalize, tau_sccs

__all__ = [
    "Relation",
    "partition",
    "minimize",
    "equivalent",
    "EquivalenceResult",
    "weak_trace_includes",
    "TraceInclusion",
    "oracle_partition",
    "oracle_equivalent",
    "disjoint_union",
]


class Relation(enum.Enum):
    STRONG = "strong"
    BRANCHING = "branching"
    DSBB = "dsbb"
    WEAK_TRACE_INCLUSION = "weak-trace"

    @classmethod
    def parse(cls, text: str) -> "Relation":
        key = text.strip().lower().replace("_", "-")
        for r in cls:
            if r.value == key or r.name.lower().replace("_", "-") == key:
                return r
        raise ValueError(f"unknown relation {text!r}")


def _bisim(r: Relation) -> None:
    if r not in (Relation.STRONG, Relation.BRANCHING, Relation.DSBB):
        raise ValueError(f"{r.name} is not a bisimulation")


def _csr(n: int, src: np.ndarray, lab: np.ndarray, dst: np.ndarray):
    order = np.lexsort((dst, lab, src))
    rowptr = np.zeros(n + 1, np.int64)
    np.add.at(rowptr, src + 1, 1)
    np.cumsum(rowptr, out=rowptr)
    return rowptr, lab[order], dst[order]


def _condense(l: Lts, r: Relation):
    """Graph on tau-SCCs. Returns node count, node of each state, edges and a topological order."""
    tau_ids = [i for i, x in enumerate(l.labels) if x.is_tau]
    tau_id = tau_ids[0] if tau_ids else len(l.labels)
    div_id = len(l.labels) + 1
    lab = l.lab.astype(np.int64)
    if len(tau_ids) > 1:
        lab[np.isin(lab, tau_ids)] = tau_id
    count, comp, cyclic = tau_sccs(l)
    s, t = comp[l.src], comp[l.dst]
    keep = ~((lab == tau_id) & (s == t))
    s, lab, t = s[keep], lab[keep], t[keep]
    if r is Relation.DSBB:
        loops = np.nonzero(cyclic)[0]
        s = np.concatenate([s, loops])
        t = np.concatenate([t, loops])
        lab = np.concatenate([lab, np.full(len(loops), div_id)])
    if len(s):
        order = np.lexsort((t, lab, s))
        s, lab, t = s[order], lab[order], t[order]
        uniq = np.ones(len(s), dtype=bool)
        uniq[1:] = (s[1:] != s[:-1]) | (lab[1:] != lab[:-1]) | (t[1:] != t[:-1])
        s, lab, t = s[uniq], lab[uniq], t[uniq]
    tmask = lab == tau_id
    order = _kernels.topo_successors_first(count, s[tmask], t[tmask])
    return count, comp, s, lab, t, tau_id, div_id, order


def _refine(n, src, lab, dst, inert, order):
    rowptr, lab_s, dst_s = _csr(n, src, lab, dst)
    block, nb, _ = _kernels.refine(n, rowptr, lab_s.astype(np.int64),
                                   dst_s.astype(np.int64), inert, order.astype(np.int64),
                                   np.zeros(n, np.int64), 1)
    return block, nb


def partition(l: Lts, r: Relation) -> np.ndarray:
    """Block number of every state under the coarsest ``r``-bisimulation."""
    _bisim(r)
    n = l.num_states
    if r is Relation.STRONG:
        block, _ = _refine(n, l.src.astype(np.int64), l.lab.astype(np.int64),
                           l.dst.astype(np.int64), -1, np.arange(n))
        return block
    count, comp, s, lab, t, tau_id, _, order = _condense(l, r)
    block, _ = _refine(count, s, lab, t, tau_id, order)
    return block[comp]


def minimize(l: Lts, r: Relation) -> Lts:
    """Quotient of ``l`` by ``r``, normalized.

    For DSBB every divergent class keeps a tau self-loop; BRANCHING drops
    divergence altogether.
    """
    _bisim(r)
    l = normalize(l)
    n = l.num_states
    if r is Relation.STRONG:
        block, nb = _refine(n, l.src.astype(np.int64), l.lab.astype(np.int64),
                            l.dst.astype(np.int64), -1, np.arange(n))
        q = Lts(nb, int(block[l.initial]), l.labels, block[l.src], l.lab, block[l.dst])
        return normalize(q)
    count, comp, s, lab, t, tau_id, div_id, order = _condense(l, r)
    block, nb = _refine(count, s, lab, t, tau_id, order)
    bs, bt = block[s], block[t]
    keep = ~((lab == tau_id) & (bs == bt))
    bs, lab, bt = bs[keep], lab[keep], bt[keep]
    labels = list(l.labels) + [TAU, DIV]
    lab = np.where(lab == div_id, len(l.labels), lab)
    q = Lts(nb, int(block[comp[l.initial]]), labels, bs, lab, bt)
    return normalize(q)


def disjoint_union(l1: Lts, l2: Lts) -> tuple[Lts, int, int]:
    """Both LTSs side by side; returns the union and the two initial states."""
    labels = list(dict.fromkeys(l1.labels + l2.labels))
    pos = {x: i for i, x in enumerate(labels)}
    m1 = np.array([pos[x] for x in l1.labels] or [0], np.int32)
    m2 = np.array([pos[x] for x in l2.labels] or [0], np.int32)
    off = l1.num_states
    u = Lts(l1.num_states + l2.num_states, l1.initial, labels,
            np.concatenate([l1.src.astype(np.int64), l2.src.astype(np.int64) + off]),
            np.concatenate([m1[l1.lab], m2[l2.lab]]),
            np.concatenate([l1.dst.astype(np.int64), l2.dst.astype(np.int64) + off]))
    return u, l1.initial, l2.initial + off


@dataclass(frozen=True)
class EquivalenceResult:
    equivalent: bool
    witness: tuple[str, ...] | None = None

    def __bool__(self) -> bool:
        return self.equivalent


def equivalent(l1: Lts, l2: Lts, r: Relation) -> EquivalenceResult:
    """Compare the initial states of ``l1`` and ``l2`` in their disjoint union.

    When they differ, ``witness`` is a shortest weak trace of one side that
    the other cannot perform, if there is one (branching differences need
    not show up as traces).
    """
    if r is Relation.WEAK_TRACE_INCLUSION:
        a, b = weak_trace_includes(l1, l2), weak_trace_includes(l2, l1)
        return EquivalenceResult(bool(a and b), a.missing or b.missing)
    u, i1, i2 = disjoint_union(l1, l2)
    block = partition(u, r)
    if block[i1] == block[i2]:
        return EquivalenceResult(True)
    a = weak_trace_includes(l1, l2)
    if not a:
        return EquivalenceResult(False, a.missing)
    b = weak_trace_includes(l2, l1)
    return EquivalenceResult(False, b.missing)


@dataclass(frozen=True)
class TraceInclusion:
    holds: bool
    missing: tuple[str, ...] | None = None

    def __bool__(self) -> bool:
        return self.holds


class _WeakView:
    """Determinized view of an LTS: tau-closed state sets and visible moves."""

    def __init__(self, l: Lts):
        self.labels = l.labels
        self.tau = [[] for _ in range(l.num_states)]
        self.vis = [dict() for _ in range(l.num_states)]
        for s, a, t in zip(l.src.tolist(), l.lab.tolist(), l.dst.tolist()):
            x = l.labels[a]
            if x.is_visible:
                self.vis[s].setdefault(str(x), []).append(t)
            else:
                self.tau[s].append(t)
        self.initial = self.closure([l.initial])

    def closure(self, states) -> frozenset:
        seen = set(states)
        stack = list(states)
        while stack:
            s = stack.pop()
            for t in self.tau[s]:
                if t not in seen:
                    seen.add(t)
                    stack.append(t)
        return frozenset(seen)

    def moves(self, states: frozenset) -> dict[str, frozenset]:
        acc: dict[str, set] = {}
        for s in states:
            for a, ts in self.vis[s].items():
                acc.setdefault(a, set()).update(ts)
        return {a: self.closure(ts) for a, ts in acc.items()}


def weak_trace_includes(spec: Lts, impl: Lts) -> TraceInclusion:
    """Whether every weak trace of ``spec`` is a weak trace of ``impl``.

    Breadth-first search over pairs of determinized states, so the missing
    trace reported on failure is a shortest one.
    """
    a, b = _WeakView(spec), _WeakView(impl)
    start = (a.initial, b.initial)
    parent: dict = {start: None}
    queue = deque([start])
    while queue:
        pair = queue.popleft()
        ma, mb = a.moves(pair[0]), b.moves(pair[1])
        for label in sorted(ma):
            if label not in mb:
                trace = [label]
                p = pair
                while parent[p] is not None:
                    p, step = parent[p]
                    trace.append(step)
                return TraceInclusion(False, tuple(reversed(trace)))
            nxt = (ma[label], mb[label])
            if nxt not in parent:
                parent[nxt] = (pair, label)
                queue.append(nxt)
    return TraceInclusion(True)


# ---------------------------------------------------------------------------
# Reference implementation for testing: the relation itself as a fixpoint.

ORACLE_BOUND = 400


def oracle_partition(l: Lts, r: Relation, *, bound: int = ORACLE_BOUND) -> np.ndarray:
    """Largest ``r``-bisimulation on ``l`` as an n-by-n boolean matrix.

    Starts from the full relation and deletes pairs that violate the
    transfer conditions until nothing changes. No tau-SCC collapse, no
    signatures: each condition is checked literally. For DSBB every state on
    a tau-cycle first gets a self-loop on a fresh label, which branching
    bisimulation then has to match; deleting pairs on a divergence test made
    against the shrinking relation itself would not be monotone.
    """
    _bisim(r)
    n = l.num_states
    if n > bound:
        raise ValueError(f"oracle bound exceeded: {n} > {bound} states")
    weak = r is not Relation.STRONG
    tau = np.array([x.is_tau for x in l.labels] or [False])
    ntl = len(l.labels)
    adj = np.zeros((ntl, n, n), dtype=bool)
    adj[l.lab, l.src, l.dst] = True
    tau_step = adj[tau].any(axis=0) if weak and tau.any() else np.zeros((n, n), bool)
    reach = np.eye(n, dtype=bool)
    while True:
        nxt = reach | ((reach.astype(np.int32) @ tau_step.astype(np.int32)) > 0)
        if (nxt == reach).all():
            break
        reach = nxt
    trans = list(zip(l.src.tolist(), l.lab.tolist(), l.dst.tolist()))
    if r is Relation.DSBB:
        # c lies on a tau-cycle iff c -tau-> x -tau*-> c
        on_cycle = np.nonzero(((tau_step.astype(np.int32) @ reach.astype(np.int32)) > 0)
                              .diagonal())[0].tolist()
        loop = np.zeros((1, n, n), dtype=bool)
        loop[0, on_cycle, on_cycle] = True
        adj = np.concatenate([adj, loop])
        tau = np.append(tau, False)
        trans += [(c, ntl, c) for c in on_cycle]
    R = np.ones((n, n), dtype=bool)
    while True:
        ok = R.copy()
        # can[a][x, p'] : x has an a-step into a state related to p'
        can = (adj.astype(np.int32) @ R.astype(np.int32).T) > 0
        for p, a, p2 in trans:
            if weak and tau[a]:
                # tau step may be matched by staying put
                need = ~R[p2, :]
            else:
                need = np.ones(n, bool)
            if weak:
                # q =tau*=> q'' with R[p, q''] and q'' -a-> q' with R[p2, q']
                mid = reach & R[p, :][None, :]
                matched = (mid & can[a][:, p2][None, :]).any(axis=1)
            else:
                matched = can[a][:, p2]
            bad = need & ~matched
            ok[p, bad] = False
        ok &= ok.T
        if (ok == R).all():
            return R
        R = ok


def oracle_equivalent(l1: Lts, l2: Lts, r: Relation, *, bound: int = ORACLE_BOUND) -> bool:
    u, i1, i2 = disjoint_union(l1, l2)
    return bool(oracle_partition(u, r, bound=bound)[i1, i2])
