"""Labeled transition systems: representation, normalization and graph analyses.

An :class:`Lts` keeps its transitions in three parallel numpy arrays
(source, label index, destination) plus a table of :class:`Label` objects,
so that state spaces with millions of transitions stay cheap to hold and to
hand over to the compiled kernels in :mod:`shieldcheck._kernels`.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np
import scipy.sparse
import scipy.sparse.csgraph

from shieldcheck import _kernels

__all__ = [
    "Voltage",
    "Label",
    "TAU",
    "DIV",
    "visible",
    "Lts",
    "normalize",
    "deadlock_states",
    "divergent_states",
    "reachable",
    "run_trace",
]


class Voltage(enum.IntEnum):
    DOWN = 0
    UP = 1

    def __invert__(self) -> "Voltage":
        return Voltage(1 - int(self))

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Label:
    """A transition label: a visible ``GATE !VALUE`` event, tau, or the divergence marker."""

    gate: str | None = None
    value: Voltage | None = None
    div: bool = False

    @property
    def is_tau(self) -> bool:
        return self.gate is None and not self.div

    @property
    def is_visible(self) -> bool:
        return self.gate is not None

    def __str__(self) -> str:
        if self.div:
            return "<div>"
        if self.gate is None:
            return "i"
        return f"{self.gate} !{self.value.name}"

    def __repr__(self) -> str:
        return f"Label({str(self)!r})"


TAU = Label()
DIV = Label(div=True)


def visible(gate: str, value: Voltage | int) -> Label:
    if not gate or gate == "i":
        raise ValueError(f"invalid gate name {gate!r}")
    return Label(gate, Voltage(value))


def _index_dtype(n: int):
    return np.int32 if n < 2**31 - 1 else np.int64


class Lts:
    """Finite LTS with dense state ids in ``[0, num_states)``.

    Instances are immutable. Build them with :meth:`from_transitions` or
    :func:`normalize`; the constructor does no validation beyond shapes.
    """

    __slots__ = ("num_states", "initial", "labels", "src", "lab", "dst", "_normalized")

    def __init__(self, num_states: int, initial: int, labels: Iterable[Label],
                 src: np.ndarray, lab: np.ndarray, dst: np.ndarray,
                 *, _normalized: bool = False):
        self.num_states = int(num_states)
        self.initial = int(initial)
        self.labels = tuple(labels)
        dt = _index_dtype(self.num_states)
        self.src = np.ascontiguousarray(src, dtype=dt)
        self.lab = np.ascontiguousarray(lab, dtype=np.int32)
        self.dst = np.ascontiguousarray(dst, dtype=dt)
        for a in (self.src, self.lab, self.dst):
            a.setflags(write=False)
        if not (len(self.src) == len(self.lab) == len(self.dst)):
            raise ValueError("transition arrays differ in length")
        self._normalized = _normalized

    @classmethod
    def from_transitions(cls, num_states: int,
                         transitions: Iterable[tuple[int, Label, int]],
                         initial: int = 0) -> "Lts":
        index: dict[Label, int] = {}
        src, lab, dst = [], [], []
        for s, label, t in transitions:
            if not (0 <= s < num_states and 0 <= t < num_states):
                raise ValueError(f"transition ({s}, {label}, {t}) outside [0, {num_states})")
            src.append(s)
            lab.append(index.setdefault(label, len(index)))
            dst.append(t)
        if not 0 <= initial < max(num_states, 1):
            raise ValueError("initial state out of range")
        return cls(num_states, initial, index, np.array(src, dtype=np.int64),
                   np.array(lab, dtype=np.int32), np.array(dst, dtype=np.int64))

    @property
    def num_transitions(self) -> int:
        return len(self.src)

    @property
    def is_normalized(self) -> bool:
        return self._normalized

    def transitions(self) -> Iterator[tuple[int, Label, int]]:
        labels = self.labels
        for s, l, t in zip(self.src.tolist(), self.lab.tolist(), self.dst.tolist()):
            yield s, labels[l], t

    def used_labels(self) -> set[Label]:
        return {self.labels[i] for i in np.unique(self.lab).tolist()}

    def gates(self) -> set[str]:
        return {l.gate for l in self.used_labels() if l.is_visible}

    def successors(self, state: int) -> list[tuple[Label, int]]:
        idx = np.nonzero(self.src == state)[0]
        return [(self.labels[self.lab[i]], int(self.dst[i])) for i in idx]

    def relabel(self, fn) -> "Lts":
        """Apply ``fn: Label -> Label`` to the label table (result not normalized)."""
        return Lts(self.num_states, self.initial, [fn(l) for l in self.labels],
                   self.src, self.lab, self.dst)

    def label_strings(self) -> list[str]:
        return [str(l) for l in self.labels]

    def _key(self):
        names = np.array(self.label_strings() or [""], dtype=object)
        triples = sorted(zip(self.src.tolist(), names[self.lab].tolist() if len(self.lab) else [],
                             self.dst.tolist()))
        return self.num_states, self.initial, triples

    def __eq__(self, other) -> bool:
        if not isinstance(other, Lts):
            return NotImplemented
        if (self.num_states, self.initial, self.num_transitions) != (
                other.num_states, other.initial, other.num_transitions):
            return False
        return self._key() == other._key()

    __hash__ = None

    def __repr__(self) -> str:
        return f"Lts(states={self.num_states}, transitions={self.num_transitions})"


def _label_ranks(labels: tuple[Label, ...]) -> tuple[np.ndarray, list[Label]]:
    """Rank of every entry of ``labels`` in sorted-string order, merging equal labels."""
    order = sorted(set(labels), key=str)
    pos = {l: i for i, l in enumerate(order)}
    return np.array([pos[l] for l in labels], dtype=np.int32), order


def normalize(l: Lts) -> Lts:
    """Prune unreachable states, renumber in canonical BFS order, merge duplicates.

    Outgoing transitions of a state are visited in sorted label-string order,
    ties keeping the input order. Transitions of the result are sorted by
    (source, label, destination) and its label table holds exactly the used
    labels, sorted by their string form.
    """
    if l._normalized:
        return l
    rank, table = _label_ranks(l.labels)
    n = l.num_states
    if l.num_transitions == 0:
        return Lts(1, 0, [], np.zeros(0, np.int64), np.zeros(0, np.int32),
                   np.zeros(0, np.int64), _normalized=True)
    src = l.src.astype(np.int64)
    dst = l.dst.astype(np.int64)
    rlab = rank[l.lab]
    order = np.lexsort((np.arange(len(src)), rlab, src))
    src, rlab, dst = src[order], rlab[order], dst[order]
    rowptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(rowptr, src + 1, 1)
    np.cumsum(rowptr, out=rowptr)
    newid, count = _kernels.bfs_order(rowptr, dst, l.initial, n)
    keep = newid[src] >= 0
    s2, r2, d2 = newid[src[keep]], rlab[keep], newid[dst[keep]]
    key = np.lexsort((d2, r2, s2))
    s2, r2, d2 = s2[key], r2[key], d2[key]
    if len(s2):
        uniq = np.ones(len(s2), dtype=bool)
        uniq[1:] = (s2[1:] != s2[:-1]) | (r2[1:] != r2[:-1]) | (d2[1:] != d2[:-1])
        s2, r2, d2 = s2[uniq], r2[uniq], d2[uniq]
    used = np.unique(r2)
    remap = np.full(len(table), -1, dtype=np.int32)
    remap[used] = np.arange(len(used), dtype=np.int32)
    return Lts(count, 0, [table[i] for i in used.tolist()], s2, remap[r2], d2,
               _normalized=True)


def deadlock_states(l: Lts) -> set[int]:
    has_out = np.zeros(l.num_states, dtype=bool)
    has_out[l.src] = True
    return set(np.nonzero(~has_out)[0].tolist())


def tau_mask(l: Lts) -> np.ndarray:
    tau_ids = [i for i, lab in enumerate(l.labels) if lab.is_tau or lab.div]
    return np.isin(l.lab, tau_ids)


def tau_sccs(l: Lts) -> tuple[int, np.ndarray, np.ndarray]:
    """Strongly connected components of the tau-graph.

    Returns ``(count, component_of_state, cyclic)`` where ``cyclic[c]`` tells
    whether component ``c`` contains a tau-cycle (including a self-loop).
    """
    n = l.num_states
    m = tau_mask(l)
    s, t = l.src[m].astype(np.int64), l.dst[m].astype(np.int64)
    g = scipy.sparse.csr_matrix((np.ones(len(s), dtype=np.int8), (s, t)), shape=(n, n))
    count, comp = scipy.sparse.csgraph.connected_components(g, directed=True, connection="strong")
    size = np.bincount(comp, minlength=count)
    cyclic = size > 1
    loops = s == t
    cyclic[comp[s[loops]]] = True
    return count, comp.astype(np.int64), cyclic


def divergent_states(l: Lts) -> set[int]:
    """States from which an infinite tau-path exists."""
    if l.num_transitions == 0:
        return set()
    _, comp, cyclic = tau_sccs(l)
    seeds = cyclic[comp]
    if not seeds.any():
        return set()
    m = tau_mask(l)
    reached = _kernels.backward_closure(l.num_states, l.src[m].astype(np.int64),
                                        l.dst[m].astype(np.int64), seeds)
    return set(np.nonzero(reached)[0].tolist())


def reachable(l: Lts, start: Iterable[int]) -> set[int]:
    """States reachable from ``start`` (included) along any transitions."""
    n = l.num_states
    rowptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(rowptr, l.src.astype(np.int64) + 1, 1)
    np.cumsum(rowptr, out=rowptr)
    dst = l.dst[np.argsort(l.src, kind="stable")].astype(np.int64)
    seen = np.zeros(n, dtype=bool)
    stack = list(start)
    seen[stack] = True
    while stack:
        s = stack.pop()
        for t in dst[rowptr[s]:rowptr[s + 1]].tolist():
            if not seen[t]:
                seen[t] = True
                stack.append(t)
    return set(np.nonzero(seen)[0].tolist())


def run_trace(l: Lts, trace: Iterable[Label | str], *, weak: bool = False) -> set[int]:
    """States reached by performing ``trace`` from the initial state.

    Labels may be given as strings (``"R !UP"``). With ``weak`` any number
    of tau steps may be interleaved. An empty result means the trace is not
    executable.
    """
    names = [str(x) for x in l.labels]
    succ: dict[int, list[tuple[str, int]]] = {}
    for s, a, t in zip(l.src.tolist(), l.lab.tolist(), l.dst.tolist()):
        succ.setdefault(s, []).append((names[a], t))

    def close(states):
        if not weak:
            return states
        stack, seen = list(states), set(states)
        while stack:
            s = stack.pop()
            for a, t in succ.get(s, ()):
                if a == "i" and t not in seen:
                    seen.add(t)
                    stack.append(t)
        return seen

    current = close({l.initial})
    for step in trace:
        want = str(step)
        current = close({t for s in current for a, t in succ.get(s, ()) if a == want})
        if not current:
            break
    return current
