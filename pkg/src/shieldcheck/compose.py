"""Parallel composition with synchronization vectors, and the derived operators.

A :class:`Network` is a tuple of component LTSs plus a list of
:class:`SyncVector` rules. Tau steps of a component always interleave; every
other global step comes from a vector whose active slots all fire together.
Gate-set composition, hiding, renaming and the ``pipe`` chaining of two
handshake stages are all built on top of :func:`product`.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from shieldcheck import _kernels
from shieldcheck.lts import TAU, Label, Lts, _label_ranks, normalize, visible

__all__ = [
    "SyncVector",
    "Network",
    "ProductStats",
    "BudgetExceeded",
    "DEFAULT_BUDGET",
    "product",
    "product_stats",
    "gateset_network",
    "gateset_par",
    "hide",
    "hide_except",
    "rename",
    "pipe_network",
    "pipe",
    "pipe_nohide",
    "EXTERNAL_GATES",
]

DEFAULT_BUDGET = 50_000_000
EXTERNAL_GATES = ("R_PRED", "A_PRED", "R_SUCC", "A_SUCC")


class BudgetExceeded(RuntimeError):
    def __init__(self, what: str, budget: int):
        super().__init__(f"{what}: more than {budget} reachable states")
        self.what = what
        self.budget = budget


@dataclass(frozen=True)
class SyncVector:
    """``slots[i]`` is the label component ``i`` must perform, or ``None`` if it stays put."""

    slots: tuple[Label | None, ...]
    result: Label

    def __post_init__(self):
        object.__setattr__(self, "slots", tuple(self.slots))
        if all(s is None for s in self.slots):
            raise ValueError("synchronization vector without active slot")
        for s in self.slots:
            if s is not None and not s.is_visible:
                raise ValueError(f"vector slot must be a visible label, got {s}")
        if self.result.div:
            raise ValueError("divergence marker cannot be a vector result")

    @classmethod
    def parse(cls, text: str) -> "SyncVector":
        """Parse ``"A !UP" * _ * "B !UP" -> "C !UP"`` (use ``i`` for a hidden result)."""
        from shieldcheck.aut import parse_label

        lhs, sep, rhs = text.partition("->")
        if not sep:
            raise ValueError(f"missing '->' in vector {text!r}")
        slots = []
        for part in lhs.split("*"):
            part = part.strip()
            slots.append(None if part == "_" else parse_label(part.strip('"')))
        return cls(tuple(slots), parse_label(rhs.strip().strip('"')))

    def __str__(self) -> str:
        lhs = " * ".join("_" if s is None else f'"{s}"' for s in self.slots)
        return f'{lhs} -> "{self.result}"'


@dataclass(frozen=True)
class Network:
    components: tuple[Lts, ...]
    vectors: tuple[SyncVector, ...]

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        object.__setattr__(self, "vectors", tuple(self.vectors))
        if not self.components:
            raise ValueError("network without components")
        for v in self.vectors:
            if len(v.slots) != len(self.components):
                raise ValueError(f"vector {v} has {len(v.slots)} slots, "
                                 f"network has {len(self.components)} components")


@dataclass(frozen=True)
class ProductStats:
    """Sizes of a product. ``transitions`` counts generated instances, duplicates included."""

    states: int
    transitions: int
    deadlocks: int

    @property
    def has_deadlock(self) -> bool:
        return self.deadlocks > 0


def _prepare(net: Network):
    index: dict[Label, int] = {TAU: 0}
    for c in net.components:
        for l in c.labels:
            index.setdefault(l, len(index))
    for v in net.vectors:
        for s in v.slots:
            if s is not None:
                index.setdefault(s, len(index))
        index.setdefault(v.result, len(index))
    labels = list(index)
    rank, _ = _label_ranks(tuple(labels))
    nl = len(labels)

    rowptrs, tlabs, tdsts, rp_base = [], [], [], []
    offset_rows = offset_trans = 0
    for c in net.components:
        gmap = np.array([index[l] for l in c.labels] or [0], dtype=np.int32)
        glab = gmap[c.lab] if c.num_transitions else np.zeros(0, np.int32)
        src = c.src.astype(np.int64)
        order = np.lexsort((np.arange(len(src)), glab, src))
        rp = np.zeros(c.num_states + 1, np.int64)
        np.add.at(rp, src + 1, 1)
        np.cumsum(rp, out=rp)
        rowptrs.append(rp + offset_trans)
        tlabs.append(glab[order])
        tdsts.append(c.dst[order].astype(np.int32))
        rp_base.append(offset_rows)
        offset_rows += c.num_states + 1
        offset_trans += c.num_transitions

    ncomp = len(net.components)
    nvec = len(net.vectors)
    vslot = np.full((max(nvec, 1), ncomp), -1, np.int32)
    vres = np.zeros(max(nvec, 1), np.int32)
    keys = np.zeros(nvec, np.int64)
    for k, v in enumerate(net.vectors):
        first = -1
        for c, s in enumerate(v.slots):
            if s is not None:
                vslot[k, c] = index[s]
                if first < 0:
                    first = c
        vres[k] = index[v.result]
        keys[k] = first * nl + index[v.slots[first]]
    order = np.argsort(keys, kind="stable")
    vidx_ptr = np.zeros(ncomp * nl + 1, np.int64)
    np.add.at(vidx_ptr, keys + 1, 1)
    np.cumsum(vidx_ptr, out=vidx_ptr)
    return dict(
        ncomp=ncomp,
        rowptr=np.concatenate(rowptrs),
        rp_base=np.array(rp_base, np.int64),
        tlab=np.concatenate(tlabs).astype(np.int32),
        tdst=np.concatenate(tdsts).astype(np.int32),
        vslot=vslot,
        vres=vres,
        vidx_ptr=vidx_ptr,
        vidx_list=order.astype(np.int64),
        nlabels=nl,
        tau_id=0,
        rank=rank.astype(np.int64),
        init_row=np.array([c.initial for c in net.components], np.int32),
    ), labels, rank


def _run(net: Network, budget: int, store: bool, what: str):
    args, labels, rank = _prepare(net)
    status, n, src, lab, dst, raw, dead = _kernels.explore(
        args["ncomp"], args["rowptr"], args["rp_base"], args["tlab"], args["tdst"],
        args["vslot"], args["vres"], args["vidx_ptr"], args["vidx_list"],
        args["nlabels"], args["tau_id"], args["rank"], args["init_row"],
        int(budget), store)
    if status == _kernels.BUDGET_EXCEEDED:
        raise BudgetExceeded(what, budget)
    return n, src, lab, dst, raw, dead, labels, rank


def product(net: Network, *, budget: int = DEFAULT_BUDGET, what: str = "product") -> Lts:
    """Reachable product of ``net``, already in canonical (normalized) form.

    Exploration stops with :class:`BudgetExceeded` as soon as more than
    ``budget`` states have been discovered.
    """
    n, src, lab, dst, _, _, labels, rank = _run(net, budget, True, what)
    used = np.unique(lab)
    used = used[np.argsort(rank[used])]
    remap = np.full(len(labels), -1, np.int32)
    remap[used] = np.arange(len(used), dtype=np.int32)
    return Lts(n, 0, [labels[i] for i in used.tolist()], src, remap[lab], dst,
               _normalized=True)


def product_stats(net: Network, *, budget: int = DEFAULT_BUDGET,
                  what: str = "product") -> ProductStats:
    """State count, raw transition count and deadlock count without storing transitions."""
    n, _, _, _, raw, dead, _, _ = _run(net, budget, False, what)
    return ProductStats(int(n), int(raw), int(dead))


def gateset_network(components: Sequence[tuple[Lts, Iterable[str]]], *,
                    strict: bool = False) -> Network:
    """Vectors for multiway rendezvous on declared gates.

    For every gate ``g`` and value, one vector activates exactly the
    components declaring ``g``. A component performing a gate it does not
    declare does so on its own, as in a generalized parallel operator; with
    ``strict=True`` that is an error instead.
    """
    comps = [c for c, _ in components]
    decl = [frozenset(g) for _, g in components]
    offers: list[set[Label]] = [{l for l in c.used_labels() if l.is_visible} for c in comps]
    all_labels = sorted(set().union(*offers), key=str)
    vectors = []
    for label in all_labels:
        declarers = [i for i, d in enumerate(decl) if label.gate in d]
        if declarers and all(label in offers[i] for i in declarers):
            slots = [label if i in declarers else None for i in range(len(comps))]
            vectors.append(SyncVector(tuple(slots), label))
        for i, o in enumerate(offers):
            if label in o and label.gate not in decl[i]:
                if strict:
                    raise ValueError(f"component {i} offers {label} outside its gate set")
                slots = [label if j == i else None for j in range(len(comps))]
                vectors.append(SyncVector(tuple(slots), label))
    return Network(tuple(comps), tuple(vectors))


def gateset_par(components: Sequence[tuple[Lts, Iterable[str]]], *, strict: bool = False,
                budget: int = DEFAULT_BUDGET) -> Lts:
    return product(gateset_network(components, strict=strict), budget=budget,
                   what="gateset_par")


def hide(l: Lts, gates: Iterable[str]) -> Lts:
    gates = set(gates)
    if not gates:
        return normalize(l)
    return normalize(l.relabel(lambda x: TAU if x.gate in gates else x))


def hide_except(l: Lts, keep: Iterable[str]) -> Lts:
    keep = set(keep)
    return normalize(l.relabel(lambda x: x if x.gate is None or x.gate in keep else TAU))


_GATE = re.compile(r"^[A-Za-z_][A-Za-z0-9_']*$")


def rename(l: Lts, mapping: Mapping[str, str]) -> Lts:
    for new in mapping.values():
        if new == "i" or not _GATE.match(new):
            raise ValueError(f"cannot rename a gate to {new!r}")
    if not mapping:
        return normalize(l)
    return normalize(l.relabel(
        lambda x: visible(mapping[x.gate], x.value) if x.gate in mapping else x))


def _check_pipe_operand(l: Lts, which: str) -> None:
    missing = [g for g in EXTERNAL_GATES if g not in l.gates()]
    if missing:
        raise ValueError(f"{which} operand of pipe lacks gate(s) {', '.join(missing)}")


def pipe_network(c1: Lts, c2: Lts, *, hidden: bool = True,
                 left_suffix: str = "_L", right_suffix: str = "_R") -> Network:
    """Network chaining ``c1``'s successor side to ``c2``'s predecessor side on fresh gates R, A.

    With ``hidden`` the handshake on R and A becomes tau. Otherwise R and A
    stay visible and the operands' internal gates get ``left_suffix`` and
    ``right_suffix`` so the two copies can be told apart.
    """
    _check_pipe_operand(c1, "left")
    _check_pipe_operand(c2, "right")
    m1 = {"R_SUCC": "R", "A_SUCC": "A"}
    m2 = {"R_PRED": "R", "A_PRED": "A"}
    if not hidden:
        for g in sorted(c1.gates() - set(EXTERNAL_GATES)):
            m1[g] = g + left_suffix
        for g in sorted(c2.gates() - set(EXTERNAL_GATES)):
            m2[g] = g + right_suffix
    r1, r2 = rename(c1, m1), rename(c2, m2)
    l1, l2 = r1.used_labels(), r2.used_labels()
    vectors = []
    for label in sorted(l1 | l2, key=str):
        if not label.is_visible:
            continue
        if label.gate in ("R", "A"):
            if label in l1 and label in l2:
                vectors.append(SyncVector((label, label), TAU if hidden else label))
            continue
        if label in l1:
            vectors.append(SyncVector((label, None), label))
        if label in l2:
            vectors.append(SyncVector((None, label), label))
    return Network((r1, r2), tuple(vectors))


def pipe(c1: Lts, c2: Lts, *, budget: int = DEFAULT_BUDGET) -> Lts:
    return product(pipe_network(c1, c2), budget=budget, what="pipe")


def pipe_nohide(c1: Lts, c2: Lts, left_suffix: str = "_L", right_suffix: str = "_R", *,
                budget: int = DEFAULT_BUDGET) -> Lts:
    net = pipe_network(c1, c2, hidden=False, left_suffix=left_suffix,
                       right_suffix=right_suffix)
    return product(net, budget=budget, what="pipe_nohide")
