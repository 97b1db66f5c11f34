"""Compiled inner loops. Everything here works on plain integer arrays."""
import numba as nb
import numpy as np

_FNV_OFFSET = np.uint64(14695981039346656037)
_FNV_PRIME = np.uint64(1099511628211)

OK = 0
BUDGET_EXCEEDED = 1


@nb.njit(cache=True)
def bfs_order(rowptr, dst, initial, n):
    newid = np.full(n, -1, np.int64)
    queue = np.empty(n, np.int64)
    newid[initial] = 0
    queue[0] = initial
    head, tail = 0, 1
    while head < tail:
        s = queue[head]
        head += 1
        for k in range(rowptr[s], rowptr[s + 1]):
            t = dst[k]
            if newid[t] < 0:
                newid[t] = tail
                queue[tail] = t
                tail += 1
    return newid, tail


@nb.njit(cache=True)
def backward_closure(n, src, dst, seeds):
    """Mark every state that reaches a seed state along the given edges."""
    indeg_ptr = np.zeros(n + 1, np.int64)
    for e in range(len(dst)):
        indeg_ptr[dst[e] + 1] += 1
    for i in range(n):
        indeg_ptr[i + 1] += indeg_ptr[i]
    fill = indeg_ptr[:-1].copy()
    preds = np.empty(len(dst), np.int64)
    for e in range(len(dst)):
        preds[fill[dst[e]]] = src[e]
        fill[dst[e]] += 1
    reached = seeds.copy()
    stack = np.empty(n, np.int64)
    top = 0
    for s in range(n):
        if reached[s]:
            stack[top] = s
            top += 1
    while top > 0:
        top -= 1
        t = stack[top]
        for k in range(indeg_ptr[t], indeg_ptr[t + 1]):
            p = preds[k]
            if not reached[p]:
                reached[p] = True
                stack[top] = p
                top += 1
    return reached


@nb.njit(cache=True)
def _row_hash(buf, start, width):
    h = _FNV_OFFSET
    for i in range(width):
        h = (h ^ np.uint64(buf[start + i])) * _FNV_PRIME
    h ^= h >> np.uint64(31)
    h *= np.uint64(0x9E3779B97F4A7C15)
    h ^= h >> np.uint64(29)
    return h


@nb.njit(cache=True)
def _grow_i32(a, need):
    if need <= len(a):
        return a
    cap = len(a)
    while cap < need:
        cap *= 2
    b = np.empty(cap, a.dtype)
    b[: len(a)] = a
    return b


@nb.njit(cache=True)
def explore(ncomp, rowptr, rp_base, tlab, tdst, vslot, vres, vidx_ptr, vidx_list,
            nlabels, tau_id, rank, init_row, budget, store):
    """Breadth-first exploration of a synchronization-vector product.

    Component transitions are CSR arrays sorted by (state, label). A vector is
    indexed under its first active component and that slot's label. Successors
    of a state are numbered in (result-label rank, generation order) so that
    the output is already in canonical BFS order.

    Returns ``(status, nstates, src, lab, dst, raw_count, deadlocks)``;
    ``raw_count`` counts generated transition instances before merging.
    """
    states = np.empty(1024 * ncomp, np.int32)
    hcap = 1024
    table = np.full(hcap, -1, np.int64)
    mask = np.uint64(hcap - 1)
    for i in range(ncomp):
        states[i] = init_row[i]
    table[_row_hash(states, 0, ncomp) & mask] = 0
    nstates = 1

    tcap = 1024 if store else 1
    out_src = np.empty(tcap, np.int32)
    out_lab = np.empty(tcap, np.int32)
    out_dst = np.empty(tcap, np.int32)
    nout = 0

    lcap = 64
    l_lab = np.empty(lcap, np.int32)
    l_rows = np.empty(lcap * ncomp, np.int32)
    l_id = np.empty(lcap, np.int64)
    l_ord = np.empty(lcap, np.int64)
    active = np.empty(ncomp, np.int64)
    lo = np.empty(ncomp, np.int64)
    hi = np.empty(ncomp, np.int64)
    cur = np.empty(ncomp, np.int64)

    raw_count = 0
    deadlocks = 0
    head = 0
    while head < nstates:
        s = head
        head += 1
        base = s * ncomp
        k = 0
        for c in range(ncomp):
            sc = states[base + c]
            a = rowptr[rp_base[c] + sc]
            b = rowptr[rp_base[c] + sc + 1]
            for t in range(a, b):
                L = tlab[t]
                if L == tau_id:
                    if k + 1 > lcap:
                        lcap *= 2
                        l_lab = _grow_i32(l_lab, lcap)
                        l_rows = _grow_i32(l_rows, lcap * ncomp)
                        l_id = _grow_i32(l_id, lcap)
                        l_ord = _grow_i32(l_ord, lcap)
                    for i in range(ncomp):
                        l_rows[k * ncomp + i] = states[base + i]
                    l_rows[k * ncomp + c] = tdst[t]
                    l_lab[k] = tau_id
                    k += 1
                    continue
                key = c * nlabels + L
                for vi in range(vidx_ptr[key], vidx_ptr[key + 1]):
                    v = vidx_list[vi]
                    na = 0
                    ok = True
                    for c2 in range(c + 1, ncomp):
                        L2 = vslot[v, c2]
                        if L2 < 0:
                            continue
                        sc2 = states[base + c2]
                        f = rowptr[rp_base[c2] + sc2]
                        b2 = rowptr[rp_base[c2] + sc2 + 1]
                        while f < b2 and tlab[f] < L2:
                            f += 1
                        g = f
                        while g < b2 and tlab[g] == L2:
                            g += 1
                        if f == g:
                            ok = False
                            break
                        active[na] = c2
                        lo[na] = f
                        hi[na] = g
                        cur[na] = f
                        na += 1
                    if not ok:
                        continue
                    while True:
                        if k + 1 > lcap:
                            lcap *= 2
                            l_lab = _grow_i32(l_lab, lcap)
                            l_rows = _grow_i32(l_rows, lcap * ncomp)
                            l_id = _grow_i32(l_id, lcap)
                            l_ord = _grow_i32(l_ord, lcap)
                        for i in range(ncomp):
                            l_rows[k * ncomp + i] = states[base + i]
                        l_rows[k * ncomp + c] = tdst[t]
                        for j in range(na):
                            l_rows[k * ncomp + active[j]] = tdst[cur[j]]
                        l_lab[k] = vres[v]
                        k += 1
                        j = na - 1
                        while j >= 0:
                            cur[j] += 1
                            if cur[j] < hi[j]:
                                break
                            cur[j] = lo[j]
                            j -= 1
                        if j < 0:
                            break
        raw_count += k
        if k == 0:
            deadlocks += 1
            continue
        # stable insertion sort of successor indices by label rank
        for i in range(k):
            l_ord[i] = i
        for i in range(1, k):
            x = l_ord[i]
            rx = rank[l_lab[x]]
            j = i - 1
            while j >= 0 and rank[l_lab[l_ord[j]]] > rx:
                l_ord[j + 1] = l_ord[j]
                j -= 1
            l_ord[j + 1] = x
        for q in range(k):
            i = l_ord[q]
            rs = i * ncomp
            h = _row_hash(l_rows, rs, ncomp) & mask
            while True:
                idx = table[h]
                if idx < 0:
                    if nstates >= budget:
                        return (BUDGET_EXCEEDED, nstates, out_src[:0], out_lab[:0],
                                out_dst[:0], raw_count, deadlocks)
                    if (nstates + 1) * ncomp > len(states):
                        states = _grow_i32(states, (nstates + 1) * ncomp)
                    for z in range(ncomp):
                        states[nstates * ncomp + z] = l_rows[rs + z]
                    table[h] = nstates
                    l_id[i] = nstates
                    nstates += 1
                    if 2 * nstates > hcap:
                        hcap *= 2
                        table = np.full(hcap, -1, np.int64)
                        mask = np.uint64(hcap - 1)
                        for w in range(nstates):
                            hh = _row_hash(states, w * ncomp, ncomp) & mask
                            while table[hh] >= 0:
                                hh = (hh + np.uint64(1)) & mask
                            table[hh] = w
                    break
                same = True
                for z in range(ncomp):
                    if states[idx * ncomp + z] != l_rows[rs + z]:
                        same = False
                        break
                if same:
                    l_id[i] = idx
                    break
                h = (h + np.uint64(1)) & mask
        if store:
            # order by (rank, destination id) and drop duplicates
            for i in range(1, k):
                x = l_ord[i]
                rx = rank[l_lab[x]]
                ix = l_id[x]
                j = i - 1
                while j >= 0 and (rank[l_lab[l_ord[j]]] > rx or
                                  (rank[l_lab[l_ord[j]]] == rx and l_id[l_ord[j]] > ix)):
                    l_ord[j + 1] = l_ord[j]
                    j -= 1
                l_ord[j + 1] = x
            if nout + k > len(out_src):
                out_src = _grow_i32(out_src, nout + k)
                out_lab = _grow_i32(out_lab, nout + k)
                out_dst = _grow_i32(out_dst, nout + k)
            prev_l = -1
            prev_d = -1
            for q in range(k):
                i = l_ord[q]
                if l_lab[i] == prev_l and l_id[i] == prev_d:
                    continue
                prev_l = l_lab[i]
                prev_d = l_id[i]
                out_src[nout] = s
                out_lab[nout] = l_lab[i]
                out_dst[nout] = l_id[i]
                nout += 1
    return (OK, nstates, out_src[:nout], out_lab[:nout], out_dst[:nout],
            raw_count, deadlocks)


@nb.njit(cache=True)
def topo_successors_first(n, src, dst):
    """Order nodes of a DAG so that every node follows all of its successors."""
    outdeg = np.zeros(n, np.int64)
    ptr = np.zeros(n + 1, np.int64)
    for e in range(len(src)):
        outdeg[src[e]] += 1
        ptr[dst[e] + 1] += 1
    for i in range(n):
        ptr[i + 1] += ptr[i]
    fill = ptr[:-1].copy()
    preds = np.empty(len(src), np.int64)
    for e in range(len(src)):
        preds[fill[dst[e]]] = src[e]
        fill[dst[e]] += 1
    order = np.empty(n, np.int64)
    tail = 0
    for u in range(n):
        if outdeg[u] == 0:
            order[tail] = u
            tail += 1
    head = 0
    while head < tail:
        u = order[head]
        head += 1
        for k in range(ptr[u], ptr[u + 1]):
            p = preds[k]
            outdeg[p] -= 1
            if outdeg[p] == 0:
                order[tail] = p
                tail += 1
    return order[:tail]


@nb.njit(cache=True)
def _sig_hash(block_id, data, start, length):
    h = (_FNV_OFFSET ^ np.uint64(block_id)) * _FNV_PRIME
    for i in range(start, start + length):
        h = (h ^ np.uint64(data[i])) * _FNV_PRIME
        h ^= h >> np.uint64(27)
    return h


@nb.njit(cache=True)
def _sort_unique(data, start, pos):
    if pos - start <= 32:
        for z in range(start + 1, pos):
            x = data[z]
            y = z - 1
            while y >= start and data[y] > x:
                data[y + 1] = data[y]
                y -= 1
            data[y + 1] = x
    else:
        data[start:pos] = np.sort(data[start:pos])
    w = start + 1
    for z in range(start + 1, pos):
        if data[z] != data[w - 1]:
            data[w] = data[z]
            w += 1
    return w


@nb.njit(cache=True)
def refine(n, rowptr, lab, dst, inert_label, order, block, nblocks):
    """Signature refinement until the partition is stable.

    With ``inert_label >= 0`` (branching variants) a transition with that
    label inside the current block is inert: the signature of its target is
    inherited instead of recording the step, which requires ``order`` to list
    inert successors first (the tau-graph must be acyclic).

    Only blocks with a transition into a block split in the previous round
    are recomputed. Returns ``(block, nblocks, rounds)``.
    """
    stride = np.int64(n + 1)
    m = len(dst)
    pred_ptr = np.zeros(n + 1, np.int64)
    for k in range(m):
        pred_ptr[dst[k] + 1] += 1
    for i in range(n):
        pred_ptr[i + 1] += pred_ptr[i]
    fill = pred_ptr[:-1].copy()
    preds = np.empty(m, np.int64)
    for u in range(n):
        for k in range(rowptr[u], rowptr[u + 1]):
            preds[fill[dst[k]]] = u
            fill[dst[k]] += 1

    data = np.empty(max(m + n, 16), np.int64)
    sig_start = np.zeros(n, np.int64)
    sig_len = np.zeros(n, np.int64)
    tcap = 16
    while tcap < 2 * n:
        tcap *= 2
    table = np.empty(tcap, np.int64)
    tmask = np.uint64(tcap - 1)
    rep = np.empty(n, np.int64)
    gid = np.empty(n, np.int64)
    dirty = np.ones(n, np.bool_)
    split = np.zeros(n, np.bool_)
    kept = np.full(n, -1, np.int64)
    newblock = block.copy()
    rounds = 0
    while True:
        rounds += 1
        pos = 0
        for oi in range(n):
            u = order[oi]
            bu = block[u]
            if not dirty[bu]:
                continue
            start = pos
            for k in range(rowptr[u], rowptr[u + 1]):
                v = dst[k]
                L = lab[k]
                if L == inert_label and block[v] == bu:
                    ln = sig_len[v]
                    if pos + ln > len(data):
                        data = _grow_i32(data, pos + ln)
                    sv = sig_start[v]
                    for z in range(ln):
                        data[pos + z] = data[sv + z]
                    pos += ln
                else:
                    if pos + 1 > len(data):
                        data = _grow_i32(data, pos + 1)
                    data[pos] = L * stride + block[v]
                    pos += 1
            if pos - start > 1:
                pos = _sort_unique(data, start, pos)
            sig_start[u] = start
            sig_len[u] = pos - start
        table.fill(-1)
        groups = 0
        any_split = False
        for u in range(n):
            bu = block[u]
            if not dirty[bu]:
                newblock[u] = bu
                continue
            h = _sig_hash(bu, data, sig_start[u], sig_len[u]) & tmask
            while True:
                r = table[h]
                if r < 0:
                    table[h] = groups
                    rep[groups] = u
                    if kept[bu] < 0:
                        kept[bu] = groups
                        gid[groups] = bu
                    else:
                        gid[groups] = nblocks
                        nblocks += 1
                        split[bu] = True
                        any_split = True
                    newblock[u] = gid[groups]
                    groups += 1
                    break
                w = rep[r]
                eq = block[w] == bu and sig_len[w] == sig_len[u]
                if eq:
                    for z in range(sig_len[u]):
                        if data[sig_start[w] + z] != data[sig_start[u] + z]:
                            eq = False
                            break
                if eq:
                    newblock[u] = gid[r]
                    break
                h = (h + np.uint64(1)) & tmask
        if not any_split:
            return block, nblocks, rounds
        dirty[:] = False
        for v in range(n):
            if split[block[v]]:
                for k in range(pred_ptr[v], pred_ptr[v + 1]):
                    dirty[newblock[preds[k]]] = True
        split[:] = False
        kept[:] = -1
        block, newblock = newblock, block
