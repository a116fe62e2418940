"""Compiled inner loops for the left-coset census.

A left coset gP is stored as the lexicographically least image array in gP,
packed 4 bits per point.  Because P acts on positions as the automorphism
group of a forest of cyclically ordered trees, that least array is found
bottom-up: inside every node rotate the children so the child holding the
smallest value comes first.  ``dcos.canonical_coset_rep`` computes the same
thing by the stabilizer-chain greedy; the test-suite checks they agree.
"""

from __future__ import annotations

import numpy as np
from numba import njit

EMPTY = np.uint64(0xFFFFFFFFFFFFFFFF)


@njit(cache=True)
def canonicalize(v, starts, nstarts, p):
    """In-place structural canonicalization of image array ``v``.

    starts[h, :nstarts[h]] lists the first point of each height-h node.
    """
    _canonicalize_buf(v, np.empty(v.shape[0], dtype=v.dtype), starts, nstarts, p)


@njit(cache=True)
def _canonicalize_buf(v, buf, starts, nstarts, p):
    hmax = starts.shape[0] - 1
    w = 1
    for h in range(1, hmax + 1):
        width = w * p
        for t in range(nstarts[h]):
            s = starts[h, t]
            best = 0
            bv = v[s]
            for d in range(1, p):
                c = v[s + d * w]
                if c < bv:
                    bv = c
                    best = d
            if best != 0:
                for i in range(width):
                    buf[i] = v[s + (best * w + i) % width]
                for i in range(width):
                    v[s + i] = buf[i]
        w = width


@njit(cache=True)
def pack(v):
    key = np.uint64(0)
    for i in range(v.shape[0]):
        key = (key << np.uint64(4)) | np.uint64(v[i])
    return key


@njit(cache=True)
def unpack(key, n, out):
    for i in range(n):
        out[i] = np.int64((key >> np.uint64(4 * (n - 1 - i))) & np.uint64(0xF))


@njit(cache=True)
def _slot(key, mask):
    h = key * np.uint64(0x9E3779B97F4A7C15)
    h ^= h >> np.uint64(29)
    return np.int64(h & mask)


@njit(cache=True)
def _insert(table, mask, key):
    i = _slot(key, mask)
    while True:
        cur = table[i]
        if cur == key:
            return False
        if cur == EMPTY:
            table[i] = key
            return True
        i = (i + 1) & mask


@njit(cache=True)
def bfs_cosets(n, p, starts, nstarts, expected, capacity):
    """All canonical left-coset keys reachable from P by adjacent transpositions.

    Returns (keys in discovery order, number found).  The count is -1 if more
    than ``expected`` keys turn up (a structural bug, never a budget issue).
    """
    table = np.full(capacity, EMPTY, dtype=np.uint64)
    mask = np.uint64(capacity - 1)
    keys = np.empty(expected, dtype=np.uint64)
    v = np.arange(n).astype(np.int64)
    canonicalize(v, starts, nstarts, p)
    k0 = pack(v)
    _insert(table, mask, k0)
    keys[0] = k0
    count = 1
    head = 0
    inv = np.empty(n, dtype=np.int64)
    w = np.empty(n, dtype=np.int64)
    while head < count:
        unpack(keys[head], n, v)
        head += 1
        for j in range(n):
            inv[v[j]] = j
        for i in range(n - 1):
            for j in range(n):
                w[j] = v[j]
            w[inv[i]] = i + 1
            w[inv[i + 1]] = i
            canonicalize(w, starts, nstarts, p)
            k = pack(w)
            if _insert(table, mask, k):
                if count >= expected:
                    return keys, -1
                keys[count] = k
                count += 1
    return keys, count


@njit(cache=True)
def orbit_census(sorted_keys, n, p, m, starts, nstarts, gens):
    """Partition sorted coset keys into P-orbits under left multiplication.

    Orbits are discovered from their smallest key.  Returns counts[k] = number of
    orbits of size p^k, or counts[0] = -1 if an orbit size is not a power of p,
    or -2 if a generator leaves the coset set.
    """
    N = sorted_keys.shape[0]
    visited = np.zeros(N, dtype=np.bool_)
    counts = np.zeros(m + 1, dtype=np.int64)
    queue = np.empty(N, dtype=np.int64)
    v = np.empty(n, dtype=np.int64)
    w = np.empty(n, dtype=np.int64)
    ngens = gens.shape[0]
    for start in range(N):
        if visited[start]:
            continue
        visited[start] = True
        queue[0] = start
        qlen = 1
        head = 0
        while head < qlen:
            unpack(sorted_keys[queue[head]], n, v)
            head += 1
            for g in range(ngens):
                for j in range(n):
                    w[j] = gens[g, v[j]]
                canonicalize(w, starts, nstarts, p)
                k = pack(w)
                idx = np.searchsorted(sorted_keys, k)
                if idx >= N or sorted_keys[idx] != k:
                    counts[0] = -2
                    return counts
                if not visited[idx]:
                    visited[idx] = True
                    queue[qlen] = idx
                    qlen += 1
        size = qlen
        e = 0
        while size % p == 0:
            size //= p
            e += 1
        if size != 1 or e > m:
            counts[0] = -1
            return counts
        counts[e] += 1
    return counts


@njit(cache=True)
def canonicalize_rows(G, starts, nstarts, p):
    out = G.copy()
    for r in range(out.shape[0]):
        canonicalize(out[r], starts, nstarts, p)
    return out


@njit(cache=True)
def intersection_orders(X, E, starts, nstarts, p, tree_of, blk):
    """|P ∩ P^x| for each row x of X by scanning the element table E of P.

    x h x^-1 lies in P exactly when its left coset is P, i.e. its canonical
    representative is the identity.  ``blk[i]`` is the first point of the
    height-1 block holding i (-1 for points P fixes); a candidate that breaks
    trees or bottom blocks is rejected before canonicalizing.
    """
    N, n = X.shape
    out = np.zeros(N, dtype=np.int64)
    xinv = np.empty(n, dtype=np.int64)
    g = np.empty(n, dtype=np.int64)
    buf = np.empty(n, dtype=np.int64)
    for r in range(N):
        for i in range(n):
            xinv[X[r, i]] = i
        cnt = 0
        for e in range(E.shape[0]):
            ok = True
            for i in range(n):
                v = X[r, E[e, xinv[i]]]
                g[i] = v
                b = blk[i]
                if b < 0:
                    if v != i:
                        ok = False
                        break
                elif tree_of[v] != tree_of[i] or (b != i and blk[v] != blk[g[b]]):
                    ok = False
                    break
            if not ok:
                continue
            _canonicalize_buf(g, buf, starts, nstarts, p)
            for i in range(n):
                if g[i] != i:
                    ok = False
                    break
            if ok:
                cnt += 1
        out[r] = cnt
    return out


@njit(cache=True)
def cycle_counts(E):
    N, n = E.shape
    out = np.zeros((N, n + 1), dtype=np.int64)
    seen = np.zeros(n, dtype=np.bool_)
    for r in range(N):
        seen[:] = False
        for i in range(n):
            if seen[i]:
                continue
            L = 0
            j = i
            while not seen[j]:
                seen[j] = True
                j = E[r, j]
                L += 1
            out[r, L] += 1
    return out


# ---------------------------------------------------------------- P ∩ P^x != 1
#
# Compiled twin of ``intersect.IntersectionSearch.nontrivial``.  State lives in
# flat arrays; every write is recorded on a trail so a failed branch is undone
# by resetting the written cells to -1.

_IMG, _PRE, _NIMG, _NREV, _NLAB = 0, 1, 2, 3, 4


@njit(cache=True)
def _set(arr_id, F, idx, val, img, pre, nimg, nrev, nlab, trail, tl, sz):
    if arr_id == _IMG:
        img[idx] = val
    elif arr_id == _PRE:
        pre[idx] = val
    elif arr_id == _NIMG:
        nimg[F, idx] = val
    elif arr_id == _NREV:
        nrev[F, idx] = val
    else:
        nlab[F, idx] = val
    trail[tl[0]] = (arr_id * 2 + F) * sz + idx
    tl[0] += 1


@njit(cache=True)
def _undo(mark, img, pre, nimg, nrev, nlab, trail, tl, free, sz):
    while tl[0] > mark:
        tl[0] -= 1
        code = trail[tl[0]]
        idx = code % sz
        rest = code // sz
        F = rest % 2
        arr_id = rest // 2
        if arr_id == _IMG:
            img[idx] = -1
            free[0] += 1
        elif arr_id == _PRE:
            pre[idx] = -1
        elif arr_id == _NIMG:
            nimg[F, idx] = -1
        elif arr_id == _NREV:
            nrev[F, idx] = -1
        else:
            nlab[F, idx] = -1


@njit(cache=True)
def _assign(a0, b0, p, pos, pt, anc, digit, tree_of, height_of, node_start, children,
            img, pre, nimg, nrev, nlab, trail, tl, free, queue, sz):
    queue[0, 0] = a0
    queue[0, 1] = b0
    qn = 1
    while qn > 0:
        qn -= 1
        a = queue[qn, 0]
        b = queue[qn, 1]
        cur = img[a]
        if cur == b:
            continue
        if cur != -1 or pre[b] != -1:
            return False
        _set(_IMG, 0, a, b, img, pre, nimg, nrev, nlab, trail, tl, sz)
        _set(_PRE, 0, b, a, img, pre, nimg, nrev, nlab, trail, tl, sz)
        free[0] -= 1
        for F in range(2):
            u = pos[F, a]
            v = pos[F, b]
            if tree_of[u] != tree_of[v]:
                return False
            for h in range(1, height_of[u] + 1):
                nu = anc[h, u]
                nv = anc[h, v]
                c = (digit[h, v] - digit[h, u]) % p
                ci = nimg[F, nu]
                if ci != nv:
                    if ci != -1 or nrev[F, nv] != -1:
                        return False
                    _set(_NIMG, F, nu, nv, img, pre, nimg, nrev, nlab, trail, tl, sz)
                    _set(_NREV, F, nv, nu, img, pre, nimg, nrev, nlab, trail, tl, sz)
                lab = nlab[F, nu]
                if lab == c:
                    break
                if lab != -1:
                    return False
                _set(_NLAB, F, nu, c, img, pre, nimg, nrev, nlab, trail, tl, sz)
                if h == 1:
                    s0 = node_start[nu]
                    s1 = node_start[nv]
                    for d in range(p):
                        queue[qn, 0] = pt[F, s0 + d]
                        queue[qn, 1] = pt[F, s1 + (d + c) % p]
                        qn += 1
                else:
                    for d in range(p):
                        cs = children[nu, d]
                        cd = children[nv, (d + c) % p]
                        cc = nimg[F, cs]
                        if cc != cd:
                            if cc != -1 or nrev[F, cd] != -1:
                                return False
                            _set(_NIMG, F, cs, cd, img, pre, nimg, nrev, nlab, trail, tl, sz)
                            _set(_NREV, F, cd, cs, img, pre, nimg, nrev, nlab, trail, tl, sz)
    return True


@njit(cache=True)
def _range(F, a, pos, anc, height_of, node_start, pw, nimg):
    u = pos[F, a]
    for h in range(1, height_of[u] + 1):
        t = nimg[F, anc[h, u]]
        if t != -1:
            s = node_start[t]
            return s, s + pw[h]
    return u, u + 1


@njit(cache=True)
def _domain(a, out, pos, pt, anc, height_of, node_start, pw, nimg, pre, sig):
    s0, e0 = _range(0, a, pos, anc, height_of, node_start, pw, nimg)
    s1, e1 = _range(1, a, pos, anc, height_of, node_start, pw, nimg)
    k = 0
    if e0 - s0 <= e1 - s1:
        for q in range(s0, e0):
            b = pt[0, q]
            if pre[b] == -1 and sig[b] == sig[a] and s1 <= pos[1, b] < e1:
                out[k] = b
                k += 1
    else:
        for q in range(s1, e1):
            b = pt[1, q]
            if pre[b] == -1 and sig[b] == sig[a] and s0 <= pos[0, b] < e0:
                out[k] = b
                k += 1
    return k


@njit(cache=True)
def _bound(a, pos, anc, height_of, node_start, pw, nimg):
    s0, e0 = _range(0, a, pos, anc, height_of, node_start, pw, nimg)
    s1, e1 = _range(1, a, pos, anc, height_of, node_start, pw, nimg)
    return min(e0 - s0, e1 - s1)


@njit(cache=True)
def _signatures(n, pos, anc, tree_of, nn, useful, cnt, key0, key1, sig, cls, order):
    """Invariant colour of each point under P ∩ P^x.

    Both placements' block systems are preserved by the intersection, so the
    sizes |B_h(a) ∩ B'_h'(a)| over all level pairs must agree between a point and
    its image.  Points whose hashes differ can never be swapped.  ``cls`` gets the
    number of points sharing each hash.
    """
    H = anc.shape[0]
    K = nn + n
    sig[:] = 0
    if cnt.shape[0] >= K * K:
        for h in range(1, H + 1):
            if not useful[h]:
                continue
            for a in range(n):
                u = pos[0, a]
                key0[a] = anc[h, u] if h < H and anc[h, u] != -1 else nn + tree_of[u]
            for h2 in range(1, H + 1):
                if not useful[h2]:
                    continue
                for a in range(n):
                    v = pos[1, a]
                    k1 = anc[h2, v] if h2 < H and anc[h2, v] != -1 else nn + tree_of[v]
                    key1[a] = key0[a] * K + k1
                    cnt[key1[a]] += 1
                for a in range(n):
                    sig[a] = sig[a] * 1000003 + cnt[key1[a]]
                for a in range(n):
                    cnt[key1[a]] = 0
    order[:] = np.argsort(sig)
    i = 0
    while i < n:
        j = i
        while j < n and sig[order[j]] == sig[order[i]]:
            j += 1
        for t in range(i, j):
            cls[order[t]] = j - i
        i = j


@njit(cache=True)
def nontrivial_batch(X, p, anc, digit, tree_of, height_of, node_start, children, roots, pw):
    """For each row x of X: does P ∩ P^x contain a non-identity element?"""
    N, n = X.shape
    nn = node_start.shape[0]
    sz = max(n, nn) + 1
    out = np.zeros(N, dtype=np.bool_)
    pos = np.empty((2, n), dtype=np.int64)
    pt = np.empty((2, n), dtype=np.int64)
    img = np.empty(n, dtype=np.int64)
    pre = np.empty(n, dtype=np.int64)
    nimg = np.empty((2, nn), dtype=np.int64)
    nrev = np.empty((2, nn), dtype=np.int64)
    nlab = np.empty((2, nn), dtype=np.int64)
    trail = np.empty(4 * n + 12 * nn + 16, dtype=np.int64)
    tl = np.zeros(1, dtype=np.int64)
    free = np.zeros(1, dtype=np.int64)
    queue = np.empty((2 * n + 2 * p + 2, 2), dtype=np.int64)
    dom = np.empty((n + 1, n), dtype=np.int64)
    dlen = np.empty(n + 1, dtype=np.int64)
    dpos = np.empty(n + 1, dtype=np.int64)
    fa = np.empty(n + 1, dtype=np.int64)
    fmark = np.empty(n + 1, dtype=np.int64)
    K = nn + n
    cnt = np.zeros(K * K if K * K <= 4_000_000 else 0, dtype=np.int64)
    key0 = np.empty(n, dtype=np.int64)
    key1 = np.empty(n, dtype=np.int64)
    sig = np.empty(n, dtype=np.int64)
    cls = np.empty(n, dtype=np.int64)
    order = np.empty(n, dtype=np.int64)
    # a level whose blocks are a single set carries no information
    H = anc.shape[0]
    useful = np.zeros(H + 1, dtype=np.bool_)
    for h in range(1, H + 1):
        first = -2
        for a in range(n):
            b = anc[h, a] if h < H and anc[h, a] != -1 else nn + tree_of[a]
            if first == -2:
                first = b
            elif b != first:
                useful[h] = True
                break
    for r in range(N):
        for i in range(n):
            pos[0, i] = i
            pt[0, i] = i
            pos[1, i] = X[r, i]
            pt[1, X[r, i]] = i
        img[:] = -1
        pre[:] = -1
        nimg[:] = -1
        nrev[:] = -1
        nlab[:] = -1
        tl[0] = 0
        free[0] = n
        for F in range(2):
            for t in range(roots.shape[0]):
                nimg[F, roots[t]] = roots[t]
                nrev[F, roots[t]] = roots[t]
        for F in range(2):
            for a in range(n):
                if height_of[pos[F, a]] == 0 and img[a] == -1:
                    _assign(a, a, p, pos, pt, anc, digit, tree_of, height_of, node_start, children,
                            img, pre, nimg, nrev, nlab, trail, tl, free, queue, sz)
        tl[0] = 0  # the base state is never undone
        _signatures(n, pos, anc, tree_of, nn, useful, cnt, key0, key1, sig, cls, order)
        found = False
        while not found:
            # unassigned point with the fewest candidates (any order is correct)
            best = -1
            bb = n + 1
            for a in range(n):
                if img[a] == -1:
                    bd = min(cls[a], _bound(a, pos, anc, height_of, node_start, pw, nimg))
                    if bd < bb:
                        bb = bd
                        best = a
                        if bd <= p:
                            break
            blen = 0
            if best != -1:
                blen = _domain(best, dom[0], pos, pt, anc, height_of, node_start, pw, nimg, pre, sig)
            if best == -1:
                break
            a0 = best
            for j in range(blen):
                b0 = dom[0, j]
                if b0 == a0:
                    continue
                mark = tl[0]
                ok = _assign(a0, b0, p, pos, pt, anc, digit, tree_of, height_of, node_start, children,
                             img, pre, nimg, nrev, nlab, trail, tl, free, queue, sz)
                if ok:
                    # depth-first search for any completion
                    if free[0] == 0:
                        found = True
                    else:
                        depth = 1
                        fmark[1] = tl[0]
                        fa[1], dlen[1] = _pick(n, p, img, dom, 1, pos, pt, anc, height_of, node_start, pw, nimg, pre, sig)
                        dpos[1] = 0
                        while depth >= 1:
                            _undo(fmark[depth], img, pre, nimg, nrev, nlab, trail, tl, free, sz)
                            if dpos[depth] >= dlen[depth]:
                                depth -= 1
                                continue
                            b = dom[depth, dpos[depth]]
                            dpos[depth] += 1
                            if _assign(fa[depth], b, p, pos, pt, anc, digit, tree_of, height_of, node_start,
                                       children, img, pre, nimg, nrev, nlab, trail, tl, free, queue, sz):
                                if free[0] == 0:
                                    found = True
                                    break
                                depth += 1
                                fmark[depth] = tl[0]
                                fa[depth], dlen[depth] = _pick(n, p, img, dom, depth, pos, pt, anc, height_of,
                                                               node_start, pw, nimg, pre, sig)
                                dpos[depth] = 0
                    if found:
                        break
                _undo(mark, img, pre, nimg, nrev, nlab, trail, tl, free, sz)
            if found:
                break
            _assign(a0, a0, p, pos, pt, anc, digit, tree_of, height_of, node_start, children,
                    img, pre, nimg, nrev, nlab, trail, tl, free, queue, sz)
            tl[0] = 0
        out[r] = found
    return out


@njit(cache=True)
def _pick(n, p, img, dom, depth, pos, pt, anc, height_of, node_start, pw, nimg, pre, sig):
    best = -1
    bb = n + 1
    for a in range(n):
        if img[a] == -1:
            bd = _bound(a, pos, anc, height_of, node_start, pw, nimg)
            if bd < bb:
                bb = bd
                best = a
                if bd <= p:
                    break
    k = _domain(best, dom[depth], pos, pt, anc, height_of, node_start, pw, nimg, pre, sig)
    return best, k
