"""Exact computation of P ∩ P^x by constraint propagation.

P is the automorphism group of the labelled forest of ``SylowStructure``; P^x
(= x^-1 P x) is the automorphism group of the same forest with point ``a`` placed
at position ``x(a)``.  An element of the intersection is a point map that is a
forest automorphism in both placements.  Fixing one image a -> b determines, in
each forest, the label of every ancestor of a; a label on a height-1 node fixes
p point images, and those cascade through the other forest.  Branching picks the
unassigned point with the fewest candidate images.

This never enumerates P, so it works far beyond the enumeration budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .perm import DegreeMismatch, Permutation, compose
from .sylow import SylowStructure, contains


class _Forest:
    """Position-space tables shared by both placements."""

    def __init__(self, S: SylowStructure):
        n, p = S.n, S.p
        self.n, self.p = n, p
        anc = S.ancestors
        self.hmax = anc.shape[0] - 1
        self.anc = [anc[h].tolist() for h in range(self.hmax + 1)]
        self.tree_of = list(S.tree_of)
        self.height_of = [S.trees[t].height for t in S.tree_of]
        local = [a - S.trees[S.tree_of[a]].offset for a in range(n)]
        self.digit = [[0] * n] + [[(local[a] // p ** (h - 1)) % p for a in range(n)] for h in range(1, self.hmax + 1)]
        nodes = S.nodes
        self.nnodes = len(nodes)
        self.node_h = [nd.height for nd in nodes]
        self.node_start = [nd.start for nd in nodes]
        # children: node ids for h >= 2, start positions for h == 1 (leaves follow)
        idx = S.node_index
        self.children = []
        for nd in nodes:
            if nd.height == 1:
                self.children.append(None)
            else:
                step = p ** (nd.height - 1)
                self.children.append([idx[(nd.height - 1, nd.start + d * step)] for d in range(p)])
        self.roots = [idx[(t.height, t.offset)] for t in S.trees if t.height > 0]


@dataclass
class _State:
    img: list
    pre: list
    nimg: list  # per placement: node -> node
    nrev: list
    nlab: list
    free: int

    def copy(self) -> _State:
        return _State(self.img[:], self.pre[:], [self.nimg[0][:], self.nimg[1][:]],
                      [self.nrev[0][:], self.nrev[1][:]], [self.nlab[0][:], self.nlab[1][:]], self.free)


class IntersectionSearch:
    def __init__(self, S: SylowStructure, x: Permutation):
        if x.n != S.n:
            raise DegreeMismatch(f"degree mismatch: {x.n} vs {S.n}")
        self.S = S
        self.x = x
        self.f = _Forest(S)
        n = S.n
        xinv = [0] * n
        for a, v in enumerate(x.images):
            xinv[v] = a
        self.pos = [list(range(n)), list(x.images)]
        self.pt = [list(range(n)), xinv]
        self.nodes_visited = 0

    # -- state -----------------------------------------------------------------

    def initial(self) -> _State:
        f = self.f
        nn = f.nnodes
        nimg = [[-1] * nn, [-1] * nn]
        nrev = [[-1] * nn, [-1] * nn]
        for F in (0, 1):
            for r in f.roots:
                nimg[F][r] = r
                nrev[F][r] = r
        st = _State([-1] * f.n, [-1] * f.n, nimg, nrev, [[-1] * nn, [-1] * nn], f.n)
        # points outside every tree (height 0) are fixed by both groups
        for a in range(f.n):
            if f.height_of[self.pos[0][a]] == 0 and st.img[a] < 0:
                if not self.assign(st, a, a):
                    raise AssertionError("identity must be consistent")
        for a in range(f.n):
            if f.height_of[self.pos[1][a]] == 0 and st.img[a] < 0:
                if not self.assign(st, a, a):
                    raise AssertionError("identity must be consistent")
        return st

    def assign(self, st: _State, a: int, b: int) -> bool:
        """Set a -> b and propagate; False on contradiction (state then garbage)."""
        f = self.f
        p = f.p
        anc, digit, tree_of, height_of = f.anc, f.digit, f.tree_of, f.height_of
        node_start, children = f.node_start, f.children
        pos, pt = self.pos, self.pt
        img, pre = st.img, st.pre
        queue = [(a, b)]
        while queue:
            a, b = queue.pop()
            cur = img[a]
            if cur == b:
                continue
            if cur != -1 or pre[b] != -1:
                return False
            img[a] = b
            pre[b] = a
            st.free -= 1
            for F in (0, 1):
                u = pos[F][a]
                v = pos[F][b]
                if tree_of[u] != tree_of[v]:
                    return False
                nimg, nrev, nlab = st.nimg[F], st.nrev[F], st.nlab[F]
                ptF = pt[F]
                for h in range(1, height_of[u] + 1):
                    nu = anc[h][u]
                    nv = anc[h][v]
                    c = (digit[h][v] - digit[h][u]) % p
                    ci = nimg[nu]
                    if ci != nv:
                        if ci != -1 or nrev[nv] != -1:
                            return False
                        nimg[nu] = nv
                        nrev[nv] = nu
                    lab = nlab[nu]
                    if lab == c:
                        break  # ancestors were set by an earlier point of this node
                    if lab != -1:
                        return False
                    nlab[nu] = c
                    if h == 1:
                        s0, s1 = node_start[nu], node_start[nv]
                        for d in range(p):
                            queue.append((ptF[s0 + d], ptF[s1 + (d + c) % p]))
                    else:
                        csrc, cdst = children[nu], children[nv]
                        for d in range(p):
                            cs, cd = csrc[d], cdst[(d + c) % p]
                            cc = nimg[cs]
                            if cc != cd:
                                if cc != -1 or nrev[cd] != -1:
                                    return False
                                nimg[cs] = cd
                                nrev[cd] = cs
        return True

    # -- domains -----------------------------------------------------------------

    def _target_range(self, st: _State, F: int, a: int) -> tuple[int, int]:
        f = self.f
        u = self.pos[F][a]
        nimg = st.nimg[F]
        for h in range(1, f.height_of[u] + 1):
            t = nimg[f.anc[h][u]]
            if t != -1:
                s = f.node_start[t]
                return s, s + f.p**h
        raise AssertionError("root image must be known")

    def domain(self, st: _State, a: int) -> list[int]:
        s1, e1 = self._target_range(st, 0, a)
        s2, e2 = self._target_range(st, 1, a)
        pre = st.pre
        if e1 - s1 <= e2 - s2:
            x = self.pos[1]
            return [b for b in range(s1, e1) if pre[b] == -1 and s2 <= x[b] < e2]
        xinv = self.pt[1]
        out = [xinv[q] for q in range(s2, e2) if pre[xinv[q]] == -1 and s1 <= xinv[q] < e1]
        out.sort()
        return out

    def _bound(self, st: _State, a: int) -> int:
        s1, e1 = self._target_range(st, 0, a)
        s2, e2 = self._target_range(st, 1, a)
        return min(e1 - s1, e2 - s2)

    def _pick(self, st: _State) -> tuple[int, list[int]] | None:
        best = None
        bb = None
        img = st.img
        for a in range(self.f.n):
            if img[a] == -1:
                bd = self._bound(st, a)
                if bb is None or bd < bb:
                    bb, best = bd, a
                    if bd <= self.f.p:
                        break
        if best is None:
            return None
        return best, self.domain(st, best)

    # -- search ------------------------------------------------------------------

    def solutions(self, st: _State):
        """Yield every completion of ``st`` (already propagated) as an image list."""
        self.nodes_visited += 1
        if st.free == 0:
            yield list(st.img)
            return
        a, dom = self._pick(st)
        for b in dom:
            st2 = st.copy()
            if self.assign(st2, a, b):
                yield from self.solutions(st2)

    def first_solution(self, st: _State) -> list[int] | None:
        return next(self.solutions(st), None)

    def _next_point(self, st: _State) -> tuple[int, list[int]] | None:
        """Unassigned point with the smallest domain (for stabilizer-chain sweeps)."""
        best, bdom = None, None
        for a in range(self.f.n):
            if st.img[a] != -1:
                continue
            if bdom is not None and self._bound(st, a) >= len(bdom):
                continue
            dom = self.domain(st, a)
            if bdom is None or len(dom) < len(bdom):
                best, bdom = a, dom
                if len(dom) <= 1:
                    break
        return None if best is None else (best, bdom)

    def nontrivial(self) -> bool:
        if self.S.m == 0:
            return False
        st = self.initial()
        while True:
            nxt = self._next_point(st)
            if nxt is None:
                return False
            a, dom = nxt
            for b in dom:
                if b == a:
                    continue
                st2 = st.copy()
                if self.assign(st2, a, b) and self.first_solution(st2) is not None:
                    return True
            if not self.assign(st, a, a):
                raise AssertionError("identity must be consistent")

    def chain(self) -> list[tuple[int, dict[int, tuple[int, ...]]]]:
        """Base points with transversals of R = P ∩ P^x (orbits of length > 1 only)."""
        levels = []
        if self.S.m == 0:
            return levels
        st = self.initial()
        while True:
            nxt = self._next_point(st)
            if nxt is None:
                return levels
            a, dom = nxt
            orbit = {a: tuple(range(self.f.n))}
            for b in dom:
                if b == a:
                    continue
                st2 = st.copy()
                if self.assign(st2, a, b):
                    sol = self.first_solution(st2)
                    if sol is not None:
                        orbit[b] = tuple(sol)
            if len(orbit) > 1:
                levels.append((a, orbit))
            if not self.assign(st, a, a):
                raise AssertionError("identity must be consistent")


@dataclass
class IntersectionGroup:
    """P ∩ P^x described by a stabilizer chain found by the forest search."""

    n: int
    levels: list[tuple[int, dict[int, tuple[int, ...]]]]

    @property
    def order(self) -> int:
        return math.prod(len(orb) for _, orb in self.levels)

    def random_element(self, rng: np.random.Generator) -> Permutation:
        g = list(range(self.n))
        for _, orb in self.levels:
            keys = sorted(orb)
            u = orb[keys[int(rng.integers(len(keys)))]]
            g = [g[v] for v in u]  # g <- g * u
        return Permutation(tuple(g))

    def generators(self) -> list[Permutation]:
        out = []
        for _, orb in self.levels:
            for b, u in sorted(orb.items()):
                if any(i != v for i, v in enumerate(u)):
                    out.append(Permutation(u))
        return out


def nontrivial(S: SylowStructure, x: Permutation) -> bool:
    """Whether P ∩ P^x contains a non-identity element."""
    return IntersectionSearch(S, x).nontrivial()


def intersection_group(S: SylowStructure, x: Permutation) -> IntersectionGroup:
    return IntersectionGroup(S.n, IntersectionSearch(S, x).chain())


def search_intersection_order(S: SylowStructure, x: Permutation) -> int:
    return intersection_group(S, x).order


def verify_element(S: SylowStructure, x: Permutation, g: Permutation) -> bool:
    """g in P and x g x^-1 in P."""
    from .perm import inverse

    return contains(S, g) and contains(S, compose(x, compose(g, inverse(x))))


def _kernel_tables(S: SylowStructure) -> tuple:
    cached = getattr(S, "_nontrivial_tables", None)
    if cached is not None:
        return cached
    f = _Forest(S)
    p = f.p
    i64 = np.int64
    children = np.full((max(f.nnodes, 1), p), -1, dtype=i64)
    for i, ch in enumerate(f.children):
        if ch is not None:
            children[i] = ch
    tables = (
        p,
        np.asarray(S.ancestors, dtype=i64),
        np.asarray(f.digit, dtype=i64),
        np.asarray(f.tree_of, dtype=i64),
        np.asarray(f.height_of, dtype=i64),
        np.asarray(f.node_start if f.nnodes else [0], dtype=i64),
        children,
        np.asarray(f.roots, dtype=i64),
        np.asarray([p**h for h in range(f.hmax + 1)], dtype=i64),
    )
    object.__setattr__(S, "_nontrivial_tables", tables)
    return tables


def nontrivial_many(S: SylowStructure, X: np.ndarray) -> np.ndarray:
    """Compiled ``nontrivial`` for every row of X (0-based image arrays)."""
    from . import _kernels

    X = np.ascontiguousarray(X, dtype=np.int64)
    if X.ndim != 2 or X.shape[1] != S.n:
        raise DegreeMismatch(f"expected rows of length {S.n}")
    if S.m == 0:
        return np.zeros(X.shape[0], dtype=bool)
    return _kernels.nontrivial_batch(X, *_kernel_tables(S))
