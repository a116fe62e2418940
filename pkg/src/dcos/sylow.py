"""The standard Sylow p-subgroup P_n of S_n.

Layout: for each p-adic digit a_i of n there are a_i trees of height i; trees are
placed on consecutive points in decreasing height.  Inside a tree of height j a
point has local coordinate t in [0, p^j) with base-p digits d_0..d_{j-1}.  An
internal node is an aligned block of width p^h (1 <= h <= j); its children are the
p sub-blocks distinguished by digit d_{h-1}.

Every element of P_n is described by one label c in Z_p per internal node: it
sends digit d_{h-1} to d_{h-1} + c(node), where ``node`` is the height-h block
containing the *source* point.  Reading the labels as mixed-radix digits gives the
bijection ``element_by_index``/``index_of`` with index 0 the identity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .perm import DegreeMismatch, Permutation, compose, inverse

ENUMERATION_LIMIT = 2**26


class BudgetExceeded(RuntimeError):
    """Raised when a requested computation exceeds its configured budget."""


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p < 4:
        return True
    if p % 2 == 0:
        return False
    return all(p % q for q in range(3, math.isqrt(p) + 1, 2))


@dataclass(frozen=True)
class PAdicProfile:
    n: int
    p: int
    digits: tuple[int, ...]
    m: int
    digit_sum: int

    @property
    def order(self) -> int:
        return self.p**self.m

    def digit(self, i: int) -> int:
        return self.digits[i] if 0 <= i < len(self.digits) else 0


def profile(n: int, p: int) -> PAdicProfile:
    if not is_prime(p):
        raise ValueError(f"p={p} is not prime")
    if n < 1:
        raise ValueError("n must be >= 1")
    digits = []
    r = n
    while r:
        digits.append(r % p)
        r //= p
    d = sum(digits)
    m_legendre = 0
    q = p
    while q <= n:
        m_legendre += n // q
        q *= p
    m_digits, rem = divmod(n - d, p - 1)
    assert rem == 0 and m_digits == m_legendre, "Legendre formulas disagree"
    return PAdicProfile(n=n, p=p, digits=tuple(digits), m=m_legendre, digit_sum=d)


def normalizer_index(prof: PAdicProfile) -> int:
    """|N_{S_n}(P_n) : P_n| = prod_i (p-1)^(i a_i) a_i!."""
    out = 1
    for i, a in enumerate(prof.digits):
        out *= (prof.p - 1) ** (i * a) * math.factorial(a)
    return out


@dataclass(frozen=True)
class Tree:
    height: int
    offset: int
    width: int


@dataclass(frozen=True)
class Node:
    height: int
    start: int  # first point (0-based) of the aligned block
    tree: int


@dataclass(frozen=True, eq=False)
class SylowStructure:
    profile: PAdicProfile
    trees: tuple[Tree, ...]
    nodes: tuple[Node, ...]  # internal nodes, ordered by (tree, height desc, start)
    generators: tuple[Permutation, ...]
    tree_of: tuple[int, ...] = field(repr=False)  # point -> tree index

    @property
    def n(self) -> int:
        return self.profile.n

    @property
    def p(self) -> int:
        return self.profile.p

    @property
    def m(self) -> int:
        return self.profile.m

    @property
    def order(self) -> int:
        return self.profile.p**self.profile.m

    @cached_property
    def node_index(self) -> dict[tuple[int, int], int]:
        return {(nd.height, nd.start): i for i, nd in enumerate(self.nodes)}

    @cached_property
    def ancestors(self) -> np.ndarray:
        """anc[h, a] = index of the height-h node containing point a, or -1."""
        hmax = max((t.height for t in self.trees), default=0)
        anc = -np.ones((hmax + 1, self.n), dtype=np.int64)
        idx = self.node_index
        for t in self.trees:
            for h in range(1, t.height + 1):
                w = self.p**h
                for a in range(t.offset, t.offset + t.width):
                    anc[h, a] = idx[(h, t.offset + ((a - t.offset) // w) * w)]
        return anc

    @cached_property
    def _label_tables(self):
        # For vectorised decoding: per height h, the node column and digit weight.
        return _label_tables(self)

    def digit(self, a: int, h: int) -> int:
        """Digit d_{h-1} of point a inside its tree."""
        t = self.trees[self.tree_of[a]]
        return ((a - t.offset) // self.p ** (h - 1)) % self.p

    def apply_labels(self, labels) -> Permutation:
        return Permutation(tuple(int(v) for v in _apply_labels(self, np.asarray(labels)[None, :])[0]))


def build_sylow(n: int, p: int) -> SylowStructure:
    prof = profile(n, p)
    trees = []
    off = 0
    for h in range(len(prof.digits) - 1, -1, -1):
        for _ in range(prof.digits[h]):
            trees.append(Tree(height=h, offset=off, width=p**h))
            off += p**h
    assert off == n
    tree_of = [0] * n
    for ti, t in enumerate(trees):
        for a in range(t.offset, t.offset + t.width):
            tree_of[a] = ti
    nodes = []
    for ti, t in enumerate(trees):
        for h in range(t.height, 0, -1):
            w = p**h
            for s in range(t.offset, t.offset + t.width, w):
                nodes.append(Node(height=h, start=s, tree=ti))
    assert len(nodes) == prof.m
    gens = []
    for nd in sorted(nodes, key=lambda nd: (nd.tree, nd.height, nd.start)):
        img = list(range(n))
        w, step = p**nd.height, p ** (nd.height - 1)
        for a in range(nd.start, nd.start + w):
            img[a] = nd.start + (a - nd.start + step) % w
        gens.append(Permutation(tuple(img)))
    return SylowStructure(profile=prof, trees=tuple(trees), nodes=tuple(nodes),
                          generators=tuple(gens), tree_of=tuple(tree_of))


def _label_tables(S: SylowStructure):
    hmax = S.ancestors.shape[0] - 1
    anc = S.ancestors
    n, p = S.n, S.p
    local = np.zeros(n, dtype=np.int64)
    for t in S.trees:
        local[t.offset:t.offset + t.width] = np.arange(t.width)
    start = np.array([t_off for t_off in (S.trees[S.tree_of[a]].offset for a in range(n))], dtype=np.int64)
    return hmax, anc, local, start


def _apply_labels(S: SylowStructure, labels: np.ndarray) -> np.ndarray:
    """Images of every point for each row of a (N, m) label matrix."""
    hmax, anc, local, start = S._label_tables
    p = S.p
    N = labels.shape[0]
    out = np.broadcast_to(local, (N, S.n)).copy()
    for h in range(1, hmax + 1):
        col = anc[h]
        mask = col >= 0
        if not mask.any():
            continue
        w = p ** (h - 1)
        d = (local[mask] // w) % p
        c = labels[:, col[mask]]
        out[:, mask] += ((d + c) % p - d) * w
    return out + start


def _labels_of(S: SylowStructure, G: np.ndarray) -> np.ndarray:
    """Recover node labels of each row of G assuming rows lie in P."""
    p = S.p
    labels = np.zeros((G.shape[0], len(S.nodes)), dtype=np.int64)
    for i, nd in enumerate(S.nodes):
        t = S.trees[nd.tree]
        w = p ** (nd.height - 1)
        src = nd.start
        img = G[:, src] - t.offset
        labels[:, i] = ((img // w) % p - ((src - t.offset) // w) % p) % p
    return labels


def contains_many(S: SylowStructure, G: np.ndarray) -> np.ndarray:
    """Structural membership test for each row of G (0-based images)."""
    G = np.asarray(G, dtype=np.int64)
    if G.ndim == 1:
        G = G[None, :]
    if G.shape[1] != S.n:
        raise DegreeMismatch(f"degree mismatch: {G.shape[1]} vs {S.n}")
    if not S.nodes:
        return np.all(G == np.arange(S.n), axis=1)
    rebuilt = _apply_labels(S, _labels_of(S, G))
    return np.all(rebuilt == G, axis=1)


def contains(S: SylowStructure, g: Permutation) -> bool:
    if g.n != S.n:
        raise DegreeMismatch(f"degree mismatch: {g.n} vs {S.n}")
    return bool(contains_many(S, np.asarray(g.images))[0])


def _index_digits(S: SylowStructure, idx: np.ndarray) -> np.ndarray:
    m = len(S.nodes)
    labels = np.zeros((idx.shape[0], m), dtype=np.int64)
    r = idx.copy()
    for i in range(m):
        labels[:, i] = r % S.p
        r //= S.p
    return labels


def element_by_index(S: SylowStructure, idx: int) -> Permutation:
    if not 0 <= idx < S.order:
        raise IndexError(f"index {idx} outside [0, {S.order})")
    m = len(S.nodes)
    labels = np.zeros(m, dtype=np.int64)
    r = idx
    for i in range(m):
        r, labels[i] = divmod(r, S.p)
    return S.apply_labels(labels)


def index_of(S: SylowStructure, g: Permutation) -> int:
    if not contains(S, g):
        raise ValueError("permutation is not in P")
    labels = _labels_of(S, np.asarray(g.images, dtype=np.int64)[None, :])[0]
    idx = 0
    for c in reversed(labels.tolist()):
        idx = idx * S.p + int(c)
    return idx


def iter_element_blocks(S: SylowStructure, block: int = 1 << 15, limit: int = ENUMERATION_LIMIT):
    """Yield all elements of P as (k, n) arrays, in index order."""
    total = S.order
    if total > limit:
        raise BudgetExceeded(f"|P| = {S.p}^{S.m} exceeds enumeration limit {limit}")
    if S.p ** S.m > 2**62:
        raise BudgetExceeded("|P| too large to enumerate")
    for lo in range(0, total, block):
        idx = np.arange(lo, min(total, lo + block), dtype=np.int64)
        yield _apply_labels(S, _index_digits(S, idx))


def all_elements(S: SylowStructure, limit: int = 2**20) -> np.ndarray:
    return np.concatenate(list(iter_element_blocks(S, limit=limit)))


def central_element(S: SylowStructure) -> Permutation:
    """Label 1 at every height-1 node: the same p-cycle on each aligned p-block.

    This diagonal of the bottom base group is central in every wreath factor; the
    top-level shift i -> i + p^(j-1) is not once j >= 2.  Fixes exactly a_0 points.
    """
    if S.n < S.p:
        raise ValueError("n < p: P is trivial and has no element of order p")
    labels = np.zeros(len(S.nodes), dtype=np.int64)
    for i, nd in enumerate(S.nodes):
        if nd.height == 1:
            labels[i] = 1
    return S.apply_labels(labels)


def transporter(S: SylowStructure, a: int, b: int) -> Permutation:
    """An element of P sending a to b (same tree), with all unused labels 0."""
    if S.tree_of[a] != S.tree_of[b]:
        raise ValueError("points lie in different orbits of P")
    labels = np.zeros(len(S.nodes), dtype=np.int64)
    t = S.trees[S.tree_of[a]]
    for h in range(1, t.height + 1):
        node = S.ancestors[h, a]
        labels[node] = (S.digit(b, h) - S.digit(a, h)) % S.p
    return S.apply_labels(labels)


def intersection_order(S: SylowStructure, x: Permutation, limit: int = ENUMERATION_LIMIT) -> int:
    """|P ∩ P^x| = #{h in P : x h x^-1 in P}, by full enumeration of P."""
    if x.n != S.n:
        raise DegreeMismatch(f"degree mismatch: {x.n} vs {S.n}")
    xa = np.asarray(x.images, dtype=np.int64)
    xinv = np.asarray(inverse(x).images, dtype=np.int64)
    count = 0
    for E in iter_element_blocks(S, limit=limit):
        count += int(contains_many(S, xa[E[:, xinv]]).sum())
    return count


def intersection_nontrivial(S: SylowStructure, x: Permutation) -> bool:
    """Whether P ∩ P^x != 1 (exact; uses the forest search, see ``intersect``)."""
    from .intersect import nontrivial

    return nontrivial(S, x)


def normalizer_generators(S: SylowStructure) -> list[Permutation]:
    """Generators of N(P) = P x| (prod (C_{p-1})^j wr S_{a_j}).

    Besides P's generators: digit-wise multiplication by a primitive root at each
    level of each tree, and swaps of equal-height trees.
    """
    n, p = S.n, S.p
    gens = list(S.generators)
    if p > 2:
        g0 = _primitive_root(p)
        for t in S.trees:
            for h in range(1, t.height + 1):
                img = list(range(n))
                w = p ** (h - 1)
                for a in range(t.offset, t.offset + t.width):
                    loc = a - t.offset
                    d = (loc // w) % p
                    img[a] = t.offset + loc + ((d * g0) % p - d) * w
                gens.append(Permutation(tuple(img)))
    for t1, t2 in zip(S.trees, S.trees[1:]):
        if t1.height == t2.height:
            img = list(range(n))
            for i in range(t1.width):
                img[t1.offset + i] = t2.offset + i
                img[t2.offset + i] = t1.offset + i
            gens.append(Permutation(tuple(img)))
    return gens


def _primitive_root(p: int) -> int:
    phi = p - 1
    factors = {q for q in range(2, phi + 1) if phi % q == 0 and is_prime(q)}
    for g in range(2, p):
        if all(pow(g, phi // q, p) != 1 for q in factors):
            return g
    return 1


def closure(gens: list[Permutation], n: int, limit: int = 10**6) -> set[tuple[int, ...]]:
    """All elements of <gens>, by BFS; raises BudgetExceeded past ``limit``."""
    ident = tuple(range(n))
    seen = {ident}
    frontier = [ident]
    gi = [g.images for g in gens]
    while frontier:
        nxt = []
        for e in frontier:
            for g in gi:
                c = tuple(g[v] for v in e)
                if c not in seen:
                    seen.add(c)
                    nxt.append(c)
                    if len(seen) > limit:
                        raise BudgetExceeded(f"group closure exceeds {limit} elements")
        frontier = nxt
    return seen


# ---------------------------------------------------------------- stabilizer chain

@dataclass
class ChainLevel:
    base: int
    transversal: dict[int, tuple[int, ...]]  # orbit point b -> u with u(base) = b
    generators: list[tuple[int, ...]]


@dataclass
class StabilizerChain:
    n: int
    levels: list[ChainLevel]

    def order(self) -> int:
        return math.prod(len(lv.transversal) for lv in self.levels)

    def sift(self, g: Permutation) -> bool:
        cur = g.images
        for lv in self.levels:
            b = cur[lv.base]
            u = lv.transversal.get(b)
            if u is None:
                return False
            uinv = _inv(u)
            cur = tuple(uinv[v] for v in cur)
        return all(i == v for i, v in enumerate(cur))


def _inv(g: tuple[int, ...]) -> tuple[int, ...]:
    out = [0] * len(g)
    for i, v in enumerate(g):
        out[v] = i
    return tuple(out)


def _mul(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(a[j] for j in b)


def _orbit_transversal(base: int, gens: list[tuple[int, ...]], n: int) -> dict[int, tuple[int, ...]]:
    trans = {base: tuple(range(n))}
    queue = [base]
    for b in queue:
        u = trans[b]
        for g in gens:
            c = g[b]
            if c not in trans:
                trans[c] = _mul(g, u)
                queue.append(c)
    return trans


def build_chain(S: SylowStructure) -> StabilizerChain:
    """Deterministic Schreier-Sims on P's generators with base 0, 1, ..., n-1.

    Strong generators are kept in one list; level i uses those fixing 0..i-1.
    Schreier generators are sifted until a full pass adds nothing.
    """
    n = S.n
    ident = tuple(range(n))
    strong = [g.images for g in S.generators if not g.is_identity()]

    def fixes_prefix(g, i):
        return all(g[b] == b for b in range(i))

    while True:
        levels = []
        for i in range(n):
            gens = [g for g in strong if fixes_prefix(g, i)]
            levels.append(ChainLevel(base=i, transversal=_orbit_transversal(i, gens, n), generators=gens))
        residue = _first_failing_schreier(levels, n, ident)
        if residue is None:
            break
        strong.append(residue)
    chain = StabilizerChain(n=n, levels=levels)
    assert chain.order() == S.order, "stabilizer chain order mismatch"
    return chain


def _first_failing_schreier(levels, n, ident):
    for i, lv in enumerate(levels):
        for b, u in lv.transversal.items():
            for s in lv.generators:
                su = _mul(s, u)
                sch = _mul(_inv(lv.transversal[su[lv.base]]), su)
                if sch == ident:
                    continue
                g = sch
                for lw in levels[i + 1:]:
                    w = lw.transversal.get(g[lw.base])
                    if w is None:
                        break
                    winv = _inv(w)
                    g = tuple(winv[v] for v in g)
                if g != ident:
                    return g
    return None
