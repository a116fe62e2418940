"""(P, P)-double cosets of S_n: canonical coset keys, census, class formula.

Left cosets gP are the unit of work.  P acts on them by left multiplication and
the orbit of gP is exactly the set of left cosets inside PgP, so an orbit of
size p^k is one double coset of size p^(m+k).
"""

from __future__ import annotations

import csv
import io
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import _kernels
from .intersect import search_intersection_order
from .parallel import run_chunks
from .perm import Permutation, make_rng, random_uniform
from .sylow import (
    BudgetExceeded,
    ENUMERATION_LIMIT,
    StabilizerChain,
    SylowStructure,
    build_sylow,
    iter_element_blocks,
    normalizer_index,
    profile,
)
from .stats import wilson_interval

COSET_SPACE_LIMIT = 10**8


@dataclass(frozen=True)
class CensusTable:
    n: int
    p: int
    m: int
    counts: dict[int, int]
    method: str = "exhaustive"

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def mass(self) -> int:
        return sum(c * self.p ** (self.m + k) for k, c in self.counts.items())

    def mass_ok(self) -> bool:
        return self.mass() == math.factorial(self.n)

    def row(self) -> list[int]:
        return [self.counts.get(k, 0) for k in range(self.m + 1)]

    def to_json_obj(self) -> dict:
        return {
            "n": self.n,
            "p": self.p,
            "m": self.m,
            "method": self.method,
            "counts": [{"k": k, "count": str(self.counts.get(k, 0))} for k in range(self.m + 1)],
            "total": str(self.total),
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "size_exponent", "count"])
        for k in range(self.m + 1):
            w.writerow([k, self.m + k, self.counts.get(k, 0)])
        return buf.getvalue()

    @classmethod
    def from_json_obj(cls, obj: dict) -> CensusTable:
        counts = {int(c["k"]): int(c["count"]) for c in obj["counts"]}
        return cls(n=obj["n"], p=obj["p"], m=obj["m"], counts=counts, method=obj["method"])


@dataclass(frozen=True)
class SampledCensus:
    n: int
    p: int
    m: int
    samples: int
    seed: int
    hits: dict[int, int]
    mass: dict[int, float] = field(init=False)
    ci95: dict[int, tuple[float, float]] = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "mass", {k: self.hits.get(k, 0) / self.samples for k in range(self.m + 1)})
        object.__setattr__(self, "ci95", {k: wilson_interval(self.hits.get(k, 0), self.samples)
                                          for k in range(self.m + 1)})

    def stderr(self, k: int) -> float:
        q = self.mass[k]
        return math.sqrt(max(q * (1 - q), 1e-300) / self.samples)

    def to_json_obj(self) -> dict:
        return {
            "n": self.n,
            "p": self.p,
            "m": self.m,
            "method": "sampled",
            "samples": self.samples,
            "seed": self.seed,
            "mass": [{"k": k, "hits": self.hits.get(k, 0), "mass": self.mass[k], "ci95": list(self.ci95[k])}
                     for k in range(self.m + 1)],
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "size_exponent", "hits", "mass", "ci_lo", "ci_hi"])
        for k in range(self.m + 1):
            lo, hi = self.ci95[k]
            w.writerow([k, self.m + k, self.hits.get(k, 0), repr(self.mass[k]), repr(lo), repr(hi)])
        return buf.getvalue()


def exact_mass(table: CensusTable) -> dict[int, Fraction]:
    nf = math.factorial(table.n)
    return {k: Fraction(c * table.p ** (table.m + k), nf) for k, c in table.counts.items()}


# ----------------------------------------------------------------- canonical reps

def canonical_coset_rep(chain: StabilizerChain, g: Permutation) -> Permutation:
    """Lexicographically least image array in the left coset gP (chain greedy)."""
    cur = list(g.images)
    for lv in chain.levels:
        if len(lv.transversal) == 1:
            continue
        best = min(lv.transversal, key=lambda j: cur[j])
        u = lv.transversal[best]
        cur = [cur[j] for j in u]
    return Permutation(tuple(cur))


def _starts_table(S: SylowStructure) -> tuple[np.ndarray, np.ndarray]:
    hmax = max((t.height for t in S.trees), default=0)
    by_h = [[] for _ in range(hmax + 1)]
    for nd in S.nodes:
        by_h[nd.height].append(nd.start)
    width = max((len(b) for b in by_h), default=0) or 1
    starts = np.zeros((hmax + 1, width), dtype=np.int64)
    nstarts = np.zeros(hmax + 1, dtype=np.int64)
    for h, b in enumerate(by_h):
        b.sort()
        starts[h, :len(b)] = b
        nstarts[h] = len(b)
    return starts, nstarts


def structural_coset_rep(S: SylowStructure, g: Permutation) -> Permutation:
    """Same result as ``canonical_coset_rep`` via rotation of forest children."""
    starts, nstarts = _starts_table(S)
    v = np.asarray(g.images, dtype=np.int64)
    out = _kernels.canonicalize_rows(v[None, :], starts, nstarts, S.p)[0]
    return Permutation(tuple(int(a) for a in out))


def double_coset_key(S: SylowStructure, x: Permutation, limit: int = 2**16) -> Permutation:
    """Least image array in PxP: min over h in P of the canonical rep of h*x."""
    starts, nstarts = _starts_table(S)
    xa = np.asarray(x.images, dtype=np.int64)
    best = None
    for E in iter_element_blocks(S, limit=limit):
        rows = _kernels.canonicalize_rows(E[:, xa], starts, nstarts, S.p)
        cand = rows[np.lexsort(rows.T[::-1])[0]]
        t = tuple(int(a) for a in cand)
        if best is None or t < best:
            best = t
    return Permutation(best)


# ----------------------------------------------------------------- census

def coset_count(n: int, p: int) -> int:
    return math.factorial(n) // p ** profile(n, p).m


def estimate_census_bytes(n: int, p: int) -> int:
    cosets = coset_count(n, p)
    cap = 1 << max(4, (2 * cosets - 1).bit_length())
    return cosets * 8 * 3 + cap * 8


def census_exhaustive(n: int, p: int, coset_space_limit: int = COSET_SPACE_LIMIT,
                      threads: int | None = None) -> CensusTable:
    """Exact double-coset census by BFS over the left cosets of P.

    ``threads`` is accepted for interface symmetry; the compiled kernel runs on
    one thread and the result never depends on it.
    """
    S = build_sylow(n, p)
    cosets = math.factorial(n) // S.order
    if cosets > coset_space_limit:
        raise BudgetExceeded(
            f"census of S_{n} at p={p} needs {cosets} cosets (> limit {coset_space_limit}); "
            f"estimated memory {estimate_census_bytes(n, p) / 2**30:.1f} GiB")
    if n > 16:
        raise BudgetExceeded(f"packed coset keys support n <= 16, got n={n}")
    starts, nstarts = _starts_table(S)
    cap = 1 << max(4, (2 * cosets - 1).bit_length())
    keys, found = _kernels.bfs_cosets(n, p, starts, nstarts, cosets, cap)
    if found != cosets:
        raise AssertionError(f"coset BFS found {found} cosets, expected {cosets}")
    keys = np.sort(keys[:found])
    gens = np.array([g.images for g in S.generators], dtype=np.int64).reshape(len(S.generators), n)
    raw = _kernels.orbit_census(keys, n, p, S.m, starts, nstarts, gens)
    if raw[0] < 0:
        raise AssertionError("orbit census failed: " + ("orbit size not a p-power" if raw[0] == -1
                                                         else "generator left the coset set"))
    table = CensusTable(n=n, p=p, m=S.m, counts={k: int(c) for k, c in enumerate(raw)}, method="exhaustive")
    if not table.mass_ok():
        raise AssertionError("mass identity failed")
    return table


SCAN_ORDER_LIMIT = 2**12


def sampled_orders(S: SylowStructure, X: np.ndarray) -> np.ndarray:
    """|P ∩ P^x| per row: compiled scan of P when it is small, else the forest search."""
    if S.order <= SCAN_ORDER_LIMIT:
        starts, nstarts = _starts_table(S)
        E = np.concatenate(list(iter_element_blocks(S)))
        tree_of = np.asarray(S.tree_of, dtype=np.int64)
        blk = np.full(S.n, -1, dtype=np.int64)
        for nd in S.nodes:
            if nd.height == 1:
                blk[nd.start:nd.start + S.p] = nd.start
        return _kernels.intersection_orders(np.ascontiguousarray(X, dtype=np.int64), E, starts, nstarts, S.p,
                                            tree_of, blk)
    return np.array([search_intersection_order(S, Permutation(tuple(int(v) for v in row))) for row in X],
                    dtype=np.int64)


def _sampled_chunk(chunk: int, size: int, seed: int, n: int, p: int) -> list[int]:
    S = build_sylow(n, p)
    rng = make_rng(seed, chunk)
    X = np.array([random_uniform(n, rng).images for _ in range(size)], dtype=np.int64).reshape(size, n)
    hits = [0] * (S.m + 1)
    for order in sampled_orders(S, X).tolist():
        e = round(math.log(order, p)) if S.m else 0
        hits[S.m - e] += 1
    return hits


def census_sampled(n: int, p: int, samples: int, seed: int = 0, threads: int | None = None) -> SampledCensus:
    """Estimate the share of S_n lying in double cosets of each size."""
    S = build_sylow(n, p)
    parts = run_chunks(_sampled_chunk, samples, seed, (n, p), threads=threads)
    hits = [sum(col) for col in zip(*parts)] if parts else [0] * (S.m + 1)
    return SampledCensus(n=n, p=p, m=S.m, samples=samples, seed=seed, hits=dict(enumerate(hits)))


# ----------------------------------------------------------------- class formula

def p_class_counts(S: SylowStructure, limit: int = ENUMERATION_LIMIT) -> Counter:
    """|C ∩ P| for every cycle type C met in P (keys: tuples of (length, mult))."""
    out: Counter = Counter()
    for E in iter_element_blocks(S, limit=limit):
        lens = _kernels.cycle_counts(E)
        uniq, cnt = np.unique(lens, axis=0, return_counts=True)
        for row, c in zip(uniq.tolist(), cnt.tolist()):
            out[tuple((j, mj) for j, mj in enumerate(row) if mj and j)] += c
    return out


def total_via_classes(n: int, p: int, limit: int = ENUMERATION_LIMIT) -> int:
    """|P\\S_n/P| = (n!/|P|^2) sum_C |C ∩ P|^2 / |C|, with |C| = n!/z_C."""
    S = build_sylow(n, p)
    acc = Fraction(0)
    for parts, c in p_class_counts(S, limit=limit).items():
        z = 1
        for j, mj in parts:
            z *= j**mj * math.factorial(mj)
        acc += Fraction(c * c * z)
    total = acc / S.order**2
    if total.denominator != 1:
        raise ArithmeticError(f"class formula gave a non-integer {total}")
    return int(total)


# ----------------------------------------------------------------- Sylow pair counts d(p^k)

@dataclass(frozen=True)
class PairCountReport:
    n: int
    p: int
    sylow_count: int
    d: dict[int, int]
    predicted: dict[int, int]
    census: dict[int, int]
    divisible: bool

    @property
    def ok(self) -> bool:
        return self.divisible and all(self.predicted.get(k, 0) == self.census.get(k, 0)
                                      for k in set(self.predicted) | set(self.census))


def enumerate_sylow_subgroups(S: SylowStructure, limit: int = 10**7) -> list[tuple[Permutation, np.ndarray]]:
    """Every Sylow p-subgroup as (t, sorted packed elements of P^t), by BFS.

    Conjugating by adjacent transpositions reaches all of Syl_p(S_n); the t's
    form a transversal of N(P) in S_n.
    """
    n = S.n
    if n > 16:
        raise BudgetExceeded("packed element keys support n <= 16")
    expected = math.factorial(n) // (S.order * normalizer_index(S.profile))
    if expected > limit:
        raise BudgetExceeded(f"{expected} Sylow subgroups exceed limit {limit}")
    E = np.concatenate(list(iter_element_blocks(S)))
    shifts = (4 * np.arange(n - 1, -1, -1)).astype(np.uint64)

    def key_of(rows: np.ndarray) -> np.ndarray:
        packed = (rows.astype(np.uint64) << shifts).sum(axis=1, dtype=np.uint64)
        return np.sort(packed)

    ident = Permutation.identity(n)
    k0 = key_of(E)
    seen = {k0.tobytes(): (ident, k0)}
    queue = [(ident, E)]
    head = 0
    while head < len(queue):
        t, rows = queue[head]
        head += 1
        for i in range(n - 1):
            s = list(range(n))
            s[i], s[i + 1] = i + 1, i
            s = np.asarray(s)
            # (P^t)^s = s^-1 (P^t) s; s is an involution
            new_rows = s[rows[:, s]]
            key = key_of(new_rows)
            kb = key.tobytes()
            if kb not in seen:
                t2 = Permutation(tuple(int(a) for a in np.asarray(t.images)[s]))
                seen[kb] = (t2, key)
                queue.append((t2, new_rows))
    if len(seen) != expected:
        raise AssertionError(f"found {len(seen)} Sylow subgroups, expected {expected}")
    return list(seen.values())


def verify_pair_counts(n: int, p: int, census: CensusTable | None = None) -> PairCountReport:
    S = build_sylow(n, p)
    subs = enumerate_sylow_subgroups(S)
    base = subs[0][1]
    d: Counter = Counter()
    for _, key in subs:
        common = np.intersect1d(base, key, assume_unique=True).shape[0]
        e = round(math.log(common, p)) if S.m else 0
        d[S.m - e] += 1
    census = census or census_exhaustive(n, p)
    idx = normalizer_index(S.profile)
    predicted = {}
    divisible = True
    for k, dk in d.items():
        if dk % p**k:
            divisible = False
        predicted[k] = dk * idx // p**k
    return PairCountReport(n=n, p=p, sylow_count=len(subs), d=dict(sorted(d.items())),
                        predicted=dict(sorted(predicted.items())),
                        census={k: c for k, c in census.counts.items() if c}, divisible=divisible)


def double_coset_size(S: SylowStructure, x: Permutation) -> int:
    return S.order**2 // search_intersection_order(S, x)

