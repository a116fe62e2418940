"""Monte Carlo side: f(n,p), the matching statistic W, the Burnside sampler, giant test."""

from __future__ import annotations

import math
import time
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import _kernels
from .doublecoset import _starts_table, double_coset_key
from .intersect import IntersectionGroup, intersection_group, nontrivial, nontrivial_many
from .parallel import run_chunks
from .perm import DegreeMismatch, Permutation, compose, inverse, make_rng, random_uniform
from .stats import wilson_interval
from .sylow import BudgetExceeded, build_sylow, closure, normalizer_generators


@dataclass(frozen=True)
class EstimateReport:
    n: int
    p: int | None
    samples: int
    seed: int
    hits: int
    elapsed: float = field(default=0.0, compare=False)

    @property
    def p_hat(self) -> float:
        return self.hits / self.samples if self.samples else 0.0

    @property
    def ci95(self) -> tuple[float, float]:
        return wilson_interval(self.hits, self.samples)

    @property
    def stderr(self) -> float:
        q = self.p_hat
        return math.sqrt(q * (1 - q) / self.samples) if self.samples else 0.0

    def to_json_obj(self, timing: bool = False) -> dict:
        out = {"n": self.n, "p": self.p, "samples": self.samples, "seed": self.seed, "hits": self.hits,
               "p_hat": self.p_hat, "ci95": list(self.ci95)}
        if timing:
            out["elapsed"] = self.elapsed
        return out


def separated(a: EstimateReport, b: EstimateReport, sigmas: float = 3.0) -> bool:
    """a.p_hat exceeds b.p_hat by more than ``sigmas`` combined standard errors."""
    return a.p_hat - b.p_hat > sigmas * math.hypot(a.stderr, b.stderr)


# ----------------------------------------------------------------- f(n, p)

@lru_cache(maxsize=None)
def _sylow(n: int, p: int):
    return build_sylow(n, p)


def uniform_rows(n: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """``size`` independent uniform permutations of range(n), one per row."""
    return rng.permuted(np.tile(np.arange(n, dtype=np.int64), (size, 1)), axis=1)


def _f_chunk(chunk: int, size: int, seed: int, n: int, p: int) -> int:
    X = uniform_rows(n, size, make_rng(seed, chunk))
    return int(nontrivial_many(_sylow(n, p), X).sum())


def f_chunk_reference(chunk: int, size: int, seed: int, n: int, p: int) -> int:
    """Same draws as the compiled chunk, decided by the pure-Python search."""
    S = _sylow(n, p)
    X = uniform_rows(n, size, make_rng(seed, chunk))
    return sum(nontrivial(S, Permutation(tuple(int(v) for v in row))) for row in X)


def estimate_f(n: int, p: int, samples: int, seed: int = 0, threads: int | None = None) -> EstimateReport:
    """Share of uniform x in S_n with P ∩ P^x != 1."""
    t0 = time.perf_counter()
    if p > n:
        hits = 0
    else:
        hits = sum(run_chunks(_f_chunk, samples, seed, (n, p), threads=threads))
    return EstimateReport(n=n, p=p, samples=samples, seed=seed, hits=hits, elapsed=time.perf_counter() - t0)


def exact_f(n: int, p: int) -> float:
    """f(n,p) by scanning all of S_n (n <= 8)."""
    import itertools

    if math.factorial(n) > 10**5:
        raise BudgetExceeded("exact f needs n <= 8")
    S = build_sylow(n, p)
    hits = sum(nontrivial(S, Permutation(t)) for t in itertools.permutations(range(n)))
    return hits / math.factorial(n)


@lru_cache(maxsize=None)
def _normalizer_elements(n: int, p: int) -> np.ndarray:
    S = build_sylow(n, p)
    return np.array(sorted(closure(normalizer_generators(S), n, limit=10**6)), dtype=np.int64)


def sylow_representative(n: int, p: int, x: Permutation) -> Permutation:
    """Lexicographically least element of N(P)x; it names the subgroup P^x."""
    N = _normalizer_elements(n, p)
    rows = N[:, np.asarray(x.images)]
    best = rows[np.lexsort(rows.T[::-1])[0]]
    return Permutation(tuple(int(v) for v in best))


def _model2_chunk(chunk: int, size: int, seed: int, n: int, p: int) -> int:
    X = uniform_rows(n, size, make_rng(seed, 1 << 20, chunk))
    N = _normalizer_elements(n, p)
    reps = np.empty_like(X)
    for i, x in enumerate(X):
        rows = N[:, x]
        reps[i] = rows[np.lexsort(rows.T[::-1])[0]]
    return int(nontrivial_many(_sylow(n, p), reps).sum())


@dataclass(frozen=True)
class ModelComparison:
    uniform_element: EstimateReport
    uniform_subgroup: EstimateReport

    @property
    def agree(self) -> bool:
        a, b = self.uniform_element.ci95, self.uniform_subgroup.ci95
        return a[0] <= b[1] and b[0] <= a[1]


def check_model_equivalence(n: int, p: int, samples: int, seed: int = 0,
                            threads: int | None = None) -> ModelComparison:
    """f under a uniform element x versus a uniform Sylow subgroup P^x.

    The subgroup is drawn as a uniform x reduced to its N(P)-coset
    representative, so each Sylow subgroup appears with equal weight.
    """
    a = estimate_f(n, p, samples, seed, threads)
    hits = 0 if p > n else sum(run_chunks(_model2_chunk, samples, seed, (n, p), threads=threads))
    b = EstimateReport(n=n, p=p, samples=samples, seed=seed, hits=hits)
    return ModelComparison(a, b)


# ----------------------------------------------------------------- matching statistic

@dataclass(frozen=True)
class MatchingSample:
    n: int
    W: int


def _check_even(n: int) -> None:
    if n % 2 or n < 2:
        raise ValueError(f"n must be even and positive, got {n}")


def matching_count(g: np.ndarray) -> np.ndarray:
    """W per row: blocks {2i, 2i+1} whose image is again a block."""
    img = g // 2
    return (img[..., 0::2] == img[..., 1::2]).sum(axis=-1)


def matching_statistic(n: int, rng: np.random.Generator) -> MatchingSample:
    _check_even(n)
    g = random_uniform(n, rng).as_array()
    return MatchingSample(n=n, W=int(matching_count(g)))


def _w_chunk(chunk: int, size: int, seed: int, n: int) -> np.ndarray:
    rng = make_rng(seed, chunk)
    g = rng.permuted(np.tile(np.arange(n), (size, 1)), axis=1)
    return np.bincount(matching_count(g), minlength=n // 2 + 1)


def w_distribution(n: int, samples: int, seed: int = 0, threads: int | None = None) -> np.ndarray:
    """Histogram of W over ``samples`` uniform permutations."""
    _check_even(n)
    parts = run_chunks(_w_chunk, samples, seed, (n,), threads=threads)
    return np.sum(parts, axis=0) if parts else np.zeros(n // 2 + 1, dtype=np.int64)


def estimate_w_positive(n: int, samples: int, seed: int = 0, threads: int | None = None) -> EstimateReport:
    t0 = time.perf_counter()
    hist = w_distribution(n, samples, seed, threads)
    hits = int(samples - hist[0])
    return EstimateReport(n=n, p=2, samples=samples, seed=seed, hits=hits, elapsed=time.perf_counter() - t0)


def exact_w_positive(n: int) -> float:
    import itertools

    _check_even(n)
    all_g = np.array(list(itertools.permutations(range(n))))
    return float((matching_count(all_g) > 0).mean())


def w_positive_series(n: int) -> Fraction:
    """Pr(W > 0) by inclusion-exclusion over j blocks that all land on blocks."""
    _check_even(n)
    m = n // 2
    total = sum((-1) ** (j + 1) * math.comb(m, j) * math.perm(m, j) * 2**j * math.factorial(n - 2 * j)
                for j in range(1, m + 1))
    return Fraction(total, math.factorial(n))


def poisson_tv(hist: np.ndarray, lam: float = 0.5) -> float:
    """Total variation between an empirical histogram and Poisson(lam)."""
    from scipy.stats import poisson

    emp = hist / hist.sum()
    ks = np.arange(len(emp))
    pmf = poisson.pmf(ks, lam)
    return 0.5 * (np.abs(emp - pmf).sum() + poisson.sf(len(emp) - 1, lam))


# ----------------------------------------------------------------- Burnside process

def centralizer_element(h: Permutation, rng: np.random.Generator) -> Permutation:
    """Uniform element of C(h): shuffle equal-length cycles, rotate each cycle."""
    by_len: dict[int, list[tuple[int, ...]]] = {}
    for c in h.cycles(include_fixed=True):
        by_len.setdefault(len(c), []).append(c)
    img = [0] * h.n
    for L in sorted(by_len):
        cyc = by_len[L]
        perm = rng.permutation(len(cyc))
        for i, c in enumerate(cyc):
            d = cyc[int(perm[i])]
            r = int(rng.integers(L))
            for j in range(L):
                img[c[j]] = d[(j + r) % L]
    return Permutation(tuple(img))


def burnside_step(S, x: Permutation, rng: np.random.Generator,
                  group: IntersectionGroup | None = None) -> Permutation:
    """One step for the action (h, k).g = h g k^-1 of P x P on S_n.

    The stabiliser of x is {(h, x^-1 h x) : h in P ∩ x P x^-1}; the next state
    is uniform among g with h g = g k, i.e. in C(h) x.
    """
    if group is None:
        group = intersection_group(S, inverse(x))
    h = group.random_element(rng)
    return compose(centralizer_element(h, rng), x)


@dataclass
class BurnsideRun:
    n: int
    p: int
    steps: int
    seed: int
    visits: Counter
    thin: int = 1
    thinned: Counter = field(default_factory=Counter)

    def frequencies(self) -> list[tuple[str, int]]:
        return sorted((" ".join(str(v + 1) for v in k), c) for k, c in self.visits.items())

    def to_json_obj(self) -> dict:
        return {"n": self.n, "p": self.p, "steps": self.steps, "seed": self.seed,
                "classes_visited": len(self.visits), "thin": self.thin,
                "visits": [{"key": k, "count": c} for k, c in self.frequencies()]}


def run_burnside(n: int, p: int, steps: int, seed: int = 0, start: Permutation | None = None,
                 thin: int = 16) -> BurnsideRun:
    """Run the chain and count visits per double coset (keyed by its least element).

    ``visits`` counts every state; ``thinned`` counts every ``thin``-th state.
    Consecutive states are correlated (a step from a small double coset mostly
    stays put), so goodness-of-fit tests should use the thinned counts.
    The stabiliser group and the double-coset key depend only on the left coset
    xP, so both are cached by the coset's canonical representative.
    """
    S = build_sylow(n, p)
    rng = make_rng(seed)
    starts, nstarts = _starts_table(S)
    groups: dict[tuple, IntersectionGroup] = {}
    keys: dict[tuple, tuple] = {}
    visits: Counter = Counter()
    thinned: Counter = Counter()

    def coset_of(g: Permutation) -> tuple:
        v = np.asarray(g.images, dtype=np.int64)
        left = tuple(_kernels.canonicalize_rows(v[None, :], starts, nstarts, p)[0].tolist())
        if left not in groups:
            groups[left] = intersection_group(S, inverse(g))
            keys[left] = double_coset_key(S, g).images
        return left

    x = start or Permutation.identity(n)
    left = coset_of(x)
    for i in range(steps):
        x = burnside_step(S, x, rng, groups[left])
        left = coset_of(x)
        visits[keys[left]] += 1
        if (i + 1) % thin == 0:
            thinned[keys[left]] += 1
    return BurnsideRun(n=n, p=p, steps=steps, seed=seed, visits=visits, thin=thin, thinned=thinned)


def burnside_chisquare(run: BurnsideRun, classes: int, thinned: bool = True) -> float:
    """p-value of the uniformity test over ``classes`` double cosets."""
    from scipy.stats import chisquare

    counts = run.thinned if thinned else run.visits
    obs = list(counts.values()) + [0] * (classes - len(counts))
    return float(chisquare(obs).pvalue)


# ----------------------------------------------------------------- giant test

class GiantVerdict(Enum):
    GIANT = "Giant"
    NOT_GIANT = "NotGiant"
    UNKNOWN = "Unknown"


@dataclass(frozen=True)
class GiantResult:
    verdict: GiantVerdict
    reason: str


def _orbit(gens: list[tuple[int, ...]], n: int, a: int = 0) -> set[int]:
    seen = {a}
    stack = [a]
    while stack:
        b = stack.pop()
        for g in gens:
            c = g[b]
            if c not in seen:
                seen.add(c)
                stack.append(c)
    return seen


def minimal_block(gens: list[tuple[int, ...]], n: int, b: int) -> list[int]:
    """Smallest block of imprimitivity containing 0 and b (union-find closure)."""
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    queue = [(0, b)]
    parent[find(b)] = find(0)
    while queue:
        a, c = queue.pop()
        for g in gens:
            ra, rc = find(g[a]), find(g[c])
            if ra != rc:
                parent[rc] = ra
                queue.append((g[a], g[c]))
    r0 = find(0)
    return [a for a in range(n) if find(a) == r0]


def _is_prime(q: int) -> bool:
    return q >= 2 and all(q % d for d in range(2, math.isqrt(q) + 1))


def _jordan_prime(g: tuple[int, ...], n: int) -> int | None:
    """A prime cycle length q of g with n/2 < q < n-2, if any."""
    seen = [False] * n
    for i in range(n):
        if seen[i]:
            continue
        L = 0
        j = i
        while not seen[j]:
            seen[j] = True
            j = g[j]
            L += 1
        if n / 2 < L < n - 2 and _is_prime(L):
            return L
    return None


def giant_test(gens, rng: np.random.Generator, rounds: int = 200, closure_limit: int = 10**5) -> GiantResult:
    """Decide whether <gens> contains A_n, with certificates for both answers.

    Giant: transitive, primitive, and some element has a cycle of prime length q
    with n/2 < q < n-2 (a power of it is then a q-cycle; Jordan's theorem).
    NotGiant: intransitive, imprimitive, or a complete closure smaller than n!/2.
    """
    gens = list(gens)
    if not gens:
        raise ValueError("need at least one generator")
    n = gens[0].n
    if any(g.n != n for g in gens):
        raise DegreeMismatch("generators have different degrees")
    if n < 8:
        raise ValueError("giant test needs n >= 8")
    gi = [g.images for g in gens]
    if len(_orbit(gi, n)) < n:
        return GiantResult(GiantVerdict.NOT_GIANT, "intransitive")
    for b in range(1, n):
        blk = minimal_block(gi, n, b)
        if len(blk) < n:
            return GiantResult(GiantVerdict.NOT_GIANT, f"block system with block size {len(blk)}")
    # product replacement
    state = [gi[i % len(gi)] for i in range(max(10, len(gi)))]
    acc = tuple(range(n))

    def step():
        nonlocal acc
        i, j = (int(v) for v in rng.choice(len(state), size=2, replace=False))
        a, b = state[i], state[j]
        if rng.random() < 0.5:
            b = tuple(inverse(Permutation(b)).images)
        state[i] = tuple(a[v] for v in b) if rng.random() < 0.5 else tuple(b[v] for v in a)
        acc = tuple(acc[v] for v in state[i])
        return acc

    for _ in range(50):
        step()
    for _ in range(rounds):
        q = _jordan_prime(step(), n)
        if q is not None:
            return GiantResult(GiantVerdict.GIANT, f"primitive with an element of prime cycle length {q}")
    try:
        size = len(closure(gens, n, limit=closure_limit))
    except BudgetExceeded:
        return GiantResult(GiantVerdict.UNKNOWN, f"no certificate after {rounds} random elements")
    if 2 * size < math.factorial(n):
        return GiantResult(GiantVerdict.NOT_GIANT, f"closure has only {size} elements")
    return GiantResult(GiantVerdict.GIANT, "closure contains A_n")
