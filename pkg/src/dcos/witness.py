"""Permutations x with a prescribed Sylow intersection order |P ∩ P^x| = p^k.

Every construction is measured before it is returned: the recursive builders
only propose candidates, the exact intersection search decides.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .intersect import search_intersection_order
from .perm import Permutation, compose, format_cycles, random_uniform
from .sylow import BudgetExceeded, build_sylow, profile, transporter

EXCEPTIONS = frozenset({(2, 2, 0), (4, 2, 0), (4, 2, 1), (8, 2, 0), (3, 3, 0), (6, 3, 1)})
NO_TRIVIAL_PAIRS = frozenset({(2, 2), (4, 2), (8, 2), (3, 3)})
MAX_TRIES = 10**5
SMALL_N = 10


class WitnessImpossible(ValueError):
    """The requested intersection order provably does not occur."""


class SearchExhausted(RuntimeError):
    """A randomized search ran out of tries (not a proof of impossibility)."""


@dataclass(frozen=True)
class IntersectionWitness:
    n: int
    p: int
    k: int
    x: Permutation
    method: str
    verification: int
    note: str = ""

    @property
    def verified(self) -> bool:
        return self.verification == self.p**self.k

    def to_json_obj(self) -> dict:
        out = {"x": format_cycles(self.x), "k": self.k, "verified": self.verified, "method": self.method}
        if self.note:
            out["note"] = self.note
        return out


def exceptions() -> set[tuple[int, int, int]]:
    return set(EXCEPTIONS)


@lru_cache(maxsize=None)
def _sylow(n: int, p: int):
    return build_sylow(n, p)


def measure(n: int, p: int, x: Permutation) -> int:
    return search_intersection_order(_sylow(n, p), x)


def _witness(n, p, k, x, method, note="") -> IntersectionWitness:
    order = measure(n, p, x)
    w = IntersectionWitness(n=n, p=p, k=k, x=x, method=method, verification=order, note=note)
    if not w.verified:
        raise AssertionError(f"construction for {(n, p, k)} gave order {order}, wanted {p**k}")
    return w


def direct_sum(*parts: Permutation) -> Permutation:
    """Block-diagonal permutation acting as parts[i] on the i-th consecutive block."""
    out = []
    off = 0
    for g in parts:
        out.extend(off + v for v in g.images)
        off += g.n
    return Permutation(tuple(out))


def _candidate(n: int, rng: np.random.Generator) -> Permutation:
    """Uniform half of the time, else a short random product of transpositions.

    Short products stay close to P and so hit the large intersection orders
    that a uniform draw almost never reaches.
    """
    if rng.random() < 0.5:
        return random_uniform(n, rng)
    g = list(range(n))
    for _ in range(int(rng.integers(1, n + 1))):
        i, j = (int(v) for v in rng.choice(n, size=2, replace=False))
        g[i], g[j] = g[j], g[i]
    return Permutation(tuple(g))


def random_search(n: int, p: int, k: int, rng: np.random.Generator, max_tries: int = MAX_TRIES,
                  accept=None) -> IntersectionWitness:
    target = p**k
    S = _sylow(n, p)
    for _ in range(max_tries):
        x = _candidate(n, rng)
        if search_intersection_order(S, x) == target and (accept is None or accept(x)):
            return _witness(n, p, k, x, "random-search")
    raise SearchExhausted(f"no witness for (n,p,k)={(n, p, k)} in {max_tries} tries")


def find_trivial_intersection(n: int, p: int, rng: np.random.Generator,
                              max_tries: int = MAX_TRIES) -> IntersectionWitness:
    if (n, p) in NO_TRIVIAL_PAIRS:
        raise WitnessImpossible(f"provably impossible: every pair of Sylow {p}-subgroups of S_{n} meets nontrivially")
    S = _sylow(n, p)
    for _ in range(max_tries):
        x = random_uniform(n, rng)
        if search_intersection_order(S, x) == 1:
            return _witness(n, p, 0, x, "random-search")
    raise SearchExhausted(f"no trivial intersection for (n,p)={(n, p)} in {max_tries} tries")


def achievable(n: int, p: int, k: int) -> bool:
    return 0 <= k <= profile(n, p).m and (n, p, k) not in EXCEPTIONS


def construct_intersection(n: int, p: int, k: int, rng: np.random.Generator,
                           max_tries: int = MAX_TRIES) -> IntersectionWitness:
    m = profile(n, p).m
    if not 0 <= k <= m:
        raise ValueError(f"k={k} outside [0, {m}]")
    if (n, p, k) in EXCEPTIONS:
        raise WitnessImpossible(f"provably impossible: no two Sylow {p}-subgroups of S_{n} meet in order {p}^{k}")
    if k == m:
        return _witness(n, p, k, Permutation.identity(n), "constructed", "x = id")
    if k == 0:
        return find_trivial_intersection(n, p, rng, max_tries)
    if n <= SMALL_N:
        return random_search(n, p, k, rng, max_tries)
    q = 1
    while q * p <= n:
        q *= p
    if q == n:
        return _prime_power_case(n, p, k, rng, max_tries)
    return _split_case(n, q, p, k, rng, max_tries)


def _prime_power_case(n, p, k, rng, max_tries) -> IntersectionWitness:
    sub = n // p
    ms = profile(sub, p).m
    m = p * ms + 1
    if k == m - 1 and achievable(sub, p, ms - 1):
        # block permutation: the bottom level B is kept, the top levels meet in index p
        s = construct_intersection(sub, p, ms - 1, rng, max_tries).x
        x = Permutation(tuple(s.images[i // p] * p + i % p for i in range(n)))
        return _witness(n, p, k, x, "constructed", "lifted block permutation")
    for split in _splittings(k, p, sub, ms):
        parts = [construct_intersection(sub, p, ki, rng, max_tries).x for ki in split]
        x = direct_sum(*parts)
        return _witness(n, p, k, x, "constructed", "split " + "+".join(map(str, split)))
    return random_search(n, p, k, rng, max_tries)


def _splittings(k: int, p: int, sub: int, ms: int):
    """Lexicographically ordered (k_1..k_p), sum k, each achievable, k_1 != k_2."""
    ok = [ki for ki in range(ms + 1) if achievable(sub, p, ki)]
    for split in itertools.product(ok, repeat=p):
        if sum(split) == k and split[0] != split[1]:
            yield split


def _split_case(n, q, p, k, rng, max_tries) -> IntersectionWitness:
    n2 = n - q
    m1, m2 = profile(q, p).m, profile(n2, p).m
    for k1 in range(max(0, k - m2), min(k, m1) + 1):
        k2 = k - k1
        if achievable(q, p, k1) and achievable(n2, p, k2):
            x1 = construct_intersection(q, p, k1, rng, max_tries).x
            x2 = construct_intersection(n2, p, k2, rng, max_tries).x
            return _witness(n, p, k, direct_sum(x1, x2), "constructed", f"split {k1}+{k2}")
    if p == 2 and n2 == 4 and k == 1 and n >= 17:
        return _glued_pair(n, q, rng, max_tries)
    return random_search(n, p, k, rng, max_tries)


def _glued_pair(n: int, q: int, rng, max_tries) -> IntersectionWitness:
    """p=2, n = q + 4, order 2: a fixed-point-free order-2 pair on q+1 points plus 4 points.

    P = P_1 x P_2 with P_1 on [0, q) and P_2 on [q, q+4).  The pair x1 on [0, q]
    is adjusted inside P_1 so that P_1^x1 fixes q-1; the 4 points
    {q-1, q+1, q+2, q+3} are then sent onto [q, q+4) by one of 24 bijections.
    """
    ell = q.bit_length() - 1
    x1 = disjoint_fixed_pair(ell, rng, max_tries)
    f = x1.x.images.index(q)  # P_1^x1 fixes f
    S1 = _sylow(q + 1, 2)
    c = transporter(S1, q - 1, f)
    x1 = compose(x1.x, c)
    assert x1.images[q - 1] == q
    src = [q - 1, q + 1, q + 2, q + 3]
    for z in itertools.permutations(range(q, q + 4)):
        img = list(x1.images) + [0, 0, 0]
        for a, b in zip(src, z):
            img[a] = b
        x = Permutation(tuple(img))
        if measure(n, 2, x) == 2:
            return _witness(n, 2, 1, x, "constructed", "glued order-2 pair")
    raise AssertionError("no bijection of the 4-point block gives order 2")


def disjoint_fixed_pair(ell: int, rng: np.random.Generator, max_tries: int = MAX_TRIES) -> IntersectionWitness:
    """n = 2^ell + 1: x with |P ∩ P^x| = 2 where P and P^x share no fixed point.

    P fixes only the last point, P^x fixes x^-1 of it, so the second condition is
    x(n-1) != n-1.
    """
    if ell < 2:
        raise ValueError("need ell >= 2")
    n = 2**ell + 1
    last = n - 1
    if ell <= 4:
        return random_search(n, 2, 1, rng, max_tries, accept=lambda x: x.images[last] != last)
    half = 2 ** (ell - 1)
    v = disjoint_fixed_pair(ell - 1, rng, max_tries).x
    for _ in range(max_tries):
        u = find_trivial_intersection(half, 2, rng, max_tries).x
        x = direct_sum(u, v)
        if measure(n, 2, x) == 2 and x.images[last] != last:
            return _witness(n, 2, 1, x, "constructed", "trivial pair + recursive pair")
    raise SearchExhausted(f"recursive pair failed for ell={ell}")


def refute_exception(n: int, p: int, k: int, limit: int = 10**6) -> bool:
    """Exhaustive scan of S_n: True if no x has |P ∩ P^x| = p^k."""
    if math.factorial(n) > limit:
        raise BudgetExceeded(f"{n}! exceeds scan limit {limit}")
    S = _sylow(n, p)
    target = p**k
    for t in itertools.permutations(range(n)):
        if search_intersection_order(S, Permutation(t)) == target:
            return False
    return True
