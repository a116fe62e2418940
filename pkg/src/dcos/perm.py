"""Permutations of {1, ..., n}.

Externally points are 1-based (text formats, ``from_one_based``/``one_based``);
internally a :class:`Permutation` stores a 0-based image tuple.  ``compose(a, b)``
applies ``b`` first, so ``conjugate(g, x) = x^-1 g x`` satisfies
``conjugate(conjugate(g, x), y) == conjugate(g, compose(x, y))``.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

MAX_PACK_DEGREE = 16


class DegreeMismatch(ValueError):
    pass


@dataclass(frozen=True, slots=True)
class Permutation:
    images: tuple[int, ...]

    def __post_init__(self):
        imgs = self.images
        if not isinstance(imgs, tuple):
            object.__setattr__(self, "images", imgs := tuple(int(v) for v in imgs))
        if len(imgs) == 0:
            raise ValueError("degree must be positive")
        if sorted(imgs) != list(range(len(imgs))):
            raise ValueError(f"not a permutation of 0..{len(imgs) - 1}: {imgs}")

    @classmethod
    def identity(cls, n: int) -> Permutation:
        return cls(tuple(range(n)))

    @classmethod
    def from_one_based(cls, images: Iterable[int]) -> Permutation:
        return cls(tuple(int(v) - 1 for v in images))

    @classmethod
    def from_cycles(cls, n: int, cycles: Iterable[Sequence[int]]) -> Permutation:
        """Build from 1-based cycles, e.g. ``from_cycles(4, [(1, 2), (3, 4)])``."""
        img = list(range(n))
        seen = set()
        for cyc in cycles:
            pts = [int(c) - 1 for c in cyc]
            for a in pts:
                if not 0 <= a < n:
                    raise ValueError(f"point {a + 1} outside 1..{n}")
                if a in seen:
                    raise ValueError("cycles must be disjoint")
                seen.add(a)
            for i, a in enumerate(pts):
                img[a] = pts[(i + 1) % len(pts)]
        return cls(tuple(img))

    @property
    def n(self) -> int:
        return len(self.images)

    def __call__(self, i: int) -> int:
        return self.images[i]

    def __mul__(self, other: Permutation) -> Permutation:
        return compose(self, other)

    def __lt__(self, other: Permutation) -> bool:
        return self.images < other.images

    def one_based(self) -> list[int]:
        return [v + 1 for v in self.images]

    def is_identity(self) -> bool:
        return all(i == v for i, v in enumerate(self.images))

    def cycles(self, include_fixed: bool = False) -> list[tuple[int, ...]]:
        """Disjoint cycles as 0-based tuples, each starting at its least point."""
        seen = [False] * self.n
        out = []
        for i in range(self.n):
            if seen[i]:
                continue
            cyc = [i]
            seen[i] = True
            j = self.images[i]
            while j != i:
                seen[j] = True
                cyc.append(j)
                j = self.images[j]
            if len(cyc) > 1 or include_fixed:
                out.append(tuple(cyc))
        return out

    def order(self) -> int:
        return math.lcm(*(len(c) for c in self.cycles(include_fixed=True)))

    def fixed_points(self) -> list[int]:
        return [i for i, v in enumerate(self.images) if i == v]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.images, dtype=np.int64)

    def __str__(self) -> str:
        return format_images(self)


@dataclass(frozen=True, slots=True)
class CycleType:
    """Cycle-length multiplicities ``{j: m_j}``; zero multiplicities are omitted."""

    parts: tuple[tuple[int, int], ...]

    @classmethod
    def from_lengths(cls, lengths: Iterable[int]) -> CycleType:
        return cls(tuple(sorted(Counter(lengths).items())))

    @property
    def degree(self) -> int:
        return sum(j * m for j, m in self.parts)

    def as_dict(self) -> dict[int, int]:
        return dict(self.parts)

    def centralizer_order(self) -> int:
        """z = prod j^m_j * m_j!, the order of the centralizer of any element."""
        z = 1
        for j, m in self.parts:
            z *= j**m * math.factorial(m)
        return z

    def class_size(self) -> int:
        return math.factorial(self.degree) // self.centralizer_order()


def _check(a: Permutation, b: Permutation) -> None:
    if a.n != b.n:
        raise DegreeMismatch(f"degree mismatch: {a.n} vs {b.n}")


def compose(a: Permutation, b: Permutation) -> Permutation:
    """The product a*b, i.e. i -> a(b(i))."""
    _check(a, b)
    ai = a.images
    return Permutation(tuple(ai[j] for j in b.images))


def inverse(g: Permutation) -> Permutation:
    inv = [0] * g.n
    for i, v in enumerate(g.images):
        inv[v] = i
    return Permutation(tuple(inv))


def conjugate(g: Permutation, x: Permutation) -> Permutation:
    """x^-1 * g * x."""
    _check(g, x)
    return compose(inverse(x), compose(g, x))


def cycle_type(g: Permutation) -> CycleType:
    return CycleType.from_lengths(len(c) for c in g.cycles(include_fixed=True))


def random_uniform(n: int, rng: np.random.Generator) -> Permutation:
    """Uniform element of S_n (numpy's Fisher-Yates shuffle)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return Permutation(tuple(int(v) for v in rng.permutation(n)))


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """Philox counter-based generator for (seed, stream...).

    Distinct ``stream`` tuples give statistically independent sub-streams, so a
    computation split into fixed chunks is reproducible for any worker count.
    """
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(s) for s in stream))
    return np.random.Generator(np.random.Philox(ss))


def pack(g: Permutation) -> int:
    """4 bits per point, first image in the most significant nibble.

    Packing preserves lexicographic order of image arrays of a fixed degree.
    """
    if g.n > MAX_PACK_DEGREE:
        raise ValueError(f"pack supports degree <= {MAX_PACK_DEGREE}, got {g.n}")
    key = 0
    for v in g.images:
        key = (key << 4) | v
    return key


def unpack(key: int, n: int) -> Permutation:
    if n > MAX_PACK_DEGREE:
        raise ValueError(f"unpack supports degree <= {MAX_PACK_DEGREE}, got {n}")
    imgs = [(key >> (4 * (n - 1 - i))) & 0xF for i in range(n)]
    return Permutation(tuple(imgs))


_CYCLE_RE = re.compile(r"\(([^()]*)\)")


def parse(text: str, n: int | None = None) -> Permutation:
    """Parse an image list "2 3 1" or cycle notation "(1 2 3)(4 5)" (1-based).

    For cycle notation the degree defaults to the largest point mentioned.
    "()" is the identity and needs an explicit ``n``.
    """
    s = text.strip()
    if s.startswith("("):
        if _CYCLE_RE.sub("", s).strip():
            raise ValueError(f"malformed cycle notation: {text!r}")
        cycles = [tuple(int(t) for t in body.replace(",", " ").split()) for body in _CYCLE_RE.findall(s)]
        cycles = [c for c in cycles if c]
        top = max((max(c) for c in cycles), default=0)
        if n is None:
            if top == 0:
                raise ValueError("identity '()' needs an explicit degree")
            n = top
        elif top > n:
            raise ValueError(f"point {top} exceeds degree {n}")
        return Permutation.from_cycles(n, cycles)
    imgs = [int(t) for t in s.replace(",", " ").split()]
    if n is not None and len(imgs) != n:
        raise DegreeMismatch(f"expected {n} images, got {len(imgs)}")
    return Permutation.from_one_based(imgs)


def format_images(g: Permutation) -> str:
    return " ".join(str(v + 1) for v in g.images)


def format_cycles(g: Permutation) -> str:
    cyc = g.cycles()
    if not cyc:
        return "()"
    return "".join("(" + " ".join(str(a + 1) for a in c) + ")" for c in cyc)
