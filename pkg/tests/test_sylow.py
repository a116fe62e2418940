import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dcos.perm import Permutation, compose, conjugate, inverse, make_rng, random_uniform
from dcos.sylow import (
    BudgetExceeded,
    all_elements,
    build_chain,
    build_sylow,
    central_element,
    closure,
    contains,
    contains_many,
    element_by_index,
    index_of,
    intersection_nontrivial,
    intersection_order,
    normalizer_generators,
    normalizer_index,
    profile,
)

PRIMES = [2, 3, 5, 7, 11]


def as_set(E):
    return {tuple(int(v) for v in row) for row in E}


@pytest.mark.parametrize("p", [2, 3, 5, 7])
def test_profile_square(p):
    assert profile(p * p, p).m == p + 1


def test_profile_examples():
    prof = profile(7, 2)
    assert prof.digits == (1, 1, 1)
    assert prof.digit_sum == 3
    assert prof.m == 4
    assert profile(4, 5).m == 0
    assert build_sylow(4, 5).order == 1
    with pytest.raises(ValueError):
        profile(10, 4)


@given(st.integers(1, 5000), st.sampled_from([2, 3, 5, 7, 11, 13]))
def test_profile_invariants(n, p):
    prof = profile(n, p)
    assert sum(a * p**i for i, a in enumerate(prof.digits)) == n
    assert all(0 <= a < p for a in prof.digits)
    assert prof.m == sum(n // p**a for a in range(1, 20))
    assert prof.m * (p - 1) == n - prof.digit_sum
    assert math.factorial(n) % p**prof.m == 0
    assert math.factorial(n) // p**prof.m % p != 0


def test_build_sylow_n4():
    S = build_sylow(4, 2)
    want = {Permutation.from_cycles(4, c) for c in ([(1, 2)], [(3, 4)], [(1, 3), (2, 4)])}
    assert set(S.generators) == want
    assert len(closure(list(S.generators), 4)) == 8


@pytest.mark.parametrize("p", [2, 3, 5, 7, 11])
def test_build_sylow_prime_degree(p):
    S = build_sylow(p, p)
    assert len(S.generators) == 1
    assert S.generators[0].cycles() == [tuple(range(p))]
    assert S.order == p


def test_build_sylow_6_3():
    S = build_sylow(6, 3)
    assert sorted(len(c) for g in S.generators for c in g.cycles()) == [3, 3]
    assert len(closure(list(S.generators), 6)) == 9


@pytest.mark.parametrize("n,p", [(n, p) for p in PRIMES for n in range(1, 13) if p**profile(n, p).m <= 2**14])
def test_generated_order_and_tree_support(n, p):
    S = build_sylow(n, p)
    assert len(closure(list(S.generators), n, limit=2**15)) == S.order
    assert sum(t.width for t in S.trees) == n
    heights = [t.height for t in S.trees]
    assert heights == sorted(heights, reverse=True)
    for t in S.trees:
        assert t.width == p**t.height
    for g in S.generators:
        assert g.order() == p
        moved = {a for c in g.cycles() for a in c}
        assert len({S.tree_of[a] for a in moved}) == 1


def test_tree_subgroup_orders():
    for p, j in [(2, 3), (3, 2), (5, 1)]:
        S = build_sylow(p**j, p)
        assert S.m == (p**j - 1) // (p - 1)


def test_normalizer_index_examples():
    for n in range(1, 30):
        assert normalizer_index(profile(n, 2)) == 1
    for p in PRIMES:
        assert normalizer_index(profile(p, p)) == p - 1
    assert normalizer_index(profile(6, 3)) == 8


@pytest.mark.parametrize("n,p", [(4, 2), (6, 2), (6, 3), (9, 3), (10, 5), (7, 7), (8, 3)])
def test_normalizer_index_by_enumeration(n, p):
    S = build_sylow(n, p)
    N = closure(normalizer_generators(S), n, limit=10**6)
    assert len(N) == S.order * normalizer_index(S.profile)
    E = all_elements(S)
    for g in normalizer_generators(S):
        ga, gi = np.asarray(g.images), np.asarray(inverse(g).images)
        assert contains_many(S, ga[E[:, gi]]).all()


def test_contains_examples():
    S = build_sylow(4, 2)
    assert contains(S, Permutation.identity(4))
    assert all(contains(S, g) for g in S.generators)
    assert not contains(S, Permutation.from_cycles(4, [(1, 2, 3)]))


@pytest.mark.parametrize("n,p", [(4, 2), (9, 3), (8, 2), (10, 5), (12, 3)])
def test_element_indexing_roundtrip(n, p):
    S = build_sylow(n, p)
    assert element_by_index(S, 0).is_identity()
    elems = [element_by_index(S, i) for i in range(S.order)]
    assert len(set(elems)) == S.order
    assert all(contains(S, g) for g in elems)
    assert all(index_of(S, g) == i for i, g in enumerate(elems))
    assert {g.images for g in elems} == closure(list(S.generators), n)
    with pytest.raises((ValueError, IndexError)):
        element_by_index(S, S.order)


@pytest.mark.parametrize("n,p", [(n, p) for p in PRIMES for n in range(p, 13) if p**profile(n, p).m <= 2**14])
def test_group_closed_under_products(n, p):
    S = build_sylow(n, p)
    E = all_elements(S)
    rng = make_rng(n, p)
    idx = rng.integers(0, len(E), size=(2000, 2)) if len(E) > 64 else np.array(list(itertools.product(range(len(E)), repeat=2)))
    prods = E[idx[:, 0]][np.arange(len(idx))[:, None], E[idx[:, 1]]]
    assert contains_many(S, prods).all()
    inv = np.argsort(E, axis=1)
    assert contains_many(S, inv).all()


@pytest.mark.parametrize("n,p", [(4, 2), (6, 2), (8, 2), (9, 3), (12, 2), (10, 5), (7, 7)])
def test_membership_three_ways(n, p):
    S = build_sylow(n, p)
    chain = build_chain(S)
    members = as_set(all_elements(S))
    for t in members:
        assert chain.sift(Permutation(t))
    assert contains_many(S, np.array(sorted(members))).all()
    rng = make_rng(3, n, p)
    tested = 0
    while tested < 2000:
        g = random_uniform(n, rng)
        if g.images in members:
            continue
        tested += 1
        assert not contains(S, g)
        assert not chain.sift(g)


def test_chain_examples():
    assert build_chain(build_sylow(4, 2)).order() == 8
    chain = build_chain(build_sylow(7, 7))
    assert sorted(len(lv.transversal) for lv in chain.levels if len(lv.transversal) > 1) == [7]
    assert build_chain(build_sylow(9, 3)).order() == 3**4


@pytest.mark.parametrize("n,p", [(n, p) for p in PRIMES for n in range(1, 13)])
def test_chain_order(n, p):
    S = build_sylow(n, p)
    chain = build_chain(S)
    assert chain.order() == S.order
    for i, lv in enumerate(chain.levels):
        assert all(all(g[b] == b for b in range(i)) for g in lv.generators)


def test_central_element_examples():
    S = build_sylow(7, 7)
    assert central_element(S) == S.generators[0]
    assert central_element(build_sylow(4, 2)) == Permutation.from_cycles(4, [(1, 2), (3, 4)])
    # the top-level shift does not commute with (1 2)
    shift = Permutation.from_cycles(4, [(1, 3), (2, 4)])
    t = Permutation.from_cycles(4, [(1, 2)])
    assert compose(shift, t) != compose(t, shift)
    z = central_element(build_sylow(6, 2))
    assert z == Permutation.from_cycles(6, [(1, 2), (3, 4), (5, 6)])
    assert not z.fixed_points()
    with pytest.raises(ValueError):
        central_element(build_sylow(3, 5))


@pytest.mark.parametrize("n,p", [(n, p) for p in PRIMES for n in range(p, 13) if p**profile(n, p).m <= 2**14])
def test_central_element_is_central(n, p):
    S = build_sylow(n, p)
    z = central_element(S)
    assert z.order() == p
    assert len(z.fixed_points()) == S.profile.digits[0] < p
    za = np.asarray(z.images)
    E = all_elements(S)
    assert (E[:, za] == za[E]).all()


def test_intersection_order_examples():
    S = build_sylow(6, 3)
    assert intersection_order(S, Permutation.identity(6)) == 9
    for g in normalizer_generators(S):
        assert intersection_order(S, g) == 9
    S3 = build_sylow(3, 3)
    assert min(intersection_order(S3, Permutation(t)) for t in itertools.permutations(range(3))) == 3


def test_intersection_order_budget():
    with pytest.raises(BudgetExceeded):
        intersection_order(build_sylow(32, 2), Permutation.identity(32), limit=2**20)


def test_nontrivial_examples():
    assert intersection_nontrivial(build_sylow(5, 2), Permutation.identity(5))
    S = build_sylow(4, 7)
    assert not any(intersection_nontrivial(S, Permutation(t)) for t in itertools.permutations(range(4)))


def test_nontrivial_everywhere_at_8_2():
    from dcos.intersect import nontrivial_many

    S = build_sylow(8, 2)
    X = np.array(list(itertools.permutations(range(8))), dtype=np.int64)
    assert nontrivial_many(S, X).all()


@pytest.mark.parametrize("n,p", [(12, 2), (12, 3), (10, 5), (11, 11), (9, 2)])
def test_nontrivial_agrees_with_order(n, p):
    S = build_sylow(n, p)
    rng = make_rng(17, n, p)
    for _ in range(2000):
        x = random_uniform(n, rng)
        assert intersection_nontrivial(S, x) == (intersection_order(S, x) > 1)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([(6, 2), (9, 3), (10, 2), (10, 5), (12, 3)]), st.integers(0, 2**32 - 1))
def test_intersection_order_normalizer_invariant(cfg, seed):
    n, p = cfg
    S = build_sylow(n, p)
    rng = make_rng(seed)
    x = random_uniform(n, rng)
    gens = normalizer_generators(S)
    g = gens[int(rng.integers(len(gens)))]
    order = intersection_order(S, x)
    assert intersection_order(S, compose(g, x)) == order
    assert S.order % order == 0
    # also equals the order computed for the conjugate pair from the other side
    assert intersection_order(S, inverse(x)) == order


def test_conjugate_membership_matches_definition():
    S = build_sylow(6, 2)
    rng = make_rng(4)
    x = random_uniform(6, rng)
    E = all_elements(S)
    direct = sum(contains(S, conjugate(Permutation(tuple(int(v) for v in h)), inverse(x))) for h in E)
    assert direct == intersection_order(S, x)
