import math
from fractions import Fraction

import numpy as np
import pytest

from dcos.doublecoset import census_exhaustive
from dcos.intersect import nontrivial_many
from dcos.perm import Permutation, make_rng
from dcos.prob import (
    GiantVerdict,
    _f_chunk,
    burnside_chisquare,
    check_model_equivalence,
    estimate_f,
    estimate_w_positive,
    exact_f,
    exact_w_positive,
    f_chunk_reference,
    giant_test,
    matching_count,
    matching_statistic,
    poisson_tv,
    run_burnside,
    separated,
    sylow_representative,
    uniform_rows,
    w_positive_series,
    w_distribution,
)
from dcos.sylow import build_sylow, contains_many


def test_f_trivial_sylow():
    r = estimate_f(4, 5, 1000, seed=1)
    assert r.hits == 0 and r.p_hat == 0.0
    lo, hi = r.ci95
    assert lo == 0.0 <= hi < 0.01


@pytest.mark.parametrize("n,p", [(n, p) for n in range(2, 9) for p in (2, 3, 5, 7) if p <= n])
def test_exact_f_vs_estimate(n, p):
    exact = exact_f(n, p)
    r = estimate_f(n, p, 10**5, seed=n * 100 + p, threads=1)
    se = math.sqrt(exact * (1 - exact) / r.samples)
    if se == 0:
        assert r.p_hat == exact
    else:
        assert abs(r.p_hat - exact) < 4 * se


@pytest.mark.parametrize("n,p", [(9, 2), (12, 3), (20, 2), (25, 5), (30, 3)])
def test_kernel_chunk_matches_reference(n, p):
    assert _f_chunk(3, 200, 11, n, p) == f_chunk_reference(3, 200, 11, n, p)


def test_uniform_rows_are_permutations():
    X = uniform_rows(7, 500, make_rng(0))
    assert (np.sort(X, axis=1) == np.arange(7)).all()
    assert len({tuple(r) for r in X}) > 400


def test_estimate_thread_independent():
    a = estimate_f(20, 2, 5500, seed=4, threads=1)
    b = estimate_f(20, 2, 5500, seed=4, threads=2)
    assert a == b
    assert a.to_json_obj() == b.to_json_obj()


def test_separated():
    from dcos.prob import EstimateReport

    hi = EstimateReport(n=1, p=2, samples=10**4, seed=0, hits=5000)
    lo = EstimateReport(n=1, p=2, samples=10**4, seed=0, hits=4000)
    assert separated(hi, lo) and not separated(lo, hi)
    assert not separated(hi, hi)


@pytest.mark.parametrize("n,p", [(8, 2), (6, 3), (5, 2)])
def test_model_equivalence(n, p):
    cmp = check_model_equivalence(n, p, 20000, seed=3, threads=1)
    assert cmp.agree
    exact = exact_f(n, p)
    se = math.sqrt(exact * (1 - exact) / 20000)
    for r in (cmp.uniform_element, cmp.uniform_subgroup):
        assert abs(r.p_hat - exact) <= 4 * se
    if (n, p) == (8, 2):
        assert cmp.uniform_element.p_hat == cmp.uniform_subgroup.p_hat == 1.0


def test_sylow_representative_names_subgroup():
    S = build_sylow(6, 3)
    rng = make_rng(2)
    for _ in range(20):
        x = Permutation(tuple(int(v) for v in rng.permutation(6)))
        r = sylow_representative(6, 3, x)
        # P^r = P^x: conjugating the generators by r x^-1 stays in P
        xi = np.argsort(x.images)
        y = np.asarray(r.images)[xi]
        yi = np.argsort(y)
        conj = np.array([yi[np.asarray(g.images)[y]] for g in S.generators])
        assert contains_many(S, conj).all()


def test_matching_identity_and_errors():
    assert int(matching_count(np.arange(10))) == 5
    with pytest.raises(ValueError):
        matching_statistic(5, make_rng(0))
    s = matching_statistic(8, make_rng(1))
    assert 0 <= s.W <= 4


def test_matching_mean_n4():
    N = 10**6
    hist = w_distribution(4, N, seed=7, threads=1)
    W = np.arange(len(hist))
    mean = (hist * W).sum() / N
    var = (hist * (W - 2 / 3) ** 2).sum() / N
    assert abs(mean - 2 / 3) < 3 * math.sqrt(var / N)


@pytest.mark.parametrize("n", [2, 4, 6, 8])
def test_w_positive_exact(n):
    assert Fraction(exact_w_positive(n)).limit_denominator(10**6) == w_positive_series(n)


def test_w_positive_small_values():
    # at n = 4 only the 8 permutations preserving the partition have W > 0
    assert w_positive_series(4) == Fraction(1, 3)
    assert estimate_w_positive(2, 1000, seed=0).p_hat == 1.0
    assert abs(float(w_positive_series(200)) - (1 - math.exp(-0.5))) < 0.005


def test_w_poisson_n200():
    hist = w_distribution(200, 10**5, seed=8, threads=1)
    assert poisson_tv(hist) < 0.05
    r = estimate_w_positive(200, 10**5, seed=8, threads=1)
    assert r.hits == 10**5 - hist[0]
    assert abs(r.p_hat - (1 - math.exp(-0.5))) < 0.02


@pytest.mark.parametrize("n", [4, 6, 8, 10, 12])
def test_matching_coupling(n):
    S = build_sylow(n, 2)
    X = uniform_rows(n, 10**4, make_rng(n, 77))
    W = matching_count(X)
    nt = nontrivial_many(S, X)
    assert nt[W > 0].all()
    assert nt.mean() >= (W > 0).mean()


def test_burnside_trivial_chain():
    r = run_burnside(2, 2, 200, seed=0)
    assert len(r.visits) == 1 and sum(r.visits.values()) == 200


def test_burnside_five_two_frequencies():
    r = run_burnside(5, 2, 10**5, seed=1)
    assert len(r.visits) == census_exhaustive(5, 2).total == 4
    assert all(abs(c / r.steps - 0.25) < 0.01 for c in r.visits.values())
    assert burnside_chisquare(r, 4) > 0.01


def test_burnside_json():
    r = run_burnside(4, 2, 100, seed=2)
    obj = r.to_json_obj()
    assert obj["classes_visited"] == len(obj["visits"]) == 2
    assert sum(v["count"] for v in obj["visits"]) == 100


def test_giant_examples():
    n = 10
    adj = [Permutation.from_cycles(n, [(i, i + 1)]) for i in range(1, n)]
    assert giant_test(adj, make_rng(0)).verdict is GiantVerdict.GIANT
    r = giant_test([Permutation.from_cycles(n, [(1, 2), (3, 4)])], make_rng(0))
    assert r.verdict is GiantVerdict.NOT_GIANT and r.reason == "intransitive"


def test_giant_imprimitive():
    g = Permutation.from_cycles(8, [(1, 3, 5, 7), (2, 4, 6, 8)])
    h = Permutation.from_cycles(8, [(1, 2), (3, 4), (5, 6), (7, 8)])
    r = giant_test([g, h], make_rng(0))
    assert r.verdict is GiantVerdict.NOT_GIANT
    assert "block" in r.reason


def test_giant_random_conjugates_n30():
    n = 30
    z = Permutation(tuple(3 * (i // 3) + (i + 1) % 3 for i in range(n)))
    rng = make_rng(30)
    giants = 0
    for _ in range(200):
        gens = []
        for _ in range(2):
            x = rng.permutation(n)
            xi = np.argsort(x)
            gens.append(Permutation(tuple(int(v) for v in xi[np.asarray(z.images)[x]])))
        giants += giant_test(gens, rng).verdict is GiantVerdict.GIANT
    assert giants >= 190


def test_giant_degree_checks():
    with pytest.raises(ValueError):
        giant_test([Permutation.identity(5)], make_rng(0))
    from dcos.perm import DegreeMismatch

    with pytest.raises(DegreeMismatch):
        giant_test([Permutation.identity(9), Permutation.identity(10)], make_rng(0))
