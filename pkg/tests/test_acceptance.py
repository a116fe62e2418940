"""The thirteen acceptance criteria, one test each.

Each test records a single PASS/FAIL line, printed in the terminal summary.
"""

import itertools
import math
import os
import subprocess
import sys
from fractions import Fraction
from functools import lru_cache

from conftest import ACCEPTANCE
from dcos import closedform as cf
from dcos.data import TABLE_P2, TOTALS_P2, padded_row
from dcos.doublecoset import census_exhaustive, total_via_classes, verify_pair_counts
from dcos.perm import Permutation, make_rng
from dcos.prob import (
    burnside_chisquare,
    estimate_f,
    estimate_w_positive,
    exact_w_positive,
    poisson_tv,
    run_burnside,
    separated,
    w_distribution,
)
from dcos.sylow import build_sylow, intersection_order, profile
from dcos.witness import EXCEPTIONS, construct_intersection, refute_exception

SEED = 20240517
PRIMES = [2, 3, 5, 7, 11, 13]


def record(num, title, ok, detail=""):
    line = f"criterion {num:2d} {'PASS' if ok else 'FAIL'}  {title}" + (f"  ({detail})" if detail else "")
    ACCEPTANCE[num] = line
    print(line)
    assert ok, line


@lru_cache(maxsize=None)
def census(n, p):
    return census_exhaustive(n, p)


def census_grid():
    """(n, p) pairs on which the census-based criteria are checked."""
    return ([(n, 2) for n in range(1, 14)] + [(n, 3) for n in range(1, 13)]
            + [(n, p) for p in (5, 7, 11) for n in range(1, 12)])


def test_01_table_rows():
    bad = [n for n in range(1, 14) if census(n, 2).row() != padded_row(n, profile(n, 2).m)]
    examples = census(7, 2).row() == [1, 3, 7, 13, 11] and census(12, 2).row() == [1, 3, 8, 17, 27, 53, 97, 154, 247, 341, 197]
    ok = not bad and examples and census(13, 2).total == 10929
    record(1, "exhaustive census matches table rows n=1..13", ok, f"mismatched rows {bad}" if bad else "")


def test_02_class_totals():
    got = {n: total_via_classes(n, 2) for n in range(1, 19)}
    bad = [n for n in got if got[n] != TOTALS_P2[n] or got[n] != sum(TABLE_P2[n])]
    record(2, "class-formula totals n=1..18", not bad and got[18] == 2781808, f"n=18 gives {got[18]}")


def test_03_prime_eleven():
    want = {1: 10, 2: 329890}
    routes = {
        "inclusion-exclusion": cf.abelian_census(11, 1).values,
        "census": {k + 1: c for k, c in census(11, 11).counts.items()},
        "closed form": cf.prime_degree_counts(11),
    }
    bad = [k for k, v in routes.items() if v != want]
    record(3, "n=p=11 gives n_1=10, n_2=329890 by three routes", not bad, f"disagree: {bad}" if bad else "")


def test_04_second_size():
    bad = [(n, p) for n, p in census_grid()
           if profile(n, p).m >= 1 and cf.second_size_count(n, p) != census(n, p).counts.get(1, 0)]
    table_bad = [n for n in range(2, 19) if cf.second_size_count(n, 2) != padded_row(n, profile(n, 2).m)[1]]
    record(4, "second-size count vs census and table column", not bad and not table_bad,
           f"census {bad}, table {table_bad}" if bad or table_bad else "")


def min_size_product(n, p):
    digits = profile(n, p).digits
    return math.prod((p - 1) ** (i * a) * math.factorial(a) for i, a in enumerate(digits))


def test_05_min_size():
    bad = [(n, p) for n, p in census_grid() if census(n, p).counts[0] != min_size_product(n, p)]
    ones = all(census(n, 2).counts[0] == 1 for n in range(1, 14))
    record(5, "minimal-size count equals the digit product", not bad and ones, f"{bad}" if bad else "")


def test_06_sylow_pair_counts():
    cfgs = [(4, 2), (5, 2), (6, 2), (6, 3), (8, 2), (9, 3)]
    bad = [c for c in cfgs if not verify_pair_counts(*c).ok]
    record(6, "Sylow pair counts d(p^k) on six configurations", not bad, f"{bad}" if bad else "")


def brute_sizes(n, p):
    S = build_sylow(n, p)
    hits = {}
    for t in itertools.permutations(range(n)):
        size = S.order**2 // intersection_order(S, Permutation(t))
        hits[size] = hits.get(size, 0) + 1
    return {round(math.log(s, p)): c // s for s, c in hits.items()}


def test_07_abelian_census():
    issues = []
    ac = cf.abelian_census(3, 2)
    brute = brute_sizes(6, 3)
    if ac.values != {2: 8, 3: 0, 4: 8} or {a: brute.get(a, 0) for a in ac.values} != ac.values:
        issues.append("(3,2) vs S_6")
    ac5 = cf.abelian_census(5, 2)
    if {2 + k: c for k, c in census(10, 5).counts.items()} != ac5.values:
        issues.append("(5,2) vs S_10 census")
    for p in PRIMES:
        for k in range(1, p):
            if p == 2:
                continue
            a = cf.abelian_census(p, k)
            if not (a.mass_ok() and a.min_size_ok() and cf.check_top_size_bounds(p, k).ok):
                issues.append((p, k))
    record(7, "abelian census vs brute force, mass identity, n_k, bounds", not issues, f"{issues}" if issues else "")


def test_08_witnesses():
    rng = make_rng(SEED)
    failed = []
    for p in PRIMES:
        for n in range(1, 15):
            for k in range(profile(n, p).m + 1):
                if (n, p, k) not in EXCEPTIONS and not construct_intersection(n, p, k, rng).verified:
                    failed.append((n, p, k))
    unrefuted = [t for t in sorted(EXCEPTIONS) if not refute_exception(*t)]
    record(8, "witnesses for every non-exception triple n<=14; exceptions refuted", not failed and not unrefuted,
           f"failed {failed}, unrefuted {unrefuted}" if failed or unrefuted else "")


def test_09_f_lower_bound_p2():
    reps = {n: estimate_f(n, 2, 10**4, seed=SEED) for n in (50, 100, 200)}
    ok = all(r.p_hat >= 0.37 for r in reps.values())
    record(9, "f(n,2) >= 0.37 at n=50,100,200", ok, ", ".join(f"n={n}: {r.p_hat:.4f}" for n, r in reps.items()))


def test_10_f_decreasing():
    legs = {3: [(30, 10**5), (90, 10**5), (270, 10**5)],
            5: [(25, 10**6), (125, 25 * 10**6), (375, 10**6)]}
    ok = True
    parts = []
    for p, pts in legs.items():
        reps = [estimate_f(n, p, N, seed=SEED) for n, N in pts]
        for a, b in zip(reps, reps[1:]):
            sep = separated(a, b)
            ok &= sep
            parts.append(f"p={p} n={a.n}->{b.n}: {a.hits}/{a.samples} vs {b.hits}/{b.samples} "
                         f"{'separated' if sep else 'NOT separated'}")
    record(10, "f(n,p) decreases with 3-sigma separation, p=3 and p=5", ok, "; ".join(parts))


def test_11_poisson_limit():
    hist = w_distribution(200, 10**5, seed=SEED)
    tv = poisson_tv(hist)
    r = estimate_w_positive(200, 10**5, seed=SEED)
    gap = abs(r.p_hat - (1 - math.exp(-0.5)))
    small = Fraction(exact_w_positive(4)).limit_denominator(24)
    ok = tv < 0.05 and gap < 0.02 and small == Fraction(17, 24)
    record(11, "W at n=200 near Poisson(1/2); Pr(W>0)=17/24 at n=4", ok,
           f"TV {tv:.4f}, |Pr(W>0) - (1-e^-1/2)| {gap:.4f}, enumeration at n=4 gives {small}")


def test_12_burnside():
    parts = []
    ok = True
    for n, p in [(5, 2), (6, 3), (7, 2)]:
        classes = census(n, p).total
        run = run_burnside(n, p, 10**5, seed=SEED)
        pval = burnside_chisquare(run, classes)
        good = len(run.visits) == classes and pval > 0.01
        ok &= good
        parts.append(f"({n},{p}) {len(run.visits)}/{classes} classes, p={pval:.3f}")
    record(12, "Burnside chain covers all double cosets, chi-square not rejected", ok, "; ".join(parts))


COMMANDS = [
    ["info", "12", "3"],
    ["census", "9", "3"],
    ["census", "9", "2", "--method", "sampled", "--samples", "3500", "--seed", "7"],
    ["census", "14", "2", "--method", "classes"],
    ["formulas", "12", "3"],
    ["formulas", "--abelian", "5", "3"],
    ["witness", "14", "2", "5", "--seed", "7"],
    ["estimate", "f", "30", "3", "--samples", "3500", "--seed", "7"],
    ["estimate", "matching", "40", "--samples", "3500", "--seed", "7"],
    ["burnside", "6", "3", "--steps", "500", "--seed", "7"],
    ["verify", "--quick"],
]
THREADED = {"census", "estimate"}


def test_13_determinism():
    env = {k: v for k, v in os.environ.items() if k != "DCOS_THREADS"}
    differing = []
    for argv in COMMANDS:
        outs = set()
        for t in ("1", "2", "8"):
            flag = ["--threads", t] if argv[0] in THREADED else []
            for _ in range(2):
                r = subprocess.run([sys.executable, "-m", "dcos", *argv, *flag], capture_output=True, text=True,
                                   env={**env, "DCOS_THREADS": t})
                outs.add((r.returncode, r.stdout))
        if len(outs) != 1 or next(iter(outs))[0] != 0:
            differing.append(" ".join(argv))
    record(13, "byte-identical output across 1, 2, 8 threads, two runs each", not differing,
           f"differs: {differing}" if differing else f"{len(COMMANDS)} commands")
