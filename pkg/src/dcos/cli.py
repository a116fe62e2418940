"""Command-line entry points ``dcos`` and ``sylow``.

Exit codes: 0 ok, 1 failed check or impossible witness, 2 usage, 3 budget refusal.
All randomness comes from --seed (default DEFAULT_SEED).
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

from . import __version__
from .sylow import BudgetExceeded, normalizer_index, profile

DEFAULT_SEED = 20240517
log = logging.getLogger("dcos")


class UsageError(Exception):
    pass


def _threads(args) -> int | None:
    return getattr(args, "threads", None)


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
        log.info("wrote %s", out)
    else:
        sys.stdout.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _fmt(args) -> str:
    if getattr(args, "format", None):
        return args.format
    out = getattr(args, "out", None)
    return "csv" if out and out.endswith(".csv") else "json"


# ----------------------------------------------------------------- subcommands

def info_obj(n: int, p: int) -> dict:
    prof = profile(n, p)
    return {"n": n, "p": p, "digits": list(prof.digits), "m": prof.m, "order": str(prof.order),
            "normalizer_index": str(normalizer_index(prof))}


def cmd_info(args) -> int:
    _emit(_dump(info_obj(args.n, args.p)), None)
    return 0


def cmd_census(args) -> int:
    from . import doublecoset as dc

    fmt = _fmt(args)
    if args.method == "exhaustive":
        table = dc.census_exhaustive(args.n, args.p, threads=_threads(args))
        text = table.to_csv() if fmt == "csv" else _dump(table.to_json_obj())
    elif args.method == "sampled":
        sc = dc.census_sampled(args.n, args.p, args.samples, seed=args.seed, threads=_threads(args))
        text = sc.to_csv() if fmt == "csv" else _dump(sc.to_json_obj())
    else:
        total = dc.total_via_classes(args.n, args.p)
        m = profile(args.n, args.p).m
        if fmt == "csv":
            text = f"n,p,m,method,total\n{args.n},{args.p},{m},classes,{total}\n"
        else:
            text = _dump({"n": args.n, "p": args.p, "m": m, "method": "classes", "total": str(total)})
    _emit(text, args.out)
    return 0


def cmd_formulas(args) -> int:
    from . import closedform as cf

    if args.abelian:
        p, k = args.abelian
        obj = cf.abelian_report(p, k)
    else:
        if args.n is None or args.p is None:
            raise UsageError("formulas needs n p, or --abelian p k")
        obj = cf.formulas(args.n, args.p)
    _emit(_dump(obj), args.out)
    return 0


def cmd_witness(args) -> int:
    from .perm import make_rng
    from .witness import SearchExhausted, WitnessImpossible, construct_intersection

    try:
        w = construct_intersection(args.n, args.p, args.k, make_rng(args.seed), max_tries=args.max_tries)
    except WitnessImpossible as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except SearchExhausted as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    _emit(_dump(w.to_json_obj()), args.out)
    return 0 if w.verified else 1


def cmd_estimate(args) -> int:
    from . import prob

    if args.what == "f":
        if args.p is None:
            raise UsageError("estimate f needs n p")
        rep = prob.estimate_f(args.n, args.p, args.samples, seed=args.seed, threads=_threads(args))
        obj = rep.to_json_obj()
    else:
        if args.n % 2:
            raise UsageError("matching statistic needs even n")
        hist = prob.w_distribution(args.n, args.samples, seed=args.seed, threads=_threads(args))
        rep = prob.EstimateReport(n=args.n, p=2, samples=args.samples, seed=args.seed,
                                  hits=int(args.samples - hist[0]))
        obj = rep.to_json_obj()
        obj["statistic"] = "W>0"
        obj["histogram"] = [int(c) for c in hist]
        obj["tv_poisson_half"] = float(prob.poisson_tv(hist))
    log.info("elapsed %.3fs", rep.elapsed)
    _emit(_dump(obj), args.out)
    return 0


def cmd_burnside(args) -> int:
    from . import prob

    run = prob.run_burnside(args.n, args.p, args.steps, seed=args.seed, thin=args.thin)
    _emit(_dump(run.to_json_obj()), args.out)
    return 0


# ----------------------------------------------------------------- verify

@dataclass
class Check:
    name: str
    status: str
    expected: str = ""
    actual: str = ""
    runtime: float = 0.0
    reason: str = ""


@dataclass
class VerifyReport:
    tier: str
    checks: list[Check] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.status != "fail" for c in self.checks)

    def run(self, name: str, fn) -> None:
        t0 = time.perf_counter()
        try:
            expected, actual = fn()
            status = "pass" if expected == actual else "fail"
            c = Check(name, status, str(expected), str(actual))
        except BudgetExceeded as e:
            c = Check(name, "skipped", reason=str(e))
        except Exception as e:  # a crashing check is a failed check
            c = Check(name, "fail", reason=f"{type(e).__name__}: {e}")
        c.runtime = round(time.perf_counter() - t0, 3)
        log.info("%-40s %s", name, c.status)
        self.checks.append(c)

    def to_json_obj(self, timing: bool = False) -> dict:
        rows = []
        for c in self.checks:
            d = asdict(c)
            if not timing:
                d.pop("runtime")
            rows.append(d)
        return {"tier": self.tier, "ok": self.ok, "checks": rows}


def build_verify(tier: str) -> VerifyReport:
    from . import closedform as cf
    from . import doublecoset as dc
    from . import prob, witness
    from .data import TABLE_P2, TOTALS_P2, padded_row
    from .perm import make_rng

    census_max = {"quick": 9, "default": 12, "full": 14}[tier]
    class_max = {"quick": 12, "default": 18, "full": 18}[tier]
    rep = VerifyReport(tier)
    cache: dict = {}

    def census(n, p):
        if (n, p) not in cache:
            cache[n, p] = dc.census_exhaustive(n, p)
        return cache[n, p]

    for n in range(1, census_max + 1):
        m = profile(n, 2).m
        rep.run(f"table row n={n}", lambda n=n, m=m: (padded_row(n, m), census(n, 2).row()))
    for n in range(1, class_max + 1):
        rep.run(f"class total n={n}", lambda n=n: (TOTALS_P2[n], dc.total_via_classes(n, 2)))
    for n in range(2, 19):
        if len(TABLE_P2[n]) > 1 or profile(n, 2).m >= 1:
            rep.run(f"second size count vs table n={n}",
                    lambda n=n: (padded_row(n, profile(n, 2).m)[1], cf.second_size_count(n, 2)))
    grid = [(n, 3) for n in range(3, min(census_max, 12) + 1)] + \
           [(n, q) for q in (5, 7, 11) for n in range(q, min(census_max, 11) + 1)]
    for n, p in [(n, 2) for n in range(2, census_max + 1)] + grid:
        rep.run(f"second size count n={n} p={p}", lambda n=n, p=p: (cf.second_size_count(n, p), census(n, p).counts[1]))
        rep.run(f"min size count n={n} p={p}", lambda n=n, p=p: (cf.count_min_size(n, p), census(n, p).counts[0]))
    for n, p in [(4, 2), (5, 2), (6, 2), (6, 3), (8, 2), (9, 3)]:
        rep.run(f"sylow pair counts n={n} p={p}", lambda n=n, p=p: (True, dc.verify_pair_counts(n, p, census(n, p)).ok))
    rep.run("abelian p=3 k=2 vs census",
            lambda: ([8, 0, 8], [census(6, 3).counts.get(k, 0) for k in range(3)]))
    if census_max >= 10:
        rep.run("abelian p=5 k=2 vs census",
                lambda: ([v for _, v in sorted(cf.abelian_census(5, 2).values.items())], census(10, 5).row()))
    for p in (3, 5, 7, 11, 13):
        for k in range(1, p):
            rep.run(f"abelian identities p={p} k={k}", lambda p=p, k=k: (
                (True, True, True, True),
                (cf.abelian_census(p, k).mass_ok(), cf.abelian_census(p, k).min_size_ok(),
                 cf.abelian_census(p, k) == cf.abelian_census_from_genfun(p, k), cf.check_top_size_bounds(p, k).ok)))
    rep.run("n=p=11 closed forms", lambda: ({1: 10, 2: 329890}, cf.prime_degree_counts(11)))
    rep.run("n=p=11 inclusion-exclusion", lambda: ({1: 10, 2: 329890}, cf.abelian_census(11, 1).values))
    if tier != "quick":
        rep.run("n=p=11 census", lambda: ([10, 329890], census(11, 11).row()))
    wmax = {"quick": 9, "default": 14, "full": 14}[tier]
    rng = make_rng(DEFAULT_SEED)

    def all_witnesses():
        bad = []
        for p in (2, 3, 5, 7, 11, 13):
            for n in range(1, wmax + 1):
                for k in range(profile(n, p).m + 1):
                    if (n, p, k) not in witness.EXCEPTIONS and not witness.construct_intersection(n, p, k, rng).verified:
                        bad.append((n, p, k))
        return [], bad

    rep.run(f"witnesses n<={wmax}", all_witnesses)
    tiny = [(2, 2, 0), (4, 2, 0), (4, 2, 1), (3, 3, 0), (6, 3, 1)] + ([(8, 2, 0)] if tier != "quick" else [])
    for t in tiny:
        rep.run(f"exception {t} refuted", lambda t=t: (True, witness.refute_exception(*t)))
    for n in (4, 6, 8):
        rep.run(f"P(W>0) n={n} enumeration vs series",
                lambda n=n: (prob.w_positive_series(n),
                             Fraction(prob.exact_w_positive(n)).limit_denominator(math.factorial(n))))
    return rep


def cmd_verify(args) -> int:
    tier = "quick" if args.quick else "full" if args.full else "default"
    rep = build_verify(tier)
    _emit(_dump(rep.to_json_obj(timing=args.timing)), args.out)
    return 0 if rep.ok else 1


# ----------------------------------------------------------------- parser

def _seed_flags(sp, samples: bool = True):
    sp.add_argument("--seed", type=int, default=DEFAULT_SEED)
    sp.add_argument("--threads", type=int, default=None, help="worker processes (default: DCOS_THREADS or CPU count)")
    if samples:
        sp.add_argument("--samples", type=int, default=10**4)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dcos", description="Double cosets of Sylow subgroups of S_n.")
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="cmd", required=True)

    sp = sub.add_parser("info", help="p-adic profile, |P| and |N(P):P|")
    sp.add_argument("n", type=int)
    sp.add_argument("p", type=int)
    sp.set_defaults(fn=cmd_info)

    sp = sub.add_parser("census", help="double cosets by size")
    sp.add_argument("n", type=int)
    sp.add_argument("p", type=int)
    sp.add_argument("--method", choices=["exhaustive", "sampled", "classes"], default="exhaustive")
    sp.add_argument("--out")
    sp.add_argument("--format", choices=["json", "csv"])
    _seed_flags(sp)
    sp.set_defaults(fn=cmd_census)

    sp = sub.add_parser("formulas", help="closed-form counts")
    sp.add_argument("n", type=int, nargs="?")
    sp.add_argument("p", type=int, nargs="?")
    sp.add_argument("--abelian", type=int, nargs=2, metavar=("P", "K"))
    sp.add_argument("--out")
    sp.set_defaults(fn=cmd_formulas)

    sp = sub.add_parser("witness", help="x with |P ∩ P^x| = p^k")
    sp.add_argument("n", type=int)
    sp.add_argument("p", type=int)
    sp.add_argument("k", type=int)
    sp.add_argument("--seed", type=int, default=DEFAULT_SEED)
    sp.add_argument("--max-tries", type=int, default=10**5)
    sp.add_argument("--out")
    sp.set_defaults(fn=cmd_witness)

    sp = sub.add_parser("estimate", help="Monte Carlo estimates")
    sp.add_argument("what", choices=["f", "matching"])
    sp.add_argument("n", type=int)
    sp.add_argument("p", type=int, nargs="?")
    sp.add_argument("--out")
    _seed_flags(sp)
    sp.set_defaults(fn=cmd_estimate)

    sp = sub.add_parser("burnside", help="run the Burnside double-coset sampler")
    sp.add_argument("n", type=int)
    sp.add_argument("p", type=int)
    sp.add_argument("--steps", type=int, default=10**4)
    sp.add_argument("--thin", type=int, default=16)
    sp.add_argument("--seed", type=int, default=DEFAULT_SEED)
    sp.add_argument("--out")
    sp.set_defaults(fn=cmd_burnside)

    sp = sub.add_parser("verify", help="run the cross-check suite")
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--quick", action="store_true")
    g.add_argument("--full", action="store_true")
    sp.add_argument("--timing", action="store_true", help="include per-check runtimes (not reproducible)")
    sp.add_argument("--out")
    sp.set_defaults(fn=cmd_verify)
    return ap


def run(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(message)s")
    try:
        return args.fn(args)
    except BudgetExceeded as e:
        print(f"budget exceeded: {e}", file=sys.stderr)
        return 3
    except (UsageError, ValueError) as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


def sylow_main(argv: list[str] | None = None) -> None:
    ap = argparse.ArgumentParser(prog="sylow", description="Standard Sylow subgroup of S_n.")
    sub = ap.add_subparsers(dest="cmd", required=True)
    sp = sub.add_parser("info")
    sp.add_argument("n", type=int)
    sp.add_argument("p", type=int)
    args = ap.parse_args(argv)
    try:
        sys.stdout.write(_dump(info_obj(args.n, args.p)))
    except ValueError as e:
        print(f"usage error: {e}", file=sys.stderr)
        sys.exit(2)


if __name__ == "__main__":
    main()
