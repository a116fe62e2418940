"""Exact closed-form double-coset counts, all in integer/rational arithmetic.

Any division that a theorem says is exact is checked; a remainder raises
``ArithmeticError`` instead of being rounded away.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction

from .sylow import is_prime, normalizer_index, profile


def _exact_div(a: int, b: int, what: str) -> int:
    q, r = divmod(a, b)
    if r:
        raise ArithmeticError(f"{what}: {a} is not divisible by {b}")
    return q


def _check_abelian(p: int, k: int) -> None:
    if not is_prime(p):
        raise ValueError(f"p={p} is not prime")
    if not 1 <= k <= p - 1:
        raise ValueError(f"need 1 <= k <= p-1, got k={k}, p={p}")
    if p == 2:
        warnings.warn("abelian count at p=2 is evaluated but its derivation targets odd p", stacklevel=3)


@dataclass(frozen=True)
class AbelianCensus:
    """n_a = number of double cosets of size p^a in S_{kp}, k <= a <= 2k."""

    p: int
    k: int
    values: dict[int, int]

    @property
    def n(self) -> int:
        return self.k * self.p

    def mass(self) -> int:
        return sum(self.p**a * v for a, v in self.values.items())

    def mass_ok(self) -> bool:
        return self.mass() == math.factorial(self.n)

    def min_size_ok(self) -> bool:
        return self.values[self.k] == math.factorial(self.k) * (self.p - 1) ** self.k


@dataclass(frozen=True)
class GenFunCoefficients:
    """Coefficients c_0..c_k of f_{k,p}(x) = sum_i c_i x^i."""

    p: int
    k: int
    coeffs: tuple[int, ...]

    def __call__(self, x):
        return sum(c * x**i for i, c in enumerate(self.coeffs))


def _term(p: int, k: int, j: int) -> int:
    """((k-j)p)! j! C(k,j)^2 (p(p-1))^j."""
    return math.factorial((k - j) * p) * math.factorial(j) * math.comb(k, j) ** 2 * (p * (p - 1)) ** j


def abelian_census(p: int, k: int) -> AbelianCensus:
    """Inclusion-exclusion count of double cosets for n = kp (abelian Sylow)."""
    _check_abelian(p, k)
    values = {}
    for a in range(k, 2 * k + 1):
        b = 2 * k - a
        s = sum(_term(p, k, j) * (-1) ** (j - b) * math.comb(j, b) for j in range(b, k + 1))
        values[a] = _exact_div(s, p**a, f"n_{a}")
    return AbelianCensus(p=p, k=k, values=values)


def abelian_genfun(p: int, k: int) -> GenFunCoefficients:
    """Expand sum_i ((k-i)p)! i! C(k,i)^2 (p(p-1)(x-1))^i into powers of x."""
    _check_abelian(p, k)
    coeffs = [0] * (k + 1)
    for i in range(k + 1):
        t = _term(p, k, i)
        for e in range(i + 1):  # (x-1)^i = sum_e C(i,e) x^e (-1)^(i-e)
            coeffs[e] += t * math.comb(i, e) * (-1) ** (i - e)
    return GenFunCoefficients(p=p, k=k, coeffs=tuple(coeffs))


def abelian_census_from_genfun(p: int, k: int) -> AbelianCensus:
    f = abelian_genfun(p, k)
    values = {a: _exact_div(f.coeffs[2 * k - a], p**a, f"[x^{2 * k - a}]f") for a in range(k, 2 * k + 1)}
    return AbelianCensus(p=p, k=k, values=values)


def gamma_sequence(p: int, k: int) -> list[int]:
    """Gamma_j = ((k-j)p)! j! C(k,j)^2 (p(p-1))^j; p^(2k) n_{2k} = sum_j (-1)^j Gamma_j."""
    _check_abelian(p, k)
    return [_term(p, k, j) for j in range(k + 1)]


@dataclass(frozen=True)
class BoundCheck:
    p: int
    k: int
    lower: Fraction
    upper: Fraction
    value: int

    @property
    def ok(self) -> bool:
        return self.lower <= self.value <= self.upper


def check_top_size_bounds(p: int, k: int) -> BoundCheck:
    """(kp)!/p^(2k) (1 - 1/(p-2)!) <= n_{2k} <= (kp)!/p^(2k)."""
    if p < 3:
        raise ValueError("bounds need p >= 3")
    upper = Fraction(math.factorial(k * p), p ** (2 * k))
    lower = upper * (1 - Fraction(1, math.factorial(p - 2)))
    value = abelian_census(p, k).values[2 * k]
    return BoundCheck(p=p, k=k, lower=lower, upper=upper, value=value)


def count_min_size(n: int, p: int) -> int:
    """Double cosets of the smallest size |P| (one per coset of P in N(P))."""
    return normalizer_index(profile(n, p))


def second_size_count(n: int, p: int) -> int:
    """Number of double cosets of size p|P|, from the p-adic digits of n."""
    prof = profile(n, p)
    a = list(prof.digits) + [0]
    if p == 2:
        return sum(a[i] * a[i + 1] for i in range(len(a) - 1)) + sum(a[2:])
    s = 0
    for i in range(len(a) - 1):
        if a[i + 1]:
            s += a[i + 1] * (math.comb(p + a[i], p) * (p - 1) ** (i * (p - 1)) * math.factorial(p - 2) - 1)
    return _exact_div(normalizer_index(prof) * s, p, "second size count")


def prime_degree_counts(p: int) -> dict[int, int]:
    """n = p: sizes p and p^2 occur (p-1) and ((p-1)! - (p-1))/p times."""
    if not is_prime(p):
        raise ValueError(f"p={p} is not prime")
    return {1: p - 1, 2: _exact_div(math.factorial(p - 1) - (p - 1), p, "n_2 at n=p")}


def formulas(n: int, p: int) -> dict:
    """Every closed form that applies to (n, p)."""
    prof = profile(n, p)
    out: dict = {
        "n": n,
        "p": p,
        "m": prof.m,
        "digits": list(prof.digits),
        "order": str(prof.order),
        "normalizer_index": str(normalizer_index(prof)),
        "count_min_size": str(count_min_size(n, p)),
    }
    if prof.m >= 1:
        out["second_size_count"] = str(second_size_count(n, p))
    if n == p:
        out["prime_degree"] = {str(a): str(v) for a, v in prime_degree_counts(p).items()}
    if p > 2 and n % p == 0 and 1 <= n // p <= p - 1:
        out["abelian"] = abelian_report(p, n // p)
    return out


def abelian_report(p: int, k: int) -> dict:
    ac = abelian_census(p, k)
    out = {
        "p": p,
        "k": k,
        "n": ac.n,
        "values": [{"a": a, "count": str(v)} for a, v in sorted(ac.values.items())],
        "mass_ok": ac.mass_ok(),
        "min_size_ok": ac.min_size_ok(),
        "genfun": [str(c) for c in abelian_genfun(p, k).coeffs],
    }
    if p >= 3:
        b = check_top_size_bounds(p, k)
        out["bounds"] = {"lower": str(b.lower), "upper": str(b.upper), "value": str(b.value), "ok": b.ok}
    return out
