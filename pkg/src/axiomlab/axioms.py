"""Decision procedures for the axioms, each returning a verdict with a witness.

Every check walks profiles in sorted order, then agents, deviations and
houses in increasing order, and stops at the first violation, so witnesses
are reproducible.  Manipulations that leave the rule's domain are skipped.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations
from typing import Iterable, Iterator

from .core import (
    Assignment,
    Pref,
    Profile,
    Rule,
    apply_perm,
    format_profile,
    format_rational,
    house_vector,
    is_bistochastic,
    matrix_to_json,
    permute_matrix,
    permutation_matrix,
    replace_pref,
    swap_adjacent,
)
from .linalg import EQ, ConstraintSystem, SparseRow
from .lp import lp_feasible
from .mechanisms import efficient_assignments, rsd, rsd_support, sd_houses


class DomainNotClosed(ValueError):
    pass


@dataclass
class Verdict:
    axiom: str
    holds: bool
    witness: dict | None = None

    def __bool__(self) -> bool:
        return self.holds

    def to_json(self) -> dict:
        return {"axiom": self.axiom, "holds": self.holds, "witness": self.witness}


def _ok(axiom: str) -> Verdict:
    return Verdict(axiom, True, None)


def _fail(axiom: str, **witness) -> Verdict:
    return Verdict(axiom, False, witness)


def _row(M: Assignment, i: int) -> list[str]:
    return [format_rational(v) for v in M[i]]


# -- helpers ---------------------------------------------------------------

def _walk(f: Rule, profiles: Iterable[Profile] | None) -> list[Profile]:
    """Profiles to test: all of ``f``'s, or the given subset in sorted order."""
    return f.profiles() if profiles is None else sorted(profiles)


def adjacent_swaps(f: Rule, R: Profile) -> Iterator[tuple[int, int, Profile]]:
    """``(agent, k, R')`` for every adjacent swap from ``R`` staying in the domain."""
    for i in range(f.n):
        for k in range(f.n - 1):
            R2 = replace_pref(R, i, swap_adjacent(R[i], k))
            if R2 in f:
                yield i, k, R2


def misreports(f: Rule, R: Profile, i: int) -> Iterator[tuple[Pref, Profile]]:
    for p in permutations(range(f.n)):
        if p != R[i]:
            R2 = replace_pref(R, i, p)
            if R2 in f:
                yield p, R2


# -- single-profile axioms --------------------------------------------------

def check_bistochastic(f: Rule, profiles: Iterable[Profile] | None = None) -> Verdict:
    for R in _walk(f, profiles):
        if not is_bistochastic(f(R)):
            return _fail("bistochastic", profile=format_profile(R), matrix=matrix_to_json(f(R)))
    return _ok("bistochastic")


def check_equal_treatment(f: Rule, profiles: Iterable[Profile] | None = None) -> Verdict:
    for R in _walk(f, profiles):
        M = f(R)
        for i in range(f.n):
            for j in range(i + 1, f.n):
                if R[i] == R[j] and M[i] != M[j]:
                    return _fail("equal_treatment", profile=format_profile(R), agents=[i, j],
                                 values=[_row(M, i), _row(M, j)])
    return _ok("equal_treatment")


def check_support_efficiency(f: Rule, profiles: Iterable[Profile] | None = None) -> Verdict:
    for R in _walk(f, profiles):
        M = f(R)
        S = rsd_support(R)
        for i in range(f.n):
            for h in range(f.n):
                if not S[i][h] and M[i][h] != 0:
                    return _fail("support_efficiency", profile=format_profile(R), agent=i, house=h,
                                 value=format_rational(M[i][h]))
    return _ok("support_efficiency")


@dataclass
class Decomposition:
    parts: list[tuple[Assignment, Fraction]] = field(default_factory=list)

    def matrix(self) -> Assignment:
        n = len(self.parts[0][0])
        acc = [[Fraction(0)] * n for _ in range(n)]
        for P, w in self.parts:
            for i in range(n):
                for h in range(n):
                    acc[i][h] += w * P[i][h]
        return tuple(tuple(r) for r in acc)

    def to_json(self) -> list:
        return [{"houses": list(house_vector(P)), "weight": format_rational(w)} for P, w in self.parts]


def decompose_ex_post(R: Profile, M: Assignment) -> Decomposition | None:
    """Convex combination of efficient deterministic assignments equal to ``M``."""
    n = len(R)
    if tuple(map(tuple, M)) == rsd(R):
        # uniform over the SD outcomes, duplicates merged
        weights: dict[tuple[int, ...], Fraction] = {}
        orders = list(permutations(range(n)))
        for order in orders:
            v = sd_houses(R, order)
            weights[v] = weights.get(v, Fraction(0)) + Fraction(1, len(orders))
        return Decomposition([(permutation_matrix(v), w) for v, w in weights.items()])
    E = efficient_assignments(R)
    rows = [SparseRow.make({e: 1 for e in range(len(E))}, EQ, 1)]
    for i in range(n):
        for h in range(n):
            rows.append(SparseRow.make({e: 1 for e, P in enumerate(E) if P[i][h]}, EQ, M[i][h]))
    lam = lp_feasible(ConstraintSystem(len(E), rows), nonneg=True)
    if lam is None:
        return None
    return Decomposition([(E[e], w) for e, w in enumerate(lam) if w > 0])


def check_ex_post_efficiency(f: Rule, profiles: Iterable[Profile] | None = None) -> Verdict:
    for R in _walk(f, profiles):
        if decompose_ex_post(R, f(R)) is None:
            return _fail("ex_post_efficiency", profile=format_profile(R), matrix=matrix_to_json(f(R)))
    return _ok("ex_post_efficiency")


# -- manipulation axioms ----------------------------------------------------

def check_localized(f: Rule, profiles: Iterable[Profile] | None = None) -> Verdict:
    for R in _walk(f, profiles):
        M = f(R)
        for i, k, R2 in adjacent_swaps(f, R):
            M2 = f(R2)
            for l, h in enumerate(R[i]):
                if l not in (k, k + 1) and M[i][h] != M2[i][h]:
                    return _fail("localized", profile=format_profile(R), deviation=format_profile(R2),
                                 agent=i, house=h,
                                 values=[format_rational(M[i][h]), format_rational(M2[i][h])])
    return _ok("localized")


def check_nonperverse(f: Rule, profiles: Iterable[Profile] | None = None) -> Verdict:
    for R in _walk(f, profiles):
        M = f(R)
        for i, k, R2 in adjacent_swaps(f, R):
            M2 = f(R2)
            up, down = R[i][k], R[i][k + 1]  # up is demoted by the swap
            for h, bad in ((up, M[i][up] < M2[i][up]), (down, M[i][down] > M2[i][down])):
                if bad:
                    return _fail("nonperverse", profile=format_profile(R), deviation=format_profile(R2),
                                 agent=i, house=h,
                                 values=[format_rational(M[i][h]), format_rational(M2[i][h])])
    return _ok("nonperverse")


def check_strategyproof_direct(f: Rule, profiles: Iterable[Profile] | None = None) -> Verdict:
    """Stochastic dominance against every full misreport."""
    for R in _walk(f, profiles):
        M = f(R)
        for i in range(f.n):
            truth = R[i]
            for p, R2 in misreports(f, R, i):
                M2 = f(R2)
                a = b = Fraction(0)
                for depth, h in enumerate(truth):
                    a += M[i][h]
                    b += M2[i][h]
                    if b > a:
                        return _fail("strategyproof", profile=format_profile(R),
                                     deviation=format_profile(R2), agent=i,
                                     prefix=list(truth[:depth + 1]),
                                     values=[format_rational(a), format_rational(b)])
    return _ok("strategyproof")


def check_nonbossy(f: Rule, profiles: Iterable[Profile] | None = None) -> Verdict:
    """If a misreport leaves the reporter's row unchanged, it changes nothing."""
    for R in _walk(f, profiles):
        M = f(R)
        for i in range(f.n):
            for p, R2 in misreports(f, R, i):
                M2 = f(R2)
                if M[i] == M2[i] and M != M2:
                    j = next(j for j in range(f.n) if M[j] != M2[j])
                    return _fail("nonbossy", profile=format_profile(R), deviation=format_profile(R2),
                                 agent=i, affected=j, values=[_row(M, j), _row(M2, j)])
    return _ok("nonbossy")


# -- symmetry -----------------------------------------------------------------

def check_symmetric(f: Rule, samples: int = 2000, seed: int = 0,
                    profiles: Iterable[Profile] | None = None) -> Verdict:
    """``f(pi, tau applied to R)`` equals ``f(R)`` permuted, for every group element.

    Exhaustive for ``n <= 3``; above that ``samples`` seeded (profile, pi, tau)
    triples are tested.
    """
    n = f.n
    perms = list(permutations(range(n)))
    profiles = list(_walk(f, profiles))

    def test(R, pi, tau):
        R2 = apply_perm(R, pi, tau)
        if R2 not in f:
            raise DomainNotClosed(f"{format_profile(R2)} (image of {format_profile(R)}) is outside the domain")
        if f(R2) != permute_matrix(f(R), pi, tau):
            return _fail("symmetric", profile=format_profile(R), pi=list(pi), tau=list(tau),
                         image=format_profile(R2), expected=matrix_to_json(permute_matrix(f(R), pi, tau)),
                         actual=matrix_to_json(f(R2)))
        return None

    if n <= 3:
        for R in profiles:
            for pi in perms:
                for tau in perms:
                    bad = test(R, pi, tau)
                    if bad is not None:
                        return bad
        return _ok("symmetric")
    rnd = random.Random(seed)
    for _ in range(samples):
        bad = test(rnd.choice(profiles), rnd.choice(perms), rnd.choice(perms))
        if bad is not None:
            return bad
    return _ok("symmetric")


CHECKS = {
    "bistochastic": check_bistochastic,
    "ete": check_equal_treatment,
    "support": check_support_efficiency,
    "expost": check_ex_post_efficiency,
    "localized": check_localized,
    "nonperverse": check_nonperverse,
    "sp": check_strategyproof_direct,
    "symmetric": check_symmetric,
    "nonbossy": check_nonbossy,
}
