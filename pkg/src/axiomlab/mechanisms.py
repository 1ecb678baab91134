"""Serial dictatorship, random serial dictatorship, and efficient assignments."""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from itertools import permutations
from typing import Sequence

from .core import FULL, Assignment, Perm, Profile, Rule, house_vector, permutation_matrix


def sd_houses(R: Profile, order: Sequence[int]) -> tuple[int, ...]:
    """House of each agent under serial dictatorship with priority ``order``."""
    n = len(R)
    taken = [False] * n
    house_of = [0] * n
    for i in order:
        for h in R[i]:
            if not taken[h]:
                taken[h] = True
                house_of[i] = h
                break
    return tuple(house_of)


def serial_dictatorship(R: Profile, order: Sequence[int]) -> Assignment:
    # order[0] picks first
    return permutation_matrix(sd_houses(R, order))


def rsd(R: Profile) -> Assignment:
    """Random serial dictatorship: the exact average over all ``n!`` orders."""
    n = len(R)
    counts = [[0] * n for _ in range(n)]
    total = 0
    for order in permutations(range(n)):
        for i, h in enumerate(sd_houses(R, order)):
            counts[i][h] += 1
        total += 1
    return tuple(tuple(Fraction(c, total) for c in row) for row in counts)


def rsd_recursive(R: Profile) -> Assignment:
    """RSD by recursion on (remaining agents, remaining houses).

    Independent of :func:`rsd`: a uniformly random first picker takes her top
    remaining house, then the rest is RSD on the residual problem.
    """
    n = len(R)

    @lru_cache(maxsize=None)
    def go(agents: int, houses: int) -> tuple[tuple[tuple[int, int], Fraction], ...]:
        if agents == 0:
            return ()
        members = [i for i in range(n) if agents >> i & 1]
        w = Fraction(1, len(members))
        acc: dict[tuple[int, int], Fraction] = {}
        for i in members:
            h = next(h for h in R[i] if houses >> h & 1)
            acc[(i, h)] = acc.get((i, h), 0) + w
            for key, v in go(agents & ~(1 << i), houses & ~(1 << h)):
                acc[key] = acc.get(key, 0) + w * v
        return tuple(acc.items())

    full = (1 << n) - 1
    M = [[Fraction(0)] * n for _ in range(n)]
    for (i, h), v in go(full, full):
        M[i][h] = v
    return tuple(tuple(r) for r in M)


def efficient_house_vectors(R: Profile) -> list[tuple[int, ...]]:
    """Distinct SD outcomes as house vectors, in order of first appearance."""
    seen: dict[tuple[int, ...], None] = {}
    for order in permutations(range(len(R))):
        seen.setdefault(sd_houses(R, order), None)
    return list(seen)


def efficient_assignments(R: Profile) -> list[Assignment]:
    """All Pareto efficient deterministic assignments (deduplicated SD outcomes)."""
    return [permutation_matrix(v) for v in efficient_house_vectors(R)]


def rsd_support(R: Profile) -> tuple[tuple[bool, ...], ...]:
    """``out[i][h]`` is true iff some efficient assignment gives ``h`` to ``i``."""
    n = len(R)
    support = [[False] * n for _ in range(n)]
    seen: set[tuple[int, int]] = set()
    stack = [((1 << n) - 1, (1 << n) - 1)]
    # the residual problem depends only on who is left and what is left
    while stack:
        agents, houses = stack.pop()
        if (agents, houses) in seen:
            continue
        seen.add((agents, houses))
        for i in range(n):
            if agents >> i & 1:
                h = next(h for h in R[i] if houses >> h & 1)
                support[i][h] = True
                stack.append((agents & ~(1 << i), houses & ~(1 << h)))
    return tuple(tuple(r) for r in support)


def weakly_prefers(pref: Sequence[int], a: int, b: int) -> bool:
    return pref.index(a) <= pref.index(b)


def pareto_dominates(R: Profile, M1: Assignment, M2: Assignment) -> bool:
    """True iff ``M1 != M2`` and every agent weakly prefers her house in ``M1``.

    With strict preferences this is the same as: every agent whose house
    changes strictly improves.
    """
    v1, v2 = house_vector(M1), house_vector(M2)
    if v1 == v2:
        return False
    return all(weakly_prefers(R[i], v1[i], v2[i]) for i in range(len(R)))


def is_efficient(R: Profile, houses: Sequence[int]) -> bool:
    """Brute force: no permutation Pareto dominates ``houses``."""
    n = len(R)
    M = permutation_matrix(houses)
    return not any(pareto_dominates(R, permutation_matrix(p), M) for p in permutations(range(n)))


def sd_rule(n: int, order: Perm, profiles) -> Rule:
    return Rule(n=n, table={R: serial_dictatorship(R, order) for R in profiles})


def rsd_rule(n: int, profiles, domain: str = FULL) -> Rule:
    return Rule(n=n, table={R: rsd(R) for R in profiles}, domain=domain)
