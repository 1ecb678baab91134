"""Canonical forms under joint agent/house relabeling, and domain enumerators.

The canonical form of a profile is the lexicographic minimum of its orbit
under ``(pi, tau)``.  Because the identity ranking is the smallest ranking,
the minimum always starts with it, so the house relabeling must turn some
"pivot" agent's ranking into the identity.  Trying each pivot and sorting
the relabeled rows yields the minimum in ``O(n^2 log n)`` per pivot.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations_with_replacement, permutations, product
from math import factorial
from typing import Iterable, Iterator, Sequence

from .core import (
    FULL,
    RGT,
    Assignment,
    Perm,
    Profile,
    Rule,
    apply_perm,
    format_profile,
    permute_matrix,
)


class DomainTooLarge(ValueError):
    pass


class StabilizerConflict(ValueError):
    pass


@dataclass(frozen=True)
class CanonicalResult:
    canonical: Profile
    witnesses: tuple[tuple[Perm, Perm], ...]


def _pivot_candidates(R: Profile):
    """Yield ``(relabeled_sorted_rows, tau, relabeled_rows)`` for each pivot."""
    n = len(R)
    for a in range(n):
        tau = [0] * n
        for pos, h in enumerate(R[a]):
            tau[h] = pos
        rows = [tuple(tau[h] for h in p) for p in R]
        yield tuple(sorted(rows)), tuple(tau), rows


def canonical_form(R: Profile) -> Profile:
    """The lexicographically smallest profile in the orbit of ``R``."""
    return min(c for c, _, _ in _pivot_candidates(R))


def _sorting_perms(rows: Sequence[tuple], target: Profile) -> list[Perm]:
    """All agent permutations ``pi`` with ``target[pi[i]] == rows[i]``."""
    n = len(rows)
    slots: dict[tuple, list[int]] = {}
    for pos, row in enumerate(target):
        slots.setdefault(row, []).append(pos)
    groups = [[i for i in range(n) if rows[i] == row] for row in slots]
    out = []
    for choice in product(*(permutations(slots[row]) for row in slots)):
        pi = [0] * n
        for agents, positions in zip(groups, choice):
            for i, pos in zip(agents, positions):
                pi[i] = pos
        out.append(tuple(pi))
    return out


def canonical(R: Profile) -> CanonicalResult:
    best = canonical_form(R)
    witnesses: list[tuple[Perm, Perm]] = []
    seen_tau = set()
    for cand, tau, rows in _pivot_candidates(R):
        if cand != best or tau in seen_tau:
            continue
        seen_tau.add(tau)
        witnesses.extend((pi, tau) for pi in _sorting_perms(rows, best))
    return CanonicalResult(best, tuple(sorted(witnesses)))


def canonical_with_images(R: Profile, i: int) -> tuple[Profile, frozenset[int]]:
    """Canonical form of ``R`` and every position agent ``i`` can land on.

    Equivalent to collecting ``pi[i]`` over all witnesses, without building
    them: a witness exists for each optimal pivot and each placement of
    agent ``i``'s relabeled row among equal rows.
    """
    best = None
    images: set[int] = set()
    for cand, tau, rows in _pivot_candidates(R):
        if best is None or cand < best:
            best, images = cand, set()
        if cand == best:
            mine = rows[i]
            images.update(pos for pos, row in enumerate(cand) if row == mine)
    return best, frozenset(images)


@dataclass(frozen=True)
class ManipulatorImages:
    canonical: Profile
    agents: frozenset[int]


def canonical_for_agent(R: Profile, i: int) -> ManipulatorImages:
    c, imgs = canonical_with_images(R, i)
    return ManipulatorImages(c, imgs)


def canonical_brute_force(R: Profile) -> CanonicalResult:
    """Reference implementation over the whole ``(n!)^2`` group."""
    n = len(R)
    images = {}
    for pi in permutations(range(n)):
        for tau in permutations(range(n)):
            images.setdefault(apply_perm(R, pi, tau), []).append((pi, tau))
    best = min(images)
    return CanonicalResult(best, tuple(sorted(images[best])))


def stabilizer_size(R: Profile) -> int:
    return len(canonical(R).witnesses)


def orbit_size(R: Profile) -> int:
    n = len(R)
    return factorial(n) ** 2 // stabilizer_size(R)


def orbit(R: Profile) -> set[Profile]:
    n = len(R)
    return {apply_perm(R, pi, tau) for pi in permutations(range(n)) for tau in permutations(range(n))}


# -- domains -----------------------------------------------------------------

def in_rgt(R: Profile) -> bool:
    """Whether all agents share one ranking of the houses other than some ``x``."""
    n = len(R)
    for x in range(n):
        rest = [tuple(h for h in p if h != x) for p in R]
        if all(r == rest[0] for r in rest):
            return True
    return False


def rgt_profiles(n: int) -> list[Profile]:
    """The domain built from its definition: pick the odd house ``x``, a common
    ranking of the others, and where each agent inserts ``x``."""
    out = set()
    for x in range(n):
        others = [h for h in range(n) if h != x]
        for common in permutations(others):
            for slots in product(range(n), repeat=n):
                out.add(tuple(common[:s] + (x,) + common[s:] for s in slots))
    return sorted(out)


def rgt_moves(R: Profile) -> bool:
    """Looser reading: some ranking ``r`` from which each agent moves at most
    one (agent-specific) house."""
    n = len(R)
    for r in permutations(range(n)):
        if all(_one_move_away(p, r) for p in R):
            return True
    return False


def _one_move_away(p: Sequence[int], r: Sequence[int]) -> bool:
    if tuple(p) == tuple(r):
        return True
    for x in r:
        if [h for h in p if h != x] == [h for h in r if h != x]:
            return True
    return False


def full_size(n: int) -> int:
    return factorial(n) ** n


def canonical_full(n: int) -> Iterator[Profile]:
    """Canonical representatives of the full domain, in lexicographic order.

    Candidates have the identity as first row and the remaining rows sorted;
    only those equal to their own canonical form are kept.
    """
    prefs = list(permutations(range(n)))
    ident = prefs[0]
    for rest in combinations_with_replacement(prefs, n - 1):
        R = (ident,) + rest
        if canonical_form(R) == R:
            yield R


def enumerate_domain(n: int, kind: str = FULL, canonical_only: bool = False,
                     profiles: Iterable[Profile] | None = None) -> list[Profile]:
    """Profiles of a domain in lexicographic order.

    ``kind`` is ``"full"``, ``"rgt"``, or ``"explicit"`` (then ``profiles``
    lists the members).
    """
    if kind == FULL:
        if canonical_only:
            if n > 5:
                raise DomainTooLarge(f"canonical enumeration is limited to n <= 5, got {n}")
            return list(canonical_full(n))
        if n > 4:
            raise DomainTooLarge(
                f"the full domain at n={n} has {full_size(n)} profiles; use canonical mode")
        prefs = list(permutations(range(n)))
        return [tuple(R) for R in product(prefs, repeat=n)]
    if kind == RGT:
        if n > 5:
            raise DomainTooLarge(f"rgt enumeration is limited to n <= 5, got {n}")
        dom = rgt_profiles(n)
    elif kind == "explicit":
        dom = sorted(set(profiles or ()))
    else:
        raise ValueError(f"unknown domain kind {kind!r}")
    if canonical_only:
        return sorted({canonical_form(R) for R in dom})
    return dom


def expand_symmetric_rule(partial: Rule, domain: Iterable[Profile] | None = None) -> Rule:
    """Extend a rule given on canonical profiles to their full orbits.

    Raises :class:`StabilizerConflict` when an assignment is not invariant
    under the stabilizer of its profile.
    """
    n = partial.n
    table: dict[Profile, Assignment] = {}
    group = [(pi, tau) for pi in permutations(range(n)) for tau in permutations(range(n))]
    for R0, M0 in partial.table.items():
        for pi, tau in group:
            R = apply_perm(R0, pi, tau)
            M = permute_matrix(M0, pi, tau)
            prev = table.get(R)
            if prev is None:
                table[R] = M
            elif prev != M:
                raise StabilizerConflict(
                    f"profile {format_profile(R0)}: assignment not invariant under pi={pi}, tau={tau}")
    if domain is not None:
        wanted = set(domain)
        missing = wanted - table.keys()
        if missing:
            raise KeyError(f"{len(missing)} domain profiles not covered, e.g. {format_profile(min(missing))}")
        table = {R: table[R] for R in wanted}
    return Rule(n=n, table=table, domain=partial.domain, symmetric=False)
