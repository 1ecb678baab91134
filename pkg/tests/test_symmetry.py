import random
from fractions import Fraction
from itertools import permutations

import pytest

from axiomlab.core import Rule, apply_perm, parse_profile, permute_matrix
from axiomlab.mechanisms import rsd
from axiomlab.symmetry import (
    DomainTooLarge,
    StabilizerConflict,
    canonical,
    canonical_brute_force,
    canonical_for_agent,
    canonical_form,
    enumerate_domain,
    expand_symmetric_rule,
    in_rgt,
    orbit,
    orbit_size,
    rgt_profiles,
    stabilizer_size,
)

import oracles


def test_canonical_fixed_point():
    R = parse_profile("01|10")
    res = canonical(R)
    assert res.canonical == R
    assert ((0, 1), (0, 1)) in res.witnesses


def test_canonical_relabels_houses():
    R = parse_profile("10|01")
    res = canonical(R)
    assert res.canonical == parse_profile("01|10") == oracles.canonical(R)
    for pi, tau in res.witnesses:
        assert apply_perm(R, pi, tau) == res.canonical


@pytest.mark.parametrize("n", [2, 3])
def test_canonical_matches_full_group(n):
    for R in enumerate_domain(n):
        assert canonical_form(R) == oracles.canonical(R)
        fast, slow = canonical(R), canonical_brute_force(R)
        assert fast.canonical == slow.canonical
        assert sorted(fast.witnesses) == sorted(slow.witnesses)


def test_canonical_matches_full_group_n4_sample():
    rnd = random.Random(3)
    prefs = list(permutations(range(4)))
    for _ in range(40):
        R = tuple(rnd.choice(prefs) for _ in range(4))
        assert canonical_form(R) == oracles.canonical(R)


def test_images_singleton_for_distinct_rows():
    R = canonical_form(parse_profile("012|120|201"))
    assert len(set(R)) == 3
    for i in range(3):
        out = canonical_for_agent(R, i)
        assert out.canonical == R
        # a 3-cycle of houses can still move agents, so compare against the witnesses
        assert out.agents == frozenset(pi[i] for pi, _ in canonical(R).witnesses)


def test_images_include_equal_agents():
    R = parse_profile("012|012|021")
    assert {0, 1} <= canonical_for_agent(R, 0).agents


def test_images_are_witness_images_everywhere_n3():
    for R in enumerate_domain(3):
        wit = canonical(R).witnesses
        for i in range(3):
            assert canonical_for_agent(R, i).agents == frozenset(pi[i] for pi, _ in wit)


def test_domain_sizes():
    assert len(enumerate_domain(2)) == 4
    assert len(enumerate_domain(3)) == 216
    assert len(enumerate_domain(4)) == 331776
    assert len(enumerate_domain(4, canonical_only=True)) == 762


@pytest.mark.parametrize("n", [2, 3])
def test_canonical_enumeration_equals_image_of_full(n):
    reps = enumerate_domain(n, canonical_only=True)
    assert set(reps) == {oracles.canonical(R) for R in oracles.full_domain(n)}


@pytest.mark.parametrize("n", [2, 3, 4])
def test_orbit_partition(n):
    from math import factorial
    assert sum(orbit_size(R) for R in enumerate_domain(n, canonical_only=True)) == factorial(n) ** n


def test_stabilizer_brute_force():
    R = parse_profile("012|012|012")
    fixing = [(pi, tau) for pi in permutations(range(3)) for tau in permutations(range(3))
              if oracles.act(R, pi, tau) == R]
    assert stabilizer_size(R) == len(fixing) == 6
    assert orbit_size(R) == 6 == len(orbit(R))


def test_orbit_size_generic():
    R = parse_profile("012|120|021")
    k = sum(oracles.act(R, pi, tau) == R for pi in permutations(range(3))
            for tau in permutations(range(3)))
    assert orbit_size(R) == 36 // k == len(orbit(R))


def test_guards():
    with pytest.raises(DomainTooLarge):
        enumerate_domain(5)
    with pytest.raises(DomainTooLarge):
        enumerate_domain(6, canonical_only=True)


@pytest.mark.parametrize("n", [2, 3])
def test_expand_rsd_reproduces_rsd(n):
    part = Rule(n=n, table={c: rsd(c) for c in enumerate_domain(n, canonical_only=True)})
    full = expand_symmetric_rule(part)
    assert set(full.table) == set(enumerate_domain(n))
    assert all(full(R) == rsd(R) for R in enumerate_domain(n))


def test_expand_rejects_stabilizer_violation():
    R = parse_profile("012|012|012")
    bad = tuple(tuple(Fraction(v) for v in row) for row in ((1, 0, 0), (0, 1, 0), (0, 0, 1)))
    part = {c: rsd(c) for c in enumerate_domain(3, canonical_only=True)}
    part[R] = bad
    with pytest.raises(StabilizerConflict, match="012"):
        expand_symmetric_rule(Rule(n=3, table=part))


def test_permute_matrix_consistent_with_expand():
    R = parse_profile("012|120|021")
    M = rsd(R)
    for pi, tau in canonical(R).witnesses:
        assert permute_matrix(M, pi, tau) == rsd(canonical_form(R))


def test_rgt_domain_construction_agrees_with_filter():
    built = rgt_profiles(4)
    assert len(built) == 5568
    assert built == [R for R in enumerate_domain(4) if in_rgt(R)]
    assert len({canonical_form(R) for R in built}) == 29
    # closed under the group action
    assert all(in_rgt(apply_perm(R, (1, 2, 3, 0), (3, 1, 0, 2))) for R in built[::97])
