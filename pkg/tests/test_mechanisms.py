import random
from fractions import Fraction
from itertools import permutations

import pytest

from axiomlab.core import parse_profile, permutation_matrix
from axiomlab.mechanisms import (
    efficient_assignments,
    efficient_house_vectors,
    is_efficient,
    pareto_dominates,
    rsd,
    rsd_recursive,
    rsd_support,
    serial_dictatorship,
)
from axiomlab.symmetry import enumerate_domain

import oracles


def test_sd_identity_order():
    R = parse_profile("012|012|012")
    assert serial_dictatorship(R, (0, 1, 2)) == permutation_matrix((0, 1, 2))


def test_sd_reversed_order():
    R = parse_profile("012|012|012")
    assert serial_dictatorship(R, (2, 1, 0)) == permutation_matrix((2, 1, 0))


def test_sd_hand_simulation():
    # agent 1 takes h1, agent 2 then takes h2, agent 0 is left with h0
    R = parse_profile("012|102|120")
    assert serial_dictatorship(R, (1, 2, 0)) == permutation_matrix((0, 1, 2))


def test_rsd_identical_prefs_uniform():
    assert all(v == Fraction(1, 3) for row in rsd(parse_profile("012|012|012")) for v in row)


def test_rsd_opposed_tops_identity():
    assert rsd(parse_profile("01|10")) == permutation_matrix((0, 1))


@pytest.mark.parametrize("n", [2, 3])
def test_rsd_matches_oracle_everywhere(n):
    for R in enumerate_domain(n):
        assert [list(r) for r in rsd(R)] == oracles.rsd(R)


def test_rsd_recursive_agrees_at_n4():
    rnd = random.Random(5)
    prefs = list(permutations(range(4)))
    for _ in range(60):
        R = tuple(rnd.choice(prefs) for _ in range(4))
        assert rsd(R) == rsd_recursive(R)
        assert [list(r) for r in rsd(R)] == oracles.rsd(R)


def test_efficient_identical_prefs_all_six():
    assert len(efficient_assignments(parse_profile("012|012|012"))) == 6


def test_efficient_opposed_tops_unique():
    assert efficient_house_vectors(parse_profile("01|10")) == [(0, 1)]


@pytest.mark.parametrize("n", [2, 3])
def test_efficient_set_matches_pareto_oracle(n):
    for R in enumerate_domain(n):
        assert set(efficient_house_vectors(R)) == oracles.efficient(R)


def test_efficient_set_matches_oracle_n4_sample():
    rnd = random.Random(11)
    prefs = list(permutations(range(4)))
    for _ in range(30):
        R = tuple(rnd.choice(prefs) for _ in range(4))
        assert set(efficient_house_vectors(R)) == oracles.efficient(R)
        assert all(is_efficient(R, v) for v in efficient_house_vectors(R))


def test_support_patterns():
    assert all(all(r) for r in rsd_support(parse_profile("012|012|012")))
    assert rsd_support(parse_profile("01|10")) == ((True, False), (False, True))
    # every house reaches every agent in the four-agent example profile
    assert all(all(r) for r in rsd_support(parse_profile("0123|0123|1023|1023")))


@pytest.mark.parametrize("n", [2, 3])
def test_support_matches_oracle(n):
    for R in enumerate_domain(n):
        assert [list(r) for r in rsd_support(R)] == oracles.support(R)


def test_pareto_dominates_cases():
    R = parse_profile("012|012|012")
    M = permutation_matrix((0, 1, 2))
    assert not pareto_dominates(R, M, M)
    assert not pareto_dominates(R, permutation_matrix((1, 0, 2)), M)
    R2 = parse_profile("01|10")
    assert pareto_dominates(R2, permutation_matrix((0, 1)), permutation_matrix((1, 0)))
