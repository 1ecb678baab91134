from fractions import Fraction
from itertools import permutations

import pytest

from axiomlab.axioms import (
    CHECKS,
    check_bistochastic,
    check_equal_treatment,
    check_ex_post_efficiency,
    check_localized,
    check_nonbossy,
    check_nonperverse,
    check_strategyproof_direct,
    check_support_efficiency,
    check_symmetric,
    decompose_ex_post,
)
from axiomlab.core import Rule, make_assignment, parse_profile, permutation_matrix, uniform_matrix
from axiomlab.corpus import dep_vertex_rule, example_support_not_expost
from axiomlab.mechanisms import efficient_assignments, rsd, rsd_rule, sd_rule
from axiomlab.symmetry import enumerate_domain

import oracles

DOM3 = enumerate_domain(3)


@pytest.fixture(scope="module")
def rsd3():
    return rsd_rule(3, DOM3)


def with_entry(f, R, M):
    table = dict(f.table)
    table[R] = make_assignment(M)
    return Rule(n=f.n, table=table, domain=f.domain)


def two_agent_remark_rule():
    # agent 0 gets house 0 at both opposed-top profiles, RSD elsewhere
    f = rsd_rule(2, enumerate_domain(2))
    eye = [[1, 0], [0, 1]]
    return with_entry(with_entry(f, parse_profile("01|10"), eye), parse_profile("10|01"), eye)


def test_rsd_all_axioms_n3(rsd3):
    for name, check in CHECKS.items():
        assert check(rsd3).holds, name


def test_ete_remark_rule_holds():
    assert check_equal_treatment(two_agent_remark_rule()).holds


def test_symmetry_remark_rule_fails():
    v = check_symmetric(two_agent_remark_rule())
    assert not v.holds and v.witness["profile"] in ("01|10", "10|01")


def test_ete_failure_witness(rsd3):
    R = parse_profile("012|012|120")
    f = with_entry(rsd3, R, [[1, 0, 0], [0, 1, 0], [0, 0, 1]])
    v = check_equal_treatment(f)
    assert not v.holds
    assert v.witness["profile"] == "012|012|120" and v.witness["agents"] == [0, 1]


def test_support_off_support_mass():
    f = rsd_rule(2, enumerate_domain(2))
    f = with_entry(f, parse_profile("01|10"), [[0, 1], [1, 0]])
    v = check_support_efficiency(f)
    assert not v.holds and v.witness["house"] in (0, 1)


def test_example_pair_support_but_not_expost():
    R, M = example_support_not_expost()
    single = Rule(n=4, table={R: M}, domain="explicit")
    assert check_support_efficiency(single).holds
    assert decompose_ex_post(R, M) is None
    assert not check_ex_post_efficiency(single).holds


def test_decompose_rsd_is_exact():
    R = parse_profile("012|102|120")
    d = decompose_ex_post(R, rsd(R))
    assert d is not None and d.matrix() == rsd(R)
    assert sum(w for _, w in d.parts) == 1


def test_decompose_deterministic_efficient():
    R = parse_profile("012|102|120")
    P = efficient_assignments(R)[0]
    d = decompose_ex_post(R, P)
    assert len(d.parts) == 1 and d.parts[0] == (P, Fraction(1))


def test_decompose_lp_path_reconstructs():
    R = parse_profile("012|012|012")
    M = make_assignment([["1/2", "1/2", 0], ["1/2", 0, "1/2"], [0, "1/2", "1/2"]])
    d = decompose_ex_post(R, M)
    assert d is not None and d.matrix() == M


def test_localized_perturbation_fails(rsd3):
    # move mass between the two houses ranked 0 and 1, visible from a swap at 1,2
    R = parse_profile("012|120|201")
    M = [list(r) for r in rsd(R)]
    M[0][0] -= Fraction(1, 10)
    M[0][1] += Fraction(1, 10)
    M[1][0] += Fraction(1, 10)
    M[1][1] -= Fraction(1, 10)
    v = check_localized(with_entry(rsd3, R, M))
    assert not v.holds


def test_nonperverse_raising_demoted_house_fails():
    dom = enumerate_domain(2)
    f = rsd_rule(2, dom)
    # after agent 0 moves house 0 down, give it house 0 for sure
    f = with_entry(f, parse_profile("01|01"), [["1/2", "1/2"], ["1/2", "1/2"]])
    f = with_entry(f, parse_profile("10|01"), [[1, 0], [0, 1]])
    v = check_nonperverse(f)
    assert not v.holds


def test_sd_fixed_order_nonperverse_and_sp():
    f = sd_rule(3, (2, 0, 1), DOM3)
    assert check_nonperverse(f).holds and check_strategyproof_direct(f).holds


def test_sp_failure_when_misreport_rewarded(rsd3):
    R2 = parse_profile("102|012|012")
    f = with_entry(rsd3, R2, [[1, 0, 0], [0, "1/2", "1/2"], [0, "1/2", "1/2"]])
    v = check_strategyproof_direct(f)
    assert not v.holds and v.witness["agent"] == 0


def test_sp_matches_oracle_on_dep_rule():
    f = dep_vertex_rule()
    assert check_strategyproof_direct(f).holds
    for R in DOM3[::7]:
        for i in range(3):
            assert oracles.sd_strategyproof(f.table, R, i, f.table)


def test_dep_rule_fails_ete():
    v = check_equal_treatment(dep_vertex_rule())
    assert not v.holds and v.witness["profile"] == "012|012|021"


def test_uniform_rule_symmetric():
    f = Rule(n=3, table={R: uniform_matrix(3) for R in DOM3})
    assert check_symmetric(f).holds


def test_bistochastic_detects_bad_matrix():
    R = parse_profile("01|10")
    bad = ((Fraction(1), Fraction(0)), (Fraction(1), Fraction(0)))
    f = Rule(n=2, table={R: bad}, domain="explicit")
    assert not check_bistochastic(f).holds


def test_nonbossy_rsd_agrees_with_brute_force():
    table = {R: oracles.rsd(R) for R in DOM3}
    bossy = [(R, i, p) for R in DOM3 for i in range(3) for p in permutations(range(3))
             if table[R][i] == table[R[:i] + (p,) + R[i + 1:]][i]
             and table[R] != table[R[:i] + (p,) + R[i + 1:]]]
    assert check_nonbossy(rsd_rule(3, DOM3)).holds == (not bossy)


def test_nonbossy_detects_planted_case():
    f = sd_rule(3, (0, 1, 2), DOM3)
    # agent 2 keeps its row but agents 0 and 1 trade
    R2 = parse_profile("012|012|210")
    f = with_entry(f, R2, [[0, 1, 0], [1, 0, 0], [0, 0, 1]])
    v = check_nonbossy(f)
    assert not v.holds and v.witness["agent"] == 2


def test_sd_is_nonbossy():
    assert check_nonbossy(sd_rule(3, (0, 1, 2), DOM3)).holds


def test_verdict_json():
    v = check_support_efficiency(Rule(n=2, table={parse_profile("01|10"): permutation_matrix((0, 1))}))
    assert v.to_json() == {"axiom": "support_efficiency", "holds": True, "witness": None}
