"""Transcribed rules and the pipelines that re-verify them.

Fixtures are JSON rule files.  Tables carry a ``gray`` mask marking the cells
where the printed rule differs from RSD; loading checks that the mask and
the actual differences coincide, which catches transcription slips.

* ``dep_vertex_n3``: a strategyproof, ex post efficient rule on all 216
  profiles for three agents that is a vertex of the polytope but not
  deterministic.
* ``rgt_rule_n4``: the five canonical profiles of the single-odd-house
  domain at four agents where an alternative rule departs from RSD.
* ``support_not_expost_n4``: a four-agent assignment that is support
  efficient but not ex post efficient.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path

from .axioms import (
    check_bistochastic,
    check_equal_treatment,
    check_ex_post_efficiency,
    check_strategyproof_direct,
    check_support_efficiency,
    check_symmetric,
    decompose_ex_post,
)
from .core import (
    RGT,
    Assignment,
    Profile,
    Rule,
    format_profile,
    make_assignment,
    parse_profile,
    permute_matrix,
)
from .mechanisms import rsd
from .polytope import build_polytope, certify_vertex, is_member, rule_vector
from .symmetry import (
    canonical,
    canonical_form,
    enumerate_domain,
    expand_symmetric_rule,
    in_rgt,
    rgt_profiles,
)

DATA_ENV = "AXIOMLAB_DATA_DIR"

FIXTURES = ("dep_vertex_n3", "rgt_rule_n4", "support_not_expost_n4")


class FixtureError(ValueError):
    pass


def data_dir() -> Path:
    override = os.environ.get(DATA_ENV)
    if override:
        return Path(override)
    return Path(str(resources.files("axiomlab") / "data"))


def load_fixture_json(name: str) -> dict:
    path = data_dir() / f"{name}.json"
    if not path.exists():
        raise FixtureError(f"fixture {name!r} not found in {path.parent}")
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


@dataclass
class NamedFixture:
    name: str
    provenance: str
    rule: Rule | None = None
    profile: Profile | None = None
    matrix: Assignment | None = None
    gray: dict[Profile, tuple[tuple[bool, ...], ...]] = field(default_factory=dict)
    order: list[Profile] = field(default_factory=list)


def gray_mismatches(fx: NamedFixture) -> list[tuple[Profile, int, int]]:
    """Cells where the gray mask disagrees with "differs from RSD"."""
    bad = []
    for R, mask in fx.gray.items():
        M, X = fx.rule(R), rsd(R)
        for i, row in enumerate(mask):
            for h, g in enumerate(row):
                if g != (M[i][h] != X[i][h]):
                    bad.append((R, i, h))
    return bad


def load_fixture(name: str, validate: bool = True) -> NamedFixture:
    data = load_fixture_json(name)
    fx = NamedFixture(name=data.get("name", name), provenance=data.get("provenance", ""))
    if "entries" in data:
        fx.rule = Rule.from_json(data)
        n = fx.rule.n
        fx.gray = {parse_profile(p, n): tuple(tuple(bool(v) for v in row) for row in g)
                   for p, g in data.get("gray", {}).items()}
        fx.order = [parse_profile(p, n) for p in data.get("order", [])]
        if validate:
            bad = gray_mismatches(fx)
            if bad:
                R, i, h = bad[0]
                raise FixtureError(f"{name}: gray mask wrong at {format_profile(R)} agent {i} house {h}"
                                   f" ({len(bad)} cells)")
    else:
        fx.profile = parse_profile(data["profile"])
        fx.matrix = make_assignment(data["matrix"])
    return fx


# -- reports ------------------------------------------------------------------

@dataclass
class PipelineReport:
    name: str
    stages: list[dict] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return bool(self.stages) and all(s["holds"] for s in self.stages)

    def add(self, stage: str, holds: bool, **detail) -> bool:
        self.stages.append({"stage": stage, "holds": bool(holds), **detail})
        return holds

    def to_json(self) -> dict:
        return {"pipeline": self.name, "ok": self.ok, "stages": self.stages}

    def lines(self) -> list[str]:
        out = []
        for s in self.stages:
            extra = {k: v for k, v in s.items() if k not in ("stage", "holds")}
            out.append(f"{'PASS' if s['holds'] else 'FAIL'} {s['stage']}" + (f" {extra}" if extra else ""))
        return out


# -- the non-deterministic vertex at n = 3 --------------------------------------

@lru_cache(maxsize=None)
def _dep_fixture() -> NamedFixture:
    return load_fixture("dep_vertex_n3")


def dep_vertex_rule() -> Rule:
    fx = _dep_fixture()
    return Rule(n=fx.rule.n, table=dict(fx.rule.table), domain=fx.rule.domain)


def verify_dep_vertex(rule: Rule | None = None) -> PipelineReport:
    """Bistochastic, strategyproof, ex post efficient, in the polytope, and a
    non-deterministic vertex.  Stops at the first failing stage."""
    f = rule if rule is not None else dep_vertex_rule()
    rep = PipelineReport("dep_vertex")
    for stage, check in (("bistochastic", check_bistochastic),
                         ("strategyproof", check_strategyproof_direct),
                         ("ex_post_efficient", check_ex_post_efficiency)):
        v = check(f)
        if not rep.add(stage, v.holds, witness=v.witness):
            return rep
    poly = build_polytope(f.n)
    x = rule_vector(poly, f)
    v = is_member(poly, x)
    if not rep.add("polytope_member", v.holds, witness=v.witness):
        return rep
    cert = certify_vertex(poly, x)
    rep.add("non_deterministic_vertex", cert.is_vertex and not cert.deterministic,
            active_rank=cert.active_rank, dimension=cert.dimension,
            is_vertex=cert.is_vertex, deterministic=cert.deterministic)
    return rep


# -- the single-odd-house domain at n = 4 -------------------------------------

@lru_cache(maxsize=None)
def _rgt_fixture() -> NamedFixture:
    return load_fixture("rgt_rule_n4")


def rgt_listed_canonical() -> dict[Profile, Assignment]:
    """The listed tables moved to their canonical representatives."""
    out = {}
    for R, M in _rgt_fixture().rule.table.items():
        res = canonical(R)
        pi, tau = res.witnesses[0]
        out[res.canonical] = permute_matrix(M, pi, tau)
    return out


@lru_cache(maxsize=None)
def _subdomain_rule() -> Rule:
    n = _rgt_fixture().rule.n
    dom = rgt_profiles(n)
    partial = dict(rgt_listed_canonical())
    for c in sorted({canonical_form(R) for R in dom}):
        partial.setdefault(c, rsd(c))
    return expand_symmetric_rule(Rule(n=n, table=partial, domain=RGT), dom)


def subdomain_rule() -> Rule:
    f = _subdomain_rule()
    return Rule(n=f.n, table=dict(f.table), domain=f.domain)


class _RsdCompleted(Rule):
    """A rule answering RSD outside its table; its own profiles stay the table's."""

    def __call__(self, R: Profile) -> Assignment:
        M = self.table.get(R)
        return M if M is not None else rsd(R)

    def __contains__(self, R: Profile) -> bool:
        return True


def verify_subdomain(rule: Rule | None = None, leave_domain: bool = False) -> PipelineReport:
    """ETE, strategyproofness and ex post efficiency on the domain, and a
    difference from RSD on exactly the listed canonical classes.

    With ``leave_domain`` the misreports may leave the domain, answered by
    RSD there; that variant is informational.
    """
    f = rule if rule is not None else subdomain_rule()
    n = f.n
    rep = PipelineReport("subdomain" + ("_leaving" if leave_domain else ""))
    built = rgt_profiles(n)
    filtered = [R for R in enumerate_domain(n) if in_rgt(R)] if n <= 4 else built
    rep.add("domain_size", built == filtered and sorted(f.table) == built,
            constructed=len(built), filtered=len(filtered), rule_profiles=len(f.table))
    listed = _rgt_fixture().order if rule is None else []
    rep.add("listed_profiles_in_domain", all(in_rgt(R) for R in listed), listed=len(listed))
    target = _RsdCompleted(n=n, table=f.table, domain=f.domain) if leave_domain else f
    for stage, check in (("equal_treatment", check_equal_treatment),
                         ("strategyproof", check_strategyproof_direct),
                         ("ex_post_efficient", check_ex_post_efficiency)):
        v = check(target) if stage == "strategyproof" else check(f)
        rep.add(stage, v.holds, witness=v.witness)
    v = check_symmetric(f)
    rep.add("symmetric_within_domain", v.holds, witness=v.witness)
    diff = sorted({canonical_form(R) for R in f.profiles() if f(R) != rsd(R)})
    rep.add("differs_from_rsd", bool(diff), differing_classes=len(diff),
            classes=[format_profile(R) for R in diff])
    if rule is None:
        rep.add("exactly_listed_classes_differ", set(diff) == set(rgt_listed_canonical()),
                expected=len(rgt_listed_canonical()))
    return rep


# -- support efficiency without ex post efficiency ------------------------------

def example_support_not_expost() -> tuple[Profile, Assignment]:
    fx = load_fixture("support_not_expost_n4")
    return fx.profile, fx.matrix


def verify_support_example() -> PipelineReport:
    R, M = example_support_not_expost()
    single = Rule(n=len(R), table={R: M}, domain="explicit")
    rep = PipelineReport("support_not_expost")
    rep.add("bistochastic", check_bistochastic(single).holds)
    rep.add("support_efficient", check_support_efficiency(single).holds)
    rep.add("not_ex_post_efficient", decompose_ex_post(R, M) is None)
    return rep


__all__ = [
    "DATA_ENV", "FIXTURES", "FixtureError", "NamedFixture", "PipelineReport",
    "data_dir", "dep_vertex_rule", "example_support_not_expost", "gray_mismatches",
    "load_fixture", "load_fixture_json", "rgt_listed_canonical", "subdomain_rule",
    "verify_dep_vertex", "verify_subdomain", "verify_support_example",
]
