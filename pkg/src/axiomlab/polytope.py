"""The strategyproof, support-efficient polytope and its vertices.

``P_n`` is cut out by the row/column sum, support and localizedness
equalities together with nonnegativity and nonperverseness inequalities over
the ``n^2 n!^n`` cells.  A point is a vertex exactly when its active rows
have full column rank.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations, product
from typing import Sequence

from .axioms import Verdict, check_nonbossy
from .constraints import (
    CellIndex,
    bistochastic_rows,
    localized_rows,
    nonneg_rows,
    nonperverse_rows,
    rsd_vector,
    support_rows,
)
from .core import FULL, Profile, Rule, format_profile, format_rational, permutation_matrix
from .linalg import EQ, ConstraintSystem, SparseRow, rank, solve_affine
from .lp import _optimize_reduced, _reduce, _Reduced, active_rows
from .mechanisms import sd_houses
from .symmetry import DomainTooLarge, enumerate_domain

MAX_POLYTOPE_N = 4


@dataclass
class Polytope:
    n: int
    cells: CellIndex
    system: ConstraintSystem
    _reduced: _Reduced | None = field(default=None, repr=False)

    @property
    def dimension(self) -> int:
        return self.cells.ncols

    def reduced(self) -> _Reduced:
        if self._reduced is None:
            self._reduced = _reduce(self.system, nonneg=False)
        return self._reduced


def build_polytope(n: int) -> Polytope:
    if not 1 <= n <= MAX_POLYTOPE_N:
        raise DomainTooLarge(f"polytope construction supports 1 <= n <= {MAX_POLYTOPE_N}, got {n}")
    cells = CellIndex(n, enumerate_domain(n))
    rows = (bistochastic_rows(cells) + support_rows(cells) + localized_rows(cells)
            + nonneg_rows(cells) + nonperverse_rows(cells))
    return Polytope(n, cells, ConstraintSystem(cells.ncols, rows))


def rule_vector(poly: Polytope, f: Rule) -> list[Fraction]:
    return poly.cells.vector(f)


def _describe_row(poly: Polytope, k: int) -> dict:
    row = poly.system.rows[k]
    terms = []
    for c, v in row.entries[:8]:
        R, i, h = poly.cells.label(c)
        terms.append({"profile": format_profile(R), "agent": i, "house": h, "coef": format_rational(v)})
    return {"row": k, "relation": row.relation, "rhs": format_rational(row.rhs), "terms": terms}


def is_member(poly: Polytope, x: Sequence[Fraction]) -> Verdict:
    if len(x) != poly.dimension:
        raise ValueError(f"vector has {len(x)} coordinates, polytope has {poly.dimension}")
    bad = poly.system.first_violation(x)
    if bad is None:
        return Verdict("polytope_member", True, None)
    return Verdict("polytope_member", False, _describe_row(poly, bad))


@dataclass
class VertexCertificate:
    point: list[Fraction]
    active_rank: int
    dimension: int
    is_vertex: bool
    deterministic: bool
    round: int | None = None
    seed: int | None = None

    def to_json(self, cells: CellIndex | None = None) -> dict:
        out = {"active_rank": self.active_rank, "dimension": self.dimension,
               "is_vertex": self.is_vertex, "deterministic": self.deterministic,
               "round": self.round, "seed": self.seed}
        if cells is not None:
            out["rule"] = cells.rule(self.point).to_json()
        else:
            out["point"] = [format_rational(v) for v in self.point]
        return out


def certify_vertex(poly: Polytope, x: Sequence[Fraction]) -> VertexCertificate:
    verdict = is_member(poly, x)
    if not verdict.holds:
        raise ValueError(f"point is not in the polytope: {verdict.witness}")
    active = active_rows(poly.system, x)
    r = rank(poly.system.rows[k] for k in active)
    return VertexCertificate(list(x), r, poly.dimension, r == poly.dimension,
                             all(v in (0, 1) for v in x))


def resolve_active(poly: Polytope, x: Sequence[Fraction]) -> list[Fraction] | None:
    """Unique solution of the active rows taken as equalities, if unique."""
    rows = [poly.system.rows[k] for k in active_rows(poly.system, x)]
    eqs = [SparseRow(r.entries, EQ, r.rhs) for r in rows]
    aff = solve_affine(poly.dimension, eqs)
    if aff.free:
        return None
    return aff.point([])


OBJECTIVES = ("dense", "sparse", "free")


def _objective(poly: Polytope, rnd: random.Random, kind: str) -> dict[int, Fraction]:
    """Random objective over the free coordinates of the reduced system.

    ``dense``: an integer in [-999, 999] on every cell.  ``sparse``: such
    integers on 1..20 random cells.  ``free``: integers on the free
    coordinates of the equality system directly.
    """
    red = poly.reduced()
    if kind == "free":
        return {j: Fraction(rnd.randint(-999, 999)) for j in range(len(red.aff.free))}
    ncols = poly.dimension
    if kind == "dense":
        items = [(c, Fraction(rnd.randint(-999, 999))) for c in range(ncols)]
    elif kind == "sparse":
        items = [(rnd.randrange(ncols), Fraction(rnd.randint(-999, 999)))
                 for _ in range(rnd.randint(1, 20))]
    else:
        raise ValueError(f"unknown objective kind {kind!r}")
    pos = {c: j for j, c in enumerate(red.aff.free)}
    _, g = red.aff.substitute(items)
    return {pos[c]: v for c, v in g.items()}


def random_vertex_search(poly: Polytope, seed: int, max_rounds: int,
                         objective: str = "dense", budget: float | None = None,
                         stop_at_first: bool = False) -> list[VertexCertificate]:
    """Optimize seeded random objectives from the RSD point; certify each endpoint.

    Returns one certificate per completed round in round order.
    """
    red = poly.reduced()
    x0 = rsd_vector(poly.cells)
    y0 = [x0[c] for c in red.aff.free]
    rnd = random.Random(seed)
    start = time.monotonic()
    out: list[VertexCertificate] = []
    for r in range(max_rounds):
        if budget is not None and time.monotonic() - start > budget:
            break
        obj = _objective(poly, rnd, objective)
        y, _, _ = _optimize_reduced(red, obj, y0)
        cert = certify_vertex(poly, red.aff.point(y))
        cert.round, cert.seed = r, seed
        out.append(cert)
        if stop_at_first and not cert.deterministic:
            break
    return out


# -- extension to more agents -------------------------------------------------

def extend_counterexample(g: Rule, n: int, profiles: Sequence[Profile] | None = None) -> Rule:
    """SD with the identity order on the first ``n - m`` agents, then ``g``.

    The remaining houses are relabeled to ``0..m-1`` in increasing order and
    the last ``m`` agents' rankings are restricted to them.  ``profiles``
    defaults to the full ``n``-agent domain.
    """
    m = g.n
    if m > n:
        raise ValueError(f"cannot extend a rule on {m} houses to {n}")
    if profiles is None:
        profiles = enumerate_domain(n)
    k = n - m
    table = {}
    for R in profiles:
        taken = sd_houses(R, tuple(range(k)) + tuple(range(k, n)))[:k]
        rest = sorted(set(range(n)) - set(taken))
        local = {h: j for j, h in enumerate(rest)}
        sub = tuple(tuple(local[h] for h in R[i] if h in local) for i in range(k, n))
        G = g(sub)
        M = [[Fraction(0)] * n for _ in range(n)]
        for i, h in enumerate(taken):
            M[i][h] = Fraction(1)
        for a in range(m):
            for j, h in enumerate(rest):
                M[k + a][h] = G[a][j]
        table[R] = tuple(tuple(r) for r in M)
    return Rule(n=n, table=table, domain=FULL if len(table) == len(enumerate_domain(n)) else "explicit")


def proof_subdomain(m: int, n: int) -> list[Profile]:
    """The first ``n - m`` agents report the identity; every agent ranks
    houses ``0..n-m-1`` on top in that order."""
    k = n - m
    top = tuple(range(k))
    tails = list(permutations(range(k, n)))
    out = []
    for rest in product(tails, repeat=m):
        out.append(tuple([tuple(range(n))] * k + [top + t for t in rest]))
    return sorted(out)


def restrict_to_suffix(f: Rule, m: int, profiles: Sequence[Profile]) -> Rule:
    """Read off the last ``m`` agents on houses ``n-m..n-1``, relabeled to ``0..m-1``."""
    n = f.n
    k = n - m
    table = {}
    for R in profiles:
        sub = tuple(tuple(h - k for h in R[i][k:]) for i in range(k, n))
        M = f(R)
        table[sub] = tuple(tuple(M[i][k + j] for j in range(m)) for i in range(k, n))
    return Rule(n=m, table=table, domain="explicit")


# -- non-bossiness is not convex ----------------------------------------------

def pick_rank_houses(R: Profile, agent: int, k: int, descending: bool = False) -> tuple[int, ...]:
    """``agent`` gets her ``k``-th ranked house; the others fill the remaining
    houses in agent order, houses taken in increasing (or decreasing) order."""
    n = len(R)
    out = [0] * n
    out[agent] = R[agent][k]
    rest = sorted(set(range(n)) - {out[agent]}, reverse=descending)
    for j, h in zip([a for a in range(n) if a != agent], rest):
        out[j] = h
    return tuple(out)


def _library(n: int) -> list[tuple[str, object]]:
    """Deterministic non-bossy candidates: serial dictatorships and pick-rank rules.

    Two strategyproof deterministic rules can never cancel a deviator's change
    (each would prefer the other's house), so manipulable rules are needed.
    """
    lib: list[tuple[str, object]] = []
    for o in permutations(range(n)):
        lib.append((f"sd{list(o)}", lambda R, o=o: sd_houses(R, o)))
    for a in range(n):
        for k in range(n):
            for desc in (False, True):
                name = f"pick(agent={a},rank={k},{'desc' if desc else 'asc'})"
                lib.append((name, lambda R, a=a, k=k, d=desc: pick_rank_houses(R, a, k, d)))
    return lib


def _as_rule(n: int, fn, profiles) -> Rule:
    return Rule(n=n, table={R: permutation_matrix(fn(R)) for R in profiles})


@dataclass
class BossinessMixture:
    rules: tuple[str, str]
    profile: Profile
    deviation: Profile
    agent: int
    affected: int
    mixture: Rule | None = field(default=None, repr=False)
    components: tuple[Rule, Rule] | None = field(default=None, repr=False)

    def to_json(self) -> dict:
        return {"rules": list(self.rules), "profile": format_profile(self.profile),
                "deviation": format_profile(self.deviation), "agent": self.agent,
                "affected": self.affected}


def mixture(f1: Rule, f2: Rule, w: Fraction = Fraction(1, 2)) -> Rule:
    table = {}
    for R in f1.profiles():
        A, B = f1(R), f2(R)
        table[R] = tuple(tuple(w * a + (1 - w) * b for a, b in zip(ra, rb)) for ra, rb in zip(A, B))
    return Rule(n=f1.n, table=table, domain=f1.domain)


def find_bossy_mixture(n: int = 3) -> BossinessMixture | None:
    """Two non-bossy deterministic rules whose even mixture is bossy.

    Exhaustive over pairs from :func:`_library`, profiles and deviations.  A
    deviation qualifies when the deviator's lottery is unchanged in the
    mixture while another agent's lottery moves.
    """
    dom = enumerate_domain(n)
    prefs = list(permutations(range(n)))
    lib = [(name, {R: fn(R) for R in dom}) for name, fn in _library(n)]
    for (n1, A), (n2, B) in product(lib, repeat=2):
        if n1 >= n2:
            continue
        for R in dom:
            for i in range(n):
                for p in prefs:
                    if p == R[i]:
                        continue
                    R2 = R[:i] + (p,) + R[i + 1:]
                    if sorted((A[R][i], B[R][i])) != sorted((A[R2][i], B[R2][i])):
                        continue
                    for j in range(n):
                        if j != i and sorted((A[R][j], B[R][j])) != sorted((A[R2][j], B[R2][j])):
                            fns = dict(_library(n))
                            f1, f2 = _as_rule(n, fns[n1], dom), _as_rule(n, fns[n2], dom)
                            return BossinessMixture((n1, n2), R, R2, i, j, mixture(f1, f2), (f1, f2))
    return None


def verify_bossy_mixture(ex: BossinessMixture) -> dict:
    f1, f2 = ex.components
    mix = ex.mixture
    return {"rule_1_nonbossy": check_nonbossy(f1).holds,
            "rule_2_nonbossy": check_nonbossy(f2).holds,
            "mixture_nonbossy": check_nonbossy(mix).holds,
            "deviator_row_fixed": mix(ex.profile)[ex.agent] == mix(ex.deviation)[ex.agent],
            "other_row_moves": mix(ex.profile)[ex.affected] != mix(ex.deviation)[ex.affected]}
