"""Exact rational linear programming.

Equalities are eliminated first (:func:`~axiomlab.linalg.solve_affine`), so
the simplex runs over the free coordinates only, against the inequality rows
rewritten in those coordinates.  This matters for the assignment polytopes,
whose equalities leave a space of far lower dimension than the number of
cells.  The simplex is a dictionary simplex with Bland's rule.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, lcm
from typing import Sequence

from .linalg import (
    EQ,
    GEQ,
    AffineSolution,
    ConstraintSystem,
    Inconsistent,
    SparseRow,
    rank,
    solve_affine,
)


class Infeasible(ValueError):
    pass


class Unbounded(ValueError):
    pass


class NotPointed(ValueError):
    """The feasible set contains a line, so it has no vertex."""


@dataclass
class LPResult:
    x: list[Fraction]
    value: Fraction
    basis: list[int]  # indices into sys.rows of the inequalities defining the vertex
    pivots: int = 0


@dataclass
class _Reduced:
    """Inequalities ``offset + g . y >= 0`` over the free coordinates."""

    aff: AffineSolution
    offsets: list[Fraction]
    coeffs: list[dict[int, Fraction]]  # keyed by position in aff.free
    origin: list[list[int]]  # original row indices merged into each inequality


def _reduce(sys: ConstraintSystem, nonneg: bool) -> _Reduced:
    try:
        aff = solve_affine(sys.ncols, sys.equalities())
    except Inconsistent as exc:
        raise Infeasible(str(exc)) from None
    pos = {c: j for j, c in enumerate(aff.free)}
    ineqs: list[tuple[int, SparseRow]] = [(k, r) for k, r in enumerate(sys.rows) if r.relation == GEQ]
    if nonneg:
        base = len(sys.rows)
        ineqs += [(base + c, SparseRow(((c, Fraction(1)),), GEQ, Fraction(0))) for c in range(sys.ncols)]
    index: dict[tuple, int] = {}
    offsets: list[Fraction] = []
    coeffs: list[dict[int, Fraction]] = []
    origin: list[list[int]] = []
    for k, r in ineqs:
        off, g = aff.substitute(r.entries)
        off -= r.rhs
        if not g:
            if off < 0:
                raise Infeasible(f"row {k} cannot be satisfied")
            continue
        key = _normal_key(off, g)
        j = index.get(key)
        if j is None:
            index[key] = len(offsets)
            offsets.append(off)
            coeffs.append({pos[c]: v for c, v in g.items()})
            origin.append([k])
        else:
            origin[j].append(k)
    return _Reduced(aff, offsets, coeffs, origin)


def _normal_key(off: Fraction, g: dict[int, Fraction]) -> tuple:
    vals = list(g.values()) + [off]
    m = lcm(*(v.denominator for v in vals))
    ints = [(c, int(v * m)) for c, v in sorted(g.items())]
    o = int(off * m)
    d = 0
    for _, v in ints:
        d = gcd(d, v)
    d = gcd(d, o)
    return tuple((c, v // d) for c, v in ints), o // d


class _Dictionary:
    """``basic = const + sum(coef * nonbasic)``; every nonbasic sits at zero.

    Variables ``0..d-1`` are free, ``d..d+m-1`` are slacks (>= 0).
    """

    def __init__(self, d: int, consts: list[Fraction], rows: list[dict[int, Fraction]],
                 objective: dict[int, Fraction]):
        self.d = d
        self.rows: dict[int, tuple[Fraction, dict[int, Fraction]]] = {
            d + k: (consts[k], dict(r)) for k, r in enumerate(rows)}
        self.obj_const = Fraction(0)
        self.obj = {j: v for j, v in objective.items() if v}
        self.nonbasic: set[int] = set(range(d))
        self.pivots = 0

    def pivot(self, enter: int, leave: int) -> None:
        const, row = self.rows.pop(leave)
        a = row.pop(enter)
        # enter = (leave - const - sum(row)) / a
        inv = 1 / a
        e_const = -const * inv
        e_row = {j: -v * inv for j, v in row.items()}
        e_row[leave] = inv
        for var, (c, r) in self.rows.items():
            coef = r.pop(enter, None)
            if coef is None:
                continue
            c = c + coef * e_const
            for j, v in e_row.items():
                nv = r.get(j, 0) + coef * v
                if nv:
                    r[j] = nv
                else:
                    r.pop(j, None)
            self.rows[var] = (c, r)
        coef = self.obj.pop(enter, None)
        if coef is not None:
            self.obj_const += coef * e_const
            for j, v in e_row.items():
                nv = self.obj.get(j, 0) + coef * v
                if nv:
                    self.obj[j] = nv
                else:
                    self.obj.pop(j, None)
        self.rows[enter] = (e_const, e_row)
        self.nonbasic.discard(enter)
        self.nonbasic.add(leave)
        self.pivots += 1

    def ratio(self, enter: int, sign: int) -> int | None:
        """Blocking slack when ``enter`` moves in direction ``sign`` (Bland ties)."""
        best = None
        best_var = None
        for var, (c, r) in self.rows.items():
            if var < self.d:
                continue
            a = r.get(enter)
            if a is None or a * sign >= 0:
                continue
            t = c / (-a * sign)
            if best is None or t < best or (t == best and var < best_var):
                best, best_var = t, var
        return best_var

    def solve(self) -> None:
        # bring every free variable into the basis; afterwards they never leave
        for j in range(self.d):
            cj = self.obj.get(j, 0)
            signs = (1,) if cj > 0 else (-1,) if cj < 0 else (1, -1)
            leave = None
            for s in signs:
                leave = self.ratio(j, s)
                if leave is not None:
                    break
            if leave is None:
                if cj != 0:
                    raise Unbounded("objective unbounded along a free direction")
                raise NotPointed(f"free coordinate {j} is unconstrained in both directions")
            self.pivot(j, leave)
        while True:
            enter = None
            for j in sorted(self.nonbasic):
                if self.obj.get(j, 0) > 0:
                    enter = j
                    break
            if enter is None:
                return
            leave = self.ratio(enter, 1)
            if leave is None:
                raise Unbounded("objective unbounded")
            self.pivot(enter, leave)

    def values(self) -> list[Fraction]:
        return [self.rows[j][0] for j in range(self.d)]


def _optimize_reduced(red: _Reduced, obj: dict[int, Fraction], y0: list[Fraction]):
    d = len(red.aff.free)
    consts = []
    for off, g in zip(red.offsets, red.coeffs):
        s = off + sum((v * y0[j] for j, v in g.items()), Fraction(0))
        if s < 0:
            raise Infeasible("start point violates an inequality")
        consts.append(s)
    dic = _Dictionary(d, consts, red.coeffs, obj)
    dic.solve()
    u = dic.values()
    y = [y0[j] + u[j] for j in range(d)]
    basis = sorted(v - d for v in dic.nonbasic)
    return y, basis, dic.pivots


def _feasible_y(red: _Reduced) -> list[Fraction]:
    """Phase one: minimize a shared shortfall ``t`` added to every inequality."""
    d = len(red.aff.free)
    y0 = [Fraction(0)] * d
    worst = min(red.offsets, default=Fraction(0))
    if worst >= 0:
        return y0
    t = d  # index of the extra coordinate
    ext = _Reduced(red.aff, list(red.offsets) + [Fraction(0)],
                   [{**g, t: Fraction(1)} for g in red.coeffs] + [{t: Fraction(1)}],
                   red.origin + [[]])
    dic_d = d + 1
    consts = [off - worst for off in red.offsets] + [-worst]
    dic = _Dictionary(dic_d, consts, ext.coeffs, {t: Fraction(-1)})
    dic.solve()
    u = dic.values()
    if -worst + u[t] != 0:
        raise Infeasible("no point satisfies all inequalities")
    return [u[j] for j in range(d)]


def lp_feasible(sys: ConstraintSystem, nonneg: bool = False) -> list[Fraction] | None:
    """An exact feasible point, or ``None``."""
    try:
        red = _reduce(sys, nonneg)
        y = _feasible_y(red)
    except Infeasible:
        return None
    x = red.aff.point(y)
    assert sys.first_violation(x) is None
    if nonneg:
        assert all(v >= 0 for v in x)
    return x


def lp_optimize(sys: ConstraintSystem, objective: Sequence[Fraction] | dict[int, Fraction],
                start: Sequence[Fraction] | None = None, nonneg: bool = False) -> LPResult:
    """Maximize ``objective . x``; returns an optimal basic feasible solution.

    ``start`` must be feasible when given; phase one is skipped then.
    """
    red = _reduce(sys, nonneg)
    if isinstance(objective, dict):
        obj_items = objective.items()
    else:
        obj_items = [(c, Fraction(v)) for c, v in enumerate(objective) if v]
    _, g = red.aff.substitute(obj_items)
    pos = {c: j for j, c in enumerate(red.aff.free)}
    obj = {pos[c]: v for c, v in g.items()}
    if start is None:
        y0 = _feasible_y(red)
    else:
        if sys.first_violation(start) is not None:
            raise Infeasible("start point is not feasible")
        y0 = [Fraction(start[c]) for c in red.aff.free]
    y, basis, pivots = _optimize_reduced(red, obj, y0)
    x = red.aff.point(y)
    value = sum((Fraction(v) * x[c] for c, v in obj_items), Fraction(0))
    rows = sorted(red.origin[k][0] for k in basis)
    return LPResult(x, value, rows, pivots)


def active_rows(sys: ConstraintSystem, x: Sequence[Fraction]) -> list[int]:
    bad = sys.first_violation(x)
    if bad is not None:
        raise Infeasible(f"point violates row {bad}")
    return [k for k, r in enumerate(sys.rows) if r.relation == EQ or r.tight(x)]


def active_rank_at(sys: ConstraintSystem, x: Sequence[Fraction]) -> int:
    """Rank of the rows satisfied with equality at ``x``."""
    return rank(sys.rows[k] for k in active_rows(sys, x))
