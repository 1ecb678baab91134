"""Explicit axiom constraint rows over the cells ``(profile, agent, house)``.

Column of ``(R, i, h)`` is ``(index[R] * n + i) * n + h`` for a profile list
fixed at construction.  Used for the fully materialized oracle checks and for
the strategyproof/efficient polytope; the rank verifier never builds these.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

from .core import Profile, Rule, replace_pref, swap_adjacent
from .linalg import EQ, GEQ, ConstraintSystem, SparseRow
from .mechanisms import rsd, rsd_support


@dataclass
class CellIndex:
    n: int
    profiles: list[Profile]

    def __post_init__(self):
        self.index = {R: k for k, R in enumerate(self.profiles)}

    @property
    def ncols(self) -> int:
        return len(self.profiles) * self.n * self.n

    def col(self, R: Profile, i: int, h: int) -> int:
        return (self.index[R] * self.n + i) * self.n + h

    def label(self, c: int) -> tuple[Profile, int, int]:
        n = self.n
        return self.profiles[c // (n * n)], (c // n) % n, c % n

    def labels(self) -> list[tuple[Profile, int, int]]:
        return [self.label(c) for c in range(self.ncols)]

    def vector(self, rule: Rule) -> list[Fraction]:
        x = [Fraction(0)] * self.ncols
        for R in self.profiles:
            M = rule(R)
            for i in range(self.n):
                for h in range(self.n):
                    x[self.col(R, i, h)] = M[i][h]
        return x

    def rule(self, x: Sequence[Fraction], domain: str = "full") -> Rule:
        n = self.n
        table = {}
        for R in self.profiles:
            table[R] = tuple(tuple(Fraction(x[self.col(R, i, h)]) for h in range(n)) for i in range(n))
        return Rule(n=n, table=table, domain=domain)


def manipulations(cells: CellIndex) -> Iterator[tuple[Profile, int, int, Profile]]:
    """Each unordered adjacent-swap pair once: ``(R, i, k, R')`` with ``R < R'``."""
    for R in cells.profiles:
        for i in range(cells.n):
            for k in range(cells.n - 1):
                R2 = replace_pref(R, i, swap_adjacent(R[i], k))
                if R2 in cells.index and R < R2:
                    yield R, i, k, R2


def bistochastic_rows(cells: CellIndex) -> list[SparseRow]:
    n, rows = cells.n, []
    for R in cells.profiles:
        for i in range(n):
            rows.append(SparseRow.make({cells.col(R, i, h): 1 for h in range(n)}, EQ, 1))
        for h in range(n):
            rows.append(SparseRow.make({cells.col(R, i, h): 1 for i in range(n)}, EQ, 1))
    return rows


def support_rows(cells: CellIndex) -> list[SparseRow]:
    n, rows = cells.n, []
    for R in cells.profiles:
        S = rsd_support(R)
        for i in range(n):
            for h in range(n):
                if not S[i][h]:
                    rows.append(SparseRow.make({cells.col(R, i, h): 1}, EQ, 0))
    return rows


def localized_rows(cells: CellIndex) -> list[SparseRow]:
    rows = []
    for R, i, k, R2 in manipulations(cells):
        for l, h in enumerate(R[i]):
            if l not in (k, k + 1):
                rows.append(SparseRow.make({cells.col(R, i, h): 1, cells.col(R2, i, h): -1}, EQ, 0))
    return rows


def nonperverse_rows(cells: CellIndex) -> list[SparseRow]:
    rows = []
    for R, i, k, R2 in manipulations(cells):
        # demoted house loses weakly, promoted house gains weakly
        hk, hl = R[i][k], R[i][k + 1]
        rows.append(SparseRow.make({cells.col(R, i, hk): 1, cells.col(R2, i, hk): -1}, GEQ, 0))
        rows.append(SparseRow.make({cells.col(R2, i, hl): 1, cells.col(R, i, hl): -1}, GEQ, 0))
    return rows


def ete_rows(cells: CellIndex, ordered: bool = False) -> list[SparseRow]:
    n, rows = cells.n, []
    for R in cells.profiles:
        for i in range(n):
            for j in range(n):
                if i == j or R[i] != R[j] or (not ordered and j < i):
                    continue
                for h in range(n):
                    rows.append(SparseRow.make({cells.col(R, i, h): 1, cells.col(R, j, h): -1}, EQ, 0))
    return rows


def nonneg_rows(cells: CellIndex) -> list[SparseRow]:
    return [SparseRow(((c, Fraction(1)),), GEQ, Fraction(0)) for c in range(cells.ncols)]


def axiom_matrix(cells: CellIndex, ordered_ete: bool = True) -> ConstraintSystem:
    """All four row classes: bistochasticity, support zeros, localizedness, ETE."""
    rows = bistochastic_rows(cells) + support_rows(cells) + localized_rows(cells)
    rows += ete_rows(cells, ordered=ordered_ete)
    return ConstraintSystem(cells.ncols, rows, cells.labels())


def rsd_vector(cells: CellIndex) -> list[Fraction]:
    x = [Fraction(0)] * cells.ncols
    n = cells.n
    for R in cells.profiles:
        M = rsd(R)
        for i in range(n):
            for h in range(n):
                x[cells.col(R, i, h)] = M[i][h]
    return x
