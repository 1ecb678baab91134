"""Exact sparse linear algebra over the rationals.

Rows are scaled to primitive integer vectors before elimination, so all
arithmetic inside :class:`Echelon` is on Python integers; a gcd division after
every combination keeps coefficients small.  Nothing is ever rounded.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm
from typing import Iterable, Mapping, Sequence

EQ = "Eq"
GEQ = "Geq"


@dataclass(frozen=True)
class SparseRow:
    entries: tuple[tuple[int, Fraction], ...]
    relation: str = EQ
    rhs: Fraction = Fraction(0)

    @classmethod
    def make(cls, coeffs: Mapping[int, object] | Iterable[tuple[int, object]],
             relation: str = EQ, rhs=0) -> "SparseRow":
        items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
        acc: dict[int, Fraction] = {}
        for c, v in items:
            acc[c] = acc.get(c, Fraction(0)) + Fraction(v)
        entries = tuple(sorted((c, v) for c, v in acc.items() if v != 0))
        if relation not in (EQ, GEQ):
            raise ValueError(f"unknown relation {relation!r}")
        return cls(entries, relation, Fraction(rhs))

    def value(self, x: Sequence[Fraction]) -> Fraction:
        return sum((v * x[c] for c, v in self.entries), Fraction(0))

    def satisfied(self, x: Sequence[Fraction]) -> bool:
        lhs = self.value(x)
        return lhs == self.rhs if self.relation == EQ else lhs >= self.rhs

    def tight(self, x: Sequence[Fraction]) -> bool:
        return self.value(x) == self.rhs

    def to_text(self) -> str:
        parts = [self.relation, _fmt(self.rhs)]
        parts.extend(f"{c}:{_fmt(v)}" for c, v in self.entries)
        return " ".join(parts)

    @classmethod
    def from_text(cls, line: str) -> "SparseRow":
        rel, rhs, *terms = line.split()
        coeffs = []
        for t in terms:
            c, v = t.split(":")
            coeffs.append((int(c), Fraction(v)))
        return cls.make(coeffs, rel, Fraction(rhs))


def _fmt(v: Fraction) -> str:
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


@dataclass
class ConstraintSystem:
    ncols: int
    rows: list[SparseRow]
    labels: list | None = None

    def __post_init__(self):
        for r in self.rows:
            if r.entries and r.entries[-1][0] >= self.ncols:
                raise ValueError(f"column {r.entries[-1][0]} out of range for {self.ncols} columns")

    def equalities(self) -> list[SparseRow]:
        return [r for r in self.rows if r.relation == EQ]

    def inequalities(self) -> list[SparseRow]:
        return [r for r in self.rows if r.relation == GEQ]

    def to_text(self) -> str:
        return "\n".join(r.to_text() for r in self.rows) + "\n"

    @classmethod
    def from_text(cls, text: str, ncols: int) -> "ConstraintSystem":
        rows = [SparseRow.from_text(line) for line in text.splitlines() if line.strip()]
        return cls(ncols, rows)

    def first_violation(self, x: Sequence[Fraction]) -> int | None:
        if len(x) != self.ncols:
            raise ValueError(f"point has {len(x)} coordinates, system has {self.ncols}")
        for k, r in enumerate(self.rows):
            if not r.satisfied(x):
                return k
        return None


def integer_row(row: SparseRow | Mapping[int, object]) -> dict[int, int]:
    """Primitive integer multiple of the row's coefficient vector."""
    items = row.entries if isinstance(row, SparseRow) else tuple(row.items())
    fr = [(c, Fraction(v)) for c, v in items if v != 0]
    if not fr:
        return {}
    m = lcm(*(v.denominator for _, v in fr))
    ints = {c: int(v * m) for c, v in fr}
    return _primitive(ints)


def _primitive(row: dict[int, int]) -> dict[int, int]:
    g = 0
    for v in row.values():
        g = gcd(g, v)
        if g == 1:
            return row
    if g > 1:
        return {c: v // g for c, v in row.items()}
    return row


class Echelon:
    """Streaming row echelon basis.

    Each stored row's pivot is its smallest column, so reducing a new row
    against the basis strictly increases its leading column and terminates.
    Rows are dicts ``{col: int}``.
    """

    def __init__(self) -> None:
        self.pivots: dict[int, dict[int, int]] = {}

    def __len__(self) -> int:
        return len(self.pivots)

    def reduce(self, row: dict[int, int]) -> dict[int, int]:
        row = dict(row)
        pivots = self.pivots
        while row:
            c = min(row)
            prow = pivots.get(c)
            if prow is None:
                return row
            a, b = prow[c], row[c]
            g = gcd(a, b)
            fa, fb = a // g, b // g
            new = {k: v * fa for k, v in row.items()}
            for k, v in prow.items():
                nv = new.get(k, 0) - v * fb
                if nv:
                    new[k] = nv
                else:
                    new.pop(k, None)
            row = _primitive(new) if new else new
        return row

    def add(self, row: dict[int, int]) -> bool:
        """Insert ``row``; return True when it raised the rank."""
        r = self.reduce(row)
        if not r:
            return False
        self.pivots[min(r)] = r
        return True

    def contains(self, row: dict[int, int]) -> bool:
        return not self.reduce(row)


def rank(rows: Iterable[SparseRow | Mapping[int, object]]) -> int:
    """Exact rank over the rationals of a stream of sparse rows."""
    ech = Echelon()
    for r in rows:
        ech.add(integer_row(r))
    return len(ech)


@dataclass
class AffineSolution:
    """Solutions of ``A x = b`` parametrized by the free coordinates.

    ``x[free[j]] = y[j]`` and for every pivot column ``c``:
    ``x[c] = const[c] - sum(coef * x[f] for f, coef in dep[c].items())``.
    """

    ncols: int
    free: list[int]
    const: dict[int, Fraction]
    dep: dict[int, dict[int, Fraction]]

    def point(self, y: Sequence[Fraction] | Mapping[int, Fraction]) -> list[Fraction]:
        if isinstance(y, Mapping):
            vals = {f: Fraction(y.get(f, 0)) for f in self.free}
        else:
            vals = dict(zip(self.free, y))
        x = [Fraction(0)] * self.ncols
        for f, v in vals.items():
            x[f] = v
        for c, k in self.const.items():
            s = k
            for f, coef in self.dep[c].items():
                s -= coef * vals[f]
            x[c] = s
        return x

    def substitute(self, coeffs: Mapping[int, Fraction] | Sequence[tuple[int, Fraction]]):
        """Rewrite ``sum(a_c x_c)`` as ``offset + sum(g_f y_f)`` over free columns."""
        items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
        offset = Fraction(0)
        out: dict[int, Fraction] = {}
        for c, a in items:
            if c in self.const:
                offset += a * self.const[c]
                for f, coef in self.dep[c].items():
                    nv = out.get(f, 0) - a * coef
                    if nv:
                        out[f] = nv
                    else:
                        out.pop(f, None)
            else:
                nv = out.get(c, 0) + a
                if nv:
                    out[c] = nv
                else:
                    out.pop(c, None)
        return offset, out


class Inconsistent(ValueError):
    pass


def solve_affine(ncols: int, rows: Iterable[SparseRow]) -> AffineSolution:
    """Reduced row echelon form of the equality system; raises on inconsistency."""
    rhs_col = ncols
    ech = Echelon()
    for r in rows:
        coeffs = {c: v for c, v in r.entries}
        if r.rhs:
            coeffs[rhs_col] = r.rhs
        ir = ech.reduce(integer_row(coeffs))
        if not ir:
            continue
        if min(ir) == rhs_col:
            raise Inconsistent("equality system has no solution")
        ech.pivots[min(ir)] = ir
    # back substitution, highest pivot first, into normalized Fraction rows
    reduced: dict[int, dict[int, Fraction]] = {}
    for c in sorted(ech.pivots, reverse=True):
        row = ech.pivots[c]
        lead = row[c]
        acc: dict[int, Fraction] = {}
        for k, v in row.items():
            if k != c:
                acc[k] = Fraction(v, lead)
        for k in sorted(k for k in list(acc) if k in reduced):
            coef = acc.pop(k)
            for k2, v2 in reduced[k].items():
                nv = acc.get(k2, 0) - coef * v2
                if nv:
                    acc[k2] = nv
                else:
                    acc.pop(k2, None)
        reduced[c] = acc
    const = {c: row.get(rhs_col, Fraction(0)) for c, row in reduced.items()}
    dep = {c: {k: v for k, v in row.items() if k != rhs_col} for c, row in reduced.items()}
    # row says x_c + sum(dep) = rhs
    free = [c for c in range(ncols) if c not in reduced]
    return AffineSolution(ncols, free, const, dep)
