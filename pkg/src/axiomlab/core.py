"""Domain types for the house allocation problem.

Profiles are plain tuples of tuples: ``R[i]`` is agent ``i``'s ranking of the
houses, best first.  Plain tuples give hashing and the lexicographic profile
order for free, and the verifier touches millions of them.  Assignments are
tuples of rows of :class:`fractions.Fraction`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations
from typing import Iterable, Mapping, Sequence

Pref = tuple[int, ...]
Profile = tuple[Pref, ...]
Perm = tuple[int, ...]
Assignment = tuple[tuple[Fraction, ...], ...]

_DIGITS = "0123456789abcdefghijklmnopqrstuvwxyz"

FULL = "full"
RGT = "rgt"


class ParseError(ValueError):
    pass


class InvalidAssignment(ValueError):
    pass


def house_char(h: int) -> str:
    return _DIGITS[h]


def is_perm(seq: Sequence[int], n: int) -> bool:
    return len(seq) == n and sorted(seq) == list(range(n))


def make_profile(prefs: Iterable[Sequence[int]]) -> Profile:
    prof = tuple(tuple(p) for p in prefs)
    n = len(prof)
    if n < 1:
        raise ValueError("a profile needs at least one agent")
    for i, p in enumerate(prof):
        if not is_perm(p, n):
            raise ValueError(f"preference of agent {i} is not a permutation of 0..{n - 1}: {p}")
    return prof


def parse_profile(text: str, n: int | None = None) -> Profile:
    """Parse ``"012|102|120"`` into a profile.

    Each ``|``-separated group lists one agent's houses best first.  When
    ``n`` is omitted it is taken from the number of groups.
    """
    groups = text.strip().split("|")
    if n is None:
        n = len(groups)
    if len(groups) != n:
        raise ParseError(f"expected {n} groups, got {len(groups)} in {text!r}")
    prefs = []
    for g in groups:
        if len(g) != n:
            raise ParseError(f"group {g!r}: arity {len(g)} != {n}")
        try:
            pref = tuple(_DIGITS.index(c) for c in g.lower())
        except ValueError:
            raise ParseError(f"group {g!r}: unknown house character") from None
        if len(set(pref)) != n:
            raise ParseError(f"group {g!r}: repeated house")
        if max(pref) >= n:
            raise ParseError(f"group {g!r}: house out of range for n={n}")
        prefs.append(pref)
    return tuple(prefs)


def format_profile(R: Profile) -> str:
    return "|".join("".join(_DIGITS[h] for h in p) for p in R)


def identity(n: int) -> Perm:
    return tuple(range(n))


def inverse(p: Perm) -> Perm:
    inv = [0] * len(p)
    for i, t in enumerate(p):
        inv[t] = i
    return tuple(inv)


def compose(outer: Perm, inner: Perm) -> Perm:
    """``outer`` after ``inner``: ``i -> outer[inner[i]]``."""
    return tuple(outer[t] for t in inner)


def apply_perm(R: Profile, pi: Perm, tau: Perm) -> Profile:
    """Move agent ``i`` to ``pi[i]`` and rename every house ``h`` to ``tau[h]``."""
    n = len(R)
    if len(pi) != n or len(tau) != n:
        raise ValueError(f"permutation arity does not match n={n}")
    out: list[Pref] = [()] * n
    for i, p in enumerate(R):
        out[pi[i]] = tuple(tau[h] for h in p)
    return tuple(out)


def permute_matrix(M: Sequence[Sequence[Fraction]], pi: Perm, tau: Perm) -> Assignment:
    n = len(M)
    out = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        for h in range(n):
            out[pi[i]][tau[h]] = M[i][h]
    return tuple(tuple(r) for r in out)


def swap_adjacent(p: Pref, k: int) -> Pref:
    if not 0 <= k <= len(p) - 2:
        raise IndexError(f"swap position {k} out of range for length {len(p)}")
    q = list(p)
    q[k], q[k + 1] = q[k + 1], q[k]
    return tuple(q)


def replace_pref(R: Profile, i: int, pref: Pref) -> Profile:
    return R[:i] + (pref,) + R[i + 1:]


def all_prefs(n: int) -> list[Pref]:
    """All rankings of ``n`` houses in lexicographic order."""
    return list(permutations(range(n)))


# -- assignments -------------------------------------------------------------

def to_fraction(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, float):
        raise TypeError("floats are not accepted; pass a string like '1/3' or a Fraction")
    return Fraction(v)


def make_assignment(rows: Sequence[Sequence]) -> Assignment:
    """Build and validate a bistochastic matrix (exact equality, no tolerance)."""
    M = tuple(tuple(to_fraction(v) for v in r) for r in rows)
    validate_assignment(M)
    return M


def validate_assignment(M: Sequence[Sequence[Fraction]]) -> None:
    n = len(M)
    if n == 0 or any(len(r) != n for r in M):
        raise InvalidAssignment("assignment must be a non-empty square matrix")
    for i, r in enumerate(M):
        for h, v in enumerate(r):
            if v < 0:
                raise InvalidAssignment(f"negative entry {v} at agent {i}, house {h}")
        if sum(r) != 1:
            raise InvalidAssignment(f"row {i} sums to {sum(r)}")
    for h in range(n):
        s = sum(M[i][h] for i in range(n))
        if s != 1:
            raise InvalidAssignment(f"column {h} sums to {s}")


def is_bistochastic(M: Sequence[Sequence[Fraction]]) -> bool:
    try:
        validate_assignment(M)
    except InvalidAssignment:
        return False
    return True


def is_deterministic(M: Sequence[Sequence[Fraction]]) -> bool:
    return all(v == 0 or v == 1 for r in M for v in r)


def permutation_matrix(house_of: Sequence[int]) -> Assignment:
    """Matrix giving agent ``i`` house ``house_of[i]``."""
    n = len(house_of)
    one, zero = Fraction(1), Fraction(0)
    return tuple(tuple(one if h == house_of[i] else zero for h in range(n)) for i in range(n))


def house_vector(M: Sequence[Sequence[Fraction]]) -> tuple[int, ...]:
    """Inverse of :func:`permutation_matrix` for deterministic ``M``."""
    out = []
    for i, r in enumerate(M):
        hs = [h for h, v in enumerate(r) if v == 1]
        if len(hs) != 1 or any(v not in (0, 1) for v in r):
            raise InvalidAssignment(f"row {i} is not deterministic")
        out.append(hs[0])
    return tuple(out)


def uniform_matrix(n: int) -> Assignment:
    v = Fraction(1, n)
    return tuple((v,) * n for _ in range(n))


def format_rational(v: Fraction) -> str:
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def matrix_to_json(M: Sequence[Sequence[Fraction]]) -> list[list[str]]:
    return [[format_rational(v) for v in r] for r in M]


# -- rules -------------------------------------------------------------------

@dataclass
class Rule:
    """A finite map from profiles to assignments.

    ``domain`` is ``"full"``, ``"rgt"`` or ``"explicit"``; ``symmetric`` marks
    a table holding only canonical representatives.
    """

    n: int
    table: dict[Profile, Assignment] = field(default_factory=dict)
    domain: str = FULL
    symmetric: bool = False

    def __call__(self, R: Profile) -> Assignment:
        return self.table[R]

    def __contains__(self, R: Profile) -> bool:
        return R in self.table

    def __len__(self) -> int:
        return len(self.table)

    def profiles(self) -> list[Profile]:
        return sorted(self.table)

    def to_json(self) -> dict:
        out = {
            "n": self.n,
            "domain": self.domain,
            "entries": {format_profile(R): matrix_to_json(self.table[R]) for R in self.profiles()},
        }
        if self.symmetric:
            out["symmetric"] = True
        return out

    @classmethod
    def from_json(cls, data: Mapping) -> "Rule":
        n = int(data["n"])
        table = {}
        for text, rows in data["entries"].items():
            R = parse_profile(text, n)
            try:
                table[R] = make_assignment(rows)
            except InvalidAssignment as exc:
                raise InvalidAssignment(f"profile {text}: {exc}") from None
        return cls(n=n, table=table, domain=data.get("domain", FULL), symmetric=bool(data.get("symmetric", False)))

    def dump(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh, indent=1, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "Rule":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


def factorial(n: int) -> int:
    return math.factorial(n)
