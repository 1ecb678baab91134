"""Slow reference implementations written without the package's helpers.

Everything here works straight from the definitions: assignments are house
vectors, efficiency is Pareto dominance over all n! matchings, the group
action is applied literally.  Tests compare the package against these.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import permutations, product

import sympy


def sd(R, order):
    """House vector of serial dictatorship."""
    left = set(range(len(R)))
    out = [None] * len(R)
    for i in order:
        for h in R[i]:
            if h in left:
                out[i] = h
                left.remove(h)
                break
    return tuple(out)


def rsd(R):
    n = len(R)
    orders = list(permutations(range(n)))
    M = [[Fraction(0)] * n for _ in range(n)]
    for o in orders:
        for i, h in enumerate(sd(R, o)):
            M[i][h] += Fraction(1, len(orders))
    return [list(r) for r in M]


def rank_of(pref, h):
    return list(pref).index(h)


def dominates(R, a, b):
    """Matching ``a`` Pareto dominates ``b``."""
    better = False
    for i in range(len(R)):
        ra, rb = rank_of(R[i], a[i]), rank_of(R[i], b[i])
        if ra > rb:
            return False
        if ra < rb:
            better = True
    return better


def efficient(R):
    n = len(R)
    allm = list(permutations(range(n)))
    return {m for m in allm if not any(dominates(R, o, m) for o in allm)}


def support(R):
    n = len(R)
    S = [[False] * n for _ in range(n)]
    for m in efficient(R):
        for i, h in enumerate(m):
            S[i][h] = True
    return S


def act(R, pi, tau):
    """Agent i's relabeled ranking sits at position pi[i]."""
    n = len(R)
    out = [None] * n
    for i in range(n):
        out[pi[i]] = tuple(tau[h] for h in R[i])
    return tuple(out)


def canonical(R):
    n = len(R)
    return min(act(R, pi, tau) for pi in permutations(range(n)) for tau in permutations(range(n)))


def full_domain(n):
    return [tuple(R) for R in product(permutations(range(n)), repeat=n)]


def axiom_matrix_rank(n):
    """Rank of bistochastic + support + localized + (ordered) ETE rows, via sympy."""
    dom = full_domain(n)
    idx = {R: k for k, R in enumerate(dom)}

    def col(R, i, h):
        return (idx[R] * n + i) * n + h

    ncols = len(dom) * n * n
    rows = []

    def unit(entries):
        r = [0] * ncols
        for c, v in entries:
            r[c] += v
        rows.append(r)

    for R in dom:
        S = support(R)
        for i in range(n):
            unit([(col(R, i, h), 1) for h in range(n)])
        for h in range(n):
            unit([(col(R, i, h), 1) for i in range(n)])
        for i in range(n):
            for h in range(n):
                if not S[i][h]:
                    unit([(col(R, i, h), 1)])
        for i in range(n):
            for j in range(n):
                if i != j and R[i] == R[j]:
                    for h in range(n):
                        unit([(col(R, i, h), 1), (col(R, j, h), -1)])
        for i in range(n):
            for k in range(n - 1):
                p = list(R[i])
                p[k], p[k + 1] = p[k + 1], p[k]
                R2 = R[:i] + (tuple(p),) + R[i + 1:]
                for h in R[i]:
                    if h not in (R[i][k], R[i][k + 1]):
                        unit([(col(R, i, h), 1), (col(R2, i, h), -1)])
    return sympy.Matrix(rows).rank(), len(rows), ncols


def sd_strategyproof(f, R, i, profiles):
    """Truthful lottery stochastically dominates every misreport's lottery."""
    n = len(R)
    truth = R[i]
    for p in permutations(range(n)):
        R2 = R[:i] + (p,) + R[i + 1:]
        if R2 not in profiles:
            continue
        a = b = Fraction(0)
        for h in truth:
            a += f[R][i][h]
            b += f[R2][i][h]
            if b > a:
                return False
    return True
