"""Guided search proving that the axiom matrix has full rank.

The matrix is never built.  An indicator records, per cell ``(R, i, h)``,
whether the unit row ``e_(R,i,h)`` has been derived by elementary row
operations.  Per-profile solving derives unit rows from bistochasticity and
equal-treatment rows once known cells are cancelled; localizedness rows carry
a known cell to the neighbouring profile reached by an adjacent swap.  A
best-first queue orders the profiles by how many cells they gained since
their last visit.  Completion (every bit set) means rank ``n^2 n!^n``.

In canonical mode only orbit representatives are stored; a swap that leaves
the representative set is mapped back through :func:`canonical_with_images`,
and a known cell is transported to every image of the manipulator.
"""

from __future__ import annotations

import hashlib
import heapq
import json
import logging
import time
from collections import deque
from dataclasses import asdict, dataclass, field
from itertools import permutations
from math import factorial
from pathlib import Path
from typing import Callable

import numpy as np

from .core import Profile, format_profile, replace_pref, swap_adjacent
from .mechanisms import rsd_support
from .symmetry import DomainTooLarge, canonical_full, canonical_with_images, orbit_size

log = logging.getLogger(__name__)

FULL_MODE = "full"
CANONICAL_MODE = "canonical"

MAX_N = {FULL_MODE: 4, CANONICAL_MODE: 5}


class BudgetExhausted(RuntimeError):
    pass


class CheckpointMismatch(ValueError):
    pass


@dataclass
class SearchDomain:
    n: int
    mode: str
    profiles: list[Profile]
    weights: list[int]  # orbit size per profile (1 in full mode)

    def __post_init__(self):
        self.index = {R: k for k, R in enumerate(self.profiles)}

    @classmethod
    def build(cls, n: int, mode: str) -> "SearchDomain":
        if mode not in MAX_N:
            raise ValueError(f"unknown mode {mode!r}")
        if not 1 <= n <= MAX_N[mode]:
            raise DomainTooLarge(f"n={n} is outside the supported range 1..{MAX_N[mode]} for {mode} mode")
        if mode == FULL_MODE:
            from itertools import product

            prefs = list(permutations(range(n)))
            profiles = [tuple(R) for R in product(prefs, repeat=n)]
            weights = [1] * len(profiles)
        else:
            profiles = list(canonical_full(n))
            weights = [orbit_size(R) for R in profiles]
        return cls(n, mode, profiles, weights)

    def digest(self) -> str:
        h = hashlib.sha256(f"{self.n}:{self.mode}:".encode())
        for R in self.profiles:
            h.update(format_profile(R).encode())
            h.update(b";")
        return h.hexdigest()

    def target(self, R2: Profile, i: int) -> tuple[int, frozenset[int]]:
        """Where a manipulation by ``i`` landing on ``R2`` is recorded."""
        if self.mode == FULL_MODE:
            return self.index[R2], frozenset((i,))
        c, imgs = canonical_with_images(R2, i)
        return self.index[c], imgs


class IndicatorMap:
    """Write-once bits, one block of ``n*n`` cells per profile."""

    def __init__(self, n: int, nprofiles: int):
        self.n = n
        self.nprofiles = nprofiles
        self.bits = bytearray(nprofiles * n * n)

    def get(self, p: int, i: int, h: int) -> bool:
        return bool(self.bits[(p * self.n + i) * self.n + h])

    def set(self, p: int, i: int, h: int) -> bool:
        k = (p * self.n + i) * self.n + h
        if self.bits[k]:
            return False
        self.bits[k] = 1
        return True

    def block(self, p: int) -> bytearray:
        nn = self.n * self.n
        return self.bits[p * nn:(p + 1) * nn]

    def count(self, p: int | None = None) -> int:
        if p is None:
            return self.bits.count(1)
        return self.block(p).count(1)

    def complete(self) -> bool:
        return 0 not in self.bits

    def save(self, path: Path | str, header: dict) -> None:
        path = Path(path)
        tmp = path.with_suffix(path.suffix + ".tmp")
        packed = np.packbits(np.frombuffer(bytes(self.bits), dtype=np.uint8)).tobytes()
        with open(tmp, "wb") as fh:
            fh.write(json.dumps(header, sort_keys=True).encode() + b"\n")
            fh.write(packed)
        tmp.replace(path)

    def load(self, path: Path | str, header: dict) -> None:
        with open(path, "rb") as fh:
            stored = json.loads(fh.readline())
            packed = fh.read()
        if stored != header:
            raise CheckpointMismatch(f"checkpoint header {stored} does not match {header}")
        bits = np.unpackbits(np.frombuffer(packed, dtype=np.uint8))[:len(self.bits)]
        self.bits = bytearray(bits.tobytes())


# -- per-profile subroutine ------------------------------------------------

def _classes(R: Profile) -> list[tuple[int, ...]]:
    """For each agent, the agents sharing her preference (including herself)."""
    return [tuple(j for j in range(len(R)) if R[j] == R[i]) for i in range(len(R))]


def solve_block(R: Profile, known: bytearray | list) -> list[tuple]:
    """Derive unit rows inside one profile; updates ``known`` in place.

    ``known[i*n + h]`` is the indicator of cell ``(i, h)``.  Returns the list
    of events ``(reason, cells)`` in the order they were derived.
    """
    n = len(R)
    cls = _classes(R)
    pairs = [(i, j) for i in range(n) for j in cls[i] if j > i]
    events: list[tuple] = []
    while True:
        progress = True
        while progress:
            progress = False
            for i in range(n):
                base = i * n
                unknown = [h for h in range(n) if not known[base + h]]
                if len(unknown) == 1:
                    known[base + unknown[0]] = 1
                    events.append((("row", i), ((i, unknown[0]),)))
                    progress = True
            for h in range(n):
                unknown = [i for i in range(n) if not known[i * n + h]]
                if len(unknown) == 1:
                    known[unknown[0] * n + h] = 1
                    events.append((("col", h), ((unknown[0], h),)))
                    progress = True
            for i, j in pairs:
                for h in range(n):
                    a, b = known[i * n + h], known[j * n + h]
                    if a != b:
                        t = j if a else i
                        known[t * n + h] = 1
                        events.append((("ete", i, j, h), ((t, h),)))
                        progress = True
        split = False
        for h in range(n):
            unknown = tuple(i for i in range(n) if not known[i * n + h])
            # column row whose open cells form exactly one class of equals:
            # adding the ETE rows turns it into |S| * e_(i,h)
            if unknown and unknown == cls[unknown[0]]:
                for i in unknown:
                    known[i * n + h] = 1
                events.append((("split", h, unknown), tuple((i, h) for i in unknown)))
                split = True
        if not split:
            return events


def solve_profile(R: Profile, ind: IndicatorMap, p: int) -> int:
    """Run the subroutine on profile index ``p``; returns the number of new bits."""
    block = ind.block(p)
    events = solve_block(R, block)
    new = 0
    for _, cells in events:
        for i, h in cells:
            new += ind.set(p, i, h)
    return new


def init_indicator(dom: SearchDomain) -> IndicatorMap:
    """Indicator with exactly the cells where RSD assigns probability zero."""
    n = dom.n
    ind = IndicatorMap(n, len(dom.profiles))
    for p, R in enumerate(dom.profiles):
        S = rsd_support(R)
        for i in range(n):
            for h in range(n):
                if not S[i][h]:
                    ind.set(p, i, h)
    return ind


def propagate_localized(dom: SearchDomain, ind: IndicatorMap, p: int,
                        audit: list | None = None,
                        cache: dict | None = None) -> tuple[int, dict[int, int]]:
    """Carry known cells of profile ``p`` across every adjacent swap.

    Returns the number of new bits and the per-target tallies.
    """
    n = dom.n
    R = dom.profiles[p]
    total = 0
    tallies: dict[int, int] = {}
    for i in range(n):
        pref = R[i]
        for k in range(n - 1):
            key = (p, i, k)
            hit = cache.get(key) if cache is not None else None
            if hit is None:
                hit = dom.target(replace_pref(R, i, swap_adjacent(pref, k)), i)
                if cache is not None:
                    cache[key] = hit
            t, images = hit
            Rt = dom.profiles[t]
            delta = 0
            for l in range(n):
                if l == k or l == k + 1:
                    continue
                h = pref[l]
                if not ind.get(p, i, h):
                    continue
                for i2 in images:
                    h2 = Rt[i2][l]
                    if ind.set(t, i2, h2):
                        delta += 1
                        if audit is not None:
                            audit.append((t, ("local", p, i, k, h, i2), ((i2, h2),)))
            if delta:
                tallies[t] = tallies.get(t, 0) + delta
                total += delta
    return total, tallies


# -- main loop --------------------------------------------------------------

@dataclass
class VerificationReport:
    n: int
    mode: str
    completed: bool
    solved_triples: int
    total_triples: int
    profiles: int
    profiles_visited: int
    queue_pops: int
    sweeps: int
    order: str
    elapsed: float = 0.0
    budget_exhausted: bool = False

    def to_json(self) -> dict:
        out = asdict(self)
        out["timing"] = {"elapsed_seconds": round(out.pop("elapsed"), 3)}
        return out


class _Queue:
    """Pop order for profiles: best-first (max priority), FIFO or LIFO.

    Best-first is a max-heap with lazy deletion: raising a priority pushes a
    superseding entry, stale entries are skipped on pop.
    """

    def __init__(self, kind: str, size: int):
        self.kind = kind
        self.prio = [0] * size
        self.inq = bytearray(size)
        self.heap: list = []
        self.fifo: deque = deque()
        self.counter = 0
        self.live = 0

    def __len__(self) -> int:
        return self.live

    def bump(self, p: int, delta: int) -> None:
        self.prio[p] += delta
        if self.kind == "priority":
            self.counter += 1
            heapq.heappush(self.heap, (-self.prio[p], self.counter, p))
            if not self.inq[p]:
                self.inq[p] = 1
                self.live += 1
        elif not self.inq[p]:
            self.inq[p] = 1
            self.live += 1
            self.fifo.append(p)

    def pop(self) -> int:
        if self.kind == "priority":
            while True:
                negp, _, p = heapq.heappop(self.heap)
                if self.inq[p] and -negp == self.prio[p]:
                    break
        elif self.kind == "fifo":
            p = self.fifo.popleft()
        else:
            p = self.fifo.pop()
        self.inq[p] = 0
        self.prio[p] = 0
        self.live -= 1
        return p


def solved_triples(dom: SearchDomain, ind: IndicatorMap) -> int:
    if dom.mode == FULL_MODE:
        return ind.count()
    return sum(w * ind.count(p) for p, w in enumerate(dom.weights))


def verify_characterization(n: int, mode: str = FULL_MODE, budget: float | None = None,
                            order: str = "priority", audit: list | None = None,
                            checkpoint: str | Path | None = None,
                            checkpoint_every: float = 600.0, resume: bool = False,
                            progress_every: float = 30.0,
                            domain: SearchDomain | None = None,
                            return_state: bool = False):
    """Run the search; returns a :class:`VerificationReport`.

    With ``audit`` a list, every derived bit is appended as
    ``(profile, reason, cells)`` for :func:`replay_audit`.  With
    ``return_state`` the domain and final indicator are returned too.
    """
    start = time.monotonic()
    dom = domain or SearchDomain.build(n, mode)
    header = {"n": n, "mode": mode, "domain": dom.digest()}
    ind = init_indicator(dom)
    if audit is not None:
        for p in range(len(dom.profiles)):
            for c, b in enumerate(ind.block(p)):
                if b:
                    audit.append((p, ("support",), ((c // n, c % n),)))
    resumed = False
    if checkpoint is not None and resume and Path(checkpoint).exists():
        ind.load(checkpoint, header)
        resumed = True
        if audit is not None:
            raise ValueError("audit mode cannot resume from a checkpoint")

    cache: dict | None = {} if len(dom.profiles) * n <= 400_000 else None
    queue = _Queue(order, len(dom.profiles))
    dirty = bytearray(b"\x01" * len(dom.profiles))
    visited = bytearray(len(dom.profiles))
    pops = 0
    sweeps = 0
    last_log = last_ck = time.monotonic()
    exhausted = False

    rs = dom.index[tuple(tuple(range(n)) for _ in range(n))]
    if resumed:
        sweeps += 1
        for p in range(len(dom.profiles)):
            queue.bump(p, 0)
    else:
        queue.bump(rs, 0)

    while True:
        while len(queue):
            p = queue.pop()
            pops += 1
            visited[p] = 1
            dirty[p] = 0
            R = dom.profiles[p]
            block = ind.block(p)
            events = solve_block(R, block)
            for reason, cells in events:
                for i, h in cells:
                    ind.set(p, i, h)
                if audit is not None:
                    audit.append((p, reason, cells))
            _, tallies = propagate_localized(dom, ind, p, audit, cache)
            for t, delta in tallies.items():
                dirty[t] = 1
                queue.bump(t, delta)
            now = time.monotonic()
            if budget is not None and now - start > budget:
                exhausted = True
                break
            if progress_every and now - last_log > progress_every:
                last_log = now
                log.info("n=%d %s: pops=%d queue=%d bits=%d/%d", n, mode, pops, len(queue),
                         ind.count(), len(ind.bits))
            if checkpoint is not None and now - last_ck > checkpoint_every:
                last_ck = now
                ind.save(checkpoint, header)
        if exhausted or ind.complete():
            break
        # queue drained early: re-queue every profile that changed since its last visit
        todo = [p for p in range(len(dom.profiles)) if dirty[p]]
        if not todo:
            break
        sweeps += 1
        for p in todo:
            queue.bump(p, 0)

    if checkpoint is not None:
        ind.save(checkpoint, header)
    report = VerificationReport(
        n=n, mode=mode, completed=ind.complete(),
        solved_triples=solved_triples(dom, ind),
        total_triples=n * n * factorial(n) ** n,
        profiles=len(dom.profiles), profiles_visited=visited.count(1),
        queue_pops=pops, sweeps=sweeps, order=order,
        elapsed=time.monotonic() - start, budget_exhausted=exhausted)
    if return_state:
        return report, dom, ind
    return report


# -- audit replay -----------------------------------------------------------

class AuditFailure(AssertionError):
    pass


def replay_audit(dom: SearchDomain, audit: list) -> int:
    """Re-check every logged step as an elementary row operation.

    Each step may only use cells established by earlier steps.  Returns the
    number of cells justified; raises :class:`AuditFailure` on a bad step.
    """
    n = dom.n
    known = [bytearray(n * n) for _ in dom.profiles]
    count = 0
    for p, reason, cells in audit:
        R = dom.profiles[p]
        kb = known[p]
        kind = reason[0]
        if kind == "support":
            (i, h), = cells
            if rsd_support(R)[i][h]:
                raise AuditFailure(f"{format_profile(R)}: cell {(i, h)} is in the RSD support")
        elif kind == "row":
            (i, h), = cells
            if any(not kb[i * n + g] for g in range(n) if g != h):
                raise AuditFailure(f"{format_profile(R)}: row {i} has other open cells")
        elif kind == "col":
            (i, h), = cells
            if any(not kb[j * n + h] for j in range(n) if j != i):
                raise AuditFailure(f"{format_profile(R)}: column {h} has other open cells")
        elif kind == "ete":
            _, i, j, h = reason
            (t, _h), = cells
            other = i if t == j else j
            if R[i] != R[j] or not kb[other * n + h]:
                raise AuditFailure(f"{format_profile(R)}: bad equal-treatment step {reason}")
        elif kind == "split":
            _, h, group = reason
            open_cells = {j for j in range(n) if not kb[j * n + h]}
            equals = {j for j in range(n) if R[j] == R[group[0]]}
            if open_cells != set(group) or set(group) != equals:
                raise AuditFailure(f"{format_profile(R)}: bad split {reason}")
        elif kind == "local":
            _, src, i, k, h, i2 = reason
            Rs = dom.profiles[src]
            if not known[src][i * n + h]:
                raise AuditFailure(f"localized step from unknown cell {(src, i, h)}")
            l = Rs[i].index(h)
            if l in (k, k + 1):
                raise AuditFailure("localized step moves the transported house")
            t, images = dom.target(replace_pref(Rs, i, swap_adjacent(Rs[i], k)), i)
            (j, h2), = cells
            if t != p or i2 not in images or j != i2 or R[i2][l] != h2:
                raise AuditFailure(f"localized step {reason} does not land on {cells}")
        else:
            raise AuditFailure(f"unknown step {reason}")
        for i, h in cells:
            if kb[i * n + h]:
                raise AuditFailure(f"cell {(p, i, h)} derived twice")
            kb[i * n + h] = 1
            count += 1
    return count
