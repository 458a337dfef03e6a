"""Single-pass multi-configuration FIFO simulation engine.

All configurations of one :class:`~fifosim.config.CacheGrid` are evaluated
in a single traversal of the block trace.  State is a forest with one level
per set size; level ``L`` holding ``S`` sets is a flat array of ``S``
:class:`TreeNode` objects.  Each node keeps one :class:`FifoWayList` per
associativity, holding lookup-table handles.  Whether a block hits in a
configuration is read from its presence bitset, never by scanning a list.

Three fast paths let the engine stop early once the outcome of the
remaining configurations is already known:

* smallest associativity 2, hit while the node's track flag is set: the
  block hits in every remaining configuration (``p3``);
* smallest associativity 2, hit on the most recently inserted line: same
  conclusion, and the track flag is raised (``p2``);
* smallest associativity above 2, hit on a line whose intersection flag is
  set: the block hits in every larger associativity of the same set size
  (``p1``).  The flag is set when the line is inserted and the block sits at
  least ``2*A_x - 3`` insertions away from the replacement cursor in every
  larger list of the node.

Hits credited by a fast path are counted separately per configuration.
Repeats of the immediately preceding block are hits everywhere and change
no state (``dup``).
"""

from __future__ import annotations

import enum
from bisect import bisect_left
import time
from dataclasses import dataclass, field
from itertools import accumulate
from typing import Iterable, Optional

from .config import CacheGrid
from .fifo import FifoWayList, fifo_distance
from .lut import DEFAULT_BUCKET_BITS, LookupTable


class Outcome(enum.IntEnum):
    MISS = 0
    HIT = 1
    P1 = 2
    P2 = 3
    P3 = 4
    DUP = 5

    @property
    def is_hit(self) -> bool:
        return self is not Outcome.MISS


PROPERTY_OUTCOMES = (Outcome.P1, Outcome.P2, Outcome.P3)

TRACK_POLICIES = ("non_mri", "literal", "mri_only")


def p1_threshold(a_x: int) -> int:
    """Minimum cursor distance in a larger list to set an intersection flag."""
    if a_x < 2:
        raise ValueError("smallest associativity must be >= 2")
    return 2 * a_x - 3


@dataclass
class ConfigStats:
    set_size: int
    assoc: int
    accesses: int = 0
    hits: int = 0
    misses: int = 0
    p1_hits: int = 0
    p2_hits: int = 0
    p3_hits: int = 0
    dup_hits: int = 0

    @property
    def miss_rate(self) -> float:
        return self.misses / self.accesses if self.accesses else 0.0

    @property
    def predicted_hits(self) -> int:
        return self.p1_hits + self.p2_hits + self.p3_hits


@dataclass
class SimReport:
    grid: CacheGrid
    stats: list[ConfigStats]
    wall_time: float = 0.0
    distinct_blocks: int = 0
    engine: str = "fast"
    extra: dict = field(default_factory=dict)

    def counts(self) -> list[tuple[int, int]]:
        return [(s.hits, s.misses) for s in self.stats]

    def totals(self) -> dict[str, int]:
        keys = ("accesses", "hits", "misses", "p1_hits", "p2_hits", "p3_hits", "dup_hits")
        return {k: sum(getattr(s, k) for s in self.stats) for k in keys}


@dataclass
class AccessOutcome:
    outcomes: list[Outcome]

    def verdict(self, cid: int) -> str:
        return "hit" if self.outcomes[cid].is_hit else "miss"

    def attribution(self, cid: int) -> Optional[str]:
        o = self.outcomes[cid]
        if o is Outcome.MISS:
            return None
        return {Outcome.HIT: "normal", Outcome.P1: "p1", Outcome.P2: "p2",
                Outcome.P3: "p3", Outcome.DUP: "dup"}[o]

    def count(self, outcome: Outcome) -> int:
        return sum(1 for o in self.outcomes if o is outcome)


class TreeNode:
    """One cache set at one set size, for every associativity of the grid."""

    __slots__ = ("level", "index", "ways", "first", "track_flag", "intersection_flags")

    def __init__(self, level: int, index: int, associativities, two_way_mode: bool):
        self.level = level
        self.index = index
        self.ways = [FifoWayList(a) for a in associativities]
        self.first = self.ways[0]
        if two_way_mode:
            self.track_flag: Optional[bool] = False
            self.intersection_flags: Optional[list[bool]] = None
        else:
            self.track_flag = None
            self.intersection_flags = [False] * associativities[0]

    def __repr__(self) -> str:
        return f"TreeNode(level={self.level}, index={self.index})"


class Engine:
    """Exact single-pass FIFO simulator for every configuration of a grid."""

    def __init__(self, grid: CacheGrid, lut_bits: int = DEFAULT_BUCKET_BITS,
                 track_policy: str = "non_mri"):
        if track_policy not in TRACK_POLICIES:
            raise ValueError(f"unknown track policy {track_policy!r}")
        self.grid = grid
        self.track_policy = track_policy
        self._raise_on_mri = track_policy in ("literal", "mri_only")
        self._raise_on_other = track_policy in ("literal", "non_mri")
        self.n_assoc = len(grid.associativities)
        self.num_configs = grid.num_configs
        self.two_way_mode = grid.smallest_associativity == 2
        self.threshold = p1_threshold(grid.smallest_associativity)
        self._walk = self._walk_track if self.two_way_mode else self._walk_flags
        self.lut = LookupTable(self.num_configs, lut_bits)
        self.masks = [s - 1 for s in grid.set_sizes]
        self.levels: list[list[TreeNode]] = [
            [TreeNode(li, i, grid.associativities, self.two_way_mode) for i in range(s)]
            for li, s in enumerate(grid.set_sizes)
        ]
        n = self.num_configs
        level_bits = (1 << self.n_assoc) - 1
        # Per level: nodes, set-index mask, id of the smallest associativity,
        # and a bitmask of the ids of the larger associativities.
        self._plan = [
            (nodes, self.masks[li], li * self.n_assoc, (level_bits - 1) << (li * self.n_assoc))
            for li, nodes in enumerate(self.levels)
        ]
        self._all_bits = (1 << n) - 1
        self._accesses = 0
        self._dups = 0
        self._misses = [0] * n
        # Difference arrays: a fast path crediting ids [lo, hi) does
        # diff[lo] += 1, diff[hi] -= 1; prefix sums give per-config counts.
        self._p1 = [0] * (n + 1)
        self._p2 = [0] * (n + 1)
        self._p3 = [0] * (n + 1)
        self._last: Optional[int] = None
        self._p1_firings = 0
        self.insertion_flag_failures = 0
        self.wall_time = 0.0

    @property
    def firings(self) -> dict[str, int]:
        """Number of accesses on which each fast path fired."""
        # Each p2/p3 firing adds exactly one to its difference array.
        return {"p1": self._p1_firings, "p2": sum(self._p2), "p3": sum(self._p3)}

    # -- state inspection ------------------------------------------------

    def node(self, level_index: int, block: int) -> TreeNode:
        return self.levels[level_index][block & self.masks[level_index]]

    def contains(self, cid: int, block: int) -> bool:
        """Whether ``block`` resides in configuration ``cid`` (read from the list)."""
        level_index, assoc_index = divmod(cid, self.n_assoc)
        h = self.lut.lookup(block)
        return h is not None and h in self.node(level_index, block).ways[assoc_index].slots

    def check_coherence(self) -> None:
        """Assert presence bits agree with way-list contents for every entry."""
        lut = self.lut
        expected = [0] * len(lut)
        for li, nodes in enumerate(self.levels):
            for node in nodes:
                for ai, wl in enumerate(node.ways):
                    c = li * self.n_assoc + ai
                    occupied = [h for h in wl.slots if h is not None]
                    assert len(occupied) == len(set(occupied)) == min(wl.insert_count, wl.capacity)
                    assert wl.cursor == wl.insert_count % wl.capacity
                    for h in occupied:
                        assert lut.tags[h] & self.masks[li] == node.index
                        expected[h] |= 1 << c
        assert expected == lut.presence, "presence bits disagree with way lists"

    # -- evaluation ------------------------------------------------------

    def update_intersection_flag(self, node: TreeNode, h: int, pres: Optional[int] = None) -> bool:
        """Recompute and store the intersection flag of ``h`` in the smallest list.

        True iff ``h`` is present in every larger list of ``node`` at a
        cursor distance of at least the threshold.
        """
        if self.two_way_mode:
            raise RuntimeError("intersection flags exist only when the smallest associativity exceeds 2")
        if pres is None:
            pres = self.lut.presence[h]
        base = node.level * self.n_assoc
        flag = True
        for ai in range(1, self.n_assoc):
            if not pres >> (base + ai) & 1:
                flag = False
                break
            wl = node.ways[ai]
            if fifo_distance(wl.slots.index(h), wl.cursor, wl.capacity) < self.threshold:
                flag = False
                break
        node.intersection_flags[node.ways[0].slots.index(h)] = flag
        return flag

    def process_access(self, block: int) -> AccessOutcome:
        """Evaluate one block in every configuration and report the verdicts."""
        outcomes = [Outcome.HIT] * self.num_configs
        self._evaluate(block, outcomes)
        return AccessOutcome(outcomes)

    def _evaluate(self, block: int, out: Optional[list]) -> None:
        # ``out`` (when given) arrives pre-filled with HIT; only misses and
        # property-credited hits are written.
        self._accesses += 1
        if block == self._last:
            self._dups += 1
            if out is not None:
                out[:] = [Outcome.DUP] * self.num_configs
            return
        self._last = block

        lut = self.lut
        presence = lut.presence
        misses = self._misses
        n_assoc = self.n_assoc
        two_way = self.two_way_mode
        # Inlined LookupTable.lookup.
        bucket = block & lut._mask
        tags = lut._bucket_tags[bucket]
        i = bisect_left(tags, block)
        if i < len(tags) and tags[i] == block:
            h = lut._bucket_handles[bucket][i]
        else:
            h = None

        if h is None:
            h = lut.insert(block)
            for c in range(self.num_configs):
                misses[c] += 1
            if out is not None:
                out[:] = [Outcome.MISS] * self.num_configs
            for li, nodes in enumerate(self.levels):
                node = nodes[block & self.masks[li]]
                base = li * n_assoc
                for ai, wl in enumerate(node.ways):
                    victim = wl.insert(h)
                    if victim is not None:
                        presence[victim] &= ~(1 << (base + ai))
            pres = presence[h] = self._all_bits
            for li, nodes in enumerate(self.levels):
                node = nodes[block & self.masks[li]]
                if two_way:
                    node.track_flag = False
                elif not self.update_intersection_flag(node, h, pres):
                    self.insertion_flag_failures += 1
            return

        self._walk(block, h, out)

    def _walk_track(self, block: int, h: int, out: Optional[list]) -> None:
        """Lookup-table hit, smallest associativity 2: track-flag fast paths."""
        presence = self.lut.presence
        misses = self._misses
        raise_on_mri = self._raise_on_mri
        raise_on_other = self._raise_on_other
        n = self.num_configs
        pres = presence[h]
        for nodes, mask, base, rest in self._plan:
            node = nodes[block & mask]
            first = node.first
            slots = first.slots
            if pres >> base & 1:
                if node.track_flag:
                    presence[h] = pres
                    self._p3[base + 1] += 1
                    if out is not None:
                        out[base + 1:] = [Outcome.P3] * (n - base - 1)
                    return
                # With two slots the MRI sits just behind the cursor.
                if slots[first.cursor ^ 1] == h:
                    if raise_on_mri:
                        node.track_flag = True
                    presence[h] = pres
                    self._p2[base + 1] += 1
                    if out is not None:
                        out[base + 1:] = [Outcome.P2] * (n - base - 1)
                    return
                if raise_on_other:
                    node.track_flag = True
            else:
                misses[base] += 1
                if out is not None:
                    out[base] = Outcome.MISS
                cur = first.cursor
                victim = slots[cur]
                slots[cur] = h
                first.cursor = cur ^ 1
                first.insert_count += 1
                if victim is not None:
                    presence[victim] &= ~(1 << base)
                pres |= 1 << base
                node.track_flag = False
            missing = rest & ~pres
            if missing:
                pres |= missing
                # Inlined FifoWayList.insert for every larger list missing h.
                ways = node.ways
                while missing:
                    low = missing & -missing
                    missing ^= low
                    c = low.bit_length() - 1
                    misses[c] += 1
                    if out is not None:
                        out[c] = Outcome.MISS
                    wl = ways[c - base]
                    cur = wl.cursor
                    wslots = wl.slots
                    victim = wslots[cur]
                    wslots[cur] = h
                    wl.cursor = (cur + 1) % wl.capacity
                    wl.insert_count += 1
                    if victim is not None:
                        presence[victim] &= ~low
        presence[h] = pres

    def _walk_flags(self, block: int, h: int, out: Optional[list]) -> None:
        """Lookup-table hit, smallest associativity above 2: intersection flags."""
        presence = self.lut.presence
        misses = self._misses
        n_assoc = self.n_assoc
        pres = presence[h]
        for nodes, mask, base, rest in self._plan:
            node = nodes[block & mask]
            first = node.first
            slots = first.slots
            if pres >> base & 1:
                if node.intersection_flags[slots.index(h)]:
                    end = base + n_assoc
                    self._p1[base + 1] += 1
                    self._p1[end] -= 1
                    self._p1_firings += 1
                    if out is not None:
                        out[base + 1:end] = [Outcome.P1] * (n_assoc - 1)
                    continue
            else:
                misses[base] += 1
                if out is not None:
                    out[base] = Outcome.MISS
                cur = first.cursor
                victim = slots[cur]
                slots[cur] = h
                first.cursor = (cur + 1) % first.capacity
                first.insert_count += 1
                if victim is not None:
                    presence[victim] &= ~(1 << base)
                pres |= 1 << base
                self.update_intersection_flag(node, h, pres)
            missing = rest & ~pres
            if missing:
                pres |= missing
                # Inlined FifoWayList.insert for every larger list missing h.
                ways = node.ways
                while missing:
                    low = missing & -missing
                    missing ^= low
                    c = low.bit_length() - 1
                    misses[c] += 1
                    if out is not None:
                        out[c] = Outcome.MISS
                    wl = ways[c - base]
                    cur = wl.cursor
                    wslots = wl.slots
                    victim = wslots[cur]
                    wslots[cur] = h
                    wl.cursor = (cur + 1) % wl.capacity
                    wl.insert_count += 1
                    if victim is not None:
                        presence[victim] &= ~low
        presence[h] = pres

    def feed(self, blocks: Iterable[int]) -> None:
        """Process a stream of blocks, accumulating counters and wall time."""
        evaluate = self._evaluate
        start = time.perf_counter()
        try:
            for b in blocks:
                evaluate(b, None)
        finally:
            self.wall_time += time.perf_counter() - start

    def report(self) -> SimReport:
        p1 = list(accumulate(self._p1))
        p2 = list(accumulate(self._p2))
        p3 = list(accumulate(self._p3))
        stats = []
        for cid, set_size, assoc in self.grid.configs():
            stats.append(ConfigStats(
                set_size=set_size,
                assoc=assoc,
                accesses=self._accesses,
                hits=self._accesses - self._misses[cid],
                misses=self._misses[cid],
                p1_hits=p1[cid],
                p2_hits=p2[cid],
                p3_hits=p3[cid],
                dup_hits=self._dups,
            ))
        return SimReport(
            grid=self.grid,
            stats=stats,
            wall_time=self.wall_time,
            distinct_blocks=len(self.lut),
            engine="fast",
            extra={
                "lut_entries": len(self.lut),
                "lut_bits": self.lut.bits,
                "firings": self.firings,
                "insertion_flag_failures": self.insertion_flag_failures,
            },
        )


def run(engine: Engine, blocks: Iterable[int]) -> SimReport:
    """Fold every block of ``blocks`` through ``engine`` and return its report.

    If the stream raises, the exception propagates and no report is produced.
    """
    engine.feed(blocks)
    return engine.report()


def simulate(grid: CacheGrid, blocks: Iterable[int], lut_bits: int = DEFAULT_BUCKET_BITS) -> SimReport:
    return run(Engine(grid, lut_bits), blocks)
