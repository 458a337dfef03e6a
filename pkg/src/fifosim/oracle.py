"""Brute-force reference simulation and fast-path auditing.

The reference simulator knows nothing about the engine: every
configuration is an independent array of FIFO sets holding raw block tags,
membership is a linear scan, and there is no duplicate filter, flag, or
sharing between configurations.  It is the ground truth the engine is
compared against, and the speed baseline for benchmarks.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

from .config import CacheGrid
from .engine import PROPERTY_OUTCOMES, ConfigStats, Engine, Outcome, SimReport
from .fifo import FifoWayList

#: Inclusion scanning is only done on grids and traces up to these sizes.
INCLUSION_MAX_CONFIGS = 8
INCLUSION_MAX_ACCESSES = 10_000


class RefCacheState:
    """Per-configuration FIFO sets of block tags, simulated independently."""

    def __init__(self, grid: CacheGrid):
        self.grid = grid
        self.configs = []
        for _cid, set_size, assoc in grid.configs():
            self.configs.append((set_size - 1, [FifoWayList(assoc) for _ in range(set_size)]))
        self.hits = [0] * grid.num_configs
        self.misses = [0] * grid.num_configs
        self.accesses = 0

    def contains(self, cid: int, block: int) -> bool:
        mask, sets = self.configs[cid]
        return block in sets[block & mask].slots

    def access(self, block: int) -> list[bool]:
        """Apply one access to every configuration; return hit flags."""
        result = []
        self.accesses += 1
        for cid, (mask, sets) in enumerate(self.configs):
            wl = sets[block & mask]
            if block in wl.slots:
                self.hits[cid] += 1
                result.append(True)
            else:
                self.misses[cid] += 1
                wl.insert(block)
                result.append(False)
        return result

    def feed(self, blocks: Iterable[int]) -> None:
        configs = self.configs
        hits = self.hits
        misses = self.misses
        n = 0
        for block in blocks:
            n += 1
            for cid, (mask, sets) in enumerate(configs):
                wl = sets[block & mask]
                if block in wl.slots:
                    hits[cid] += 1
                else:
                    misses[cid] += 1
                    wl.insert(block)
        self.accesses += n

    def counts(self) -> list[tuple[int, int]]:
        return list(zip(self.hits, self.misses))

    def inclusion_violated(self) -> bool:
        """True if some block sits in a configuration but not in a larger one.

        "Larger" means set size and associativity both at least as large,
        with at least one strictly larger.
        """
        grid = self.grid
        cfgs = list(grid.configs())
        for small, s_sets, s_assoc in cfgs:
            for large, l_sets, l_assoc in cfgs:
                if large == small or l_sets < s_sets or l_assoc < s_assoc:
                    continue
                _, small_lists = self.configs[small]
                for wl in small_lists:
                    for b in wl.slots:
                        if b is not None and not self.contains(large, b):
                            return True
        return False

    def report(self, wall_time: float = 0.0) -> SimReport:
        stats = [
            ConfigStats(set_size=s, assoc=a, accesses=self.accesses,
                        hits=self.hits[cid], misses=self.misses[cid])
            for cid, s, a in self.grid.configs()
        ]
        distinct = len({b for _m, sets in self.configs for wl in sets for b in wl.slots if b is not None})
        return SimReport(grid=self.grid, stats=stats, wall_time=wall_time,
                         distinct_blocks=distinct, engine="naive",
                         extra={"resident_blocks": distinct})


def simulate_reference(blocks: Iterable[int], grid: CacheGrid) -> list[tuple[int, int]]:
    """Per-configuration ``(hits, misses)`` by brute force."""
    ref = RefCacheState(grid)
    ref.feed(blocks)
    return ref.counts()


def run_reference(grid: CacheGrid, blocks: Iterable[int]) -> SimReport:
    """Reference simulation wrapped in a :class:`SimReport` with wall time."""
    ref = RefCacheState(grid)
    blocks = list(blocks)
    start = time.perf_counter()
    ref.feed(blocks)
    elapsed = time.perf_counter() - start
    report = ref.report(elapsed)
    report.distinct_blocks = len(set(blocks))
    return report


@dataclass(frozen=True)
class Mismatch:
    config_id: int
    set_size: int
    assoc: int
    got: tuple[int, int]
    expected: tuple[int, int]

    def __str__(self) -> str:
        return (f"config {self.config_id} (S={self.set_size}, A={self.assoc}): "
                f"hits/misses {self.got[0]}/{self.got[1]} != reference {self.expected[0]}/{self.expected[1]}")


def diff_reports(a: SimReport, b: Union[SimReport, Sequence[tuple[int, int]]]) -> list[Mismatch]:
    """Configurations whose hit/miss counts differ between ``a`` and ``b``."""
    if isinstance(b, SimReport):
        if b.grid != a.grid:
            raise ValueError("cannot compare reports for different grids")
        b = b.counts()
    if len(b) != a.grid.num_configs:
        raise ValueError(f"reference has {len(b)} configs, report grid has {a.grid.num_configs}")
    out = []
    for cid, (stats, expected) in enumerate(zip(a.stats, b)):
        got = (stats.hits, stats.misses)
        if got != tuple(expected):
            out.append(Mismatch(cid, stats.set_size, stats.assoc, got, tuple(expected)))
    return out


@dataclass(frozen=True)
class Violation:
    access_index: int
    prop: str
    config_id: int
    block: int


@dataclass
class AuditReport:
    firings: dict[str, int] = field(default_factory=lambda: {"p1": 0, "p2": 0, "p3": 0})
    credited: dict[str, int] = field(default_factory=lambda: {"p1": 0, "p2": 0, "p3": 0})
    violations: list[Violation] = field(default_factory=list)
    inclusion_violations: int = 0
    inclusion_checked: bool = False
    insertion_flag_failures: int = 0
    reference: list[tuple[int, int]] = field(default_factory=list)

    @property
    def sound(self) -> bool:
        return not self.violations


_PROP_NAMES = {Outcome.P1: "p1", Outcome.P2: "p2", Outcome.P3: "p3"}


def audit_run(
    blocks: Iterable[int], grid: CacheGrid, *, check_inclusion: bool | None = None,
    check_coherence: bool = False, track_policy: str = "non_mri",
) -> tuple[SimReport, AuditReport]:
    """Run engine and reference in lockstep, checking every fast-path credit.

    Each property-credited hit must name a configuration whose reference
    state holds the block at that access.  Inclusion scanning defaults to
    on for grids of at most ``INCLUSION_MAX_CONFIGS`` configurations and
    stops after ``INCLUSION_MAX_ACCESSES`` accesses.
    """
    engine = Engine(grid, track_policy=track_policy)
    ref = RefCacheState(grid)
    audit = AuditReport()
    if check_inclusion is None:
        check_inclusion = grid.num_configs <= INCLUSION_MAX_CONFIGS
    audit.inclusion_checked = check_inclusion
    for i, block in enumerate(blocks):
        outcomes = engine.process_access(block).outcomes
        # Membership is checked before the reference applies the access,
        # so a credited hit must already be resident.
        for cid, o in enumerate(outcomes):
            if o in PROPERTY_OUTCOMES:
                name = _PROP_NAMES[o]
                audit.credited[name] += 1
                if not ref.contains(cid, block):
                    audit.violations.append(Violation(i, name, cid, block))
        ref.access(block)
        if check_coherence:
            engine.check_coherence()
        if check_inclusion and i < INCLUSION_MAX_ACCESSES and ref.inclusion_violated():
            audit.inclusion_violations += 1
    audit.firings = engine.firings
    audit.insertion_flag_failures = engine.insertion_flag_failures
    audit.reference = ref.counts()
    return engine.report(), audit
