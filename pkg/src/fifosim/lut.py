"""Lookup table of every distinct block seen, with per-configuration presence bits.

Entries live in an append-only arena; a handle is the entry's index in that
arena and never changes.  Cache lines store handles, which is how an
eviction in one configuration clears exactly one bit of the victim's entry.

For search, entries are split into ``2**bits`` buckets selected by the low
address bits; each bucket keeps its tags sorted and is searched with
``bisect``.  Entries are never removed; a block that has left every cache
simply keeps an all-zero presence set.
"""

from __future__ import annotations

from bisect import bisect_left
from typing import Optional

DEFAULT_BUCKET_BITS = 10


class LookupTable:
    __slots__ = ("num_configs", "bits", "_mask", "_bucket_tags", "_bucket_handles", "tags", "presence")

    def __init__(self, num_configs: int, bits: int = DEFAULT_BUCKET_BITS):
        if num_configs < 1:
            raise ValueError("num_configs must be >= 1")
        if not 0 <= bits <= 24:
            raise ValueError("bucket bits must be in [0, 24]")
        self.num_configs = num_configs
        self.bits = bits
        self._mask = (1 << bits) - 1
        self._bucket_tags: list[list[int]] = [[] for _ in range(1 << bits)]
        self._bucket_handles: list[list[int]] = [[] for _ in range(1 << bits)]
        # Arena, indexed by handle.  ``presence[h]`` is an int bitset with
        # bit c set iff the block is resident in configuration c.  The engine
        # reads and writes this list directly on its hot path.
        self.tags: list[int] = []
        self.presence: list[int] = []

    def __len__(self) -> int:
        return len(self.tags)

    def lookup(self, block: int) -> Optional[int]:
        tags = self._bucket_tags[block & self._mask]
        i = bisect_left(tags, block)
        if i < len(tags) and tags[i] == block:
            return self._bucket_handles[block & self._mask][i]
        return None

    def insert(self, block: int) -> int:
        b = block & self._mask
        tags = self._bucket_tags[b]
        i = bisect_left(tags, block)
        if i < len(tags) and tags[i] == block:
            raise ValueError(f"block {block:#x} already in lookup table")
        handle = len(self.tags)
        self.tags.append(block)
        self.presence.append(0)
        tags.insert(i, block)
        self._bucket_handles[b].insert(i, handle)
        return handle

    def _check(self, handle: int, config: int | None = None) -> None:
        if not 0 <= handle < len(self.tags):
            raise IndexError(f"invalid entry handle {handle}")
        if config is not None and not 0 <= config < self.num_configs:
            raise IndexError(f"config id {config} out of range [0, {self.num_configs})")

    def set_presence(self, handle: int, config: int, value: bool) -> None:
        self._check(handle, config)
        if value:
            self.presence[handle] |= 1 << config
        else:
            self.presence[handle] &= ~(1 << config)

    def is_present(self, handle: int, config: int) -> bool:
        self._check(handle, config)
        return bool(self.presence[handle] >> config & 1)

    def present_configs(self, handle: int) -> list[int]:
        self._check(handle)
        bits = self.presence[handle]
        return [c for c in range(self.num_configs) if bits >> c & 1]

    def tag(self, handle: int) -> int:
        self._check(handle)
        return self.tags[handle]

    def bucket_sizes(self) -> list[int]:
        return [len(t) for t in self._bucket_tags]

    def check_invariants(self) -> None:
        """Raise AssertionError if bucket placement or ordering is broken."""
        seen = 0
        for b, (tags, handles) in enumerate(zip(self._bucket_tags, self._bucket_handles)):
            assert len(tags) == len(handles)
            assert all(x < y for x, y in zip(tags, tags[1:])), f"bucket {b} not strictly sorted"
            for t, h in zip(tags, handles):
                assert t & self._mask == b, f"tag {t:#x} in wrong bucket {b}"
                assert self.tags[h] == t
            seen += len(tags)
        assert seen == len(self.tags)
