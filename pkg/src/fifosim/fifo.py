"""Circular FIFO way list: the contents of one cache set at one associativity."""

from __future__ import annotations

from typing import Hashable, Optional


def fifo_distance(slot: int, cursor: int, capacity: int) -> int:
    """Insertions a line at ``slot`` survives before being replaced.

    0 is the next victim; ``capacity - 1`` is the most recently inserted slot.
    """
    return (slot - cursor) % capacity


class FifoWayList:
    """Fixed number of slots plus a replacement cursor.

    Slots fill in index order from a cold start and the cursor always
    equals ``insert_count % capacity``.  Hits never touch the list.
    """

    __slots__ = ("capacity", "slots", "cursor", "insert_count")

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self.slots: list[Optional[Hashable]] = [None] * capacity
        self.cursor = 0
        self.insert_count = 0

    def __contains__(self, item) -> bool:
        return item in self.slots

    def __len__(self) -> int:
        return min(self.insert_count, self.capacity)

    def __repr__(self) -> str:
        return f"FifoWayList({self.slots!r}, cursor={self.cursor})"

    def insert(self, item):
        """Store ``item`` at the cursor slot, returning the evicted occupant (or None)."""
        if item is None:
            raise ValueError("cannot insert None")
        if item in self.slots:
            raise ValueError(f"{item!r} already in way list")
        cur = self.cursor
        victim = self.slots[cur]
        self.slots[cur] = item
        self.cursor = (cur + 1) % self.capacity
        self.insert_count += 1
        return victim

    def slot_of(self, item) -> int:
        return self.slots.index(item)

    def distance(self, item) -> int:
        return fifo_distance(self.slots.index(item), self.cursor, self.capacity)

    def mri(self):
        """Most recently inserted item, or None before the first insertion."""
        if not self.insert_count:
            return None
        return self.slots[(self.cursor - 1) % self.capacity]

    def lri(self):
        """Least recently inserted item still resident, or None when empty."""
        if not self.insert_count:
            return None
        if self.insert_count < self.capacity:
            return self.slots[0]
        return self.slots[self.cursor]

    def items(self) -> list:
        """Resident items, least recently inserted first."""
        if self.insert_count < self.capacity:
            return self.slots[: self.insert_count]
        c = self.cursor
        return self.slots[c:] + self.slots[:c]
