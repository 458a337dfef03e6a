"""Configuration grid: the lattice of FIFO caches simulated together.

A grid fixes one line size and takes the cross product of a list of set
sizes and a list of associativities.  Every per-configuration structure in
the package (presence bits, counters, report rows) is indexed by the
configuration id defined here::

    id = level_index * len(associativities) + assoc_index

so ids ascend smallest-set-size first, then smallest-associativity first,
which is also the order in which the engine evaluates an access.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

#: Set sizes 2^0 .. 2^14.
TABLE_SET_SIZES = tuple(1 << i for i in range(15))
#: Line sizes 2^2 .. 2^6 bytes.
TABLE_LINE_SIZES = tuple(1 << i for i in range(2, 7))
#: Associativities 2^1 .. 2^4.
TABLE_ASSOCIATIVITIES = tuple(1 << i for i in range(1, 5))


class GridError(ValueError):
    """Raised for a grid that violates the power-of-two / ordering rules."""


def is_power_of_two(value: int) -> bool:
    return value >= 1 and value & (value - 1) == 0


def log2(value: int) -> int:
    """Exact base-2 logarithm of a power of two."""
    if not is_power_of_two(value):
        raise GridError(f"{value} is not a power of two")
    return value.bit_length() - 1


@dataclass(frozen=True)
class CacheGrid:
    line_size: int
    set_sizes: tuple[int, ...]
    associativities: tuple[int, ...]

    @property
    def num_configs(self) -> int:
        return len(self.set_sizes) * len(self.associativities)

    @property
    def num_levels(self) -> int:
        return len(self.set_sizes)

    @property
    def smallest_associativity(self) -> int:
        return self.associativities[0]

    def config_id(self, level_index: int, assoc_index: int) -> int:
        return config_id(self, level_index, assoc_index)

    def config(self, cid: int) -> tuple[int, int]:
        """Return ``(set_size, associativity)`` for a configuration id."""
        if not 0 <= cid < self.num_configs:
            raise IndexError(f"config id {cid} out of range [0, {self.num_configs})")
        level_index, assoc_index = divmod(cid, len(self.associativities))
        return self.set_sizes[level_index], self.associativities[assoc_index]

    def configs(self) -> Iterator[tuple[int, int, int]]:
        """Yield ``(config_id, set_size, associativity)`` in id order."""
        cid = 0
        for set_size in self.set_sizes:
            for assoc in self.associativities:
                yield cid, set_size, assoc
                cid += 1

    def describe(self) -> dict:
        return {
            "line_size": self.line_size,
            "set_sizes": list(self.set_sizes),
            "associativities": list(self.associativities),
        }


def _normalize(name: str, values: Iterable[int]) -> tuple[int, ...]:
    out = sorted(set(int(v) for v in values))
    if not out:
        raise GridError(f"{name} must not be empty")
    for v in out:
        if not is_power_of_two(v):
            raise GridError(f"{name}: {v} is not a power of two")
    return tuple(out)


def validate_grid(
    line_size_bytes: int,
    set_sizes: Iterable[int],
    associativities: Iterable[int],
) -> CacheGrid:
    """Build a normalized grid (deduplicated, ascending) or raise GridError.

    The smallest associativity must be at least 2: the insertion-time
    intersection flag relies on every larger associativity being at
    least double the smallest one.
    """
    if line_size_bytes < 1 or not is_power_of_two(line_size_bytes):
        raise GridError(f"line size {line_size_bytes} is not a power of two >= 1")
    sets = _normalize("set sizes", set_sizes)
    assocs = _normalize("associativities", associativities)
    if assocs[0] < 2:
        raise GridError(f"associativity {assocs[0]} not allowed, smallest must be >= 2")
    return CacheGrid(int(line_size_bytes), sets, assocs)


def config_id(grid: CacheGrid, level_index: int, assoc_index: int) -> int:
    n_assoc = len(grid.associativities)
    if not 0 <= level_index < len(grid.set_sizes):
        raise IndexError(f"level index {level_index} out of range")
    if not 0 <= assoc_index < n_assoc:
        raise IndexError(f"associativity index {assoc_index} out of range")
    return level_index * n_assoc + assoc_index


def _parse_int(text: str) -> int:
    try:
        return int(text.strip(), 0)
    except ValueError:
        raise GridError(f"cannot parse {text.strip()!r} as an integer") from None


def parse_size_list(text: str) -> list[int]:
    """Parse ``"1,2,8"`` or ``"1..16384"`` (or a comma mix of both).

    A range ``lo..hi`` expands to every power of two in the closed interval.
    """
    values: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            raise GridError(f"empty item in size list {text!r}")
        if ".." in part:
            lo_text, hi_text = part.split("..", 1)
            lo, hi = _parse_int(lo_text), _parse_int(hi_text)
            expanded = [1 << i for i in range(hi.bit_length()) if lo <= 1 << i <= hi]
            if not expanded:
                raise GridError(f"range {part!r} contains no power of two")
            values.extend(expanded)
        else:
            values.append(_parse_int(part))
    return values


def table_grid(line_size: int = 4) -> CacheGrid:
    """The 15 x 4 grid of set sizes and associativities used by default."""
    return validate_grid(line_size, TABLE_SET_SIZES, TABLE_ASSOCIATIVITIES)


def grids_for_line_sizes(
    line_sizes: Sequence[int], set_sizes: Iterable[int], associativities: Iterable[int]
) -> list[CacheGrid]:
    sets = list(set_sizes)
    assocs = list(associativities)
    lines = sorted(set(line_sizes))
    if not lines:
        raise GridError("line sizes must not be empty")
    return [validate_grid(line, sets, assocs) for line in lines]
