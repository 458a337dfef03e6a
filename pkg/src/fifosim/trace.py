"""Byte-address traces: reading, writing, block conversion, synthetic generation.

Two on-disk formats are supported:

``text``
    One hexadecimal address per line, ``0x`` prefix optional, either case.
    Blank lines and lines starting with ``#`` are ignored.
``binary``
    Consecutive little-endian unsigned 64-bit values, no header.

Malformed input raises :class:`TraceError` and stops the stream; nothing is
skipped silently.
"""

from __future__ import annotations

import io
import os
import re
from typing import BinaryIO, Iterable, Iterator, Union

import numpy as np

from .config import is_power_of_two, log2

ADDRESS_MASK = (1 << 64) - 1
FORMATS = ("text", "binary")
MODELS = ("uniform", "loop", "zipf_ws")

_HEX_LINE = re.compile(r"(?:0[xX])?[0-9a-fA-F]+")
_CHUNK = 1 << 16

Source = Union[str, os.PathLike, BinaryIO]


class TraceError(ValueError):
    """Malformed or truncated trace input."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


def normalize_format(fmt: str) -> str:
    if fmt in ("bin", "binary"):
        return "binary"
    if fmt in ("text", "txt"):
        return "text"
    raise ValueError(f"unknown trace format {fmt!r}")


def to_block(addr: int, line_size_bytes: int) -> int:
    return addr >> log2(line_size_bytes)


def to_blocks(addrs: Iterable[int], line_size_bytes: int) -> Iterator[int]:
    shift = log2(line_size_bytes)
    return (a >> shift for a in addrs)


def _open(source: Source):
    if isinstance(source, (str, os.PathLike)):
        return open(source, "rb"), True
    return source, False


def _read_text(fh) -> Iterator[int]:
    for lineno, raw in enumerate(fh, start=1):
        if isinstance(raw, bytes):
            try:
                raw = raw.decode("ascii")
            except UnicodeDecodeError:
                raise TraceError("non-ASCII content", lineno) from None
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if not _HEX_LINE.fullmatch(line):
            raise TraceError(f"not a hexadecimal address: {line[:40]!r}", lineno)
        value = int(line, 16)
        if value > ADDRESS_MASK:
            raise TraceError(f"address wider than 64 bits: {line[:40]!r}", lineno)
        yield value


def _read_binary(fh) -> Iterator[int]:
    offset = 0
    while True:
        chunk = fh.read(8 * _CHUNK)
        if not chunk:
            return
        if len(chunk) % 8:
            # A short read from a pipe may split a record; top it up first.
            while len(chunk) % 8:
                more = fh.read(8 - len(chunk) % 8)
                if not more:
                    raise TraceError(
                        f"truncated binary trace: {offset + len(chunk)} bytes is not a multiple of 8"
                    )
                chunk += more
        offset += len(chunk)
        yield from np.frombuffer(chunk, dtype="<u8").tolist()


def read_accesses(source: Source, fmt: str = "text") -> Iterator[int]:
    """Yield byte addresses from ``source`` (a path or binary file object)."""
    fmt = normalize_format(fmt)
    fh, owned = _open(source)
    try:
        if fmt == "text":
            yield from _read_text(fh)
        else:
            yield from _read_binary(fh)
    finally:
        if owned:
            fh.close()


def write_accesses(dest: Source, addrs: Iterable[int], fmt: str = "text") -> int:
    """Write addresses in the given format; returns the count written."""
    fmt = normalize_format(fmt)
    fh, owned = (open(dest, "wb"), True) if isinstance(dest, (str, os.PathLike)) else (dest, False)
    count = 0
    try:
        if fmt == "text":
            out = io.TextIOWrapper(fh, encoding="ascii", newline="\n", write_through=True)
            for a in addrs:
                out.write(f"0x{a:x}\n")
                count += 1
            out.flush()
            out.detach()
        else:
            arr = np.fromiter(addrs, dtype=np.uint64)
            fh.write(arr.astype("<u8").tobytes())
            count = len(arr)
    finally:
        if owned:
            fh.close()
    return count


def generate_trace(
    model: str,
    *,
    seed: int = 0,
    length: int = 1000,
    line_size: int = 4,
    span: int = 1 << 20,
    blocks: int = 64,
    stride: int = 1,
    exponent: float = 1.0,
) -> list[int]:
    """Deterministic synthetic byte-address trace.

    ``uniform``
        Addresses drawn uniformly from ``[0, span)``.
    ``loop``
        Blocks ``0, stride, 2*stride, ..., (blocks-1)*stride`` repeated
        cyclically; ``stride`` counts lines, each block is emitted as its
        line-aligned byte address.
    ``zipf_ws``
        A working set of ``blocks`` distinct lines, each access picking a
        line with probability proportional to ``rank ** -exponent``.  Ranks
        are assigned to lines by a seeded permutation.
    """
    if length < 0:
        raise ValueError("length must be >= 0")
    if not is_power_of_two(line_size):
        raise ValueError(f"line size {line_size} is not a power of two")
    rng = np.random.default_rng(seed)
    if model == "uniform":
        if span < 1:
            raise ValueError("uniform span must be >= 1")
        return rng.integers(0, span, size=length, dtype=np.uint64).tolist()
    if model == "loop":
        if blocks < 1:
            raise ValueError("loop block count must be >= 1")
        if stride < 1:
            raise ValueError("loop stride must be >= 1")
        idx = np.arange(length, dtype=np.uint64) % np.uint64(blocks)
        return (idx * np.uint64(stride * line_size)).tolist()
    if model == "zipf_ws":
        if blocks < 1:
            raise ValueError("zipf_ws block count must be >= 1")
        if not exponent > 0:
            raise ValueError("zipf_ws exponent must be > 0")
        weights = np.arange(1, blocks + 1, dtype=np.float64) ** -exponent
        weights /= weights.sum()
        lines = rng.permutation(blocks).astype(np.uint64)
        ranks = rng.choice(blocks, size=length, p=weights)
        return (lines[ranks] * np.uint64(line_size)).tolist()
    raise ValueError(f"unknown trace model {model!r}")
