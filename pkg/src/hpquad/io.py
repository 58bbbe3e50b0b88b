"""On-disk formats.

Index file (all integers little-endian)::

    magic "HPQ1" | tag u8 (0 = HP, 1 = K2) | flags u8 (bit 0: empty set)
    | lg_u u8 | reserved u8 | n u64
    HP: paths_starting_at[2 lg_u + 1] u64 | |H| u64 | H words
        | L words (all L_d back to back; length implied by the path counts)
    K2: level bit lengths u64 each | each level's words (lg_u levels, none
        when the set is empty or the grid is 1x1)

Bit payloads are 64-bit words, lowest position in the least significant bit.
Rank/select directories are rebuilt on load.

Points file: one ``x y`` pair per line, ``#`` starts a comment line.
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import Iterable, Union

import numpy as np

from .bitvec import BitVector
from .builder import HPIndex, PointSet
from .k2 import K2Index
from .morton import GridSpec, MAX_LG_U

MAGIC = b"HPQ1"
TAG_HP = 0
TAG_K2 = 1
FLAG_EMPTY = 1
_HEADER = struct.Struct("<4sBBBBQ")

Index = Union[HPIndex, K2Index]


class IndexFormatError(ValueError):
    """The bytes do not describe a valid index."""


class PointsFileError(ValueError):
    def __init__(self, message: str, lineno: int):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


# --------------------------------------------------------------------------
# index files


def _words(bv: BitVector) -> bytes:
    return bv.words.astype("<u8").tobytes()


def dumps_index(idx: Index) -> bytes:
    tag = TAG_HP if isinstance(idx, HPIndex) else TAG_K2
    flags = FLAG_EMPTY if idx.n == 0 else 0
    parts = [_HEADER.pack(MAGIC, tag, flags, idx.grid.lg_u, 0, idx.n)]
    if tag == TAG_HP:
        parts.append(idx.paths_starting_at.astype("<u8").tobytes())
        parts.append(struct.pack("<Q", len(idx.H)))
        parts.append(_words(idx.H))
        parts.append(_words(idx.L))
    else:
        parts.append(np.array([len(lv) for lv in idx.levels], dtype="<u8").tobytes())
        parts.extend(_words(lv) for lv in idx.levels)
    return b"".join(parts)


class _Reader:
    def __init__(self, data: bytes):
        self.data = memoryview(data)
        self.pos = 0

    def take(self, size: int) -> memoryview:
        if self.pos + size > len(self.data):
            raise IndexFormatError("index file truncated")
        out = self.data[self.pos:self.pos + size]
        self.pos += size
        return out

    def u64s(self, count: int) -> np.ndarray:
        return np.frombuffer(self.take(8 * count), dtype="<u8").astype(np.uint64)

    def bits(self, length: int) -> BitVector:
        return BitVector.from_words(self.u64s((length + 63) // 64), length)


def loads_index(data: bytes) -> Index:
    r = _Reader(data)
    magic, tag, flags, lg_u, _reserved, n = _HEADER.unpack(r.take(_HEADER.size))
    if magic != MAGIC:
        raise IndexFormatError(f"bad magic {bytes(magic)!r}")
    if lg_u > MAX_LG_U:
        raise IndexFormatError(f"lg_u {lg_u} too large")
    if bool(flags & FLAG_EMPTY) != (n == 0):
        raise IndexFormatError("empty flag disagrees with point count")
    grid = GridSpec(lg_u)
    try:
        if tag == TAG_HP:
            counts = r.u64s(2 * lg_u + 1).astype(np.int64)
            (h_len,) = struct.unpack("<Q", r.take(8))
            H = r.bits(h_len)
            cum = np.cumsum(counts)
            L = r.bits(int(cum[:-1].sum()))
            idx: Index = HPIndex(grid, n, H, L, counts)
        elif tag == TAG_K2:
            count = lg_u if n and lg_u else 0
            lengths = r.u64s(count).tolist()
            idx = K2Index(grid, n, [r.bits(int(k)) for k in lengths])
        else:
            raise IndexFormatError(f"unknown structure tag {tag}")
    except IndexFormatError:
        raise
    except ValueError as exc:
        raise IndexFormatError(str(exc)) from exc
    if r.pos != len(r.data):
        raise IndexFormatError(f"{len(r.data) - r.pos} trailing bytes")
    return idx


def save_index(idx: Index, path) -> None:
    Path(path).write_bytes(dumps_index(idx))


def load_index(path) -> Index:
    return loads_index(Path(path).read_bytes())


# --------------------------------------------------------------------------
# points files


def parse_points(lines: Iterable[str], grid: GridSpec | None = None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Parse ``x y`` lines; returns (xs, ys, line numbers)."""
    xs, ys, linenos = [], [], []
    u = grid.u if grid is not None else None
    for lineno, line in enumerate(lines, 1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        fields = text.split()
        if len(fields) != 2:
            raise PointsFileError(f"expected 'x y', got {text!r}", lineno)
        try:
            x, y = int(fields[0]), int(fields[1])
        except ValueError:
            raise PointsFileError(f"non-integer coordinate in {text!r}", lineno) from None
        if x < 0 or y < 0 or (u is not None and (x >= u or y >= u)):
            raise PointsFileError(f"point ({x}, {y}) outside {u}x{u} grid", lineno)
        xs.append(x)
        ys.append(y)
        linenos.append(lineno)
    return (np.asarray(xs, dtype=np.int64), np.asarray(ys, dtype=np.int64),
            np.asarray(linenos, dtype=np.int64))


def read_points(path, grid: GridSpec) -> PointSet:
    with open(path, encoding="utf-8") as fh:
        xs, ys, _ = parse_points(fh, grid)
    return PointSet.from_arrays(xs, ys, grid)


def format_points(points: Iterable) -> str:
    return "".join(f"{int(x)} {int(y)}\n" for x, y in points)


def write_points(path, points: Iterable) -> None:
    Path(path).write_text(format_points(points), encoding="utf-8")
