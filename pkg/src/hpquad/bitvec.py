"""Plain rank/select bitvector.

Bits are packed LSB-first into 64-bit words: position ``i`` lives in bit
``i % 64`` of word ``i // 64``. The rank directory is two-level (absolute
counts per 512-bit superblock, relative counts per 64-bit block). Select
narrows to a superblock through sampled hints, then scans blocks and the
final word.

Scalar methods run on Python ints (fast for single queries); the ``*_many``
methods take index arrays and are what the batch query paths use.
"""

from __future__ import annotations

from bisect import bisect_right
from typing import Iterable, Protocol, runtime_checkable

import numpy as np

WORD_BITS = 64
SUPER_BITS = 512
WORDS_PER_SUPER = SUPER_BITS // WORD_BITS
SELECT_SAMPLE = 512

_U64 = np.uint64


@runtime_checkable
class RankSelect(Protocol):
    """What the index structures need from a bitvector backend."""

    def __len__(self) -> int: ...
    def access(self, i: int) -> int: ...
    def rank1(self, i: int) -> int: ...
    def select1(self, j: int) -> int: ...


def pack_bits(bits) -> tuple[np.ndarray, int]:
    """Pack a 0/1 sequence into LSB-first ``uint64`` words."""
    arr = np.asarray(bits, dtype=np.uint8).ravel()
    if arr.size and arr.max() > 1:
        raise ValueError("bits must be 0 or 1")
    n = int(arr.size)
    nwords = (n + WORD_BITS - 1) // WORD_BITS
    padded = np.zeros(nwords * WORD_BITS, dtype=np.uint8)
    padded[:n] = arr
    words = np.packbits(padded, bitorder="little").view("<u8").astype(_U64)
    return words, n


def unpack_bits(words: np.ndarray, length: int) -> np.ndarray:
    raw = np.ascontiguousarray(words, dtype="<u8").view(np.uint8)
    return np.unpackbits(raw, bitorder="little")[:length]


class BitVector:
    """Immutable bitvector with constant-time access and rank."""

    def __init__(self, bits: Iterable[int] | np.ndarray = ()):
        if isinstance(bits, str):
            bits = [int(c) for c in bits if c in "01"]
        elif not isinstance(bits, np.ndarray):
            bits = list(bits)
        words, n = pack_bits(bits)
        self._init(words, n)

    @classmethod
    def from_words(cls, words: np.ndarray, length: int) -> "BitVector":
        words = np.asarray(words, dtype=_U64)
        need = (length + WORD_BITS - 1) // WORD_BITS
        if words.size < need:
            raise ValueError(f"{words.size} words cannot hold {length} bits")
        words = words[:need].copy()
        tail = length % WORD_BITS
        if need and tail:
            words[-1] &= _U64((1 << tail) - 1)
        self = cls.__new__(cls)
        self._init(words, length)
        return self

    def _init(self, words: np.ndarray, length: int) -> None:
        self._len = int(length)
        nwords = words.size
        # two zero words of padding so windows never run off the end
        self._words = np.concatenate([words, np.zeros(2, dtype=_U64)])
        # directory covers one word past the payload so rank(len) is defined
        counts = np.bitwise_count(self._words[: nwords + 1]).astype(np.int64)
        cum = np.concatenate([[0], np.cumsum(counts)])
        sdtype = np.uint32 if cum[-1] < 2**32 else np.int64
        self._super = cum[::WORDS_PER_SUPER].astype(sdtype)
        widx = np.arange(nwords + 1)
        self._block = (cum[:-1] - self._super[widx // WORDS_PER_SUPER]).astype(np.uint16)
        self._ones = int(cum[nwords])
        # first superblock touched by every SELECT_SAMPLE-th one
        targets = np.arange(0, self._ones, SELECT_SAMPLE)
        self._hints = np.searchsorted(self._super, targets, side="right") - 1
        self._wl = self._words.tolist()
        self._sl = self._super.tolist()
        self._bl = self._block.tolist()
        self._hl = self._hints.tolist()

    # -- properties ---------------------------------------------------------

    def __len__(self) -> int:
        return self._len

    @property
    def ones(self) -> int:
        return self._ones

    @property
    def words(self) -> np.ndarray:
        """Payload words, without padding."""
        return self._words[: (self._len + WORD_BITS - 1) // WORD_BITS]

    def aux_bits(self) -> int:
        """Size of the rank/select directories in bits."""
        return (self._super.size * self._super.itemsize * 8 + self._block.size * 16
                + self._hints.size * 32)

    def to_array(self) -> np.ndarray:
        return unpack_bits(self._words, self._len)

    def __str__(self) -> str:
        return "".join(map(str, self.to_array().tolist()))

    def __repr__(self) -> str:
        return f"BitVector(len={self._len}, ones={self._ones})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, BitVector):
            return NotImplemented
        return self._len == other._len and np.array_equal(self.words, other.words)

    __hash__ = None  # type: ignore[assignment]

    # -- scalar queries -----------------------------------------------------

    def access(self, i: int) -> int:
        if not 0 <= i < self._len:
            raise IndexError(f"bit {i} out of range for length {self._len}")
        return (self._wl[i >> 6] >> (i & 63)) & 1

    __getitem__ = access

    def rank1(self, i: int) -> int:
        """Number of ones in positions ``[0, i)``."""
        if not 0 <= i <= self._len:
            raise IndexError(f"rank position {i} out of range for length {self._len}")
        w = i >> 6
        return (self._sl[w >> 3] + self._bl[w]
                + (self._wl[w] & ((1 << (i & 63)) - 1)).bit_count())

    def rank0(self, i: int) -> int:
        return i - self.rank1(i)

    def select1(self, j: int) -> int:
        """Position of the ``j``-th one, counting from 1."""
        if not 1 <= j <= self._ones:
            raise IndexError(f"select ordinal {j} out of range 1..{self._ones}")
        k = j - 1
        h = k // SELECT_SAMPLE
        lo = self._hl[h]
        hi = self._hl[h + 1] + 1 if h + 1 < len(self._hl) else len(self._sl)
        sb = bisect_right(self._sl, k, lo, hi) - 1
        w = sb * WORDS_PER_SUPER
        rem = k - self._sl[sb]
        last = min(w + WORDS_PER_SUPER, len(self._bl))
        while w + 1 < last and self._bl[w + 1] <= rem:
            w += 1
        rem -= self._bl[w]
        word = self._wl[w]
        for _ in range(rem):
            word &= word - 1
        return (w << 6) + ((word & -word).bit_length() - 1)

    def window(self, off: int, count: int) -> int:
        """``count`` bits from ``off``, first bit most significant."""
        v = self.window_lsb(off, count)
        return int(format(v, f"0{count}b")[::-1], 2) if count else 0

    def window_lsb(self, off: int, count: int) -> int:
        """``count <= 64`` bits from ``off``; bit ``off`` lands in bit 0."""
        w, o = off >> 6, off & 63
        v = (self._wl[w] >> o) | (self._wl[w + 1] << (64 - o))
        return v & ((1 << count) - 1)

    # -- batch queries ------------------------------------------------------

    def access_many(self, idx: np.ndarray) -> np.ndarray:
        idx = np.asarray(idx, dtype=np.int64)
        return ((self._words[idx >> 6] >> (idx & 63).astype(_U64)) & _U64(1)).astype(np.int64)

    def rank1_many(self, idx: np.ndarray) -> np.ndarray:
        idx = np.asarray(idx, dtype=np.int64)
        w = idx >> 6
        mask = (_U64(1) << (idx & 63).astype(_U64)) - _U64(1)
        return (self._super[w >> 3].astype(np.int64) + self._block[w].astype(np.int64)
                + np.bitwise_count(self._words[w] & mask).astype(np.int64))

    def window_many(self, off: np.ndarray) -> np.ndarray:
        """64-bit LSB-first windows starting at each offset."""
        off = np.asarray(off, dtype=np.int64)
        w = off >> 6
        o = (off & 63).astype(_U64)
        lo = self._words[w] >> o
        # split the shift so o == 0 never shifts by 64
        hi = (self._words[w + 1] << _U64(1)) << (_U64(63) - o)
        return lo | hi


def concat(parts: list[np.ndarray]) -> BitVector:
    if not parts:
        return BitVector()
    return BitVector(np.concatenate([np.asarray(p, dtype=np.uint8) for p in parts]))
