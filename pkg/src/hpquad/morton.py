"""Morton (Z-order) labels for cells of a ``u x u`` grid.

A cell's label is the root-to-leaf path in the quadtree: the bits of ``y``
and ``x`` interleaved, most significant first, ``y`` bit leading each pair.
Origin is the top-left cell, ``x`` grows rightward and ``y`` downward, so the
quadrant index at every level is ``2 * y_bit + x_bit`` (TL, TR, BL, BR).

Two bit orders are used:

* *MSB-first* (:class:`PathLabel`, :func:`interleave_array`): the integer whose
  binary spelling is the label. Sorting these sorts cells in Z-order.
* *depth order* (:func:`depth_order_array`): bit ``k`` of the integer is the
  label's ``k``-th edge. This matches how bitvectors store positions, so the
  query code compares words directly and counts trailing zeros.
"""

from __future__ import annotations

from typing import NamedTuple, Protocol

import numpy as np

MAX_LG_U = 31
WORD = 64


class GridSpec(NamedTuple):
    """A ``2**lg_u`` by ``2**lg_u`` grid."""

    lg_u: int

    @property
    def u(self) -> int:
        return 1 << self.lg_u

    @property
    def label_bits(self) -> int:
        return 2 * self.lg_u

    @classmethod
    def checked(cls, lg_u: int) -> "GridSpec":
        lg_u = int(lg_u)
        if not 0 <= lg_u <= MAX_LG_U:
            raise ValueError(f"lg_u must be in [0, {MAX_LG_U}], got {lg_u}")
        return cls(lg_u)

    @classmethod
    def covering(cls, max_coord: int) -> "GridSpec":
        """Smallest grid containing coordinates ``0..max_coord``."""
        return cls.checked(max(int(max_coord), 0).bit_length())


class Point(NamedTuple):
    x: int
    y: int


class PathLabel(NamedTuple):
    """``length`` label bits packed MSB-first into ``bits``."""

    bits: int
    length: int

    def window(self, off: int, count: int) -> int:
        return (self.bits >> (self.length - off - count)) & ((1 << count) - 1)

    def __str__(self) -> str:
        return format(self.bits, f"0{self.length}b") if self.length else ""


class BitSource(Protocol):
    def window(self, off: int, count: int) -> int:
        """``count`` bits starting at ``off``, first bit most significant."""


def _check_point(p: Point, grid: GridSpec) -> None:
    u = grid.u
    if not (0 <= p.x < u and 0 <= p.y < u):
        raise ValueError(f"point ({p.x}, {p.y}) outside {u}x{u} grid")


def interleave(p: Point, grid: GridSpec) -> PathLabel:
    _check_point(p, grid)
    bits = 0
    for k in range(grid.lg_u - 1, -1, -1):
        bits = (bits << 2) | (((p.y >> k) & 1) << 1) | ((p.x >> k) & 1)
    return PathLabel(bits, grid.label_bits)


def deinterleave(label: PathLabel, grid: GridSpec) -> Point:
    if label.length != grid.label_bits:
        raise ValueError(
            f"label has {label.length} bits, grid needs {grid.label_bits}"
        )
    x = y = 0
    for k in range(grid.lg_u):
        pair = (label.bits >> (label.length - 2 * k - 2)) & 3
        y = (y << 1) | (pair >> 1)
        x = (x << 1) | (pair & 1)
    return Point(x, y)


def lcp(a: BitSource, a_off: int, b: BitSource, b_off: int, max_len: int) -> int:
    """Longest common prefix of two bit windows, at most ``max_len`` bits.

    Compares a machine word at a time: XOR the windows, and the leading zeros
    of the result give the matching prefix within the chunk.
    """
    done = 0
    while done < max_len:
        k = min(WORD, max_len - done)
        diff = a.window(a_off + done, k) ^ b.window(b_off + done, k)
        if diff:
            return done + k - diff.bit_length()
        done += k
    return max_len


def lcp_depth_order(a: int, b: int, max_len: int) -> int:
    """:func:`lcp` for two depth-order words (first bit least significant)."""
    diff = (a ^ b) & ((1 << max_len) - 1)
    if not diff:
        return max_len
    return (diff & -diff).bit_length() - 1


# --- vectorized forms -------------------------------------------------------

_SPREAD = [
    (16, np.uint64(0x0000FFFF0000FFFF)),
    (8, np.uint64(0x00FF00FF00FF00FF)),
    (4, np.uint64(0x0F0F0F0F0F0F0F0F)),
    (2, np.uint64(0x3333333333333333)),
    (1, np.uint64(0x5555555555555555)),
]


def _spread(v: np.ndarray) -> np.ndarray:
    v = v.astype(np.uint64) & np.uint64(0xFFFFFFFF)
    for shift, mask in _SPREAD:
        v = (v | (v << np.uint64(shift))) & mask
    return v


def _compact_bits(v: np.ndarray) -> np.ndarray:
    v = v & np.uint64(0x5555555555555555)
    v = (v | (v >> np.uint64(1))) & np.uint64(0x3333333333333333)
    v = (v | (v >> np.uint64(2))) & np.uint64(0x0F0F0F0F0F0F0F0F)
    v = (v | (v >> np.uint64(4))) & np.uint64(0x00FF00FF00FF00FF)
    v = (v | (v >> np.uint64(8))) & np.uint64(0x0000FFFF0000FFFF)
    v = (v | (v >> np.uint64(16))) & np.uint64(0x00000000FFFFFFFF)
    return v


def _reverse_bits(v: np.ndarray, nbits: int) -> np.ndarray:
    out = np.zeros_like(v, dtype=np.uint64)
    v = v.astype(np.uint64)
    one = np.uint64(1)
    for k in range(nbits):
        out |= ((v >> np.uint64(k)) & one) << np.uint64(nbits - 1 - k)
    return out


def check_coords(xs, ys, grid: GridSpec) -> tuple[np.ndarray, np.ndarray]:
    xs = np.asarray(xs, dtype=np.int64).ravel()
    ys = np.asarray(ys, dtype=np.int64).ravel()
    if xs.shape != ys.shape:
        raise ValueError("x and y must have the same length")
    u = grid.u
    bad = (xs < 0) | (xs >= u) | (ys < 0) | (ys >= u)
    if bad.any():
        k = int(np.flatnonzero(bad)[0])
        raise ValueError(f"point ({xs[k]}, {ys[k]}) outside {u}x{u} grid")
    return xs, ys


def interleave_array(xs, ys, grid: GridSpec) -> np.ndarray:
    """MSB-first labels as ``uint64``; ascending order is Z-order."""
    xs, ys = check_coords(xs, ys, grid)
    return _spread(ys) << np.uint64(1) | _spread(xs)


def deinterleave_array(labels, grid: GridSpec) -> tuple[np.ndarray, np.ndarray]:
    labels = np.asarray(labels, dtype=np.uint64)
    xs = _compact_bits(labels)
    ys = _compact_bits(labels >> np.uint64(1))
    return xs.astype(np.int64), ys.astype(np.int64)


def depth_order_array(xs, ys, grid: GridSpec) -> np.ndarray:
    """Labels with the first edge in bit 0 (bit-reversed MSB-first labels)."""
    xs, ys = check_coords(xs, ys, grid)
    lg = grid.lg_u
    rx = _reverse_bits(xs, lg)
    ry = _reverse_bits(ys, lg)
    return _spread(ry) | (_spread(rx) << np.uint64(1))


def depth_order_to_points(rlabels, grid: GridSpec) -> tuple[np.ndarray, np.ndarray]:
    rlabels = np.asarray(rlabels, dtype=np.uint64)
    lg = grid.lg_u
    ry = _compact_bits(rlabels)
    rx = _compact_bits(rlabels >> np.uint64(1))
    return (_reverse_bits(rx, lg).astype(np.int64),
            _reverse_bits(ry, lg).astype(np.int64))


def bit_length_u64(v: np.ndarray) -> np.ndarray:
    """Elementwise ``int.bit_length`` for ``uint64`` arrays."""
    v = np.asarray(v, dtype=np.uint64).copy()
    out = np.zeros(v.shape, dtype=np.int64)
    for shift in (32, 16, 8, 4, 2, 1):
        s = np.uint64(shift)
        big = (v >> s) != 0
        out[big] += shift
        v[big] >>= s
    out += (v != 0)
    return out


def ctz_u64(v: np.ndarray) -> np.ndarray:
    """Trailing zero count; zero words map to 64."""
    v = np.asarray(v, dtype=np.uint64)
    low = v & (~v + np.uint64(1))
    with np.errstate(divide="ignore"):
        # powers of two convert to float64 exactly
        tz = np.log2(low.astype(np.float64))
    return np.where(v == 0, 64, tz).astype(np.int64)
