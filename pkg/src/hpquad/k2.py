"""Basic k²-tree with k = 2.

Level ``l`` holds four bits per node at depth ``l`` that has children,
nodes taken in breadth-first (equivalently Morton) order; the last level
holds the cell bits. The children of the node behind a set bit at position
``p`` of level ``l`` occupy bits ``4 * rank1(level_l, p)`` onwards in level
``l + 1``. One rank per level, no path skipping.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bitvec import BitVector
from .builder import PointSet
from .hpindex import Rect, SpaceStats
from .morton import GridSpec, Point, check_coords, interleave_array

_U64 = np.uint64


@dataclass(eq=False)
class K2Index:
    grid: GridSpec
    n: int
    levels: list[BitVector]

    def __post_init__(self):
        lg = self.grid.lg_u
        if self.n == 0 or lg == 0:
            if self.levels:
                raise ValueError("empty or 1x1 k2 index stores no levels")
            if lg == 0 and self.n > 1:
                raise ValueError("a 1x1 grid holds at most one point")
            return
        if len(self.levels) != lg:
            raise ValueError(f"expected {lg} levels, got {len(self.levels)}")
        if len(self.levels[0]) != 4:
            raise ValueError("level 0 must have 4 bits")
        for a, b in zip(self.levels, self.levels[1:]):
            if len(b) != 4 * a.ones:
                raise ValueError("level sizes break the 4 * ones recurrence")
        if self.levels[-1].ones != self.n:
            raise ValueError(f"last level has {self.levels[-1].ones} cells, header says {self.n}")

    @property
    def empty(self) -> bool:
        return self.n == 0

    @property
    def node_count(self) -> int:
        return 1 + sum(len(lv) for lv in self.levels)

    def __eq__(self, other) -> bool:
        if not isinstance(other, K2Index):
            return NotImplemented
        return (self.grid == other.grid and self.n == other.n
                and self.levels == other.levels)

    __hash__ = None  # type: ignore[assignment]


def k2_build(ps: PointSet) -> K2Index:
    lg = ps.grid.lg_u
    if ps.n == 0 or lg == 0:
        return K2Index(ps.grid, ps.n, [])
    labels = ps.labels
    levels = []
    for l in range(lg):
        parents = np.unique(labels >> _U64(2 * (lg - l)))
        kids = np.unique(labels >> _U64(2 * (lg - l - 1)))
        where = 4 * np.searchsorted(parents, kids >> _U64(2)) + (kids & _U64(3)).astype(np.int64)
        bits = np.zeros(4 * parents.size, dtype=np.uint8)
        bits[where] = 1
        levels.append(BitVector(bits))
    return K2Index(ps.grid, ps.n, levels)


def _quad(x: int, y: int, lg: int, l: int) -> int:
    k = lg - 1 - l
    return (((y >> k) & 1) << 1) | ((x >> k) & 1)


def k2_membership(idx: K2Index, p) -> bool:
    x, y = int(p[0]), int(p[1])
    u = idx.grid.u
    if not (0 <= x < u and 0 <= y < u):
        raise ValueError(f"point ({x}, {y}) outside {u}x{u} grid")
    if idx.empty:
        return False
    lg = idx.grid.lg_u
    if lg == 0:
        return True
    pos = _quad(x, y, lg, 0)
    for l, level in enumerate(idx.levels):
        if not level.access(pos):
            return False
        if l + 1 < lg:
            pos = 4 * level.rank1(pos) + _quad(x, y, lg, l + 1)
    return True


def k2_membership_batch(idx: K2Index, xs, ys) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized membership; also returns levels descended per query."""
    xs, ys = check_coords(xs, ys, idx.grid)
    N = xs.size
    member = np.zeros(N, dtype=bool)
    depth = np.zeros(N, dtype=np.int64)
    if idx.empty or N == 0:
        return member, depth
    lg = idx.grid.lg_u
    if lg == 0:
        member[:] = True
        return member, depth
    labels = interleave_array(xs, ys, idx.grid)
    active = np.arange(N)
    quad = lambda lab, l: (lab >> _U64(2 * (lg - 1 - l))).astype(np.int64) & 3
    pos = quad(labels, 0)
    for l, level in enumerate(idx.levels):
        depth[active] += 1
        keep = level.access_many(pos) == 1
        active, pos = active[keep], pos[keep]
        if l + 1 < lg:
            pos = 4 * level.rank1_many(pos) + quad(labels[active], l + 1)
    member[active] = True
    return member, depth


def k2_range(idx: K2Index, rect: Rect) -> list[Point]:
    rect = Rect(*rect).check(idx.grid)
    out: list[Point] = []
    if idx.empty or rect.empty:
        return out
    lg = idx.grid.lg_u
    if lg == 0:
        return [Point(0, 0)]
    x0, y0, x1, y1 = rect
    levels = idx.levels
    half = 1 << (lg - 1)
    # (level, bit position, x origin, y origin); children pushed BR..TL so
    # they pop in Morton order
    stack = [(0, q, (q & 1) * half, (q >> 1) * half) for q in (3, 2, 1, 0)]
    pop, push = stack.pop, stack.append
    while stack:
        l, p, cx, cy = pop()
        side = 1 << (lg - 1 - l)
        if cx >= x1 or cx + side <= x0 or cy >= y1 or cy + side <= y0:
            continue
        level = levels[l]
        if not level.access(p):
            continue
        if l + 1 == lg:
            out.append(Point(cx, cy))
            continue
        base = 4 * level.rank1(p)
        half = side >> 1
        for q in (3, 2, 1, 0):
            push((l + 1, base + q, cx + (q & 1) * half, cy + (q >> 1) * half))
    return out


def k2_decode(idx: K2Index) -> PointSet:
    u = idx.grid.u
    return PointSet.from_points(k2_range(idx, Rect(0, 0, u, u)), idx.grid)


def k2_space_stats(idx: K2Index) -> SpaceStats:
    internal = sum(len(lv) for lv in idx.levels[:-1])
    last = len(idx.levels[-1]) if idx.levels else 0
    aux = sum(lv.aux_bits() for lv in idx.levels) + 64 * len(idx.levels)
    total = internal + last + aux
    return SpaceStats("k2", idx.n, idx.grid.lg_u, idx.node_count, internal, last,
                      aux, total, total / idx.n if idx.n else None)
