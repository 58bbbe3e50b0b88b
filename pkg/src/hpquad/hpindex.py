"""Navigation and queries over an :class:`~hpquad.builder.HPIndex`.

A node of T is named by its bit position ``i`` in H. Paths of equal length
sit next to each other in H with a fixed stride, so a position decodes to
(path rank, depth) with one boundary lookup and a division.

Membership walks heavy paths instead of single edges: at the top of each
path it compares the remaining query label against the path's bits one word
at a time, jumps to where they diverge, and leaves through the off-path
child there (if it exists).
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import asdict, dataclass, field
from typing import NamedTuple

import numpy as np

from .builder import HPIndex
from .morton import (
    GridSpec,
    Point,
    ctz_u64,
    depth_order_array,
    lcp_depth_order,
)

_U64 = np.uint64


@dataclass(frozen=True)
class NodeRef:
    i: int
    rank: int
    depth: int
    offset: int
    start_depth: int

    @property
    def is_top(self) -> bool:
        return self.offset == 0


@dataclass
class QueryTrace:
    result: bool = False
    lcp_lengths: list[int] = field(default_factory=list)
    nodes_visited: int = 0

    @property
    def segments(self) -> int:
        return len(self.lcp_lengths)

    def __str__(self) -> str:
        return f"segments={self.segments} lcp={','.join(map(str, self.lcp_lengths))}"


class Rect(NamedTuple):
    """Half-open cell range ``[x0, x1) x [y0, y1)``."""

    x0: int
    y0: int
    x1: int
    y1: int

    def check(self, grid: GridSpec) -> "Rect":
        u = grid.u
        if not (0 <= self.x0 <= self.x1 <= u and 0 <= self.y0 <= self.y1 <= u):
            raise ValueError(f"rectangle {tuple(self)} invalid for {u}x{u} grid")
        return self

    def contains(self, x: int, y: int) -> bool:
        return self.x0 <= x < self.x1 and self.y0 <= y < self.y1

    @property
    def empty(self) -> bool:
        return self.x0 >= self.x1 or self.y0 >= self.y1


@dataclass
class SpaceStats:
    structure: str
    n: int
    lg_u: int
    nodes: int
    bits_H: int
    bits_L: int
    bits_aux: int
    bits_total: int
    bpp: float | None

    def to_dict(self) -> dict:
        return asdict(self)


# --------------------------------------------------------------------------
# node navigation


def locate(idx: HPIndex, i: int) -> NodeRef:
    if not 0 <= i < len(idx.H):
        raise IndexError(f"H position {i} out of range for |H| = {len(idx.H)}")
    s = bisect_right(idx._base, i) - 1
    k, off = divmod(i - idx._base[s], idx.depths + 1 - s)
    first = idx._cum[s - 1] if s else 0
    return NodeRef(i, first + k, s + off, off, s)


def _has_two(idx: HPIndex, d: int, r: int) -> bool:
    return idx.L.access(idx._loff[d] + r) == 1


def _off_path(idx: HPIndex, d: int, r: int) -> NodeRef:
    j = idx.level_rank(d, r + 1)
    rr = idx._cum[d] + j - 1
    return NodeRef(idx.path_start(rr, d + 1), rr, d + 1, 0, d + 1)


def children(idx: HPIndex, v: NodeRef) -> list[tuple[NodeRef, int]]:
    """``(child, side)`` pairs, on-path child first; side 0 is left."""
    if v.depth == idx.depths:
        return []
    on = NodeRef(v.i + 1, v.rank, v.depth + 1, v.offset + 1, v.start_depth)
    side = idx.H.access(v.i + 1)
    out = [(on, side)]
    if _has_two(idx, v.depth, v.rank):
        out.append((_off_path(idx, v.depth, v.rank), 1 - side))
    return out


def parent(idx: HPIndex, v: NodeRef) -> NodeRef | None:
    if v.i == 0:
        return None
    if not v.is_top:
        return NodeRef(v.i - 1, v.rank, v.depth - 1, v.offset - 1, v.start_depth)
    d = v.depth
    j = v.rank - idx._cum[d - 1] + 1
    pr = idx.level_select(d - 1, j)
    ps = bisect_right(idx._cum, pr)
    return NodeRef(idx.path_start(pr, ps) + d - 1 - ps, pr, d - 1, d - 1 - ps, ps)


# --------------------------------------------------------------------------
# membership


def _depth_label(x: int, y: int, lg: int) -> int:
    lab = 0
    for t in range(lg):
        k = lg - 1 - t
        lab |= ((y >> k) & 1) << (2 * t) | ((x >> k) & 1) << (2 * t + 1)
    return lab


def _check(idx: HPIndex, p) -> tuple[int, int]:
    x, y = int(p[0]), int(p[1])
    u = idx.grid.u
    if not (0 <= x < u and 0 <= y < u):
        raise ValueError(f"point ({x}, {y}) outside {u}x{u} grid")
    return x, y


def membership(idx: HPIndex, p) -> tuple[bool, QueryTrace]:
    """Membership of cell ``p = (x, y)`` with a per-segment trace."""
    x, y = _check(idx, p)
    trace = QueryTrace()
    if idx.empty:
        return False, trace
    D = idx.depths
    lab = _depth_label(x, y, idx.grid.lg_u)
    H, L = idx.H, idx.L
    cum, base, loff, lrank = idx._cum, idx._base, idx._loff, idx._lrank
    r, pos, q = 0, 1, 0
    trace.nodes_visited = 1
    while True:
        span = D - q
        m = lcp_depth_order(H.window_lsb(pos, span), lab >> q, span)
        trace.lcp_lengths.append(m)
        trace.nodes_visited += m
        e = q + m
        if e == D:
            trace.result = True
            return True, trace
        at = loff[e] + r
        if not L.access(at):
            return False, trace
        r = cum[e] + L.rank1(at + 1) - lrank[e] - 1
        pos = base[e + 1] + (r - cum[e]) * (D - e)
        q = e


def contains(idx: HPIndex, p) -> bool:
    """Same answer as :func:`membership`, without building a trace."""
    x, y = _check(idx, p)
    if idx.empty:
        return False
    D = idx.depths
    lab = _depth_label(x, y, idx.grid.lg_u)
    H, L = idx.H, idx.L
    cum, base, loff, lrank = idx._cum, idx._base, idx._loff, idx._lrank
    r, pos, q = 0, 1, 0
    while True:
        span = D - q
        e = q + lcp_depth_order(H.window_lsb(pos, span), lab >> q, span)
        if e == D:
            return True
        at = loff[e] + r
        if not L.access(at):
            return False
        r = cum[e] + L.rank1(at + 1) - lrank[e] - 1
        pos = base[e + 1] + (r - cum[e]) * (D - e)
        q = e


def membership_batch(idx: HPIndex, xs, ys) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized membership; returns (member flags, segments per query).

    All queries advance one heavy-path segment per round, so the number of
    rounds is bounded by the segment count of the worst query.
    """
    lab = depth_order_array(xs, ys, idx.grid)
    N = lab.size
    member = np.zeros(N, dtype=bool)
    segments = np.zeros(N, dtype=np.int64)
    if idx.empty or N == 0:
        return member, segments
    D = idx.depths
    cum, base, loff, lrank = (idx.cum_paths, idx.path_base, idx.level_offset,
                              np.asarray(idx._lrank, dtype=np.int64))
    active = np.arange(N)
    r = np.zeros(N, dtype=np.int64)
    pos = np.ones(N, dtype=np.int64)
    q = np.zeros(N, dtype=np.int64)
    while active.size:
        segments[active] += 1
        span = D - q
        mask = (_U64(1) << span.astype(_U64)) - _U64(1)
        diff = (idx.H.window_many(pos) ^ (lab[active] >> q.astype(_U64))) & mask
        e = q + np.minimum(ctz_u64(diff), span)
        hit = e == D
        member[active[hit]] = True
        go = ~hit
        active, r, e = active[go], r[go], e[go]
        at = loff[e] + r
        two = idx.L.access_many(at) == 1
        active, r, e, at = active[two], r[two], e[two], at[two]
        r = cum[e] + idx.L.rank1_many(at + 1) - lrank[e] - 1
        pos = base[e + 1] + (r - cum[e]) * (D - e)
        q = e
    return member, segments


# --------------------------------------------------------------------------
# range reporting


def _unpacked(idx: HPIndex) -> tuple[bytes, bytes]:
    # one byte per bit; built on first use by range queries
    cached = getattr(idx, "_bytes_cache", None)
    if cached is None:
        cached = (idx.H.to_array().tobytes(), idx.L.to_array().tobytes())
        idx._bytes_cache = cached
    return cached


def range_report(idx: HPIndex, rect: Rect) -> list[Point]:
    """Points inside ``rect``, in Morton order.

    Depth-first over T, left child before right, skipping every node whose
    square misses the rectangle. Backtracks with an explicit stack rather
    than parent moves.
    """
    rect = Rect(*rect).check(idx.grid)
    out: list[Point] = []
    if idx.empty or rect.empty:
        return out
    x0, y0, x1, y1 = rect
    lg, D = idx.grid.lg_u, idx.depths
    hb, lb = _unpacked(idx)
    cum, base, loff, lrank = idx._cum, idx._base, idx._loff, idx._lrank
    L = idx.L
    stack = [(0, 0, 0, 0, 0)]  # position, path rank, depth, y prefix, x prefix
    pop, push = stack.pop, stack.append
    while stack:
        i, r, d, yp, xp = pop()
        sy = lg - ((d + 1) >> 1)
        sx = lg - (d >> 1)
        if (yp << sy) >= y1 or ((yp + 1) << sy) <= y0:
            continue
        if (xp << sx) >= x1 or ((xp + 1) << sx) <= x0:
            continue
        if d == D:
            out.append(Point(xp, yp))
            continue
        on_bit = hb[i + 1]
        at = loff[d] + r
        if lb[at]:
            rr = cum[d] + L.rank1(at + 1) - lrank[d] - 1
            off = (base[d + 1] + (rr - cum[d]) * (D - d), rr)
            kids = ((i + 1, r), off) if on_bit == 0 else (off, (i + 1, r))
            for b in (1, 0):
                ci, cr = kids[b]
                if d & 1:
                    push((ci, cr, d + 1, yp, (xp << 1) | b))
                else:
                    push((ci, cr, d + 1, (yp << 1) | b, xp))
        elif d & 1:
            push((i + 1, r, d + 1, yp, (xp << 1) | on_bit))
        else:
            push((i + 1, r, d + 1, (yp << 1) | on_bit, xp))
    return out


def space_stats(idx: HPIndex) -> SpaceStats:
    bits_H, bits_L = len(idx.H), len(idx.L)
    aux = idx.H.aux_bits() + idx.L.aux_bits() + 64 * idx.paths_starting_at.size
    total = bits_H + bits_L + aux
    return SpaceStats("hp", idx.n, idx.grid.lg_u, bits_H, bits_H, bits_L, aux,
                      total, total / idx.n if idx.n else None)
