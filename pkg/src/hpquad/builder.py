"""Construction of the heavy-path quadtree encoding.

Two routes produce the same :class:`HPIndex`:

* the pointer pipeline ``build_quadtree -> binarize -> decompose ->
  order_paths -> encode``, which keeps every intermediate tree around and is
  what tests inspect node by node;
* :func:`build_index`, which works directly on the sorted Morton labels one
  depth at a time with numpy and is the one used for large point sets.

Fully filled squares are always split down to unit cells, so every internal
quadtree node has a descendant storing 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .bitvec import BitVector, pack_bits
from .morton import (
    GridSpec,
    Point,
    check_coords,
    depth_order_array,
    depth_order_to_points,
    interleave_array,
)

_U64 = np.uint64


# --------------------------------------------------------------------------
# point sets


@dataclass(frozen=True, eq=False)
class PointSet:
    """Deduplicated points in ascending Morton order."""

    grid: GridSpec
    xs: np.ndarray
    ys: np.ndarray
    labels: np.ndarray

    @classmethod
    def from_arrays(cls, xs, ys, grid: GridSpec) -> "PointSet":
        xs, ys = check_coords(xs, ys, grid)
        labels = interleave_array(xs, ys, grid)
        labels, first = np.unique(labels, return_index=True)
        return cls(grid, xs[first], ys[first], labels)

    @classmethod
    def from_points(cls, points: Sequence[tuple[int, int]], grid: GridSpec) -> "PointSet":
        arr = np.asarray(list(points), dtype=np.int64).reshape(-1, 2)
        return cls.from_arrays(arr[:, 0], arr[:, 1], grid)

    @property
    def n(self) -> int:
        return int(self.labels.size)

    def __len__(self) -> int:
        return self.n

    def __iter__(self) -> Iterator[Point]:
        return (Point(x, y) for x, y in zip(self.xs.tolist(), self.ys.tolist()))

    def __contains__(self, p) -> bool:
        x, y = p
        u = self.grid.u
        if not (0 <= x < u and 0 <= y < u):
            return False
        lab = interleave_array([x], [y], self.grid)[0]
        k = np.searchsorted(self.labels, lab)
        return bool(k < self.n and self.labels[k] == lab)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PointSet):
            return NotImplemented
        return self.grid == other.grid and np.array_equal(self.labels, other.labels)

    def to_list(self) -> list[Point]:
        return list(self)


# --------------------------------------------------------------------------
# 4-ary quadtree


class QNode:
    __slots__ = ("value", "depth", "children")

    def __init__(self, value: int, depth: int, children=None):
        self.value = value
        self.depth = depth
        self.children: list[QNode] | None = children


@dataclass
class QTree:
    grid: GridSpec
    root: QNode
    node_count: int


def build_quadtree(ps: PointSet) -> QTree:
    lg = ps.grid.lg_u
    labels = ps.labels
    count = 0

    def build(depth: int, prefix: int, lo: int, hi: int) -> QNode:
        nonlocal count
        count += 1
        if hi == lo:
            return QNode(0, depth)
        if depth == lg:
            return QNode(1, depth)
        shift = 2 * (lg - depth - 1)
        bounds = [lo]
        for q in (1, 2, 3):
            key = _U64(((prefix << 2) | q) << shift)
            bounds.append(lo + int(np.searchsorted(labels[lo:hi], key)))
        bounds.append(hi)
        kids = [build(depth + 1, (prefix << 2) | q, bounds[q], bounds[q + 1])
                for q in range(4)]
        return QNode(1, depth, kids)

    root = build(0, 0, 0, ps.n)
    return QTree(ps.grid, root, count)


# --------------------------------------------------------------------------
# binary tree T


class BNode:
    __slots__ = ("depth", "bit", "prefix", "left", "right", "leaf_count")

    def __init__(self, depth: int, bit: int, prefix: int):
        self.depth = depth
        self.bit = bit
        self.prefix = prefix  # MSB-first label bits on the path to this node
        self.left: BNode | None = None
        self.right: BNode | None = None
        self.leaf_count = 0

    @property
    def kids(self) -> list["BNode"]:
        return [c for c in (self.left, self.right) if c is not None]

    def __repr__(self) -> str:
        return f"BNode(depth={self.depth}, prefix={self.prefix:b}, leaves={self.leaf_count})"


@dataclass
class BinTree:
    grid: GridSpec
    root: BNode | None
    node_count: int
    leaves: list[BNode] = field(default_factory=list)

    @property
    def internal_count(self) -> int:
        return self.node_count - len(self.leaves)

    def nodes(self) -> Iterator[BNode]:
        stack = [self.root] if self.root else []
        while stack:
            v = stack.pop()
            yield v
            stack.extend(reversed(v.kids))


def binarize(qt: QTree) -> BinTree:
    """Replace each 4-way node by a height-2 binary tree, drop empty parts.

    The first binary level splits on the ``y`` bit and the second on ``x``,
    so left/right edges spell the Morton label of each leaf.
    """
    leaves: list[BNode] = []
    count = 0

    def conv(q: QNode, depth: int, bit: int, prefix: int) -> BNode | None:
        nonlocal count
        if q.value == 0:
            return None
        v = BNode(depth, bit, prefix)
        count += 1
        if q.children is None:
            v.leaf_count = 1
            leaves.append(v)
            return v
        for ybit in (0, 1):
            mid = BNode(depth + 1, ybit, (prefix << 1) | ybit)
            for xbit in (0, 1):
                child = conv(q.children[2 * ybit + xbit], depth + 2, xbit,
                             (mid.prefix << 1) | xbit)
                if child is not None:
                    setattr(mid, "right" if xbit else "left", child)
                    mid.leaf_count += child.leaf_count
            if mid.leaf_count:
                count += 1
                setattr(v, "right" if ybit else "left", mid)
                v.leaf_count += mid.leaf_count
        return v

    root = conv(qt.root, 0, 0, 0)
    return BinTree(qt.grid, root, count, leaves)


# --------------------------------------------------------------------------
# heavy paths


@dataclass(eq=False)
class HeavyPath:
    start_depth: int
    nodes: list[BNode]
    parent: "HeavyPath | None" = None
    rank: int = -1

    @property
    def bits(self) -> list[int]:
        return [v.bit for v in self.nodes]

    def __len__(self) -> int:
        return len(self.nodes)

    def node_at(self, depth: int) -> BNode:
        return self.nodes[depth - self.start_depth]


def heavy_child(v: BNode) -> BNode | None:
    """Child with more leaves; ties go left."""
    if v.left is None:
        return v.right
    if v.right is None or v.left.leaf_count >= v.right.leaf_count:
        return v.left
    return v.right


def decompose(t: BinTree) -> list[HeavyPath]:
    """Heavy-path decomposition, paths listed in discovery (DFS) order."""
    if t.root is None:
        return []
    paths = []
    todo: list[tuple[BNode, HeavyPath | None]] = [(t.root, None)]
    while todo:
        top, parent = todo.pop()
        h = HeavyPath(top.depth, [], parent)
        v: BNode | None = top
        while v is not None:
            h.nodes.append(v)
            nxt = heavy_child(v)
            for c in v.kids:
                if c is not nxt:
                    todo.append((c, h))
            v = nxt
        paths.append(h)
    return paths


def _off_path_child(h: HeavyPath, v: BNode) -> BNode | None:
    k = v.depth - h.start_depth
    if v.left is None or v.right is None:
        return None
    on = h.nodes[k + 1]
    return v.right if on is v.left else v.left


def order_paths(paths: list[HeavyPath]) -> list[HeavyPath]:
    """Rank paths so the j-th two-child node at depth d heads the j-th
    path starting at depth d + 1.

    Depth by depth, walk the already ranked paths covering that depth and
    append the path hanging off each two-child node met.
    """
    if not paths:
        return []
    by_top = {id(h.nodes[0]): h for h in paths}
    root = next(h for h in paths if h.parent is None)
    ranked = [root]
    deepest = max(h.start_depth + len(h) - 1 for h in paths)
    for d in range(deepest):
        fresh = []
        for h in ranked:
            if h.start_depth > d:
                break
            off = _off_path_child(h, h.node_at(d))
            if off is not None:
                fresh.append(by_top[id(off)])
        ranked.extend(fresh)
    for r, h in enumerate(ranked):
        h.rank = r
    return ranked


def order_paths_by_sort(paths: list[HeavyPath]) -> list[HeavyPath]:
    """Same ranking via one global sort: longer paths first, equal lengths in
    the order of the paths their tops hang from."""
    keys: dict[int, tuple] = {}

    def key(h: HeavyPath) -> tuple:
        k = keys.get(id(h))
        if k is None:
            k = (h.start_depth, key(h.parent) if h.parent else ())
            keys[id(h)] = k
        return k

    return sorted(paths, key=key)


def position_map(ranked: list[HeavyPath]) -> dict[int, int]:
    """``id(node) -> bit position in H``; test helper."""
    out = {}
    pos = 0
    for h in ranked:
        for v in h.nodes:
            out[id(v)] = pos
            pos += 1
    return out


# --------------------------------------------------------------------------
# the succinct index


class HPIndex:
    """Heavy-path encoding of a binarized quadtree.

    ``H`` holds one bit per node of T (left = 0, right = 1, root = 0), heavy
    paths concatenated in rank order. ``L`` is the concatenation of the
    per-depth vectors ``L_0 .. L_{2 lg u - 1}``; ``L_d`` has one bit per path
    covering depth ``d`` marking two-child nodes.
    """

    def __init__(self, grid: GridSpec, n: int, H: BitVector, L: BitVector,
                 paths_starting_at: Sequence[int]):
        self.grid = grid
        self.n = int(n)
        self.H = H
        self.L = L
        depths = grid.label_bits
        cnt = np.asarray(paths_starting_at, dtype=np.int64)
        if cnt.shape != (depths + 1,):
            raise ValueError(f"need {depths + 1} path counts, got {cnt.size}")
        if (cnt < 0).any():
            raise ValueError("negative path count")
        self.paths_starting_at = cnt
        self.cum_paths = np.cumsum(cnt)
        lengths = depths + 1 - np.arange(depths + 1)
        self.path_len = lengths
        # H position of the first path starting at each depth; one extra
        # sentinel entry equal to |H|
        self.path_base = np.concatenate([[0], np.cumsum(cnt * lengths)])
        self.level_offset = np.concatenate([[0], np.cumsum(self.cum_paths[:-1])])
        self._check()
        self._cum = self.cum_paths.tolist()
        self._base = self.path_base.tolist()
        self._loff = self.level_offset.tolist()
        self._lrank = L.rank1_many(self.level_offset).tolist()

    def _check(self) -> None:
        cnt = self.paths_starting_at
        total = int(cnt.sum())
        if total != self.n:
            raise ValueError(f"{total} heavy paths for {self.n} points")
        if self.n and cnt[0] != 1:
            raise ValueError("exactly one path must start at the root")
        if len(self.H) != self.path_base[-1]:
            raise ValueError(f"|H| = {len(self.H)}, path counts imply {self.path_base[-1]}")
        if len(self.L) != self.level_offset[-1]:
            raise ValueError(f"|L| = {len(self.L)}, path counts imply {self.level_offset[-1]}")
        if self.n and self.H.access(0) != 0:
            raise ValueError("H[0] must be 0")
        ones = np.diff(self.L.rank1_many(self.level_offset))
        if not np.array_equal(ones, cnt[1:]):
            raise ValueError("ones in L_d disagree with paths starting at d + 1")

    @classmethod
    def from_strings(cls, H: str, levels: Sequence[str], lg_u: int) -> "HPIndex":
        """Assemble an index from printed ``H`` and ``L_0, L_1, ...`` strings.

        Dashes and spaces are ignored; path counts are derived from ``L``.
        """
        grid = GridSpec.checked(lg_u)
        clean = lambda s: [int(c) for c in s if c in "01"]
        hbits = clean(H)
        lbits = [clean(s) for s in levels]
        if len(lbits) != grid.label_bits:
            raise ValueError(f"need {grid.label_bits} L vectors, got {len(lbits)}")
        cnt = [1 if hbits else 0] + [sum(b) for b in lbits]
        flat = [b for lv in lbits for b in lv]
        return cls(grid, sum(cnt), BitVector(hbits), BitVector(flat), cnt)

    @property
    def empty(self) -> bool:
        return self.n == 0

    @property
    def depths(self) -> int:
        return self.grid.label_bits

    def level(self, d: int) -> np.ndarray:
        """Bits of ``L_d``."""
        lo, hi = self.level_offset[d], self.level_offset[d + 1]
        return self.L.to_array()[lo:hi]

    def level_rank(self, d: int, r: int) -> int:
        """Ones among the first ``r`` bits of ``L_d``."""
        return self.L.rank1(self._loff[d] + r) - self._lrank[d]

    def level_select(self, d: int, j: int) -> int:
        """Position within ``L_d`` of its ``j``-th one."""
        return self.L.select1(self._lrank[d] + j) - self._loff[d]

    def path_start(self, r: int, s: int) -> int:
        """H position of path ``r``, which starts at depth ``s``."""
        first = self._cum[s - 1] if s else 0
        return self._base[s] + (r - first) * (self.depths + 1 - s)

    def __eq__(self, other) -> bool:
        if not isinstance(other, HPIndex):
            return NotImplemented
        return (self.grid == other.grid and self.n == other.n
                and self.H == other.H and self.L == other.L
                and np.array_equal(self.paths_starting_at, other.paths_starting_at))

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"HPIndex(lg_u={self.grid.lg_u}, n={self.n}, |H|={len(self.H)}, |L|={len(self.L)})"


def empty_index(grid: GridSpec) -> HPIndex:
    return HPIndex(grid, 0, BitVector(), BitVector(), [0] * (grid.label_bits + 1))


def encode(t: BinTree, ranked: list[HeavyPath]) -> HPIndex:
    grid = t.grid
    if not ranked:
        return empty_index(grid)
    depths = grid.label_bits
    cnt = [0] * (depths + 1)
    for h in ranked:
        cnt[h.start_depth] += 1
    hbits = [b for h in ranked for b in h.bits]
    lbits = []
    covering = 0
    for d in range(depths):
        covering += cnt[d]
        for h in ranked[:covering]:
            v = h.node_at(d)
            lbits.append(1 if v.left is not None and v.right is not None else 0)
    return HPIndex(grid, len(ranked), BitVector(hbits), BitVector(lbits), cnt)


def build_index_pointer(ps: PointSet) -> HPIndex:
    """Full pointer pipeline; slow but every stage is inspectable."""
    t = binarize(build_quadtree(ps))
    return encode(t, order_paths(decompose(t)))


def build_index(ps: PointSet) -> HPIndex:
    """Encode ``ps`` straight from its sorted labels, one depth at a time.

    Each trie node at a depth is a run ``[lo, hi)`` of the sorted labels.
    Splitting a run on the next label bit gives the children; the bigger one
    keeps the run's path id and the smaller one (if any) starts a new path.
    New paths are ranked by the rank of the path they hang from.
    """
    grid = ps.grid
    n = ps.n
    if n == 0:
        return empty_index(grid)
    depths = grid.label_bits
    labels = ps.labels

    start = np.zeros(n, dtype=np.int64)
    rank_of = np.full(n, -1, dtype=np.int64)
    rank_of[0] = 0
    next_pid = 1
    cnt = np.zeros(depths + 1, dtype=np.int64)
    cnt[0] = 1
    covering = 1
    level_bits: list[np.ndarray] = []

    lo = np.zeros(1, dtype=np.int64)
    hi = np.full(1, n, dtype=np.int64)
    pid = np.zeros(1, dtype=np.int64)
    for d in range(depths):
        bit = ((labels >> _U64(depths - 1 - d)) & _U64(1)).astype(np.int64)
        cs = np.concatenate([[0], np.cumsum(bit)])
        mid = hi - (cs[hi] - cs[lo])
        has_left = mid > lo
        has_right = hi > mid
        two = has_left & has_right
        heavy_left = (mid - lo) >= (hi - mid)

        lv = np.zeros(covering, dtype=np.uint8)
        lv[rank_of[pid[two]]] = 1
        level_bits.append(lv)

        parents = pid[two]
        k = parents.size
        new = np.arange(next_pid, next_pid + k)
        next_pid += k
        order = np.argsort(rank_of[parents], kind="stable")
        rank_of[new[order]] = covering + np.arange(k)
        start[new] = d + 1
        cnt[d + 1] = k
        covering += k

        light = np.full(pid.size, -1, dtype=np.int64)
        light[two] = new
        left_pid = np.where(two & ~heavy_left, light, pid)
        right_pid = np.where(two & heavy_left, light, pid)
        lo = np.concatenate([lo[has_left], mid[has_right]])
        hi = np.concatenate([mid[has_left], hi[has_right]])
        pid = np.concatenate([left_pid[has_left], right_pid[has_right]])

    # at the bottom every run is a single leaf
    leaf_of = np.empty(n, dtype=np.int64)
    leaf_of[pid] = lo
    pid_by_rank = np.argsort(rank_of)
    s = start[pid_by_rank]
    rlab = depth_order_array(ps.xs, ps.ys, grid)[leaf_of[pid_by_rank]]
    seg = np.where(s == 0, rlab << _U64(1),
                   rlab >> np.maximum(s - 1, 0).astype(_U64))
    lengths = depths + 1 - s
    pos = np.concatenate([[0], np.cumsum(lengths)])
    total = int(pos[-1])
    pos = pos[:-1]
    words = np.zeros((total + 63) // 64 + 1, dtype=_U64)
    w = pos >> 6
    o = (pos & 63).astype(_U64)
    np.bitwise_or.at(words, w, seg << o)
    np.bitwise_or.at(words, w + 1, (seg >> _U64(1)) >> (_U64(63) - o))
    H = BitVector.from_words(words, total)
    L = BitVector(np.concatenate(level_bits)) if level_bits else BitVector()
    return HPIndex(grid, n, H, L, cnt)


def decode(idx: HPIndex) -> PointSet:
    """Recover the point set: each path's leaf label is its parent path's
    label above the branching depth followed by the path's own bits."""
    grid = idx.grid
    if idx.empty:
        return PointSet.from_arrays([], [], grid)
    depths = idx.depths
    n = idx.n
    rlab = np.zeros(n, dtype=_U64)
    starts = np.repeat(np.arange(depths + 1), idx.paths_starting_at)
    pos = np.concatenate([[0], np.cumsum(idx.path_len[starts])])[:-1]
    raw = idx.H.window_many(pos)
    lbits = idx.L.to_array()
    rlab[0] = (raw[0] >> _U64(1)) & _U64((1 << depths) - 1)
    cum = idx.cum_paths
    for s in range(1, depths + 1):
        lo, hi = cum[s - 1], cum[s]
        if lo == hi:
            continue
        level = lbits[idx.level_offset[s - 1]: idx.level_offset[s]]
        parents = np.flatnonzero(level)
        seg = raw[lo:hi] & _U64((1 << (depths + 1 - s)) - 1)
        above = rlab[parents] & _U64((1 << (s - 1)) - 1)
        parent_bit = (rlab[parents] >> _U64(s - 1)) & _U64(1)
        if (parent_bit == (seg & _U64(1))).any():
            raise ValueError(f"path starting at depth {s} does not branch off its parent")
        rlab[lo:hi] = above | (seg << _U64(s - 1))
    xs, ys = depth_order_to_points(rlab, grid)
    ps = PointSet.from_arrays(xs, ys, grid)
    if ps.n != n:
        raise ValueError("index encodes duplicate leaves")
    return ps
