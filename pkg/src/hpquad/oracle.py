"""Ground truth, synthetic data and bound checks.

Nothing here touches the succinct structures: membership is a set lookup,
range reporting a linear filter, and node counts come from a plain recursive
walk over coordinates. Distances are Chebyshev (``max(|dx|, |dy|)``), so
"within distance g" means inside a ``(2g + 1)``-sided square.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.spatial import cKDTree

from .builder import PointSet
from .morton import GridSpec, Point

_U64 = np.uint64


# --------------------------------------------------------------------------
# reference queries


def naive_membership(ps: PointSet, p) -> bool:
    return (int(p[0]), int(p[1])) in _point_set(ps)


def _point_set(ps: PointSet) -> set[tuple[int, int]]:
    cached = ps.__dict__.get("_tuple_set")
    if cached is None:
        cached = set(zip(ps.xs.tolist(), ps.ys.tolist()))
        object.__setattr__(ps, "_tuple_set", cached)
    return cached


def naive_range(ps: PointSet, rect) -> list[Point]:
    x0, y0, x1, y1 = rect
    keep = (ps.xs >= x0) & (ps.xs < x1) & (ps.ys >= y0) & (ps.ys < y1)
    return [Point(int(x), int(y)) for x, y in zip(ps.xs[keep], ps.ys[keep])]


def count_quadtree_nodes(ps: PointSet) -> int:
    """Quadtree nodes by direct recursion over squares (full squares split)."""
    pts = list(zip(ps.xs.tolist(), ps.ys.tolist()))

    def count(x0: int, y0: int, size: int, inside: list) -> int:
        if not inside or size == 1:
            return 1
        h = size // 2
        total = 1
        for qy in (0, 1):
            for qx in (0, 1):
                cx, cy = x0 + qx * h, y0 + qy * h
                sub = [(x, y) for x, y in inside if cx <= x < cx + h and cy <= y < cy + h]
                total += count(cx, cy, h, sub)
        return total

    return count(0, 0, ps.grid.u, pts)


def count_binary_nodes(ps: PointSet) -> int:
    """Nodes of the pruned binary tree: distinct label prefixes of every length."""
    if ps.n == 0:
        return 0
    D = ps.grid.label_bits
    return sum(np.unique(ps.labels >> _U64(D - k)).size for k in range(D + 1))


# --------------------------------------------------------------------------
# generators


@dataclass
class ClusterSpec:
    sizes: list[int]
    diameters: list[int]
    centers: list[tuple[int, int]] = field(default_factory=list)

    @property
    def c(self) -> int:
        return len(self.sizes)

    @property
    def n(self) -> int:
        return sum(self.sizes)

    def square(self, i: int, grid: GridSpec) -> tuple[int, int, int]:
        """``(x0, y0, side)`` of cluster ``i``, clamped into the grid."""
        side = self.diameters[i]
        cx, cy = self.centers[i]
        x0 = min(max(cx - side // 2, 0), grid.u - side)
        y0 = min(max(cy - side // 2, 0), grid.u - side)
        return x0, y0, side

    def validate(self, grid: GridSpec) -> None:
        if not (len(self.sizes) == len(self.diameters) == len(self.centers)):
            raise ValueError("sizes, diameters and centers must have equal length")
        for n_i, d_i in zip(self.sizes, self.diameters):
            if not 1 <= d_i <= grid.u:
                raise ValueError(f"cluster diameter {d_i} outside [1, {grid.u}]")
            if not 0 <= n_i <= d_i * d_i:
                raise ValueError(f"{n_i} points do not fit a {d_i}x{d_i} cluster")


def make_cluster_spec(c: int, n: int, diameter: int, grid: GridSpec,
                      seed: int) -> ClusterSpec:
    """``c`` equal clusters (sizes differ by at most one), random centers."""
    if c < 1:
        raise ValueError("need at least one cluster")
    rng = np.random.default_rng([seed, 1])
    sizes = [n // c + (i < n % c) for i in range(c)]
    centers = [(int(x), int(y)) for x, y in rng.integers(0, grid.u, size=(c, 2))]
    spec = ClusterSpec(sizes, [diameter] * c, centers)
    spec.validate(grid)
    return spec


def gen_uniform(n: int, grid: GridSpec, seed: int) -> PointSet:
    cells = grid.u * grid.u
    if not 0 <= n <= cells:
        raise ValueError(f"cannot place {n} points on {cells} cells")
    rng = np.random.default_rng(seed)
    if n > cells // 2:
        flat = rng.choice(cells, size=n, replace=False)
    else:
        flat = np.unique(rng.integers(0, cells, size=n, dtype=np.int64))
        while flat.size < n:
            extra = rng.integers(0, cells, size=n - flat.size, dtype=np.int64)
            flat = np.unique(np.concatenate([flat, extra]))
    return PointSet.from_arrays(flat % grid.u, flat // grid.u, grid)


def gen_clustered(spec: ClusterSpec, grid: GridSpec, seed: int) -> PointSet:
    """Each cluster draws its points without replacement inside its square;
    overlapping clusters are allowed and shared cells count once."""
    spec.validate(grid)
    rng = np.random.default_rng(seed)
    xs, ys = [], []
    for i in range(spec.c):
        x0, y0, side = spec.square(i, grid)
        flat = rng.choice(side * side, size=spec.sizes[i], replace=False)
        xs.append(x0 + flat % side)
        ys.append(y0 + flat // side)
    if not xs:
        return PointSet.from_arrays([], [], grid)
    return PointSet.from_arrays(np.concatenate(xs), np.concatenate(ys), grid)


# --------------------------------------------------------------------------
# space bound from the clustering argument


@dataclass
class AncestorBoundReport:
    x0: int
    y0: int
    side: int
    c_size: int
    a_size: int
    bound: float

    @property
    def holds(self) -> bool:
        return self.a_size < self.bound


def quadtree_ancestors(ps: PointSet, mask: np.ndarray | None = None) -> int:
    """Distinct quadtree nodes on the root-to-leaf paths of the chosen points
    (root and leaves included)."""
    labels = ps.labels if mask is None else ps.labels[mask]
    if labels.size == 0:
        return 0
    lg = ps.grid.lg_u
    return sum(np.unique(labels >> _U64(2 * (lg - d))).size for d in range(lg + 1))


def check_ancestor_bound(ps: PointSet, square: tuple[int, int, int]) -> AncestorBoundReport:
    """Ancestors of the points in an ``side x side`` square versus
    ``|C| lg side + 4 lg u``."""
    x0, y0, side = square
    u, lg = ps.grid.u, ps.grid.lg_u
    if side < 2:
        raise ValueError("square side must be at least 2")
    if not (0 <= x0 and 0 <= y0 and x0 + side <= u and y0 + side <= u):
        raise ValueError(f"square {square} leaves the {u}x{u} grid")
    inside = (ps.xs >= x0) & (ps.xs < x0 + side) & (ps.ys >= y0) & (ps.ys < y0 + side)
    c_size = int(inside.sum())
    a_size = quadtree_ancestors(ps, inside)
    return AncestorBoundReport(x0, y0, side, c_size, a_size,
                               c_size * math.log2(side) + 4 * lg)


# --------------------------------------------------------------------------
# neighbourhoods and isolation


def neighborhood_count(ps: PointSet, p, g: int) -> int:
    """Points within Chebyshev distance ``g`` of ``p`` (``p`` itself included)."""
    x, y = int(p[0]), int(p[1])
    return int(((np.abs(ps.xs - x) <= g) & (np.abs(ps.ys - y) <= g)).sum())


def nearest_distances(ps: PointSet) -> np.ndarray:
    """Chebyshev distance from each point to its nearest other point."""
    if ps.n < 2:
        return np.full(ps.n, np.inf)
    tree = cKDTree(np.column_stack([ps.xs, ps.ys]))
    dist, _ = tree.query(tree.data, k=2, p=np.inf)
    return dist[:, 1]


def isolation_rank(ps: PointSet, top_m: int, profile: int = 8) -> list[Point]:
    """The ``top_m`` most isolated points.

    Ordered by distance to the nearest other point, descending. Ties (common
    in dense clusters, where almost every cell has a neighbour at distance 1)
    are broken by the distance to the 2nd, 3rd, ... nearest point up to
    ``profile`` neighbours, then by Morton order.
    """
    if ps.n == 0 or top_m <= 0:
        return []
    k = min(profile, ps.n - 1)
    if k:
        tree = cKDTree(np.column_stack([ps.xs, ps.ys]))
        dist, _ = tree.query(tree.data, k=k + 1, p=np.inf)
        dist = dist.reshape(ps.n, k + 1)
        keys = [np.arange(ps.n)] + [-dist[:, j] for j in range(k, 0, -1)]
        order = np.lexsort(keys)[:top_m]
    else:
        order = np.arange(1)
    return [Point(int(ps.xs[j]), int(ps.ys[j])) for j in order]


def sample_queries(ps: PointSet, kind: str, count: int, seed: int) -> list[Point]:
    """Query workloads: ``empty`` cells, ``filled`` cells (uniform over P), or
    the ``isolated`` top 1% of P (at least one point)."""
    rng = np.random.default_rng(seed)
    u = ps.grid.u
    if kind == "filled":
        if ps.n == 0:
            return []
        pick = rng.integers(0, ps.n, size=count)
        return [Point(int(ps.xs[k]), int(ps.ys[k])) for k in pick]
    if kind == "isolated":
        pool = isolation_rank(ps, max(1, ps.n // 100))
        if not pool:
            return []
        pick = rng.integers(0, len(pool), size=count)
        return [pool[k] for k in pick]
    if kind == "empty":
        if ps.n >= u * u:
            return []
        out: list[Point] = []
        while len(out) < count:
            xs = rng.integers(0, u, size=count)
            ys = rng.integers(0, u, size=count)
            for x, y in zip(xs.tolist(), ys.tolist()):
                if (x, y) not in _point_set(ps):
                    out.append(Point(x, y))
        return out[:count]
    raise ValueError(f"unknown query class {kind!r}")


def cluster_bound_ratio(ps: PointSet, spec: ClusterSpec) -> float:
    """Quadtree nodes over ``c lg u + sum n_i lg l_i``; logged, never asserted."""
    lg = ps.grid.lg_u
    denom = spec.c * lg + sum(n * math.log2(max(d, 2)) for n, d in
                              zip(spec.sizes, spec.diameters))
    nodes = 1 + 4 * (quadtree_ancestors(ps) - ps.n) if ps.n else 1
    return nodes / denom if denom else math.inf


def random_squares(grid: GridSpec, count: int, seed: int,
                   sides: Sequence[int] | None = None) -> list[tuple[int, int, int]]:
    rng = np.random.default_rng(seed)
    if sides is None:
        sides = [1 << k for k in range(1, grid.lg_u)]
    out = []
    for _ in range(count):
        side = int(rng.choice(sides))
        out.append((int(rng.integers(0, grid.u - side + 1)),
                    int(rng.integers(0, grid.u - side + 1)), side))
    return out
