"""scikit-learn style front ends.

``fit`` takes an ``(n, 2)`` integer array of ``(x, y)`` cells, ``predict``
answers membership for another such array::

    >>> tree = HeavyPathQuadtree(lg_u=4).fit([[6, 9], [2, 1]])
    >>> tree.predict([[6, 9], [0, 0]]).tolist()
    [True, False]
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .builder import HPIndex, PointSet, build_index, decode
from .hpindex import (
    QueryTrace,
    Rect,
    SpaceStats,
    membership,
    membership_batch,
    range_report,
    space_stats,
)
from .k2 import K2Index, k2_build, k2_decode, k2_membership_batch, k2_range, k2_space_stats
from .morton import GridSpec, Point


def check_points(X, grid: GridSpec | None = None, *, allow_empty: bool = True) -> np.ndarray:
    """Validate an ``(n, 2)`` array of non-negative integer cells."""
    if np.asarray(X).size == 0:
        if not allow_empty:
            raise ValueError("no points given")
        return np.empty((0, 2), dtype=np.int64)
    X = check_array(X, dtype=None, ensure_2d=True)
    if X.shape[1] != 2:
        raise ValueError(f"expected 2 columns (x, y), got {X.shape[1]}")
    if X.size and not np.issubdtype(X.dtype, np.integer):
        if not np.array_equal(X, np.round(X)):
            raise ValueError("coordinates must be integers")
    X = X.astype(np.int64)
    if (X < 0).any():
        raise ValueError("coordinates must be non-negative")
    if grid is not None and X.size and X.max() >= grid.u:
        raise ValueError(f"coordinate {int(X.max())} outside {grid.u}x{grid.u} grid")
    return X


class _GridIndex(BaseEstimator):
    def __init__(self, lg_u: int | None = None):
        self.lg_u = lg_u

    def _fit_points(self, X) -> PointSet:
        X = check_points(X)
        if self.lg_u is None:
            grid = GridSpec.covering(int(X.max()) if X.size else 0)
        else:
            grid = GridSpec.checked(self.lg_u)
        X = check_points(X, grid)
        self.grid_ = grid
        ps = PointSet.from_arrays(X[:, 0], X[:, 1], grid)
        self.n_points_ = ps.n
        return ps

    def _query_points(self, X) -> np.ndarray:
        check_is_fitted(self, "index_")
        return check_points(X, self.grid_)

    def points(self) -> np.ndarray:
        """The indexed cells in Morton order, shape ``(n, 2)``."""
        check_is_fitted(self, "index_")
        ps = self._decode()
        return np.column_stack([ps.xs, ps.ys])

    def query_range(self, rect) -> list[Point]:
        """Cells inside the half-open rectangle ``(x0, y0, x1, y1)``."""
        check_is_fitted(self, "index_")
        return self._range(Rect(*rect))


class HeavyPathQuadtree(_GridIndex):
    """Quadtree stored as heavy-path bit strings, O(1) bits per node.

    Parameters
    ----------
    lg_u : int or None
        The grid is ``2**lg_u`` cells on a side. ``None`` picks the smallest
        grid holding the fitted points.

    Attributes
    ----------
    index_ : HPIndex
    grid_ : GridSpec
    n_points_ : int
    """

    def fit(self, X, y=None):
        self.index_: HPIndex = build_index(self._fit_points(X))
        return self

    def predict(self, X) -> np.ndarray:
        X = self._query_points(X)
        member, _ = membership_batch(self.index_, X[:, 0], X[:, 1])
        return member

    def segments(self, X) -> np.ndarray:
        """Heavy-path segments each membership query traverses."""
        X = self._query_points(X)
        return membership_batch(self.index_, X[:, 0], X[:, 1])[1]

    def trace(self, point) -> QueryTrace:
        check_is_fitted(self, "index_")
        return membership(self.index_, point)[1]

    def space_stats(self) -> SpaceStats:
        check_is_fitted(self, "index_")
        return space_stats(self.index_)

    def _decode(self) -> PointSet:
        return decode(self.index_)

    def _range(self, rect: Rect) -> list[Point]:
        return range_report(self.index_, rect)


class K2Tree(_GridIndex):
    """Basic k²-tree (k = 2) with the same interface, for comparison."""

    def fit(self, X, y=None):
        self.index_: K2Index = k2_build(self._fit_points(X))
        return self

    def predict(self, X) -> np.ndarray:
        X = self._query_points(X)
        return k2_membership_batch(self.index_, X[:, 0], X[:, 1])[0]

    def space_stats(self) -> SpaceStats:
        check_is_fitted(self, "index_")
        return k2_space_stats(self.index_)

    def _decode(self) -> PointSet:
        return k2_decode(self.index_)

    def _range(self, rect: Rect) -> list[Point]:
        return k2_range(self.index_, rect)
