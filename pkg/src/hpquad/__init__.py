"""Succinct heavy-path quadtrees over 2^k x 2^k grids, with a k²-tree baseline."""

from .bitvec import BitVector
from .builder import HPIndex, PointSet, build_index, build_index_pointer, decode
from .estimators import HeavyPathQuadtree, K2Tree
from .hpindex import QueryTrace, Rect, SpaceStats, contains, membership, membership_batch, range_report, space_stats
from .io import IndexFormatError, load_index, save_index
from .k2 import K2Index, k2_build, k2_membership, k2_range
from .morton import GridSpec, Point, interleave

__all__ = [
    "BitVector", "GridSpec", "HPIndex", "HeavyPathQuadtree", "IndexFormatError", "K2Index",
    "K2Tree", "Point", "PointSet", "QueryTrace", "Rect", "SpaceStats", "build_index",
    "build_index_pointer", "contains", "decode", "interleave", "k2_build", "k2_membership",
    "k2_range", "load_index", "membership", "membership_batch", "range_report", "save_index",
    "space_stats",
]
__version__ = "0.1.0"
