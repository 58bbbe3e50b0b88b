import numpy as np
from hypothesis import given, strategies as st

from hpquad.morton import (
    GridSpec, PathLabel, Point, bit_length_u64, ctz_u64, deinterleave, deinterleave_array,
    depth_order_array, depth_order_to_points, interleave, interleave_array, lcp,
    lcp_depth_order,
)


def test_example_label():
    assert str(interleave(Point(6, 9), GridSpec(4))) == "10010110"


def test_bijection_small_grids():
    for lg in range(5):
        g = GridSpec(lg)
        labels = {interleave(Point(x, y), g).bits for x in range(g.u) for y in range(g.u)}
        assert labels == set(range(g.u * g.u))
        for b in range(g.u * g.u):
            lab = PathLabel(b, g.label_bits)
            assert interleave(deinterleave(lab, g), g) == lab


def test_array_forms_match_scalar():
    g = GridSpec(5)
    xs, ys = np.meshgrid(np.arange(g.u), np.arange(g.u))
    xs, ys = xs.ravel(), ys.ravel()
    labels = interleave_array(xs, ys, g)
    assert labels.tolist() == [interleave(Point(x, y), g).bits for x, y in zip(xs, ys)]
    bx, by = deinterleave_array(labels, g)
    assert np.array_equal(bx, xs) and np.array_equal(by, ys)
    rx, ry = depth_order_to_points(depth_order_array(xs, ys, g), g)
    assert np.array_equal(rx, xs) and np.array_equal(ry, ys)


def test_depth_order_is_reversed_label():
    g = GridSpec(4)
    r = int(depth_order_array([6], [9], g)[0])
    assert format(r, "08b")[::-1] == "10010110"


def _lcp_slow(a: str, b: str) -> int:
    k = 0
    while k < min(len(a), len(b)) and a[k] == b[k]:
        k += 1
    return k


@given(st.integers(0, 2**130), st.integers(0, 2**130), st.integers(0, 130))
def test_lcp_against_bit_loop(a, b, n):
    la, lb = PathLabel(a % (1 << n), n), PathLabel(b % (1 << n), n)
    assert lcp(la, 0, lb, 0, n) == _lcp_slow(str(la), str(lb))


@given(st.integers(0, 2**64 - 1), st.integers(0, 2**64 - 1), st.integers(0, 64))
def test_lcp_depth_order(a, b, n):
    sa = format(a, "064b")[::-1][:n]
    sb = format(b, "064b")[::-1][:n]
    assert lcp_depth_order(a, b, n) == _lcp_slow(sa, sb)


@given(st.lists(st.integers(0, 2**64 - 1), min_size=1, max_size=50))
def test_bit_scans(vals):
    v = np.array(vals, dtype=np.uint64)
    assert bit_length_u64(v).tolist() == [x.bit_length() for x in vals]
    expect = [(x & -x).bit_length() - 1 if x else 64 for x in vals]
    assert ctz_u64(v).astype(int).tolist() == expect


def test_grid_checks():
    import pytest
    with pytest.raises(ValueError):
        GridSpec.checked(40)
    with pytest.raises(ValueError):
        interleave(Point(16, 0), GridSpec(4))
    assert GridSpec.covering(0).lg_u == 0
    assert GridSpec.covering(15).lg_u == 4
    assert GridSpec.covering(16).lg_u == 5
