import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gridsplit.errors import GridSplitError
from gridsplit.geometry import (
    clip_polygon,
    convex_hull,
    hull_slab,
    polygon_area,
    quad_iou,
    rect_quad,
)


UNIT = rect_quad(0.0, 0.0, 1.0, 1.0)


def test_polygon_area_signs():
    assert polygon_area(UNIT) == 1.0
    assert polygon_area(tuple(reversed(UNIT))) == -1.0
    tri = ((0.0, 0.0), (4.0, 0.0), (0.0, 3.0))
    assert abs(polygon_area(tri)) == 6.0


def test_clip_identical_is_identity_area():
    out = clip_polygon(UNIT, UNIT)
    assert abs(abs(polygon_area(out)) - 1.0) < 1e-12


def test_clip_partial_overlap():
    other = rect_quad(0.5, 0.5, 1.5, 1.5)
    out = clip_polygon(UNIT, other)
    assert abs(abs(polygon_area(out)) - 0.25) < 1e-12


def test_clip_disjoint_is_empty():
    assert clip_polygon(UNIT, rect_quad(2.0, 2.0, 3.0, 3.0)) == []


def test_clip_winding_insensitive():
    # the clip window may wind either way
    other = tuple(reversed(rect_quad(0.25, 0.25, 2.0, 2.0)))
    out = clip_polygon(UNIT, other)
    assert abs(abs(polygon_area(out)) - 0.5625) < 1e-12


def test_quad_iou_values():
    assert quad_iou(UNIT, UNIT) == 1.0
    assert quad_iou(UNIT, rect_quad(5.0, 5.0, 6.0, 6.0)) == 0.0
    # half-overlapping unit squares: 0.5 / 1.5
    got = quad_iou(UNIT, rect_quad(0.5, 0.0, 1.5, 1.0))
    assert abs(got - 1.0 / 3.0) < 1e-12


def test_quad_iou_rotated():
    # diamond inscribed in the unit square covers half of it
    diamond = ((0.5, 0.0), (1.0, 0.5), (0.5, 1.0), (0.0, 0.5))
    got = quad_iou(UNIT, diamond)
    assert abs(got - 0.5) < 1e-12


def test_quad_iou_rejects_degenerate():
    line = ((0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (3.0, 0.0))
    with pytest.raises(GridSplitError):
        quad_iou(UNIT, line)
    with pytest.raises(GridSplitError):
        quad_iou(line, UNIT)


def test_convex_hull_square_with_interior_points():
    pts = list(UNIT) + [(0.5, 0.5), (0.25, 0.75), (0.0, 0.0)]
    hull = convex_hull(pts)
    assert sorted(hull) == sorted(UNIT)
    assert abs(abs(polygon_area(hull)) - 1.0) < 1e-12


def test_convex_hull_collinear():
    pts = [(0.0, 0.0), (1.0, 1.0), (2.0, 2.0), (3.0, 3.0)]
    hull = convex_hull(pts)
    assert len(hull) == 2
    assert hull[0] == (0.0, 0.0) and hull[-1] == (3.0, 3.0)


def test_hull_slab_interior_and_outside():
    hull = convex_hull([(0.0, 0.0), (4.0, 0.0), (4.0, 2.0), (0.0, 2.0)])
    assert hull_slab(hull, 1.0) == (0.0, 4.0)
    assert hull_slab(hull, 2.0) == (0.0, 4.0)  # touching the top edge
    assert hull_slab(hull, 2.5) is None
    tri = convex_hull([(0.0, 0.0), (2.0, 0.0), (1.0, 2.0)])
    lo, hi = hull_slab(tri, 1.0)
    assert abs(lo - 0.5) < 1e-12 and abs(hi - 1.5) < 1e-12


def test_rect_quad_order():
    assert rect_quad(1.0, 2.0, 3.0, 4.0) == ((1.0, 2.0), (3.0, 2.0), (3.0, 4.0), (1.0, 4.0))


@st.composite
def _rects(draw):
    x0 = draw(st.floats(-5, 5))
    y0 = draw(st.floats(-5, 5))
    w = draw(st.floats(0.1, 5))
    h = draw(st.floats(0.1, 5))
    return x0, y0, x0 + w, y0 + h


@settings(max_examples=80, deadline=None)
@given(_rects(), _rects())
def test_quad_iou_matches_interval_arithmetic(ra, rb):
    ax0, ay0, ax1, ay1 = ra
    bx0, by0, bx1, by1 = rb
    iw = max(0.0, min(ax1, bx1) - max(ax0, bx0))
    ih = max(0.0, min(ay1, by1) - max(ay0, by0))
    inter = iw * ih
    union = (ax1 - ax0) * (ay1 - ay0) + (bx1 - bx0) * (by1 - by0) - inter
    got = quad_iou(rect_quad(*ra), rect_quad(*rb))
    assert got == pytest.approx(inter / union, abs=1e-9)
    assert 0.0 <= got <= 1.0 + 1e-12


@settings(max_examples=80, deadline=None)
@given(st.lists(st.tuples(st.floats(-10, 10), st.floats(-10, 10)), min_size=3, max_size=12))
def test_convex_hull_contains_all_points(pts):
    hull = convex_hull(pts)
    if len(hull) < 3:
        return  # collinear input has no interior
    area = polygon_area(hull)
    assert area != 0.0
    sign = math.copysign(1.0, area)
    n = len(hull)
    for px, py in pts:
        for i in range(n):
            x0, y0 = hull[i]
            x1, y1 = hull[(i + 1) % n]
            cross = (x1 - x0) * (py - y0) - (y1 - y0) * (px - x0)
            assert sign * cross >= -1e-7
