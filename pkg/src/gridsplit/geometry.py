"""Convex polygon helpers.

Points are (x, y) pairs in image coordinates (y grows downward).  Quads
are listed clockwise on screen starting top-left, which makes their
shoelace sum positive under this axis convention.
"""

from __future__ import annotations

from typing import Sequence

from .errors import GridSplitError

Point = tuple[float, float]


def polygon_area(pts: Sequence[Point]) -> float:
    """Signed shoelace area; positive for screen-clockwise rings."""
    n = len(pts)
    acc = 0.0
    for i in range(n):
        x0, y0 = pts[i]
        x1, y1 = pts[(i + 1) % n]
        acc += x0 * y1 - x1 * y0
    return 0.5 * acc


def clip_polygon(subject: Sequence[Point], clip: Sequence[Point]) -> list[Point]:
    """Sutherland-Hodgman clip of a polygon against a convex window.

    Both rings must wind the same way; the clip ring must be convex.
    Returns [] when the intersection is empty.
    """
    orient = 1.0 if polygon_area(clip) >= 0 else -1.0
    output = list(subject)
    n = len(clip)
    for i in range(n):
        if not output:
            return []
        cx0, cy0 = clip[i]
        cx1, cy1 = clip[(i + 1) % n]
        ex, ey = cx1 - cx0, cy1 - cy0

        def inside(p):
            return orient * (ex * (p[1] - cy0) - ey * (p[0] - cx0)) >= 0.0

        def intersect(a, b):
            dx, dy = b[0] - a[0], b[1] - a[1]
            denom = ex * dy - ey * dx
            if denom == 0.0:
                return b
            t = (ex * (a[1] - cy0) - ey * (a[0] - cx0)) / -denom
            return (a[0] + t * dx, a[1] + t * dy)

        current, output = output, []
        prev = current[-1]
        prev_in = inside(prev)
        for point in current:
            cur_in = inside(point)
            if cur_in:
                if not prev_in:
                    output.append(intersect(prev, point))
                output.append(point)
            elif prev_in:
                output.append(intersect(prev, point))
            prev, prev_in = point, cur_in
    return output


def quad_iou(a: Sequence[Point], b: Sequence[Point]) -> float:
    """Intersection-over-union of two convex quads."""
    area_a = abs(polygon_area(a))
    area_b = abs(polygon_area(b))
    if area_a <= 0.0 or area_b <= 0.0:
        raise GridSplitError("quad_iou requires positive-area quads")
    inter = clip_polygon(a, b)
    ai = abs(polygon_area(inter)) if len(inter) >= 3 else 0.0
    union = area_a + area_b - ai
    return ai / union if union > 0 else 0.0


def convex_hull(points: Sequence[Point]) -> list[Point]:
    """Monotone-chain hull, returned counterclockwise in math axes
    (clockwise on screen)."""
    pts = sorted(set((float(x), float(y)) for x, y in points))
    if len(pts) <= 2:
        return list(pts)

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list[Point] = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[Point] = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def hull_slab(hull: Sequence[Point], y: float) -> tuple[float, float] | None:
    """X-interval of a convex hull at height y, or None if outside."""
    xs: list[float] = []
    n = len(hull)
    for i in range(n):
        x0, y0 = hull[i]
        x1, y1 = hull[(i + 1) % n]
        if y0 == y1:
            if y0 == y:
                xs.extend((x0, x1))
            continue
        lo, hi = (y0, y1) if y0 < y1 else (y1, y0)
        if lo <= y <= hi:
            t = (y - y0) / (y1 - y0)
            xs.append(x0 + t * (x1 - x0))
    if not xs:
        return None
    return min(xs), max(xs)


def rect_quad(x0: float, y0: float, x1: float, y1: float) -> tuple[Point, Point, Point, Point]:
    """Axis-aligned rectangle as a clockwise quad (lt, rt, rb, lb)."""
    return ((x0, y0), (x1, y0), (x1, y1), (x0, y1))
