"""Table annotation model and JSON round-trip.

Document schema::

    {
      "image": {"width": int, "height": int},
      "cells": [
        {"quad": [x0,y0, x1,y1, x2,y2, x3,y3],
         "row_start": int, "row_end": int,
         "col_start": int, "col_end": int,
         "content": str?}, ...],
      "textlines": [
        {"quad": [8 numbers], "content": str?, "id": str}, ...],
      "row_groups": [[numbers...], ...]?,
      "col_groups": [[numbers...], ...]?
    }

Quads are clockwise from top-left (lt, rt, rb, lb) and must have
positive signed area.  Row/col indices are 0-based inclusive.  Grid
slots not covered by any cell are legal blanks; overlaps are not.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterator

from .errors import AnnotationError
from .geometry import Point, polygon_area


@dataclass(frozen=True)
class Quad:
    """Four corner points, stored as a flat 8-tuple of floats."""

    coords: tuple[float, ...]

    def __post_init__(self):
        if len(self.coords) != 8:
            raise AnnotationError(f"quad needs 8 numbers, got {len(self.coords)}")

    @property
    def points(self) -> tuple[Point, Point, Point, Point]:
        c = self.coords
        return ((c[0], c[1]), (c[2], c[3]), (c[4], c[5]), (c[6], c[7]))

    def area(self) -> float:
        return polygon_area(self.points)

    def bounds(self) -> tuple[float, float, float, float]:
        xs = self.coords[0::2]
        ys = self.coords[1::2]
        return min(xs), min(ys), max(xs), max(ys)


@dataclass(frozen=True)
class CellAnn:
    quad: Quad
    row_start: int
    row_end: int
    col_start: int
    col_end: int
    content: str | None = None

    def slots(self) -> Iterator[tuple[int, int]]:
        for i in range(self.row_start, self.row_end + 1):
            for j in range(self.col_start, self.col_end + 1):
                yield i, j


@dataclass(frozen=True)
class TextLine:
    quad: Quad
    id: str
    content: str | None = None


@dataclass(frozen=True)
class TableAnnotation:
    image_width: int
    image_height: int
    cells: tuple[CellAnn, ...]
    textlines: tuple[TextLine, ...] = ()
    row_groups: tuple[tuple[float, ...], ...] | None = None
    col_groups: tuple[tuple[float, ...], ...] | None = None


def _require(obj, key, kind, path):
    if not isinstance(obj, dict):
        raise AnnotationError(f"expected object, got {type(obj).__name__}", path)
    if key not in obj:
        raise AnnotationError(f"missing key {key!r}", path)
    val = obj[key]
    if kind is float:
        if not isinstance(val, (int, float)) or isinstance(val, bool):
            raise AnnotationError(f"{key!r} must be a number", path)
        return float(val)
    if kind is int:
        if not isinstance(val, int) or isinstance(val, bool):
            raise AnnotationError(f"{key!r} must be an integer", path)
        return val
    if not isinstance(val, kind):
        raise AnnotationError(f"{key!r} must be {kind.__name__}", path)
    return val


def _parse_quad(raw, path) -> Quad:
    if not isinstance(raw, list) or len(raw) != 8:
        raise AnnotationError("quad must be a list of 8 numbers", path)
    for k, v in enumerate(raw):
        if not isinstance(v, (int, float)) or isinstance(v, bool):
            raise AnnotationError(f"quad[{k}] is not a number", path)
    quad = Quad(tuple(float(v) for v in raw))
    if quad.area() <= 0.0:
        raise AnnotationError(f"quad has non-positive area {quad.area():g}", path)
    return quad


def _parse_groups(raw, path):
    if raw is None:
        return None
    if not isinstance(raw, list):
        raise AnnotationError("groups must be a list of polygons", path)
    out = []
    for g, poly in enumerate(raw):
        gp = f"{path}[{g}]"
        if not isinstance(poly, list) or len(poly) < 6 or len(poly) % 2:
            raise AnnotationError("polygon must be a flat list of >= 3 points", gp)
        if any(not isinstance(v, (int, float)) or isinstance(v, bool) for v in poly):
            raise AnnotationError("polygon coordinates must be numbers", gp)
        out.append(tuple(float(v) for v in poly))
    return tuple(out)


def parse_annotation(text: str) -> TableAnnotation:
    """Parse and validate an annotation document.

    Raises AnnotationError with a JSON path on any schema violation,
    overlapping cells, or duplicate textline ids.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise AnnotationError(f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise AnnotationError("top level must be an object")
    image = _require(doc, "image", dict, "image")
    width = _require(image, "width", int, "image")
    height = _require(image, "height", int, "image")
    if width < 1 or height < 1:
        raise AnnotationError("image dims must be positive", "image")

    raw_cells = _require(doc, "cells", list, "cells")
    cells = []
    occupied: dict[tuple[int, int], int] = {}
    for idx, rc in enumerate(raw_cells):
        path = f"cells[{idx}]"
        quad = _parse_quad(_require(rc, "quad", list, path), f"{path}.quad")
        spans = {k: _require(rc, k, int, path) for k in ("row_start", "row_end", "col_start", "col_end")}
        if spans["row_start"] < 0 or spans["col_start"] < 0:
            raise AnnotationError("indices must be >= 0", path)
        if spans["row_end"] < spans["row_start"] or spans["col_end"] < spans["col_start"]:
            raise AnnotationError("span end precedes start", path)
        content = rc.get("content")
        if content is not None and not isinstance(content, str):
            raise AnnotationError("'content' must be a string", path)
        cell = CellAnn(quad=quad, content=content, **spans)
        for slot in cell.slots():
            if slot in occupied:
                raise AnnotationError(
                    f"grid slot {slot} already covered by cells[{occupied[slot]}]", path
                )
            occupied[slot] = idx
        cells.append(cell)

    raw_lines = _require(doc, "textlines", list, "textlines")
    lines = []
    seen_ids: set[str] = set()
    for idx, rl in enumerate(raw_lines):
        path = f"textlines[{idx}]"
        quad = _parse_quad(_require(rl, "quad", list, path), f"{path}.quad")
        tid = _require(rl, "id", str, path)
        if tid in seen_ids:
            raise AnnotationError(f"duplicate textline id {tid!r}", path)
        seen_ids.add(tid)
        content = rl.get("content")
        if content is not None and not isinstance(content, str):
            raise AnnotationError("'content' must be a string", path)
        lines.append(TextLine(quad=quad, id=tid, content=content))

    return TableAnnotation(
        image_width=width,
        image_height=height,
        cells=tuple(cells),
        textlines=tuple(lines),
        row_groups=_parse_groups(doc.get("row_groups"), "row_groups"),
        col_groups=_parse_groups(doc.get("col_groups"), "col_groups"),
    )


def serialize_annotation(a: TableAnnotation) -> str:
    """Inverse of parse_annotation; key order is fixed for stable bytes."""
    doc: dict = {"image": {"width": a.image_width, "height": a.image_height}}
    cells = []
    for c in a.cells:
        item: dict = {
            "quad": list(c.quad.coords),
            "row_start": c.row_start,
            "row_end": c.row_end,
            "col_start": c.col_start,
            "col_end": c.col_end,
        }
        if c.content is not None:
            item["content"] = c.content
        cells.append(item)
    doc["cells"] = cells
    lines = []
    for t in a.textlines:
        item = {"quad": list(t.quad.coords)}
        if t.content is not None:
            item["content"] = t.content
        item["id"] = t.id
        lines.append(item)
    doc["textlines"] = lines
    if a.row_groups is not None:
        doc["row_groups"] = [list(g) for g in a.row_groups]
    if a.col_groups is not None:
        doc["col_groups"] = [list(g) for g in a.col_groups]
    return json.dumps(doc, indent=2)


def derive_grid_shape(a: TableAnnotation) -> tuple[int, int]:
    """(M, N) from the maximal row/col indices; empty tables are (0, 0)."""
    if not a.cells:
        return 0, 0
    return (
        max(c.row_end for c in a.cells) + 1,
        max(c.col_end for c in a.cells) + 1,
    )


def validate_coverage(a: TableAnnotation) -> list[tuple[int, int]]:
    """Sorted list of grid slots not covered by any cell (legal blanks)."""
    m, n = derive_grid_shape(a)
    covered = {slot for c in a.cells for slot in c.slots()}
    return [(i, j) for i in range(m) for j in range(n) if (i, j) not in covered]
