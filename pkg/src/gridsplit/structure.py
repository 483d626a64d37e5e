"""Logical structure views of a cell partition.

A CellSet renders to a minimal HTML tree (table > tr > td, spans as
attributes) for tree-edit comparison, to adjacency relations for
F1-style protocols, and to a dense grid-matrix view for alignment
scoring.  A small parser inverts the HTML rendering for round-trips.
"""

from __future__ import annotations

import html
import re
from dataclasses import dataclass, field

import numpy as np

from .annotation import Quad
from .errors import GridSplitError
from .geometry import rect_quad
from .merger import Cell, CellSet


@dataclass
class HtmlNode:
    tag: str
    rowspan: int = 1
    colspan: int = 1
    content: str = ""
    children: list["HtmlNode"] = field(default_factory=list)


def _check_partition(cells: CellSet) -> np.ndarray:
    occ = cells.occupancy()
    if cells.rows and cells.cols and (occ < 0).any():
        i, j = np.argwhere(occ < 0)[0]
        raise GridSplitError(f"cell set does not cover grid slot ({i}, {j})")
    return occ


def to_html_tree(cells: CellSet) -> HtmlNode:
    """table > tr per grid row > td per cell anchored in that row.

    Spans beyond 1 become rowspan/colspan; td content is the cell's
    text in reading order; blank cells emit empty tds.  Node count is
    1 + rows + len(cells)."""
    _check_partition(cells)
    root = HtmlNode(tag="table")
    for i in range(cells.rows):
        tr = HtmlNode(tag="tr")
        for cell in sorted(
            (c for c in cells.cells if c.row_start == i), key=lambda c: c.col_start
        ):
            tr.children.append(
                HtmlNode(
                    tag="td",
                    rowspan=cell.row_end - cell.row_start + 1,
                    colspan=cell.col_end - cell.col_start + 1,
                    content=cell.content_text(),
                )
            )
        root.children.append(tr)
    return root


def node_count(node: HtmlNode) -> int:
    return 1 + sum(node_count(c) for c in node.children)


def html_to_string(node: HtmlNode) -> str:
    attrs = ""
    if node.tag == "td":
        if node.rowspan != 1:
            attrs += f' rowspan="{node.rowspan}"'
        if node.colspan != 1:
            attrs += f' colspan="{node.colspan}"'
        return f"<td{attrs}>{html.escape(node.content)}</td>"
    inner = "".join(html_to_string(c) for c in node.children)
    return f"<{node.tag}>{inner}</{node.tag}>"


_TD_RE = re.compile(r"<td((?:\s+\w+=\"\d+\")*)\s*>(.*?)</td>", re.S)
_ATTR_RE = re.compile(r"(\w+)=\"(\d+)\"")


def parse_html_table(text: str) -> CellSet:
    """Invert html_to_string for the table fragment subset.

    Cells are re-anchored with the usual skyline occupancy scan; quads
    come out in grid-index space (one unit per slot)."""
    body = re.search(r"<table>(.*)</table>", text, re.S)
    if not body:
        raise GridSplitError("no <table> element found")
    rows = re.findall(r"<tr>(.*?)</tr>", body.group(1), re.S)
    parsed: list[list[tuple[int, int, str]]] = []
    for tr in rows:
        tds = []
        for m in _TD_RE.finditer(tr):
            spans = dict(_ATTR_RE.findall(m.group(1)))
            tds.append(
                (
                    int(spans.get("rowspan", 1)),
                    int(spans.get("colspan", 1)),
                    html.unescape(m.group(2)),
                )
            )
        parsed.append(tds)

    occupied: set[tuple[int, int]] = set()
    cells: list[Cell] = []
    n_cols = 0
    for i, tds in enumerate(parsed):
        j = 0
        for rs, cs, content in tds:
            while (i, j) in occupied:
                j += 1
            for di in range(rs):
                for dj in range(cs):
                    occupied.add((i + di, j + dj))
            quad = Quad(tuple(v for p in rect_quad(j, i, j + cs, i + rs) for v in p))
            cells.append(
                Cell(
                    row_start=i,
                    row_end=i + rs - 1,
                    col_start=j,
                    col_end=j + cs - 1,
                    quad=quad,
                    content=(content,) if content else (),
                )
            )
            n_cols = max(n_cols, j + cs)
            j += cs
    n_rows = max((c.row_end + 1 for c in cells), default=len(parsed))
    return CellSet(cells=tuple(cells), rows=max(n_rows, len(parsed)), cols=n_cols)


def adjacency_relations(cells: CellSet) -> list[tuple[int, int, str]]:
    """Nearest-neighbor relations between non-blank cells.

    For each cell and each grid row (column) it covers, the first
    non-blank cell encountered scanning right (down) past blanks is a
    neighbor; one relation per (cell, neighbor, direction)."""
    occ = _check_partition(cells)
    rels: set[tuple[int, int, str]] = set()
    for idx, cell in enumerate(cells.cells):
        if cell.is_blank:
            continue
        for r in range(cell.row_start, cell.row_end + 1):
            for c in range(cell.col_end + 1, cells.cols):
                other = int(occ[r, c])
                if other != idx and not cells.cells[other].is_blank:
                    rels.add((idx, other, "right"))
                    break
                if other != idx and cells.cells[other].is_blank:
                    continue
        for c in range(cell.col_start, cell.col_end + 1):
            for r in range(cell.row_end + 1, cells.rows):
                other = int(occ[r, c])
                if other != idx and not cells.cells[other].is_blank:
                    rels.add((idx, other, "down"))
                    break
                if other != idx and cells.cells[other].is_blank:
                    continue
    return sorted(rels)


@dataclass
class GridMatrixView:
    """Dense per-slot descriptors: spans[i, j] = (rowspan, colspan,
    row offset, col offset) of the covering cell; text[i, j] = its
    content string (marker ids when content is absent)."""

    spans: np.ndarray  # (M, N, 4) int64
    text: np.ndarray  # (M, N) object


def grid_matrix_view(cells: CellSet) -> GridMatrixView:
    occ = _check_partition(cells)
    m, n = cells.rows, cells.cols
    spans = np.zeros((m, n, 4), dtype=np.int64)
    text = np.empty((m, n), dtype=object)
    for i in range(m):
        for j in range(n):
            cell = cells.cells[int(occ[i, j])]
            spans[i, j] = (
                cell.row_end - cell.row_start + 1,
                cell.col_end - cell.col_start + 1,
                i - cell.row_start,
                j - cell.col_start,
            )
            text[i, j] = cell.content_text() or " ".join(cell.markers)
    return GridMatrixView(spans=spans, text=text)
