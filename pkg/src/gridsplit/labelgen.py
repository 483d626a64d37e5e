"""Training-label construction from annotations.

Separator labels mirror the split stage's outputs: one binary mask per
grid boundary (borders included) at 1/4 image scale, plus binary
instance vectors marking each separator's start point.  Merge labels
mirror the merge stage: for every grid slot, the set of slots belonging
to the same cell.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import sem2
from .annotation import TableAnnotation, derive_grid_shape, validate_coverage
from .errors import DegenerateSeparatorError, LabelCollisionError, ShapeError
from .geometry import clip_polygon, convex_hull, hull_slab, polygon_area, quad_iou


@dataclass(frozen=True)
class SeparatorMasks:
    """Binary masks at 1/downscale image scale.

    row_masks: (Hf, Wf, M+1), channel i = boundary above grid row i
    col_masks: (Hf, Wf, N+1), channel j = boundary left of grid col j
    """

    row_masks: np.ndarray
    col_masks: np.ndarray
    downscale: int = 4


@dataclass(frozen=True)
class InstanceVectors:
    """Start-point projections of the separator channels.

    p_row[y] = 1 iff some row separator starts at mask row y; p_col[x]
    likewise for columns.  starts give the per-channel indices in
    channel order.
    """

    p_row: np.ndarray
    p_col: np.ndarray
    row_starts: tuple[int, ...]
    col_starts: tuple[int, ...]


@dataclass(frozen=True)
class MergeLabels:
    """maps[i, j, k, l] = 1 iff slots (i,j) and (k,l) share a cell."""

    maps: np.ndarray


def assign_textlines(a: TableAnnotation) -> list[int | None]:
    """Owner cell index per textline by maximal quad IoU (ties toward
    the smaller cell index); None when a line overlaps no cell."""
    owners: list[int | None] = []
    for line in a.textlines:
        best, best_iou = None, 0.0
        for idx, cell in enumerate(a.cells):
            iou = quad_iou(line.quad.points, cell.quad.points)
            if iou > best_iou:
                best, best_iou = idx, iou
        owners.append(best)
    return owners


def _content_extents(a: TableAnnotation):
    """Per-cell bounding extents of owned textline quads clipped to the
    owning cell; cells without text yield None."""
    owners = assign_textlines(a)
    extents: list[tuple[float, float, float, float] | None] = [None] * len(a.cells)
    for line, owner in zip(a.textlines, owners):
        if owner is None:
            continue
        clipped = clip_polygon(line.quad.points, a.cells[owner].quad.points)
        if len(clipped) < 3 or abs(polygon_area(clipped)) <= 0.0:
            continue
        xs = [p[0] for p in clipped]
        ys = [p[1] for p in clipped]
        box = (min(xs), min(ys), max(xs), max(ys))
        prev = extents[owner]
        if prev is None:
            extents[owner] = box
        else:
            extents[owner] = (
                min(prev[0], box[0]),
                min(prev[1], box[1]),
                max(prev[2], box[2]),
                max(prev[3], box[3]),
            )
    return extents


def _band_intervals(a: TableAnnotation, axis: str):
    """Open (lo, hi) extent interval per boundary along the given axis.

    A cell constrains every boundary it does not straddle; the band for
    boundary b is the maximal gap between constraining content on
    either side (infinite toward the hull for border boundaries).
    """
    m, n = derive_grid_shape(a)
    extents = _content_extents(a)
    count = (n if axis == "col" else m) + 1
    intervals = []
    for b in range(count):
        lo, hi = -np.inf, np.inf
        for cell, ext in zip(a.cells, extents):
            if ext is None:
                continue
            start, end = (cell.col_start, cell.col_end) if axis == "col" else (cell.row_start, cell.row_end)
            if start < b <= end:  # straddled: content may be crossed
                continue
            lo_ext, hi_ext = (ext[0], ext[2]) if axis == "col" else (ext[1], ext[3])
            if end < b:
                lo = max(lo, hi_ext)
            else:
                hi = min(hi, lo_ext)
        intervals.append((lo, hi))
    return intervals


def gen_separator_masks(a: TableAnnotation, downscale: int = 4) -> SeparatorMasks:
    """Rasterize maximal separator bands at 1/downscale scale.

    Bands span the full hull extent across the separator direction and
    are clipped per-row (per-column) to the convex hull of the cell
    quads, so border bands follow the table outline.
    """
    if downscale < 1:
        raise ShapeError(f"downscale must be >= 1, got {downscale}")
    if not a.cells:
        raise DegenerateSeparatorError("row", 0)
    hf = -(-a.image_height // downscale)
    wf = -(-a.image_width // downscale)
    pts = [p for c in a.cells for p in c.quad.points]
    hull = convex_hull(pts)
    hull_t = convex_hull([(y, x) for x, y in pts])

    col_masks = _raster_bands(_band_intervals(a, "col"), hull, hf, wf, downscale, "col")
    row_masks = _raster_bands(_band_intervals(a, "row"), hull_t, wf, hf, downscale, "row")
    return SeparatorMasks(row_masks=row_masks, col_masks=col_masks, downscale=downscale)


def _raster_bands(intervals, hull, n_rows, n_cols, ds, axis):
    """Rasterize vertical bands onto an (n_rows, n_cols) canvas; the row
    axis is handled by transposing coordinates before and after."""
    out = np.zeros((n_rows, n_cols, len(intervals)), dtype=np.uint8)
    centers = ds * (np.arange(n_cols, dtype=np.float64) + 0.5)
    slabs = [hull_slab(hull, ds * (r + 0.5)) for r in range(n_rows)]
    for b, (lo, hi) in enumerate(intervals):
        if not hi > lo:
            raise DegenerateSeparatorError(axis, b)
        hit = False
        for r, slab in enumerate(slabs):
            if slab is None:
                continue
            xlo = max(lo, slab[0])
            xhi = min(hi, slab[1])
            sel = (centers > xlo) & (centers < xhi)
            if sel.any():
                out[r, sel, b] = 1
                hit = True
        if not hit:
            raise DegenerateSeparatorError(axis, b)
    if axis == "row":
        out = out.transpose(1, 0, 2)
    return out


def gen_instance_vectors(masks: SeparatorMasks) -> InstanceVectors:
    """Project each separator channel to its start index.

    Column separators start at their topmost pixel (leftmost on ties);
    row separators at their leftmost pixel (topmost on ties).  Two
    channels landing on the same index is a label collision.
    """
    hf, wf, _ = masks.col_masks.shape

    def starts_of(mk, primary):
        found = []
        for k in range(mk.shape[2]):
            ys, xs = np.nonzero(mk[:, :, k])
            if ys.size == 0:
                raise DegenerateSeparatorError(primary, k)
            if primary == "col":
                top = ys.min()
                found.append(int(xs[ys == top].min()))
            else:
                left = xs.min()
                found.append(int(ys[xs == left].min()))
        return found

    col_starts = starts_of(masks.col_masks, "col")
    row_starts = starts_of(masks.row_masks, "row")
    for name, starts in (("col", col_starts), ("row", row_starts)):
        dupes = {s for s in starts if starts.count(s) > 1}
        if dupes:
            raise LabelCollisionError(f"{name} separators share start index {sorted(dupes)}")
    p_col = np.zeros(wf, dtype=np.uint8)
    p_col[col_starts] = 1
    p_row = np.zeros(hf, dtype=np.uint8)
    p_row[row_starts] = 1
    return InstanceVectors(
        p_row=p_row,
        p_col=p_col,
        row_starts=tuple(row_starts),
        col_starts=tuple(col_starts),
    )


def gen_merge_labels(a: TableAnnotation) -> MergeLabels:
    """Slot-equivalence maps; blank slots are their own singletons."""
    m, n = derive_grid_shape(a)
    ids = np.full((m, n), -1, dtype=np.int64)
    for idx, cell in enumerate(a.cells):
        for i, j in cell.slots():
            ids[i, j] = idx
    next_id = len(a.cells)
    for i, j in validate_coverage(a):
        ids[i, j] = next_id
        next_id += 1
    maps = (ids[:, :, None, None] == ids[None, None, :, :]).astype(np.uint8)
    return MergeLabels(maps=maps)


def save_labels(
    out_dir: str | Path,
    masks: SeparatorMasks,
    vectors: InstanceVectors,
    merge: MergeLabels,
) -> None:
    """Write label tensors plus a sidecar recording the channel order."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    sem2.write_tensor(out / "row_masks.sem2", masks.row_masks)
    sem2.write_tensor(out / "col_masks.sem2", masks.col_masks)
    sem2.write_tensor(out / "p_row.sem2", vectors.p_row)
    sem2.write_tensor(out / "p_col.sem2", vectors.p_col)
    sem2.write_tensor(out / "merge_labels.sem2", merge.maps)
    sidecar = {
        "downscale": masks.downscale,
        "row_channel_boundaries": list(range(masks.row_masks.shape[2])),
        "col_channel_boundaries": list(range(masks.col_masks.shape[2])),
        "row_starts": list(vectors.row_starts),
        "col_starts": list(vectors.col_starts),
    }
    (out / "labels.json").write_text(json.dumps(sidecar, indent=2))


def load_labels(in_dir: str | Path) -> tuple[SeparatorMasks, InstanceVectors, MergeLabels]:
    src = Path(in_dir)
    sidecar = json.loads((src / "labels.json").read_text())
    masks = SeparatorMasks(
        row_masks=sem2.read_tensor(src / "row_masks.sem2").astype(np.uint8),
        col_masks=sem2.read_tensor(src / "col_masks.sem2").astype(np.uint8),
        downscale=int(sidecar["downscale"]),
    )
    vectors = InstanceVectors(
        p_row=sem2.read_tensor(src / "p_row.sem2").astype(np.uint8),
        p_col=sem2.read_tensor(src / "p_col.sem2").astype(np.uint8),
        row_starts=tuple(sidecar["row_starts"]),
        col_starts=tuple(sidecar["col_starts"]),
    )
    merge = MergeLabels(maps=sem2.read_tensor(src / "merge_labels.sem2").astype(np.uint8))
    return masks, vectors, merge
