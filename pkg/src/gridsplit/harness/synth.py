"""Synthetic table generator.

Tables are full-bleed: the outer grid boundaries coincide with the
image border and stay straight, while interior boundaries bend as
sinusoids with a per-axis shared phase.  Every cell carries exactly one
text line, inset from the straight lattice box by the maximal boundary
amplitude plus a fixed pad, so no text ever touches a separator.  Span
placement is rationed so that every row keeps at least one single-row
cell and every column at least one single-column cell, which keeps all
boundaries constrained by content on both sides.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from ..annotation import CellAnn, Quad, TableAnnotation, TextLine
from ..errors import GenerationError

DOWNSCALE = 4
# Minimal clearance between text and any separator curve, original px.
PAD = 4.0
# Smallest admissible text box side, original px.
TEXT_MIN = 8.0

_ALPHABET = "abcdefghijklmnopqrstuvwxyz0123456789"


@dataclass(frozen=True)
class SynthSpec:
    rows: int = 4
    cols: int = 4
    span_prob: float = 0.3
    max_span: int = 3
    cell_px: int = 32
    wireless: bool = False
    curvature: float = 3.0
    seed: int = 0
    channels: int = 16

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "SynthSpec":
        doc = json.loads(text)
        unknown = set(doc) - set(cls.__dataclass_fields__)
        if unknown:
            raise GenerationError(f"unknown spec keys {sorted(unknown)}")
        return cls(**doc)


@dataclass
class SynthTable:
    """A generated table plus the exact separator curves that shaped it.

    col_curves[i, r] is the x of column boundary i at the r-th feature
    row center (y = downscale*r + downscale/2); row_curves[j, c] is the
    y of row boundary j at the c-th feature column center.
    """

    spec: SynthSpec
    annotation: TableAnnotation
    col_curves: np.ndarray
    row_curves: np.ndarray
    downscale: int = DOWNSCALE


def _amplitude_bound(spec: SynthSpec) -> float:
    w = spec.cols * spec.cell_px
    h = spec.rows * spec.cell_px
    return min(
        spec.curvature,
        (spec.cell_px - TEXT_MIN) / 2.0 - PAD,
        h / (8.0 * math.pi),
        w / (8.0 * math.pi),
    )


def _place_spans(rng: np.random.Generator, spec: SynthSpec):
    """Row-major span placement under the per-axis rationing rule."""
    m, n = spec.rows, spec.cols
    owner = np.full((m, n), -1, dtype=np.int64)
    col_cover = np.zeros(n, dtype=np.int64)  # slots taken by multi-col cells
    row_cover = np.zeros(m, dtype=np.int64)
    spans: list[tuple[int, int, int, int]] = []
    for r in range(m):
        for c in range(n):
            if owner[r, c] >= 0:
                continue
            h = w = 1
            if spec.max_span > 1 and rng.random() < spec.span_prob:
                h = min(int(rng.integers(1, spec.max_span + 1)), m - r)
                w = min(int(rng.integers(1, spec.max_span + 1)), n - c)
                if (
                    (h == 1 and w == 1)
                    or owner[r : r + h, c : c + w].max() >= 0
                    or (w > 1 and np.any(col_cover[c : c + w] + h > m - 1))
                    or (h > 1 and np.any(row_cover[r : r + h] + w > n - 1))
                ):
                    h = w = 1
            owner[r : r + h, c : c + w] = len(spans)
            if w > 1:
                col_cover[c : c + w] += h
            if h > 1:
                row_cover[r : r + h] += w
            spans.append((r, r + h - 1, c, c + w - 1))
    return spans


def _word(rng: np.random.Generator) -> str:
    length = int(rng.integers(3, 9))
    return "".join(_ALPHABET[i] for i in rng.integers(0, len(_ALPHABET), size=length))


def generate(spec: SynthSpec) -> SynthTable:
    """Build one table; raises GenerationError on infeasible specs."""
    if spec.rows < 1 or spec.cols < 1:
        raise GenerationError(f"grid must be at least 1x1, got {spec.rows}x{spec.cols}")
    if spec.cell_px % DOWNSCALE:
        raise GenerationError(f"cell_px must be a multiple of {DOWNSCALE}")
    if spec.max_span < 1:
        raise GenerationError("max_span must be >= 1")
    if not 0.0 <= spec.span_prob <= 1.0:
        raise GenerationError("span_prob must lie in [0, 1]")
    a_max = _amplitude_bound(spec)
    if a_max < 0.0:
        raise GenerationError(
            f"cell_px={spec.cell_px} leaves no room for text between separators"
        )
    rng = np.random.default_rng(spec.seed)
    m, n = spec.rows, spec.cols
    px = spec.cell_px
    width, height = n * px, m * px

    # Boundary shapes.  Borders stay straight; a shared phase keeps the
    # gap between adjacent interior boundaries at least px - a_max wide.
    if spec.wireless or a_max <= 0.0:
        col_amp = np.zeros(n + 1)
        row_amp = np.zeros(m + 1)
    else:
        col_amp = np.zeros(n + 1)
        row_amp = np.zeros(m + 1)
        col_amp[1:n] = rng.uniform(0.3, 1.0, size=max(n - 1, 0)) * a_max
        row_amp[1:m] = rng.uniform(0.3, 1.0, size=max(m - 1, 0)) * a_max
    col_phase = float(rng.uniform(0.0, 2.0 * math.pi))
    row_phase = float(rng.uniform(0.0, 2.0 * math.pi))

    def col_x(i: int, y) -> np.ndarray:
        y = np.asarray(y, dtype=np.float64)
        return i * px + col_amp[i] * np.sin(2.0 * math.pi * y / height + col_phase)

    def row_y(j: int, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        return j * px + row_amp[j] * np.sin(2.0 * math.pi * x / width + row_phase)

    def corner(j: int, i: int) -> tuple[float, float]:
        x, y = float(i * px), float(j * px)
        for _ in range(12):
            x = float(col_x(i, y))
            y = float(row_y(j, x))
        return x, y

    spans = _place_spans(rng, spec)
    a_used = float(max(col_amp.max(), row_amp.max()))
    inset = a_used + PAD

    cells = []
    textlines = []
    for idx, (r0, r1, c0, c1) in enumerate(spans):
        lt = corner(r0, c0)
        rt = corner(r0, c1 + 1)
        rb = corner(r1 + 1, c1 + 1)
        lb = corner(r1 + 1, c0)
        quad = Quad(lt + rt + rb + lb)
        content = _word(rng)
        cells.append(
            CellAnn(
                quad=quad,
                row_start=r0,
                row_end=r1,
                col_start=c0,
                col_end=c1,
                content=content,
            )
        )
        tx0 = c0 * px + inset
        ty0 = r0 * px + inset
        tx1 = (c1 + 1) * px - inset
        ty1 = (r1 + 1) * px - inset
        if tx1 - tx0 < TEXT_MIN or ty1 - ty0 < TEXT_MIN:
            raise GenerationError(
                f"cell {idx} leaves a {tx1 - tx0:.1f}x{ty1 - ty0:.1f} text box"
            )
        textlines.append(
            TextLine(
                quad=Quad((tx0, ty0, tx1, ty0, tx1, ty1, tx0, ty1)),
                id=f"t{idx}",
                content=content,
            )
        )

    row_groups = tuple(
        (0.0, float(i * px), float(width), float(i * px), float(width), float((i + 1) * px), 0.0, float((i + 1) * px))
        for i in range(m)
    )
    col_groups = tuple(
        (float(j * px), 0.0, float((j + 1) * px), 0.0, float((j + 1) * px), float(height), float(j * px), float(height))
        for j in range(n)
    )
    annotation = TableAnnotation(
        image_width=width,
        image_height=height,
        cells=tuple(cells),
        textlines=tuple(textlines),
        row_groups=row_groups,
        col_groups=col_groups,
    )

    hf, wf = height // DOWNSCALE, width // DOWNSCALE
    y_centers = DOWNSCALE * (np.arange(hf, dtype=np.float64) + 0.5)
    x_centers = DOWNSCALE * (np.arange(wf, dtype=np.float64) + 0.5)
    col_curves = np.stack([col_x(i, y_centers) for i in range(n + 1)])
    row_curves = np.stack([row_y(j, x_centers) for j in range(m + 1)])
    col_curves[0] = 0.0
    col_curves[n] = float(width)
    row_curves[0] = 0.0
    row_curves[m] = float(height)
    return SynthTable(
        spec=spec,
        annotation=annotation,
        col_curves=col_curves,
        row_curves=row_curves,
    )
