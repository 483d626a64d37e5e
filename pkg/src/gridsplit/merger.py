"""Merge stage: grid embeddings, pairwise merge maps, cell decoding.

Grid boxes are pooled into fixed-size embeddings, contextualized with
one residual self-attention block, and compared pairwise through two
linear branches; thresholded merge maps are decoded into rectangular
multi-slot cells under a mutual-vote-and-rectangle guard that can never
break the grid partition.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .annotation import Quad, TableAnnotation, TextLine, derive_grid_shape, validate_coverage
from .errors import ShapeError
from .geometry import quad_iou, rect_quad
from .losses import LossConfig, sigmoid, sigmoid_focal_grad, sigmoid_focal_loss
from .splitter import GridStructure
from .tensorops import roi_align


@dataclass
class MergerParams:
    """Embedding MLP, attention maps, and the two merge branches."""

    w1: np.ndarray  # (r*r*C, D)
    b1: np.ndarray
    w2: np.ndarray  # (D, D)
    b2: np.ndarray
    wq: np.ndarray
    bq: np.ndarray
    wk: np.ndarray
    bk: np.ndarray
    wv: np.ndarray
    bv: np.ndarray
    feat_w: np.ndarray  # (D, D) feature branch (merge targets)
    feat_b: np.ndarray
    kern_w: np.ndarray  # (D, D) kernel branch (merge sources)
    kern_b: np.ndarray
    r: int
    channels: int
    dim: int

    @classmethod
    def zeros(cls, channels: int, dim: int, r: int = 3) -> "MergerParams":
        d = dim
        z = np.zeros
        return cls(
            w1=z((r * r * channels, d)), b1=z(d), w2=z((d, d)), b2=z(d),
            wq=z((d, d)), bq=z(d), wk=z((d, d)), bk=z(d), wv=z((d, d)), bv=z(d),
            feat_w=z((d, d)), feat_b=z(d), kern_w=z((d, d)), kern_b=z(d),
            r=r, channels=channels, dim=d,
        )

    @classmethod
    def random(cls, seed: int, channels: int, dim: int, r: int = 3) -> "MergerParams":
        rng = np.random.default_rng(seed)

        def w(rows, cols):
            return rng.standard_normal((rows, cols)) / np.sqrt(rows)

        d = dim
        return cls(
            w1=w(r * r * channels, d), b1=np.zeros(d), w2=w(d, d), b2=np.zeros(d),
            wq=w(d, d), bq=np.zeros(d), wk=w(d, d), bk=np.zeros(d),
            wv=w(d, d), bv=np.zeros(d),
            feat_w=w(d, d), feat_b=np.zeros(d), kern_w=w(d, d), kern_b=np.zeros(d),
            r=r, channels=channels, dim=d,
        )

    @staticmethod
    def _layout(channels: int, dim: int, r: int):
        d = dim
        return (
            ("w1", (r * r * channels, d)), ("b1", (d,)),
            ("w2", (d, d)), ("b2", (d,)),
            ("wq", (d, d)), ("bq", (d,)),
            ("wk", (d, d)), ("bk", (d,)),
            ("wv", (d, d)), ("bv", (d,)),
            ("feat_w", (d, d)), ("feat_b", (d,)),
            ("kern_w", (d, d)), ("kern_b", (d,)),
        )

    def to_vector(self) -> np.ndarray:
        """Flatten all weights into one vector in a fixed field order."""
        return np.concatenate(
            [np.asarray(getattr(self, name), dtype=np.float64).ravel()
             for name, _ in self._layout(self.channels, self.dim, self.r)]
        )

    @classmethod
    def from_vector(cls, vec, channels: int, dim: int, r: int = 3) -> "MergerParams":
        """Inverse of to_vector; the vector length must match exactly."""
        v = np.asarray(vec, dtype=np.float64).ravel()
        layout = cls._layout(channels, dim, r)
        total = sum(int(np.prod(shape)) for _, shape in layout)
        if v.size != total:
            raise ShapeError(
                f"parameter vector has {v.size} values, "
                f"C={channels} D={dim} r={r} needs {total}"
            )
        parts = {}
        off = 0
        for name, shape in layout:
            size = int(np.prod(shape))
            parts[name] = v[off : off + size].reshape(shape)
            off += size
        return cls(r=r, channels=channels, dim=dim, **parts)


def position_encoding(m: int, n: int, d: int) -> np.ndarray:
    """2-D sinusoidal encoding: first half of the channels encode the
    row index, the rest the column index."""
    if d < 4:
        raise ShapeError(f"encoding dim must be >= 4, got {d}")
    d_row = d // 2
    d_col = d - d_row

    def axis_code(positions, dim):
        pos = np.arange(positions, dtype=np.float64)[:, None]
        idx = np.arange(dim, dtype=np.float64)[None, :]
        angle = pos / np.power(10000.0, 2.0 * np.floor(idx / 2.0) / dim)
        code = np.empty((positions, dim))
        code[:, 0::2] = np.sin(angle[:, 0::2])
        code[:, 1::2] = np.cos(angle[:, 1::2])
        return code

    rows = axis_code(m, d_row)[:, None, :]
    cols = axis_code(n, d_col)[None, :, :]
    out = np.empty((m, n, d))
    out[:, :, :d_row] = rows
    out[:, :, d_row:] = cols
    return out


def embed_grids(
    f,
    grid: GridStructure,
    params: MergerParams,
    use_position_encoding: bool = True,
) -> np.ndarray:
    """Pool each grid box and contextualize across the table.

    Per box: roi_align to (r, r, C), flatten row-major, two-layer MLP
    with ReLU to D dims.  One single-head residual attention block then
    mixes all M*N embeddings; the position encoding enters the queries
    and keys only, so zero attention weights leave embeddings intact.
    """
    fmap = np.asarray(f, dtype=np.float64)
    m, n = grid.shape
    if fmap.ndim != 3 or fmap.shape[2] != params.channels:
        raise ShapeError(f"feature map {fmap.shape} incompatible with C={params.channels}")
    flat = np.empty((m * n, params.r * params.r * params.channels))
    for i in range(m):
        for j in range(n):
            flat[i * n + j] = roi_align(fmap, grid.boxes[i, j], params.r).ravel()
    hidden = np.maximum(flat @ params.w1 + params.b1, 0.0)
    e = (hidden @ params.w2 + params.b2).reshape(m, n, params.dim)

    addr = e + position_encoding(m, n, params.dim) if use_position_encoding else e
    q = (addr.reshape(m * n, -1)) @ params.wq + params.bq
    k = (addr.reshape(m * n, -1)) @ params.wk + params.bk
    v = (e.reshape(m * n, -1)) @ params.wv + params.bv
    logits = q @ k.T / np.sqrt(params.dim)
    logits -= logits.max(axis=1, keepdims=True)
    attn = np.exp(logits)
    attn /= attn.sum(axis=1, keepdims=True)
    return e + (attn @ v).reshape(m, n, params.dim)


@dataclass
class MergedMaps:
    """Pairwise merge prediction: raw scores, probabilities, and the
    thresholded binary maps with forced self-inclusion."""

    scores: np.ndarray  # (M, N, M, N)
    probs: np.ndarray
    binary: np.ndarray


def merger_forward(e, params: MergerParams, threshold: float = 0.5) -> MergedMaps:
    """Dot every slot's kernel-branch vector with every slot's
    feature-branch vector: scores[i,j,k,l] = <kern(e[i,j]), feat(e[k,l])>."""
    emb = np.asarray(e, dtype=np.float64)
    if emb.ndim != 3 or emb.shape[2] != params.dim:
        raise ShapeError(f"embeddings {emb.shape} incompatible with D={params.dim}")
    ef = emb @ params.feat_w + params.feat_b
    ek = emb @ params.kern_w + params.kern_b
    scores = np.einsum("ijd,kld->ijkl", ek, ef)
    probs = sigmoid(scores)
    binary = probs >= threshold
    m, n = emb.shape[:2]
    ii, jj = np.meshgrid(np.arange(m), np.arange(n), indexing="ij")
    binary[ii, jj, ii, jj] = True
    return MergedMaps(scores=scores, probs=probs, binary=binary)


def loss_merge(scores, labels, cfg: LossConfig = LossConfig()) -> float:
    """Focal loss per source slot normalized by its target mass, then
    averaged over all M*N source slots."""
    x = np.asarray(scores, dtype=np.float64)
    t = np.asarray(labels, dtype=np.float64)
    if x.shape != t.shape or x.ndim != 4:
        raise ShapeError(f"scores {x.shape} vs labels {t.shape}, need matching rank-4")
    norms = t.sum(axis=(2, 3))
    if np.any(norms <= 0):
        raise ShapeError("merge label map with zero mass (self-inclusion missing)")
    per = sigmoid_focal_loss(x, t, cfg).sum(axis=(2, 3))
    return float((per / norms).mean())


def loss_merge_grad(scores, labels, cfg: LossConfig = LossConfig()) -> np.ndarray:
    x = np.asarray(scores, dtype=np.float64)
    t = np.asarray(labels, dtype=np.float64)
    norms = t.sum(axis=(2, 3))
    if np.any(norms <= 0):
        raise ShapeError("merge label map with zero mass")
    m, n = x.shape[:2]
    return sigmoid_focal_grad(x, t, cfg) / norms[:, :, None, None] / (m * n)


@dataclass(frozen=True)
class Cell:
    """A decoded table cell: grid span, physical quad, and content in
    reading order.  markers are textline ids; content their strings."""

    row_start: int
    row_end: int
    col_start: int
    col_end: int
    quad: Quad
    content: tuple[str, ...] = ()
    markers: tuple[str, ...] = ()

    @property
    def is_blank(self) -> bool:
        return not self.markers and not self.content

    def content_text(self) -> str:
        return " ".join(self.content)


@dataclass(frozen=True)
class CellSet:
    """Cells forming an exact partition of an (M, N) grid."""

    cells: tuple[Cell, ...]
    rows: int
    cols: int

    def occupancy(self) -> np.ndarray:
        occ = np.full((self.rows, self.cols), -1, dtype=np.int64)
        for idx, c in enumerate(self.cells):
            occ[c.row_start : c.row_end + 1, c.col_start : c.col_end + 1] = idx
        return occ


class _DSU:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, a):
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def decode_cells(
    binary, grid: GridStructure, scale: float = 4.0
) -> tuple[CellSet, list[str]]:
    """Merge grid slots into cells under mutual voting.

    Two slots join only when each one's map includes the other.  Every
    resulting component must fill its bounding rectangle exactly;
    offenders dissolve back to singletons (warned), so the output is
    always a partition of the grid.
    """
    b = np.asarray(binary, dtype=bool)
    m, n = grid.shape
    if b.shape != (m, n, m, n):
        raise ShapeError(f"merge maps {b.shape} do not match grid {m}x{n}")
    mutual = b & b.transpose(2, 3, 0, 1)
    dsu = _DSU(m * n)
    for i in range(m):
        for j in range(n):
            src = i * n + j
            ks, ls = np.nonzero(mutual[i, j])
            for k, l in zip(ks, ls):
                dsu.union(src, int(k) * n + int(l))
    comps: dict[int, list[int]] = {}
    for slot in range(m * n):
        comps.setdefault(dsu.find(slot), []).append(slot)

    warnings: list[str] = []
    spans: list[tuple[int, int, int, int]] = []
    for root in sorted(comps):
        slots = comps[root]
        rs = [s // n for s in slots]
        cs = [s % n for s in slots]
        r0, r1, c0, c1 = min(rs), max(rs), min(cs), max(cs)
        if len(slots) != (r1 - r0 + 1) * (c1 - c0 + 1) or any(
            dsu.find(r * n + c) != root for r in range(r0, r1 + 1) for c in range(c0, c1 + 1)
        ):
            warnings.append(
                f"merge component at rows {r0}-{r1} cols {c0}-{c1} is not rectangular; dissolved"
            )
            spans.extend((r, r, c, c) for r, c in sorted(zip(rs, cs)))
        else:
            spans.append((r0, r1, c0, c1))

    cells = []
    for r0, r1, c0, c1 in sorted(spans):
        member = grid.boxes[r0 : r1 + 1, c0 : c1 + 1].reshape(-1, 4)
        x0, y0 = member[:, 0].min() * scale, member[:, 1].min() * scale
        x1, y1 = member[:, 2].max() * scale, member[:, 3].max() * scale
        quad = Quad(tuple(v for p in rect_quad(x0, y0, x1, y1) for v in p))
        cells.append(Cell(row_start=r0, row_end=r1, col_start=c0, col_end=c1, quad=quad))
    return CellSet(cells=tuple(cells), rows=m, cols=n), warnings


def assign_content(
    cells: CellSet, textlines: tuple[TextLine, ...]
) -> tuple[CellSet, list[str]]:
    """Attach each textline to its maximal-IoU cell (ties toward the
    smaller cell index).  Lines overlapping nothing are reported back.
    Cells receiving lines (re)order them top-to-bottom, left-to-right."""
    buckets: dict[int, list[tuple[float, float, str, str]]] = {}
    unassigned: list[str] = []
    for line in textlines:
        best, best_iou = None, 0.0
        for idx, cell in enumerate(cells.cells):
            iou = quad_iou(line.quad.points, cell.quad.points)
            if iou > best_iou:
                best, best_iou = idx, iou
        if best is None:
            unassigned.append(line.id)
            continue
        x0, y0, _, _ = line.quad.bounds()
        buckets.setdefault(best, []).append((y0, x0, line.id, line.content or ""))
    out = []
    for idx, cell in enumerate(cells.cells):
        if idx in buckets:
            entries = sorted(buckets[idx])
            out.append(
                Cell(
                    row_start=cell.row_start,
                    row_end=cell.row_end,
                    col_start=cell.col_start,
                    col_end=cell.col_end,
                    quad=cell.quad,
                    content=tuple(e[3] for e in entries),
                    markers=tuple(e[2] for e in entries),
                )
            )
        else:
            out.append(cell)
    return CellSet(cells=tuple(out), rows=cells.rows, cols=cells.cols), unassigned


def cellset_from_annotation(a: TableAnnotation) -> CellSet:
    """Ground-truth cells with blanks materialized as singletons.

    Blank slots get synthetic quads from the extents of the cells
    sharing their row and column (interpolated when a whole row or
    column is blank) so IoU-based matching stays total.
    """
    m, n = derive_grid_shape(a)
    row_ext: list[tuple[float, float] | None] = [None] * m
    col_ext: list[tuple[float, float] | None] = [None] * n
    for c in a.cells:
        x0, y0, x1, y1 = c.quad.bounds()
        for i in range(c.row_start, c.row_end + 1):
            cur = row_ext[i]
            row_ext[i] = (y0, y1) if cur is None else (min(cur[0], y0), max(cur[1], y1))
        for j in range(c.col_start, c.col_end + 1):
            cur = col_ext[j]
            col_ext[j] = (x0, x1) if cur is None else (min(cur[0], x0), max(cur[1], x1))

    def fill(ext, limit):
        known = [(i, e) for i, e in enumerate(ext) if e is not None]
        if not known:
            return [(0.0, float(limit))] * len(ext)
        out = []
        for i, e in enumerate(ext):
            if e is not None:
                out.append(e)
            else:
                nearest = min(known, key=lambda kv: abs(kv[0] - i))[1]
                out.append(nearest)
        return out

    row_ext = fill(row_ext, a.image_height)
    col_ext = fill(col_ext, a.image_width)

    cells = []
    for c in a.cells:
        cells.append(
            Cell(
                row_start=c.row_start,
                row_end=c.row_end,
                col_start=c.col_start,
                col_end=c.col_end,
                quad=c.quad,
                content=(c.content,) if c.content else (),
            )
        )
    for i, j in validate_coverage(a):
        y0, y1 = row_ext[i]
        x0, x1 = col_ext[j]
        quad = Quad(tuple(v for p in rect_quad(x0, y0, x1, y1) for v in p))
        cells.append(Cell(row_start=i, row_end=i, col_start=j, col_end=j, quad=quad))
    cells.sort(key=lambda c: (c.row_start, c.col_start))
    return CellSet(cells=tuple(cells), rows=m, cols=n)
