"""Split stage: separator detection and grid assembly.

The gather pass turns a fused feature map into, per axis, a context
row/column, per-position dynamic kernels, and instance scores.  Its
post-processing (NMS over scores, dynamic 1x1 masks, per-row argmax
line tracing, polyline intersection) turns detections into a grid of
boxes.  Rows reuse the column construction on the transposed map.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError, TopologyError
from .losses import LossConfig, bce_grad, bce_loss, sigmoid, sigmoid_focal_grad, sigmoid_focal_loss
from .tensorops import conv2d, maxpool_2x1, relu


@dataclass
class AxisParams:
    """Weights for one axis of the gather pass plus its feature branch."""

    down_w: tuple[np.ndarray, ...]  # 3 x (3, 3, C, C)
    down_b: tuple[np.ndarray, ...]
    fwd_w: np.ndarray  # (1, 5, C, C), top-to-bottom slice propagation
    fwd_b: np.ndarray
    bwd_w: np.ndarray
    bwd_b: np.ndarray
    theta_w: np.ndarray  # (C, C) kernel head
    theta_b: np.ndarray
    score_w: np.ndarray  # (C,) instance score head
    score_b: float
    feat_w1: np.ndarray  # (1, 1, C, C) feature branch
    feat_b1: np.ndarray
    feat_w2: np.ndarray
    feat_b2: np.ndarray

    @classmethod
    def zeros(cls, c: int) -> "AxisParams":
        return cls(
            down_w=tuple(np.zeros((3, 3, c, c)) for _ in range(3)),
            down_b=tuple(np.zeros(c) for _ in range(3)),
            fwd_w=np.zeros((1, 5, c, c)),
            fwd_b=np.zeros(c),
            bwd_w=np.zeros((1, 5, c, c)),
            bwd_b=np.zeros(c),
            theta_w=np.zeros((c, c)),
            theta_b=np.zeros(c),
            score_w=np.zeros(c),
            score_b=0.0,
            feat_w1=np.zeros((1, 1, c, c)),
            feat_b1=np.zeros(c),
            feat_w2=np.zeros((1, 1, c, c)),
            feat_b2=np.zeros(c),
        )

    @classmethod
    def random(cls, rng: np.random.Generator, c: int) -> "AxisParams":
        def w(*shape):
            fan_in = int(np.prod(shape[:-1])) or 1
            return rng.standard_normal(shape) / np.sqrt(fan_in)

        return cls(
            down_w=tuple(w(3, 3, c, c) for _ in range(3)),
            down_b=tuple(np.zeros(c) for _ in range(3)),
            fwd_w=w(1, 5, c, c),
            fwd_b=np.zeros(c),
            bwd_w=w(1, 5, c, c),
            bwd_b=np.zeros(c),
            theta_w=w(c, c),
            theta_b=np.zeros(c),
            score_w=w(c),
            score_b=0.0,
            feat_w1=w(1, 1, c, c),
            feat_b1=np.zeros(c),
            feat_w2=w(1, 1, c, c),
            feat_b2=np.zeros(c),
        )


@dataclass
class SplitterParams:
    col: AxisParams
    row: AxisParams
    channels: int

    @classmethod
    def random(cls, seed: int, channels: int) -> "SplitterParams":
        rng = np.random.default_rng(seed)
        return cls(
            col=AxisParams.random(rng, channels),
            row=AxisParams.random(rng, channels),
            channels=channels,
        )


@dataclass
class GatherOutput:
    """context/kernels: (1, Wf, C) for columns, (Hf, 1, C) for rows;
    scores: raw logits, one per position along the axis."""

    context: np.ndarray
    kernels: np.ndarray
    scores: np.ndarray


def _propagate(x: np.ndarray, w: np.ndarray, b: np.ndarray, reverse: bool) -> np.ndarray:
    """Sequential slice propagation: each row receives the convolved
    previous row (spatial-CNN style message passing)."""
    out = np.empty_like(x)
    order = range(x.shape[0] - 1, -1, -1) if reverse else range(x.shape[0])
    prev = None
    for i in order:
        if prev is None:
            out[i] = x[i]
        else:
            out[i] = x[i] + conv2d(prev[None, :, :], w, b)[0]
        prev = out[i]
    return out


def _gather_cols(f: np.ndarray, p: AxisParams) -> GatherOutput:
    x = np.asarray(f, dtype=np.float64)
    for w, b in zip(p.down_w, p.down_b):
        x = relu(conv2d(maxpool_2x1(x), w, b))
    x = _propagate(x, p.fwd_w, p.fwd_b, reverse=False)
    x = _propagate(x, p.bwd_w, p.bwd_b, reverse=True)
    g = x.mean(axis=0, keepdims=True)  # (1, Wf, C)
    kernels = g @ p.theta_w + p.theta_b
    scores = g[0] @ p.score_w + p.score_b
    return GatherOutput(context=g, kernels=kernels, scores=scores)


def gather_forward(f, axis: str, params: SplitterParams) -> GatherOutput:
    """Run the gather pass for one axis of an (Hf, Wf, C) map."""
    f = np.asarray(f, dtype=np.float64)
    if f.ndim != 3:
        raise ShapeError(f"feature map must be (H, W, C), got {f.shape}")
    if f.shape[2] != params.channels:
        raise ShapeError(f"map has {f.shape[2]} channels, params expect {params.channels}")
    if axis == "col":
        return _gather_cols(f, params.col)
    if axis == "row":
        out = _gather_cols(f.transpose(1, 0, 2), params.row)
        return GatherOutput(
            context=out.context.transpose(1, 0, 2),
            kernels=out.kernels.transpose(1, 0, 2),
            scores=out.scores,
        )
    raise ShapeError(f"axis must be 'col' or 'row', got {axis!r}")


def feature_branch(f, axis: str, params: SplitterParams) -> np.ndarray:
    """Two 1x1 convolutions shaping the map for dynamic mask prediction."""
    p = params.col if axis == "col" else params.row
    return conv2d(relu(conv2d(f, p.feat_w1, p.feat_b1)), p.feat_w2, p.feat_b2)


def instance_nms(scores, threshold: float = 0.5) -> list[int]:
    """Collapse runs of super-threshold positions to their peak.

    Positions with sigmoid(score) >= threshold form maximal consecutive
    runs; each run keeps the index of its maximal probability (smallest
    index on ties).  Returns indices in ascending order.
    """
    probs = sigmoid(np.asarray(scores, dtype=np.float64).ravel())
    active = probs >= threshold
    picked = []
    i = 0
    n = active.size
    while i < n:
        if not active[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and active[j + 1]:
            j += 1
        run = probs[i : j + 1]
        picked.append(i + int(np.argmax(run)))
        i = j + 1
    return picked


def line_mask_logits(f_branch, kernels, picked: list[int]) -> np.ndarray:
    """Dynamic 1x1 convolution: per picked position, dot the feature
    branch with that position's kernel.  Returns (Hf, Wf, K) logits."""
    fb = np.asarray(f_branch, dtype=np.float64)
    k = np.asarray(kernels, dtype=np.float64)
    if k.shape[0] == 1:  # column kernels, indexed by x
        table, limit = k[0], k.shape[1]
    elif k.shape[1] == 1:  # row kernels, indexed by y
        table, limit = k[:, 0], k.shape[0]
    else:
        raise ShapeError(f"kernels must be (1, n, C) or (n, 1, C), got {k.shape}")
    for idx in picked:
        if not 0 <= idx < limit:
            raise ShapeError(f"picked index {idx} outside kernel range {limit}")
    if not picked:
        return np.zeros(fb.shape[:2] + (0,))
    vecs = table[np.asarray(picked, dtype=np.intp)]  # (K, C)
    return np.einsum("hwc,kc->hwk", fb, vecs)


def predict_line_masks(f_branch, kernels, picked: list[int]) -> np.ndarray:
    """Sigmoid of line_mask_logits."""
    return sigmoid(line_mask_logits(f_branch, kernels, picked))


def mask_to_line(mask, axis: str = "col") -> np.ndarray:
    """Trace a separator mask to a polyline of argmax coordinates.

    Column masks give one (x, y) per row via per-row argmax over x;
    row masks one (x, y) per column via per-column argmax over y.
    Ties take the smallest coordinate (first argmax).
    """
    m = np.asarray(mask, dtype=np.float64)
    if m.ndim != 2:
        raise ShapeError(f"mask must be 2-D, got {m.shape}")
    h, w = m.shape
    if axis == "col":
        xs = np.argmax(m, axis=1).astype(np.float64)
        return np.stack([xs, np.arange(h, dtype=np.float64)], axis=1)
    if axis == "row":
        ys = np.argmax(m, axis=0).astype(np.float64)
        return np.stack([np.arange(w, dtype=np.float64), ys], axis=1)
    raise ShapeError(f"axis must be 'col' or 'row', got {axis!r}")


@dataclass
class GridStructure:
    """Sorted separator polylines and the (M, N, 4) boxes they bound;
    boxes are (x0, y0, x1, y1) in feature coordinates."""

    row_lines: list[np.ndarray]
    col_lines: list[np.ndarray]
    boxes: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.boxes.shape[0], self.boxes.shape[1]


def _eval_line(line: np.ndarray, t: float, coord: int) -> float:
    """Linearly interpolate a polyline's dependent coordinate.

    coord=0 evaluates x at a given y (column lines, sampled per row);
    coord=1 evaluates y at a given x (row lines, sampled per column).
    """
    n = line.shape[0]
    t = min(max(t, 0.0), float(n - 1))
    lo = int(t)
    hi = min(lo + 1, n - 1)
    frac = t - lo
    return float(line[lo, coord] * (1 - frac) + line[hi, coord] * frac)


def _intersect(row_line: np.ndarray, col_line: np.ndarray) -> tuple[float, float]:
    """Fixed-point intersection of a row and a column polyline (at most
    8 iterations, 0.5 px tolerance)."""
    y = float(row_line[:, 1].mean())
    x = _eval_line(col_line, y, 0)
    for _ in range(8):
        xn = _eval_line(col_line, y, 0)
        yn = _eval_line(row_line, xn, 1)
        if abs(xn - x) + abs(yn - y) <= 0.5:
            x, y = xn, yn
            break
        x, y = xn, yn
    return x, y


def lines_to_grid(row_lines: list[np.ndarray], col_lines: list[np.ndarray]) -> GridStructure:
    """Intersect sorted separator polylines into an (M, N) box lattice.

    Requires at least two lines per axis.  Adjacent lines must not
    cross: intersection x must increase strictly along every row of the
    lattice and y along every column.
    """
    if len(row_lines) < 2 or len(col_lines) < 2:
        raise TopologyError(
            f"need >= 2 lines per axis, got {len(row_lines)} rows / {len(col_lines)} cols"
        )
    rows = sorted((np.asarray(l, dtype=np.float64) for l in row_lines), key=lambda l: l[:, 1].mean())
    cols = sorted((np.asarray(l, dtype=np.float64) for l in col_lines), key=lambda l: l[:, 0].mean())
    nr, nc = len(rows), len(cols)
    pts = np.empty((nr, nc, 2))
    for i in range(nr):
        for j in range(nc):
            pts[i, j] = _intersect(rows[i], cols[j])
    for i in range(nr):
        for j in range(nc - 1):
            if not pts[i, j, 0] < pts[i, j + 1, 0]:
                raise TopologyError(f"column lines {j} and {j + 1} cross near row line {i}")
    for j in range(nc):
        for i in range(nr - 1):
            if not pts[i, j, 1] < pts[i + 1, j, 1]:
                raise TopologyError(f"row lines {i} and {i + 1} cross near column line {j}")
    boxes = np.empty((nr - 1, nc - 1, 4))
    for i in range(nr - 1):
        for j in range(nc - 1):
            corner = pts[i : i + 2, j : j + 2].reshape(4, 2)
            boxes[i, j] = (
                corner[:, 0].min(),
                corner[:, 1].min(),
                corner[:, 0].max(),
                corner[:, 1].max(),
            )
    return GridStructure(row_lines=rows, col_lines=cols, boxes=boxes)


def border_fallback_lines(
    lines: list[np.ndarray], axis: str, hf: int, wf: int
) -> tuple[list[np.ndarray], str | None]:
    """Guarantee >= 2 lines on an axis by adding image-border lines.

    Returns the possibly-extended list and a warning message when the
    fallback fired.  Border lines duplicating an existing line (mean
    coordinate within 1 px) are skipped.
    """
    if len(lines) >= 2:
        return lines, None
    if axis == "col":
        borders = [
            np.stack([np.full(hf, x), np.arange(hf, dtype=np.float64)], axis=1)
            for x in (0.0, float(wf - 1))
        ]
        means = [l[:, 0].mean() for l in lines]
        key = lambda l: l[:, 0].mean()
    else:
        borders = [
            np.stack([np.arange(wf, dtype=np.float64), np.full(wf, y)], axis=1)
            for y in (0.0, float(hf - 1))
        ]
        means = [l[:, 1].mean() for l in lines]
        key = lambda l: l[:, 1].mean()
    out = list(lines)
    for b in borders:
        if all(abs(key(b) - m) > 1.0 for m in means):
            out.append(b)
    return out, f"{axis} axis: fewer than 2 separator lines detected, added border fallback"


def loss_instance(scores, target) -> float:
    """Mean binary cross-entropy of the instance score vector."""
    s = np.asarray(scores, dtype=np.float64).ravel()
    t = np.asarray(target, dtype=np.float64).ravel()
    if s.shape != t.shape:
        raise ShapeError(f"scores {s.shape} vs target {t.shape}")
    return float(bce_loss(s, t).mean())


def loss_instance_grad(scores, target) -> np.ndarray:
    s = np.asarray(scores, dtype=np.float64)
    t = np.asarray(target, dtype=np.float64)
    return bce_grad(s, t) / s.size


def loss_segmentation(logits, targets, cfg: LossConfig = LossConfig()) -> float:
    """Per-channel focal loss, each normalized by its positive-pixel
    count, averaged over channels.  A channel without positives is an
    error (labels guarantee every separator has mass)."""
    x = np.asarray(logits, dtype=np.float64)
    t = np.asarray(targets, dtype=np.float64)
    if x.shape != t.shape or x.ndim != 3:
        raise ShapeError(f"logits {x.shape} vs targets {t.shape}, need matching (H, W, K)")
    per = sigmoid_focal_loss(x, t, cfg)
    pos = t.sum(axis=(0, 1))
    if np.any(pos <= 0):
        bad = int(np.argmin(pos))
        raise ShapeError(f"target channel {bad} has no positive pixels")
    return float((per.sum(axis=(0, 1)) / pos).mean())


def loss_segmentation_grad(logits, targets, cfg: LossConfig = LossConfig()) -> np.ndarray:
    x = np.asarray(logits, dtype=np.float64)
    t = np.asarray(targets, dtype=np.float64)
    pos = t.sum(axis=(0, 1))
    if np.any(pos <= 0):
        raise ShapeError("target channel without positive pixels")
    k = x.shape[2]
    return sigmoid_focal_grad(x, t, cfg) / pos[None, None, :] / k
