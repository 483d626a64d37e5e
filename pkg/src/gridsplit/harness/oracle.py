"""Stand-in stage outputs derived from generated tables.

An oracle sample carries everything the inference pipeline consumes:
saturated instance-score logits, separator mask probabilities traced
around the true boundary curves, per-channel start indices, saturated
pairwise merge logits, and a reproducible feature map for the embedding
path.  Perturbations degrade these tensors in controlled ways so the
pipeline's failure behavior can be swept.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .. import sem2
from ..annotation import TableAnnotation, parse_annotation, serialize_annotation
from ..errors import GenerationError
from ..labelgen import gen_merge_labels
from .synth import SynthTable

# Logit magnitude treated as fully saturated (sigmoid within 1e-5 of 0/1).
SATURATION = 12.0
# Separator mask band half-width around the true curve, original px.
# Must stay below the text pad (4) and above half the feature pitch (2).
BAND_HALF_WIDTH = 2.5

PERTURB_KINDS = ("score_noise", "mask_blur", "dropout")


@dataclass
class OracleOutputs:
    row_scores: np.ndarray  # (Hf,) logits
    col_scores: np.ndarray  # (Wf,) logits
    row_masks: np.ndarray  # (Hf, Wf, M+1) probabilities
    col_masks: np.ndarray  # (Hf, Wf, N+1) probabilities
    row_starts: np.ndarray  # (M+1,) start indices, channel order
    col_starts: np.ndarray  # (N+1,)
    merge_scores: np.ndarray  # (M, N, M, N) logits
    features: np.ndarray  # (Hf, Wf, C)
    downscale: int = 4


def _mask_starts(masks: np.ndarray, axis: str) -> np.ndarray:
    """Channel start indices, same convention as the training labels:
    column channels start at the topmost row's leftmost pixel, row
    channels at the leftmost column's topmost pixel."""
    found = []
    for k in range(masks.shape[2]):
        ys, xs = np.nonzero(masks[:, :, k] >= 0.5)
        if ys.size == 0:
            raise GenerationError(f"{axis} separator channel {k} rasterized empty")
        if axis == "col":
            top = ys.min()
            found.append(int(xs[ys == top].min()))
        else:
            left = xs.min()
            found.append(int(ys[xs == left].min()))
    return np.array(found, dtype=np.float32)


def build_oracle(table: SynthTable) -> OracleOutputs:
    """Rasterize saturated stage outputs for one generated table."""
    a = table.annotation
    ds = table.downscale
    hf, wf = a.image_height // ds, a.image_width // ds
    y_centers = ds * (np.arange(hf, dtype=np.float64) + 0.5)
    x_centers = ds * (np.arange(wf, dtype=np.float64) + 0.5)

    col_masks = (
        np.abs(x_centers[None, :, None] - table.col_curves.T[:, None, :])
        < BAND_HALF_WIDTH
    ).astype(np.float32)
    row_masks = (
        np.abs(y_centers[:, None, None] - table.row_curves.T[None, :, :])
        < BAND_HALF_WIDTH
    ).astype(np.float32)

    col_starts = _mask_starts(col_masks, "col")
    row_starts = _mask_starts(row_masks, "row")
    for name, starts in (("col", col_starts), ("row", row_starts)):
        gaps = np.diff(np.sort(starts))
        if starts.size > 1 and gaps.min() < 2:
            raise GenerationError(f"{name} separator starts closer than 2 px apart")

    col_scores = np.full(wf, -SATURATION, dtype=np.float32)
    col_scores[col_starts.astype(np.intp)] = SATURATION
    row_scores = np.full(hf, -SATURATION, dtype=np.float32)
    row_scores[row_starts.astype(np.intp)] = SATURATION

    maps = gen_merge_labels(a).maps.astype(np.float32)
    merge_scores = (2.0 * maps - 1.0) * SATURATION

    rng = np.random.default_rng([table.spec.seed, 1])
    features = rng.standard_normal((hf, wf, table.spec.channels)).astype(np.float32)
    return OracleOutputs(
        row_scores=row_scores,
        col_scores=col_scores,
        row_masks=row_masks,
        col_masks=col_masks,
        row_starts=row_starts,
        col_starts=col_starts,
        merge_scores=merge_scores,
        features=features,
        downscale=ds,
    )


def _box_blur(masks: np.ndarray, passes: int) -> np.ndarray:
    out = masks.astype(np.float64)
    for _ in range(passes):
        p = np.pad(out, ((1, 1), (1, 1), (0, 0)), mode="edge")
        acc = np.zeros_like(out)
        for dy in range(3):
            for dx in range(3):
                acc += p[dy : dy + out.shape[0], dx : dx + out.shape[1]]
        out = acc / 9.0
    return out.astype(np.float32)


def perturb(o: OracleOutputs, kind: str, magnitude: float, seed: int = 0) -> OracleOutputs:
    """Return a degraded copy; magnitude 0 is an exact copy.

    score_noise adds N(0, magnitude) to every logit tensor, mask_blur
    applies round(magnitude) 3x3 mean passes to the mask probabilities,
    dropout zeroes each positive mask pixel with probability magnitude.
    """
    if kind not in PERTURB_KINDS:
        raise ValueError(f"unknown perturbation {kind!r}, expected one of {PERTURB_KINDS}")
    if magnitude < 0:
        raise ValueError(f"magnitude must be >= 0, got {magnitude}")
    out = replace(
        o,
        row_scores=o.row_scores.copy(),
        col_scores=o.col_scores.copy(),
        row_masks=o.row_masks.copy(),
        col_masks=o.col_masks.copy(),
        row_starts=o.row_starts.copy(),
        col_starts=o.col_starts.copy(),
        merge_scores=o.merge_scores.copy(),
        features=o.features.copy(),
    )
    if magnitude == 0:
        return out
    rng = np.random.default_rng([seed, PERTURB_KINDS.index(kind) + 2])
    if kind == "score_noise":
        for arr in (out.row_scores, out.col_scores, out.merge_scores):
            arr += rng.normal(0.0, magnitude, size=arr.shape).astype(np.float32)
    elif kind == "mask_blur":
        passes = int(round(magnitude))
        out.row_masks = _box_blur(out.row_masks, passes)
        out.col_masks = _box_blur(out.col_masks, passes)
    else:  # dropout
        p = min(magnitude, 1.0)
        for name in ("row_masks", "col_masks"):
            arr = getattr(out, name)
            drop = (rng.random(arr.shape) < p) & (arr >= 0.5)
            arr[drop] = 0.0
    return out


_TENSOR_FILES = (
    "row_scores",
    "col_scores",
    "row_masks",
    "col_masks",
    "row_starts",
    "col_starts",
    "merge_scores",
    "features",
)


def save_sample(out_dir: str | Path, sample_id: str, a: TableAnnotation, o: OracleOutputs) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "annotation.json").write_text(serialize_annotation(a))
    meta = {
        "id": sample_id,
        "downscale": o.downscale,
        "channels": int(o.features.shape[2]),
    }
    (out / "meta.json").write_text(json.dumps(meta, indent=2))
    for name in _TENSOR_FILES:
        sem2.write_tensor(out / f"{name}.sem2", getattr(o, name))


def load_sample(in_dir: str | Path) -> tuple[str, TableAnnotation, OracleOutputs]:
    src = Path(in_dir)
    meta = json.loads((src / "meta.json").read_text())
    a = parse_annotation((src / "annotation.json").read_text())
    tensors = {name: sem2.read_tensor(src / f"{name}.sem2") for name in _TENSOR_FILES}
    return str(meta["id"]), a, OracleOutputs(downscale=int(meta["downscale"]), **tensors)
