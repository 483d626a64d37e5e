"""End-to-end structure recovery from oracle stage outputs."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from ..annotation import TableAnnotation, TextLine
from ..config import PipelineConfig
from ..losses import sigmoid
from ..merger import (
    CellSet,
    MergerParams,
    assign_content,
    cellset_from_annotation,
    decode_cells,
    embed_grids,
    merger_forward,
)
from ..metrics import SampleMetrics, evaluate_pair
from ..splitter import GridStructure, border_fallback_lines, instance_nms, lines_to_grid, mask_to_line
from .oracle import OracleOutputs

# Maximal distance (mask pixels) between an instance detection and a
# channel's recorded start for the two to be identified.
MATCH_RADIUS = 3


@dataclass
class PipelineResult:
    cells: CellSet
    grid: GridStructure
    warnings: list[str]


def match_detections(
    picks: Sequence[int], starts: Sequence[float], axis: str
) -> tuple[list[tuple[int, int]], list[str]]:
    """Pair NMS picks with separator channels by start proximity.

    Each channel takes its nearest unclaimed pick within MATCH_RADIUS
    (ties toward the smaller pick).  Channels left unpaired drop out;
    unclaimed picks are reported as spurious.  Returns (channel, pick)
    pairs in channel order plus warnings.
    """
    warnings = []
    taken: set[int] = set()
    pairs: list[tuple[int, int]] = []
    for k, start in enumerate(starts):
        best = None
        for p in picks:
            if p in taken or abs(p - start) > MATCH_RADIUS:
                continue
            if best is None or abs(p - start) < abs(best - start):
                best = p
        if best is None:
            warnings.append(f"{axis} separator {k} not detected (start {start:.0f})")
        else:
            taken.add(best)
            pairs.append((k, best))
    for p in picks:
        if p not in taken:
            warnings.append(f"spurious {axis} separator detection at {p} discarded")
    return pairs, warnings


def _axis_lines(scores, masks, starts, axis: str, threshold: float):
    picks = instance_nms(scores, threshold)
    pairs, warnings = match_detections(picks, [float(s) for s in starts], axis)
    lines = [mask_to_line(masks[:, :, k], axis) for k, _ in pairs]
    hf, wf = masks.shape[:2]
    lines, fallback = border_fallback_lines(lines, axis, hf, wf)
    if fallback is not None:
        warnings.append(fallback)
    return lines, warnings


def run_pipeline(
    oracle: OracleOutputs,
    config: PipelineConfig | None = None,
    merger_params: MergerParams | None = None,
    textlines: Sequence[TextLine] = (),
) -> PipelineResult:
    """Scores and masks in, content-bearing cell partition out.

    Merge maps come from the oracle when their shape matches the
    recovered grid, else from the learned merger when parameters are
    supplied, else every slot stays a singleton (with a warning).
    """
    cfg = config or PipelineConfig()
    warnings: list[str] = []

    col_lines, w = _axis_lines(
        oracle.col_scores, oracle.col_masks, oracle.col_starts, "col", cfg.threshold
    )
    warnings += w
    row_lines, w = _axis_lines(
        oracle.row_scores, oracle.row_masks, oracle.row_starts, "row", cfg.threshold
    )
    warnings += w
    grid = lines_to_grid(row_lines, col_lines)

    m, n = grid.shape
    if oracle.merge_scores.shape == (m, n, m, n):
        probs = sigmoid(oracle.merge_scores.astype(np.float64))
        binary = probs >= cfg.threshold
        ii, jj = np.meshgrid(np.arange(m), np.arange(n), indexing="ij")
        binary[ii, jj, ii, jj] = True
    elif merger_params is not None and oracle.features.shape[2] == merger_params.channels:
        e = embed_grids(oracle.features, grid, merger_params, cfg.use_position_encoding)
        binary = merger_forward(e, merger_params, cfg.threshold).binary
    else:
        if oracle.merge_scores.size:
            warnings.append(
                f"merge maps {oracle.merge_scores.shape} do not fit the "
                f"{m}x{n} grid and no merger parameters fit; cells left unmerged"
            )
        binary = np.zeros((m, n, m, n), dtype=bool)
        ii, jj = np.meshgrid(np.arange(m), np.arange(n), indexing="ij")
        binary[ii, jj, ii, jj] = True

    cells, merge_warnings = decode_cells(binary, grid, scale=float(oracle.downscale))
    warnings += merge_warnings
    if textlines:
        cells, unassigned = assign_content(cells, tuple(textlines))
        for tid in unassigned:
            warnings.append(f"textline {tid} overlaps no cell")
    return PipelineResult(cells=cells, grid=grid, warnings=warnings)


def ground_truth_cells(a: TableAnnotation) -> CellSet:
    """Annotation cells with markers drawn from its own text lines."""
    cells = cellset_from_annotation(a)
    cells, _ = assign_content(cells, a.textlines)
    return cells


def evaluate_sample(
    sample_id: str,
    a: TableAnnotation,
    oracle: OracleOutputs,
    config: PipelineConfig | None = None,
    merger_params: MergerParams | None = None,
) -> SampleMetrics:
    result = run_pipeline(oracle, config, merger_params, textlines=a.textlines)
    return evaluate_pair(sample_id, result.cells, ground_truth_cells(a))


# The training objective is the plain sum of the five stage losses.
OBJECTIVE_PARTS = ("seg_row", "seg_col", "inst_row", "inst_col", "merge")


def total_objective(parts: Mapping[str, float]) -> float:
    missing = sorted(set(OBJECTIVE_PARTS) - set(parts))
    if missing:
        raise ValueError(f"objective is missing loss terms {missing}")
    extra = sorted(set(parts) - set(OBJECTIVE_PARTS))
    if extra:
        raise ValueError(f"objective got unknown loss terms {extra}")
    return float(sum(parts[k] for k in OBJECTIVE_PARTS))
