"""Adjacency-relation precision/recall/F1 between two cell sets."""

from __future__ import annotations

from ..geometry import quad_iou
from ..merger import CellSet
from ..structure import adjacency_relations


def _marker_relations(cells: CellSet):
    """Relations keyed by content marker multisets (order-free)."""
    rels = []
    for ai, bi, direction in adjacency_relations(cells):
        ka = frozenset(cells.cells[ai].markers)
        kb = frozenset(cells.cells[bi].markers)
        rels.append((ka, kb, direction))
    return rels


def _counts_exact(pred: CellSet, gt: CellSet):
    from collections import Counter

    pr = Counter(_marker_relations(pred))
    gr = Counter(_marker_relations(gt))
    hit = sum((pr & gr).values())
    return hit, sum(pr.values()), sum(gr.values())


def _counts_iou(pred: CellSet, gt: CellSet, threshold: float):
    """Greedy cell matching by descending IoU, then relation overlap."""
    pairs = []
    for i, pc in enumerate(pred.cells):
        if pc.is_blank:
            continue
        for j, gc in enumerate(gt.cells):
            if gc.is_blank:
                continue
            iou = quad_iou(pc.quad.points, gc.quad.points)
            if iou >= threshold:
                pairs.append((iou, i, j))
    pairs.sort(key=lambda t: (-t[0], t[1], t[2]))
    p2g: dict[int, int] = {}
    used_g: set[int] = set()
    for _, i, j in pairs:
        if i in p2g or j in used_g:
            continue
        p2g[i] = j
        used_g.add(j)

    pred_rels = set()
    for ai, bi, direction in adjacency_relations(pred):
        if ai in p2g and bi in p2g:
            pred_rels.add((p2g[ai], p2g[bi], direction))
        else:
            pred_rels.add(("u", ai, bi, direction))
    gt_rels = {(ai, bi, direction) for ai, bi, direction in adjacency_relations(gt)}
    hit = len({r for r in pred_rels if len(r) == 3 and r in gt_rels})
    return hit, len(pred_rels), len(gt_rels)


def relation_counts(
    pred: CellSet,
    gt: CellSet,
    matching: str = "exact",
    iou_threshold: float = 0.6,
) -> tuple[int, int, int]:
    """(matched, predicted, ground truth) relation counts."""
    if matching == "exact":
        return _counts_exact(pred, gt)
    if matching == "iou":
        return _counts_iou(pred, gt, iou_threshold)
    raise ValueError(f"unknown matching mode {matching!r}")


def prf_from_counts(hit: int, n_pred: int, n_gt: int) -> tuple[float, float, float]:
    """(precision, recall, f1).  Both sides relation-free counts as perfect."""
    if n_pred == 0 and n_gt == 0:
        return 1.0, 1.0, 1.0
    precision = hit / n_pred if n_pred else 0.0
    recall = hit / n_gt if n_gt else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def f1_adjacency(
    pred: CellSet,
    gt: CellSet,
    matching: str = "exact",
    iou_threshold: float = 0.6,
) -> tuple[float, float, float]:
    return prf_from_counts(*relation_counts(pred, gt, matching, iou_threshold))
