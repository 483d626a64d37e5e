"""Per-sample metric bundles and deterministic report emission."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

from ..merger import CellSet
from ..structure import to_html_tree
from .adjacency import prf_from_counts, relation_counts
from .grits import grits
from .ted import teds

# IoU thresholds for the weighted-average F1; weights are the thresholds
# themselves, so the normalizer is their sum (3.0).
THRESHOLDS = (0.6, 0.7, 0.8, 0.9)

CSV_COLUMNS = (
    "id",
    "P",
    "R",
    "F1",
    "TEDS",
    "TEDS-Struct",
    "WAvgF1",
    "GriTS_Con",
    "GriTS_Top",
)


def wavg_f1(f1s: Sequence[float]) -> float:
    """Threshold-weighted mean of per-threshold F1 scores."""
    if len(f1s) != len(THRESHOLDS):
        raise ValueError(f"expected {len(THRESHOLDS)} scores, got {len(f1s)}")
    return sum(t * f for t, f in zip(THRESHOLDS, f1s)) / sum(THRESHOLDS)


@dataclass(frozen=True)
class SampleMetrics:
    sample_id: str
    precision: float
    recall: float
    f1: float
    teds: float
    teds_struct: float
    wavg_f1: float
    grits_con: float
    grits_top: float
    # (threshold, matched, predicted, ground truth) per IoU threshold,
    # kept so aggregation can pool counts instead of averaging ratios.
    iou_counts: tuple[tuple[float, int, int, int], ...] = ()

    def csv_row(self) -> str:
        vals = (
            self.precision,
            self.recall,
            self.f1,
            self.teds,
            self.teds_struct,
            self.wavg_f1,
            self.grits_con,
            self.grits_top,
        )
        return ",".join([self.sample_id] + [f"{v:.6f}" for v in vals])


@dataclass(frozen=True)
class AggregateMetrics:
    n: int
    precision: float
    recall: float
    f1: float
    teds: float
    teds_struct: float
    wavg_f1: float
    grits_con: float
    grits_top: float
    exact_match: float


def evaluate_pair(sample_id: str, pred: CellSet, gt: CellSet) -> SampleMetrics:
    """All metrics for one prediction against its ground truth.

    Both cell sets must already carry content markers from the same
    text-line inventory; marker identity is what the exact adjacency
    match keys on.
    """
    precision, recall, f1 = prf_from_counts(*relation_counts(pred, gt, "exact"))
    counts = tuple(
        (t,) + relation_counts(pred, gt, "iou", iou_threshold=t) for t in THRESHOLDS
    )
    f1s = [prf_from_counts(hit, npr, ngt)[2] for _, hit, npr, ngt in counts]
    tree_p = to_html_tree(pred)
    tree_g = to_html_tree(gt)
    return SampleMetrics(
        sample_id=sample_id,
        precision=precision,
        recall=recall,
        f1=f1,
        teds=teds(tree_p, tree_g),
        teds_struct=teds(tree_p, tree_g, struct_only=True),
        wavg_f1=wavg_f1(f1s),
        grits_con=grits(pred, gt, mode="con"),
        grits_top=grits(pred, gt, mode="top"),
        iou_counts=counts,
    )


def aggregate(samples: Sequence[SampleMetrics]) -> AggregateMetrics:
    """Means over samples; WAvgF1 re-derived from pooled counts."""
    if not samples:
        raise ValueError("no samples to aggregate")
    n = len(samples)

    def mean(attr: str) -> float:
        return sum(getattr(s, attr) for s in samples) / n

    pooled: list[float] = []
    for idx, t in enumerate(THRESHOLDS):
        hit = npr = ngt = 0
        for s in samples:
            if len(s.iou_counts) != len(THRESHOLDS):
                raise ValueError(f"sample {s.sample_id} lacks IoU counts")
            _, h, p, g = s.iou_counts[idx]
            hit += h
            npr += p
            ngt += g
        pooled.append(prf_from_counts(hit, npr, ngt)[2])
    exact = sum(1 for s in samples if s.grits_top >= 1.0 - 1e-9) / n
    return AggregateMetrics(
        n=n,
        precision=mean("precision"),
        recall=mean("recall"),
        f1=mean("f1"),
        teds=mean("teds"),
        teds_struct=mean("teds_struct"),
        wavg_f1=wavg_f1(pooled),
        grits_con=mean("grits_con"),
        grits_top=mean("grits_top"),
        exact_match=exact,
    )


def to_csv(samples: Sequence[SampleMetrics]) -> str:
    lines = [",".join(CSV_COLUMNS)]
    lines.extend(s.csv_row() for s in samples)
    return "\n".join(lines) + "\n"


def to_json(samples: Sequence[SampleMetrics], agg: AggregateMetrics) -> str:
    """Report JSON with a fixed key layout, stable byte for byte."""
    body = {
        "samples": [
            {
                "id": s.sample_id,
                "P": s.precision,
                "R": s.recall,
                "F1": s.f1,
                "TEDS": s.teds,
                "TEDS-Struct": s.teds_struct,
                "WAvgF1": s.wavg_f1,
                "GriTS_Con": s.grits_con,
                "GriTS_Top": s.grits_top,
                "iou_counts": {
                    f"{t:.1f}": [hit, npr, ngt] for t, hit, npr, ngt in s.iou_counts
                },
            }
            for s in samples
        ],
        "aggregate": {
            "n": agg.n,
            "P": agg.precision,
            "R": agg.recall,
            "F1": agg.f1,
            "TEDS": agg.teds,
            "TEDS-Struct": agg.teds_struct,
            "WAvgF1": agg.wavg_f1,
            "GriTS_Con": agg.grits_con,
            "GriTS_Top": agg.grits_top,
            "exact_match": agg.exact_match,
        },
    }
    return json.dumps(body, indent=2) + "\n"
