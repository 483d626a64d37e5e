from .adjacency import f1_adjacency, prf_from_counts, relation_counts
from .grits import alignment_score, grits, span_similarity, text_similarity
from .report import (
    CSV_COLUMNS,
    THRESHOLDS,
    AggregateMetrics,
    SampleMetrics,
    aggregate,
    evaluate_pair,
    to_csv,
    to_json,
    wavg_f1,
)
from .ted import teds, tree_edit_distance

__all__ = [
    "AggregateMetrics",
    "CSV_COLUMNS",
    "SampleMetrics",
    "THRESHOLDS",
    "aggregate",
    "alignment_score",
    "evaluate_pair",
    "f1_adjacency",
    "grits",
    "prf_from_counts",
    "relation_counts",
    "span_similarity",
    "teds",
    "text_similarity",
    "to_csv",
    "to_json",
    "tree_edit_distance",
    "wavg_f1",
]
