from .gradcheck import FAMILIES, run_gradcheck
from .oracle import (
    BAND_HALF_WIDTH,
    PERTURB_KINDS,
    SATURATION,
    OracleOutputs,
    build_oracle,
    load_sample,
    perturb,
    save_sample,
)
from .pipeline import (
    OBJECTIVE_PARTS,
    PipelineResult,
    evaluate_sample,
    ground_truth_cells,
    match_detections,
    run_pipeline,
    total_objective,
)
from .synth import SynthSpec, SynthTable, generate

__all__ = [
    "BAND_HALF_WIDTH",
    "FAMILIES",
    "OBJECTIVE_PARTS",
    "OracleOutputs",
    "PERTURB_KINDS",
    "PipelineResult",
    "SATURATION",
    "SynthSpec",
    "SynthTable",
    "build_oracle",
    "evaluate_sample",
    "generate",
    "ground_truth_cells",
    "load_sample",
    "match_detections",
    "perturb",
    "run_gradcheck",
    "run_pipeline",
    "save_sample",
    "total_objective",
]
