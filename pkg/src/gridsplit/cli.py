"""Command line entry points.

Batch commands (infer, eval) fan out over sample directories with a
thread pool but consume results in submission order, so their outputs
are byte-identical regardless of worker count.  GRIDSPLIT_THREADS caps
the pool size.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import sem2
from .annotation import Quad, parse_annotation
from .config import PipelineConfig, max_workers, parse_overrides
from .errors import FormatError, GridSplitError
from .harness import (
    FAMILIES,
    PERTURB_KINDS,
    PipelineResult,
    SynthSpec,
    build_oracle,
    generate,
    ground_truth_cells,
    load_sample,
    perturb,
    run_gradcheck,
    run_pipeline,
    save_sample,
)
from .labelgen import gen_instance_vectors, gen_merge_labels, gen_separator_masks, save_labels
from .losses import LossConfig
from .merger import Cell, CellSet, MergerParams, assign_content
from .metrics import aggregate, evaluate_pair, to_csv, to_json


def _sample_dirs(root: str) -> list[Path]:
    base = Path(root)
    if not base.is_dir():
        raise FormatError(f"{root} is not a directory")
    dirs = sorted(p for p in base.iterdir() if p.is_dir() and (p / "meta.json").exists())
    if not dirs:
        raise FormatError(f"{root} contains no sample directories")
    return dirs


def _cmd_synth(args) -> int:
    out = Path(args.out)
    for i in range(args.count):
        spec = SynthSpec(
            rows=args.rows,
            cols=args.cols,
            span_prob=args.span_prob,
            max_span=args.max_span,
            cell_px=args.cell_px,
            wireless=args.wireless,
            curvature=args.curvature,
            seed=args.seed + i,
            channels=args.channels,
        )
        table = generate(spec)
        oracle = build_oracle(table)
        if args.perturb:
            oracle = perturb(oracle, args.perturb, args.magnitude, seed=spec.seed)
        sample_id = f"sample_{i:04d}"
        sample_dir = out / sample_id
        save_sample(sample_dir, sample_id, table.annotation, oracle)
        (sample_dir / "spec.json").write_text(spec.to_json())
    print(f"wrote {args.count} sample(s) under {out}")
    return 0


def _cmd_labelgen(args) -> int:
    a = parse_annotation(Path(args.annotation).read_text())
    masks = gen_separator_masks(a, downscale=args.downscale)
    vectors = gen_instance_vectors(masks)
    merge = gen_merge_labels(a)
    save_labels(args.out, masks, vectors, merge)
    m, n = merge.maps.shape[:2]
    print(f"wrote labels for a {m}x{n} grid to {args.out}")
    return 0


def _pred_json(sample_id: str, result: PipelineResult) -> str:
    doc = {
        "id": sample_id,
        "rows": result.cells.rows,
        "cols": result.cells.cols,
        "cells": [
            {
                "row_start": c.row_start,
                "row_end": c.row_end,
                "col_start": c.col_start,
                "col_end": c.col_end,
                "quad": list(c.quad.coords),
                "content": c.content_text(),
            }
            for c in result.cells.cells
        ],
        "warnings": result.warnings,
    }
    return json.dumps(doc, indent=2) + "\n"


def _cells_from_pred(doc) -> CellSet:
    try:
        rows, cols = int(doc["rows"]), int(doc["cols"])
        cells = tuple(
            Cell(
                row_start=int(c["row_start"]),
                row_end=int(c["row_end"]),
                col_start=int(c["col_start"]),
                col_end=int(c["col_end"]),
                quad=Quad(tuple(float(v) for v in c["quad"])),
            )
            for c in doc["cells"]
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed prediction document: {exc}") from None
    return CellSet(cells=cells, rows=rows, cols=cols)


def _load_merger_params(path: str, cfg: PipelineConfig) -> MergerParams:
    vec = sem2.read_tensor(path)
    return MergerParams.from_vector(vec, cfg.channels, cfg.embed_dim, cfg.roi_bins)


def _cmd_infer(args) -> int:
    cfg = parse_overrides(args.config)
    params = _load_merger_params(args.params, cfg) if args.params else None
    dirs = _sample_dirs(args.samples)

    def work(d: Path) -> str:
        sample_id, a, oracle = load_sample(d)
        result = run_pipeline(oracle, cfg, params, textlines=a.textlines)
        return _pred_json(sample_id, result)

    with ThreadPoolExecutor(max_workers=max_workers(args.threads)) as ex:
        for d, text in zip(dirs, ex.map(work, dirs)):
            (d / args.pred_name).write_text(text)
    print(f"inferred {len(dirs)} sample(s) under {args.samples}")
    return 0


def _cmd_eval(args) -> int:
    dirs = _sample_dirs(args.samples)

    def work(d: Path):
        a = parse_annotation((d / "annotation.json").read_text())
        doc = json.loads((d / args.pred_name).read_text())
        pred = _cells_from_pred(doc)
        pred, _ = assign_content(pred, a.textlines)
        return evaluate_pair(str(doc["id"]), pred, ground_truth_cells(a))

    with ThreadPoolExecutor(max_workers=max_workers(args.threads)) as ex:
        samples = list(ex.map(work, dirs))
    agg = aggregate(samples)
    Path(args.report).write_text(to_json(samples, agg))
    if args.csv:
        Path(args.csv).write_text(to_csv(samples))
    print(
        f"n={agg.n} F1={agg.f1:.4f} TEDS={agg.teds:.4f} "
        f"TEDS-Struct={agg.teds_struct:.4f} WAvgF1={agg.wavg_f1:.4f} "
        f"GriTS_Top={agg.grits_top:.4f} exact={agg.exact_match:.4f}"
    )
    return 0


def _cmd_gradcheck(args) -> int:
    cfg = LossConfig(alpha=args.alpha, gamma=args.gamma)
    worst = run_gradcheck(seed=args.seed, count=args.count, eps=args.eps, cfg=cfg)
    failed = []
    for family in FAMILIES:
        err = worst[family]
        status = "ok" if err < args.tol else "FAIL"
        print(f"{family:<13} max rel err {err:.3e}  {status}")
        if err >= args.tol:
            failed.append(family)
    if failed:
        print(f"gradient check failed for: {', '.join(failed)}")
        return 1
    return 0


def _cmd_report(args) -> int:
    doc = json.loads(Path(args.report).read_text())
    try:
        agg = doc["aggregate"]
        rows = [("samples", f"{agg['n']}")]
        for key in ("P", "R", "F1", "TEDS", "TEDS-Struct", "WAvgF1", "GriTS_Con", "GriTS_Top"):
            rows.append((key, f"{agg[key]:.6f}"))
        rows.append(("exact_match", f"{agg['exact_match']:.6f}"))
    except (KeyError, TypeError) as exc:
        raise FormatError(f"malformed report: {exc}") from None
    width = max(len(k) for k, _ in rows)
    for key, val in rows:
        print(f"{key:<{width}}  {val}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gridsplit",
        description="Table structure recovery: synthetic data, labels, inference, metrics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate synthetic table samples")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--seed", type=int, default=0, help="seed of the first sample")
    p.add_argument("--rows", type=int, default=4)
    p.add_argument("--cols", type=int, default=4)
    p.add_argument("--span-prob", type=float, default=0.3)
    p.add_argument("--max-span", type=int, default=3)
    p.add_argument("--cell-px", type=int, default=32)
    p.add_argument("--curvature", type=float, default=3.0)
    p.add_argument("--wireless", action="store_true", help="straight separators only")
    p.add_argument("--channels", type=int, default=16)
    p.add_argument("--perturb", choices=PERTURB_KINDS, default=None)
    p.add_argument("--magnitude", type=float, default=0.0)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("labelgen", help="derive training labels from an annotation")
    p.add_argument("--annotation", required=True, help="annotation JSON file")
    p.add_argument("--out", required=True, help="label output directory")
    p.add_argument("--downscale", type=int, default=4)
    p.set_defaults(func=_cmd_labelgen)

    p = sub.add_parser("infer", help="run the pipeline over sample directories")
    p.add_argument("--samples", required=True, help="directory of sample dirs")
    p.add_argument("--pred-name", default="pred.json")
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--params", default=None, help="merger parameter vector (.sem2)")
    p.add_argument(
        "-c", "--config", action="append", default=[], metavar="KEY=VALUE",
        help="config override (aliases: R=roi_bins, C=channels, D=embed_dim)",
    )
    p.set_defaults(func=_cmd_infer)

    p = sub.add_parser("eval", help="score predictions against annotations")
    p.add_argument("--samples", required=True)
    p.add_argument("--pred-name", default="pred.json")
    p.add_argument("--report", default="report.json")
    p.add_argument("--csv", default=None)
    p.add_argument("--threads", type=int, default=None)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("gradcheck", help="verify analytic loss gradients numerically")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=20)
    p.add_argument("--eps", type=float, default=1e-5)
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--alpha", type=float, default=0.25)
    p.add_argument("--gamma", type=float, default=2.0)
    p.set_defaults(func=_cmd_gradcheck)

    p = sub.add_parser("report", help="pretty-print an eval report")
    p.add_argument("--report", default="report.json")
    p.set_defaults(func=_cmd_report)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (GridSplitError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
