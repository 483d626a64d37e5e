"""Compare the compiled tree-edit kernels against their pure-Python twins.

Builds HTML trees from synthetic tables, times forest_distance over all
tree pairs and levenshtein over random code sequences, and checks that
both backends return identical values while doing so.

    python3 benchmarks/bench_ted.py --tables 12 --repeats 3
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from gridsplit import _kernels_py
from gridsplit.harness import SynthSpec, generate, ground_truth_cells
from gridsplit.metrics.ted import _flatten, _sub_costs
from gridsplit.structure import to_html_tree

try:
    from gridsplit import _kernels
except ImportError:
    _kernels = None


def _tree_cases(tables: int, seed: int):
    """Flattened tree pairs plus their substitution cost matrices."""
    rng = np.random.default_rng(seed)
    flat = []
    for i in range(tables):
        spec = SynthSpec(
            rows=int(rng.integers(2, 7)),
            cols=int(rng.integers(2, 7)),
            span_prob=0.4,
            seed=seed + i,
        )
        tree = to_html_tree(ground_truth_cells(generate(spec).annotation))
        flat.append(_flatten(tree))
    cases = []
    for i in range(len(flat)):
        for j in range(i + 1, len(flat)):
            na, lml1, kr1 = flat[i]
            nb, lml2, kr2 = flat[j]
            sub = _sub_costs(na, nb, struct_only=False)
            cases.append((lml1, kr1, lml2, kr2, sub))
    return cases


def _string_cases(count: int, seed: int):
    rng = np.random.default_rng(seed)
    cases = []
    for _ in range(count):
        la, lb = rng.integers(10, 80, size=2)
        cases.append((rng.integers(0, 6, size=la).tolist(), rng.integers(0, 6, size=lb).tolist()))
    return cases


def _time(fn, cases, repeats: int):
    values = [fn(*case) for case in cases]  # warm up and capture outputs
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        for case in cases:
            fn(*case)
        best = min(best, time.perf_counter() - t0)
    return best, values


def _report(label: str, cases, pure_fn, compiled_fn, repeats: int) -> None:
    pure_s, pure_vals = _time(pure_fn, cases, repeats)
    print(f"{label:<16} pure      {pure_s * 1e3:9.2f} ms  "
          f"({pure_s / len(cases) * 1e6:8.1f} us/call, n={len(cases)})")
    if compiled_fn is None:
        print(f"{label:<16} compiled  unavailable (extension not built)")
        return
    comp_s, comp_vals = _time(compiled_fn, cases, repeats)
    mismatches = sum(1 for a, b in zip(pure_vals, comp_vals) if a != b)
    speedup = pure_s / comp_s if comp_s > 0 else float("inf")
    print(f"{label:<16} compiled  {comp_s * 1e3:9.2f} ms  "
          f"({comp_s / len(cases) * 1e6:8.1f} us/call, x{speedup:.1f})")
    if mismatches:
        raise SystemExit(f"{label}: backends disagree on {mismatches} case(s)")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--tables", type=int, default=12, help="synthetic trees to pair up")
    parser.add_argument("--strings", type=int, default=300, help="random sequence pairs")
    parser.add_argument("--repeats", type=int, default=3, help="timing repeats, best kept")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    if _kernels is None:
        print("note: compiled extension missing, timing the pure backend only")

    trees = _tree_cases(args.tables, args.seed)
    strings = _string_cases(args.strings, args.seed + 1)
    _report(
        "forest_distance", trees,
        _kernels_py.forest_distance,
        _kernels.forest_distance if _kernels else None,
        args.repeats,
    )
    _report(
        "levenshtein", strings,
        _kernels_py.levenshtein,
        _kernels.levenshtein if _kernels else None,
        args.repeats,
    )


if __name__ == "__main__":
    main()
