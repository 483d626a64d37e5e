"""Split stage: gather pass, peak picking, mask tracing, lattice build."""

import dataclasses
import math

import numpy as np
import pytest

from gridsplit.errors import ShapeError, TopologyError
from gridsplit.losses import grad_check
from gridsplit.splitter import (
    AxisParams,
    SplitterParams,
    border_fallback_lines,
    feature_branch,
    gather_forward,
    instance_nms,
    line_mask_logits,
    lines_to_grid,
    loss_instance,
    loss_instance_grad,
    loss_segmentation,
    loss_segmentation_grad,
    mask_to_line,
    predict_line_masks,
)

from oracles import nms_ref


def test_gather_output_shapes():
    params = SplitterParams.random(seed=0, channels=8)
    f = np.random.default_rng(1).normal(size=(12, 10, 8))
    col = gather_forward(f, "col", params)
    assert col.context.shape == (1, 10, 8)
    assert col.kernels.shape == (1, 10, 8)
    assert col.scores.shape == (10,)
    row = gather_forward(f, "row", params)
    assert row.context.shape == (12, 1, 8)
    assert row.kernels.shape == (12, 1, 8)
    assert row.scores.shape == (12,)


def test_gather_validates_input():
    params = SplitterParams.random(seed=0, channels=4)
    with pytest.raises(ShapeError):
        gather_forward(np.zeros((4, 4)), "col", params)
    with pytest.raises(ShapeError):
        gather_forward(np.zeros((4, 4, 5)), "col", params)
    with pytest.raises(ShapeError):
        gather_forward(np.zeros((4, 4, 4)), "diag", params)


def _identity_axis(c):
    """Down convs pass channels through; propagation and heads are
    identity-shaped so constant maps survive the whole pass."""
    p = AxisParams.zeros(c)
    eye3 = np.zeros((3, 3, c, c))
    eye3[1, 1] = np.eye(c)
    return dataclasses.replace(
        p,
        down_w=(eye3, eye3, eye3),
        theta_w=np.eye(c),
        score_w=np.ones(c),
    )


def test_gather_constant_map_closed_form():
    c = 2
    params = SplitterParams(col=_identity_axis(c), row=_identity_axis(c), channels=c)
    f = np.ones((4, 6, c)) * np.array([1.0, 2.0])
    out = gather_forward(f, "col", params)
    np.testing.assert_allclose(out.context[0], np.tile([1.0, 2.0], (6, 1)))
    np.testing.assert_allclose(out.kernels[0], np.tile([1.0, 2.0], (6, 1)))
    np.testing.assert_allclose(out.scores, np.full(6, 3.0))


def test_row_axis_is_transposed_column_pass():
    params = SplitterParams.random(seed=3, channels=4)
    shared = dataclasses.replace(params, row=params.col)
    f = np.random.default_rng(4).normal(size=(7, 5, 4))
    row = gather_forward(f, "row", shared)
    col = gather_forward(f.transpose(1, 0, 2), "col", shared)
    np.testing.assert_allclose(row.scores, col.scores)
    np.testing.assert_allclose(row.kernels[:, 0], col.kernels[0])


def test_feature_branch_shape():
    params = SplitterParams.random(seed=5, channels=6)
    f = np.random.default_rng(6).normal(size=(8, 9, 6))
    fb = feature_branch(f, "col", params)
    assert fb.shape == (8, 9, 6)


def test_nms_hand_cases():
    assert instance_nms(np.full(5, -3.0)) == []
    assert instance_nms(np.array([-10.0, 3.0, 3.0, -10.0])) == [1]  # tie: first peak
    assert instance_nms(np.array([3.0, -10.0, 4.0])) == [0, 2]
    assert instance_nms(np.array([1.0, 2.0, 3.0])) == [2]
    # zero logits sit exactly on the 0.5 threshold: one big run
    assert instance_nms(np.zeros(4)) == [0]
    # stricter threshold drops weaker logits
    assert instance_nms(np.array([2.0, -10.0, 3.0]), threshold=0.9) == [2]


def test_nms_matches_reference_sample():
    rng = np.random.default_rng(9)
    for _ in range(100):
        scores = rng.normal(0, 3, size=int(rng.integers(1, 40)))
        assert instance_nms(scores) == nms_ref(scores)


def test_line_mask_logits_column_and_row():
    rng = np.random.default_rng(10)
    fb = rng.normal(size=(4, 5, 3))
    kcol = rng.normal(size=(1, 6, 3))
    out = line_mask_logits(fb, kcol, [0, 2])
    assert out.shape == (4, 5, 2)
    np.testing.assert_allclose(out[:, :, 1], fb @ kcol[0, 2])
    krow = rng.normal(size=(6, 1, 3))
    out = line_mask_logits(fb, krow, [5])
    np.testing.assert_allclose(out[:, :, 0], fb @ krow[5, 0])
    probs = predict_line_masks(fb, kcol, [1])
    assert probs.min() > 0.0 and probs.max() < 1.0


def test_line_mask_logits_validation():
    fb = np.zeros((4, 5, 3))
    assert line_mask_logits(fb, np.zeros((1, 6, 3)), []).shape == (4, 5, 0)
    with pytest.raises(ShapeError):
        line_mask_logits(fb, np.zeros((1, 6, 3)), [6])
    with pytest.raises(ShapeError):
        line_mask_logits(fb, np.zeros((2, 6, 3)), [0])


def test_mask_to_line_tracing():
    m = np.zeros((3, 4))
    m[0, 2] = m[1, 1] = m[2, 3] = 1.0
    line = mask_to_line(m, "col")
    np.testing.assert_array_equal(line, [[2, 0], [1, 1], [3, 2]])
    line = mask_to_line(m.T, "row")
    np.testing.assert_array_equal(line, [[0, 2], [1, 1], [2, 3]])
    # all-equal rows resolve to the first column
    np.testing.assert_array_equal(mask_to_line(np.ones((2, 3)), "col")[:, 0], [0, 0])
    with pytest.raises(ShapeError):
        mask_to_line(np.zeros((2, 2, 2)), "col")
    with pytest.raises(ShapeError):
        mask_to_line(m, "diag")


def _vline(x, h):
    return np.stack([np.full(h, float(x)), np.arange(h, dtype=np.float64)], axis=1)


def _hline(y, w):
    return np.stack([np.arange(w, dtype=np.float64), np.full(w, float(y))], axis=1)


def test_lines_to_grid_straight_lattice():
    grid = lines_to_grid(
        [_hline(0, 20), _hline(8, 20), _hline(15, 20)],
        [_vline(0, 16), _vline(10, 16), _vline(19, 16)],
    )
    assert grid.shape == (2, 2)
    np.testing.assert_allclose(grid.boxes[0, 0], [0, 0, 10, 8])
    np.testing.assert_allclose(grid.boxes[1, 1], [10, 8, 19, 15])


def test_lines_to_grid_sorts_unordered_input():
    grid = lines_to_grid(
        [_hline(15, 20), _hline(0, 20)],
        [_vline(19, 16), _vline(0, 16)],
    )
    np.testing.assert_allclose(grid.boxes[0, 0], [0, 0, 19, 15])


def test_lines_to_grid_curved_lines_converge():
    h, w = 32, 32
    ys = np.arange(h, dtype=np.float64)
    wavy = np.stack([16.0 + 3.0 * np.sin(ys / 5.0), ys], axis=1)
    grid = lines_to_grid(
        [_hline(0, w), _hline(12, w), _hline(31, w)],
        [_vline(0, h), wavy, _vline(31, h)],
    )
    assert grid.shape == (2, 2)
    x_at_12 = 16.0 + 3.0 * math.sin(12.0 / 5.0)
    assert abs(grid.boxes[0, 1, 0] - min(x_at_12, 16.0 + 3.0 * math.sin(0.0))) < 1.5


def test_lines_to_grid_rejects_crossings_and_underflow():
    h = 16
    ys = np.arange(h, dtype=np.float64)
    crossing = np.stack([4.0 - 8.0 * ys / (h - 1) + 4.0, ys], axis=1)  # 8 -> 0
    with pytest.raises(TopologyError):
        lines_to_grid(
            [_hline(0, 20), _hline(15, 20)],
            [_vline(2, h), crossing],
        )
    with pytest.raises(TopologyError):
        lines_to_grid([_hline(0, 20)], [_vline(0, h), _vline(5, h)])


def test_border_fallback():
    with_two, warn = border_fallback_lines([_vline(3, 8), _vline(6, 8)], "col", 8, 12)
    assert warn is None and len(with_two) == 2

    out, warn = border_fallback_lines([], "col", 8, 12)
    assert warn is not None and len(out) == 2
    assert out[0][:, 0].mean() == 0.0 and out[1][:, 0].mean() == 11.0

    out, _ = border_fallback_lines([_vline(5, 8)], "col", 8, 12)
    assert len(out) == 3

    # a lone line hugging a border suppresses that border's twin
    out, _ = border_fallback_lines([_vline(0.5, 8)], "col", 8, 12)
    assert len(out) == 2

    out, warn = border_fallback_lines([_hline(4, 12)], "row", 8, 12)
    assert len(out) == 3 and "row" in warn


def test_loss_instance_value_and_grad():
    scores = np.zeros(4)
    target = np.array([1.0, 0.0, 1.0, 0.0])
    assert abs(loss_instance(scores, target) - math.log(2.0)) < 1e-12
    with pytest.raises(ShapeError):
        loss_instance(np.zeros(3), target)

    rng = np.random.default_rng(12)
    x = rng.normal(size=6)
    t = (rng.random(6) > 0.5).astype(float)

    def fn(v):
        return loss_instance(v, t), loss_instance_grad(v, t)

    assert grad_check(fn, x) < 1e-6


def test_loss_segmentation_value_and_grad():
    logits = np.zeros((2, 2, 1))
    target = np.ones((2, 2, 1))
    want = 0.25 * 0.25 * math.log(2.0)
    assert abs(loss_segmentation(logits, target) - want) < 1e-12

    with pytest.raises(ShapeError):
        loss_segmentation(np.zeros((2, 2, 1)), np.zeros((2, 2, 1)))  # no positives
    with pytest.raises(ShapeError):
        loss_segmentation(np.zeros((2, 2, 1)), np.ones((2, 3, 1)))

    rng = np.random.default_rng(13)
    x = rng.normal(size=(3, 4, 2))
    t = np.zeros((3, 4, 2))
    t[0, :, 0] = 1.0
    t[2, 1:3, 1] = 1.0

    def fn(v):
        return loss_segmentation(v, t), loss_segmentation_grad(v, t)

    assert grad_check(fn, x) < 1e-6
