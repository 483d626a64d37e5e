"""Grid similarity: slot similarities and the alignment optimizer."""

import numpy as np
import pytest

from gridsplit.metrics.grits import (
    alignment_score,
    grits,
    span_similarity,
    text_similarity,
)
from gridsplit.structure import grid_matrix_view, parse_html_table

from oracles import alignment_ref, random_cellset


def _view(text):
    return grid_matrix_view(parse_html_table(text))


def test_span_similarity_identity():
    v = _view('<table><tr><td colspan="2">x</td></tr><tr><td>a</td><td>b</td></tr></table>')
    sim = span_similarity(v.spans, v.spans)
    assert sim.shape == (2, 2, 2, 2)
    for i in range(2):
        for j in range(2):
            assert sim[i, i, j, j] == 1.0


def test_span_similarity_offsets_matter():
    # a 1x2 span seen from its two slots: same rectangle, different
    # offsets; against a unit cell the IoU is 1/2 either way
    wide = _view('<table><tr><td colspan="2">x</td></tr></table>')
    unit = _view("<table><tr><td>y</td></tr></table>")
    sim = span_similarity(wide.spans, unit.spans)
    assert sim.shape == (1, 1, 2, 1)
    assert sim[0, 0, 0, 0] == pytest.approx(0.5)
    assert sim[0, 0, 1, 0] == pytest.approx(0.5)
    # two aligned 1x2 spans agree perfectly slot by slot
    sim2 = span_similarity(wide.spans, wide.spans)
    assert sim2[0, 0, 0, 0] == 1.0 and sim2[0, 0, 1, 1] == 1.0
    # mismatched offsets only share half the rectangle
    assert sim2[0, 0, 0, 1] == pytest.approx(1.0 / 3.0)


def test_text_similarity_values():
    a = np.array([["kitten", ""]], dtype=object)
    b = np.array([["sitting", ""]], dtype=object)
    sim = text_similarity(a, b)
    assert sim.shape == (1, 1, 2, 2)
    assert sim[0, 0, 0, 0] == pytest.approx(1.0 - 3.0 / 7.0)
    assert sim[0, 0, 1, 1] == 1.0  # both empty
    assert sim[0, 0, 1, 0] == 0.0  # empty vs non-empty


def test_alignment_trivial_cases():
    # 1x1x1x1: the single slot pairs with itself
    assert alignment_score(np.full((1, 1, 1, 1), 0.7)) == pytest.approx(0.7)
    # negative-free: skipping everything is never better than pairing
    sim = np.zeros((2, 2, 2, 2))
    assert alignment_score(sim) == 0.0


def test_alignment_prefers_shifted_match():
    # grid b equals grid a with its first row dropped; a diagonal-only
    # pairing would miss the perfect shifted alignment
    sim = np.zeros((3, 2, 2, 2))
    for j in range(2):
        sim[1, 0, j, j] = 1.0
        sim[2, 1, j, j] = 1.0
    assert alignment_score(sim) == pytest.approx(4.0)


def test_alignment_matches_exhaustive_on_small_grids():
    rng = np.random.default_rng(41)
    for _ in range(60):
        ma, mb = rng.integers(1, 4), rng.integers(1, 4)
        na, nb = rng.integers(1, 4), rng.integers(1, 4)
        sim = rng.random((ma, mb, na, nb))
        assert alignment_score(sim) == pytest.approx(alignment_ref(sim), abs=1e-9)


def test_grits_self_similarity():
    rng = np.random.default_rng(42)
    for _ in range(20):
        cs = random_cellset(rng, max_dim=4)
        assert grits(cs, cs, "top") == 1.0
        assert grits(cs, cs, "con") == 1.0


def test_grits_distinguishes_topology_from_content():
    same_shape = parse_html_table("<table><tr><td>a</td><td>b</td></tr></table>")
    other_text = parse_html_table("<table><tr><td>xxxx</td><td>yyyy</td></tr></table>")
    assert grits(same_shape, other_text, "top") == 1.0
    assert grits(same_shape, other_text, "con") < 1.0

    merged = parse_html_table('<table><tr><td colspan="2">a</td></tr></table>')
    assert grits(same_shape, merged, "top") < 1.0


def test_grits_normalization_hand_value():
    # 1x1 vs 1x2 with one perfect slot: 2 * 1 / (1 + 2)
    one = parse_html_table("<table><tr><td>a</td></tr></table>")
    two = parse_html_table("<table><tr><td>a</td><td>b</td></tr></table>")
    assert grits(one, two, "con") == pytest.approx(2.0 / 3.0)


def test_grits_mode_validation():
    cs = parse_html_table("<table><tr><td>a</td></tr></table>")
    with pytest.raises(ValueError):
        grits(cs, cs, "shape")
