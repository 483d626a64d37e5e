"""Tree edit distance and the TEDS score."""

import numpy as np
import pytest

from gridsplit.metrics.ted import _sub_costs, teds, tree_edit_distance
from gridsplit.structure import HtmlNode, parse_html_table, to_html_tree

from oracles import postorder, random_tree, ted_mapping_ref


def _tree(text):
    return to_html_tree(parse_html_table(text))


def test_identical_trees_cost_zero():
    t = _tree("<table><tr><td>a</td><td>b</td></tr></table>")
    assert tree_edit_distance(t, t) == 0.0
    assert teds(t, t) == 1.0


def test_empty_tree_conventions():
    t = _tree("<table><tr><td>a</td></tr></table>")  # 3 nodes
    assert tree_edit_distance(None, t) == 3.0
    assert tree_edit_distance(t, None) == 3.0
    assert tree_edit_distance(None, None) == 0.0
    assert teds(None, None) == 1.0
    assert teds(None, t) == 0.0


def test_single_insertion_costs_one():
    a = _tree("<table><tr><td>a</td></tr></table>")
    b = _tree("<table><tr><td>a</td><td>b</td></tr></table>")
    assert tree_edit_distance(a, b) == 1.0
    # 1 - 1/max(3, 4)
    assert teds(a, b) == pytest.approx(1.0 - 1.0 / 4.0)


def test_content_substitution_uses_normalized_edit():
    a = _tree("<table><tr><td>kitten</td></tr></table>")
    b = _tree("<table><tr><td>sitting</td></tr></table>")
    # levenshtein 3 over max length 7
    assert tree_edit_distance(a, b) == pytest.approx(3.0 / 7.0)
    assert teds(a, b) == pytest.approx(1.0 - (3.0 / 7.0) / 3.0)


def test_struct_only_ignores_content():
    a = _tree("<table><tr><td>left</td></tr></table>")
    b = _tree("<table><tr><td>completely-different</td></tr></table>")
    assert tree_edit_distance(a, b, struct_only=True) == 0.0
    assert teds(a, b, struct_only=True) == 1.0
    assert teds(a, b) < 1.0


def test_span_mismatch_is_full_substitution():
    a = _tree('<table><tr><td colspan="2">x</td></tr></table>')
    b = _tree("<table><tr><td>x</td></tr></table>")
    # identical text, different colspan: cost 1 even under struct_only
    assert tree_edit_distance(a, b) == 1.0
    assert tree_edit_distance(a, b, struct_only=True) == 1.0


def test_tag_mismatch_costs_one():
    td = HtmlNode(tag="td", content="x")
    tr = HtmlNode(tag="tr")
    a = HtmlNode(tag="table", children=[HtmlNode(tag="tr", children=[td])])
    b = HtmlNode(tag="table", children=[tr])
    # the td must be deleted (tr-td substitution also costs 1)
    assert tree_edit_distance(a, b) == 1.0


def test_distance_is_symmetric_and_triangular():
    rng = np.random.default_rng(30)
    trees = [random_tree(rng, max_nodes=7) for _ in range(8)]
    d = [[tree_edit_distance(x, y) for y in trees] for x in trees]
    n = len(trees)
    for i in range(n):
        assert d[i][i] == 0.0
        for j in range(n):
            assert d[i][j] == pytest.approx(d[j][i])
            for k in range(n):
                assert d[i][j] <= d[i][k] + d[k][j] + 1e-9


def test_matches_exhaustive_mapping_search():
    rng = np.random.default_rng(31)
    for _ in range(60):
        a = random_tree(rng, max_nodes=7)
        b = random_tree(rng, max_nodes=7)
        for struct_only in (False, True):
            sub = _sub_costs(postorder(a), postorder(b), struct_only=struct_only)
            want = ted_mapping_ref(a, b, sub)
            got = tree_edit_distance(a, b, struct_only=struct_only)
            assert got == pytest.approx(want, abs=1e-9)


def test_teds_bounded():
    rng = np.random.default_rng(32)
    for _ in range(40):
        a = random_tree(rng, max_nodes=8)
        b = random_tree(rng, max_nodes=8)
        s = teds(a, b)
        assert 0.0 <= s <= 1.0
