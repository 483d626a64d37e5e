"""Tree edit distance and tree-edit-distance similarity.

Ordered edit distance with unit insert/delete.  Substituting two nodes
costs 1 when their tags differ; two tds additionally cost 1 when their
(rowspan, colspan) differ, else the normalized string edit distance of
their contents (0 when both are empty).  Struct-only scoring zeroes the
content term so only tags and spans matter.
"""

from __future__ import annotations

import numpy as np

from .. import kernels
from ..structure import HtmlNode, node_count


def _flatten(root: HtmlNode):
    """Postorder node list plus leftmost-leaf indices and keyroots."""
    order: list[HtmlNode] = []

    def walk(node):
        for child in node.children:
            walk(child)
        order.append(node)

    walk(root)
    index = {id(node): i for i, node in enumerate(order)}
    lml = np.empty(len(order), dtype=np.int64)
    for i, node in enumerate(order):
        cur = node
        while cur.children:
            cur = cur.children[0]
        lml[i] = index[id(cur)]
    last_for_lml: dict[int, int] = {}
    for i in range(len(order)):
        last_for_lml[int(lml[i])] = i
    keyroots = np.array(sorted(last_for_lml.values()), dtype=np.int64)
    return order, lml, keyroots


def _string_codes(s: str) -> np.ndarray:
    return np.array([ord(ch) for ch in s], dtype=np.int32)


def _normalized_edit(a: str, b: str, cache: dict) -> float:
    if a == b:
        return 0.0
    key = (a, b)
    hit = cache.get(key)
    if hit is not None:
        return hit
    dist = kernels.levenshtein(_string_codes(a), _string_codes(b))
    val = dist / max(len(a), len(b))
    cache[key] = val
    return val


def _sub_costs(nodes_a, nodes_b, struct_only: bool) -> np.ndarray:
    tags = {t: i for i, t in enumerate({n.tag for n in nodes_a} | {n.tag for n in nodes_b})}
    ca = np.array([tags[n.tag] for n in nodes_a], dtype=np.int64)
    cb = np.array([tags[n.tag] for n in nodes_b], dtype=np.int64)
    cost = (ca[:, None] != cb[None, :]).astype(np.float64)
    td_code = tags.get("td")
    if td_code is None:
        return cost
    cache: dict = {}
    ia = np.nonzero(ca == td_code)[0]
    ib = np.nonzero(cb == td_code)[0]
    for i in ia:
        na = nodes_a[i]
        for j in ib:
            nb = nodes_b[j]
            if (na.rowspan, na.colspan) != (nb.rowspan, nb.colspan):
                cost[i, j] = 1.0
            elif struct_only:
                cost[i, j] = 0.0
            else:
                cost[i, j] = _normalized_edit(na.content, nb.content, cache)
    return cost


def tree_edit_distance(a: HtmlNode | None, b: HtmlNode | None, struct_only: bool = False) -> float:
    """Edit distance between two trees; None stands for the empty tree."""
    if a is None and b is None:
        return 0.0
    if a is None:
        return float(node_count(b))
    if b is None:
        return float(node_count(a))
    nodes_a, lml_a, kr_a = _flatten(a)
    nodes_b, lml_b, kr_b = _flatten(b)
    sub = _sub_costs(nodes_a, nodes_b, struct_only)
    return float(kernels.forest_distance(lml_a, kr_a, lml_b, kr_b, sub))


def teds(a: HtmlNode | None, b: HtmlNode | None, struct_only: bool = False) -> float:
    """1 - distance / max(node counts); two empty trees score 1."""
    na = node_count(a) if a is not None else 0
    nb = node_count(b) if b is not None else 0
    if na == 0 and nb == 0:
        return 1.0
    dist = tree_edit_distance(a, b, struct_only=struct_only)
    return 1.0 - dist / max(na, nb)
