"""Deterministic degree-based node ordering and fixed-size padded model tensors.

Adjacency matrices are sorted so that topological patterns land in comparable
matrix positions: highest-degree nodes first, ties split by iteratively refined
neighbor-degree classes (residual ties fall back to the original node index,
which is the one label-dependent part of the order).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, ValidationError
from .graphs import Graph

DEFAULT_N_MAX = 24


@dataclass
class EncodedSample:
    """Padded model tensor: symmetric adjacency, node-existence mask, attributes.

    Binary for canonicalized inputs/targets; entries in [0, 1] for decoder output.
    """

    adj: np.ndarray
    mask: np.ndarray
    attrs: np.ndarray
    n_max: int


def refinement_classes(g: Graph) -> list[int]:
    """Per-node class index (0 = first slot class) after iterated degree refinement."""
    n = g.n
    if n == 0:
        return []
    neigh = g.neighbor_lists()
    deg = g.degrees()
    # class 0 = highest degree, so ascending class order = descending degree order
    uniq = sorted(set(deg.tolist()), reverse=True)
    rank = {d: c for c, d in enumerate(uniq)}
    classes = [rank[d] for d in deg.tolist()]
    for _ in range(n):
        keys = [(classes[i], tuple(sorted(classes[j] for j in neigh[i]))) for i in range(n)]
        order = {k: c for c, k in enumerate(sorted(set(keys)))}
        refined = [order[k] for k in keys]
        if refined == classes:
            break
        classes = refined
    return classes


def bosam_order(g: Graph) -> tuple:
    """Slot order: node indices sorted by refined class, residual ties by index."""
    classes = refinement_classes(g)
    return tuple(sorted(range(g.n), key=lambda i: (classes[i], i)))


def to_padded(g: Graph, n_max: int = DEFAULT_N_MAX) -> EncodedSample:
    """Canonicalize node order and embed the graph in fixed-size padded tensors."""
    if g.n > n_max:
        raise CapacityError(f"graph has {g.n} nodes but padding size is {n_max}")
    order = bosam_order(g)
    slot_of = {node: s for s, node in enumerate(order)}
    adj = np.zeros((n_max, n_max), dtype=np.float64)
    for i, j in g.edges:
        si, sj = slot_of[i], slot_of[j]
        adj[si, sj] = 1.0
        adj[sj, si] = 1.0
    mask = np.zeros(n_max, dtype=np.float64)
    mask[: g.n] = 1.0
    attrs = np.zeros(n_max, dtype=np.float64)
    if g.attributes is not None:
        for s, node in enumerate(order):
            attrs[s] = g.attributes[node]
    return EncodedSample(adj=adj, mask=mask, attrs=attrs, n_max=n_max)


def threshold_decode(sample: EncodedSample, threshold: float = 0.5,
                     with_attributes: bool = False) -> Graph:
    """Binarize a probabilistic sample into a Graph.

    Node count is the longest prefix in which every mask entry clears the
    threshold (canonical samples put real nodes first); edges keep pairs whose
    adjacency probability clears it.
    """
    if not (0.0 < threshold < 1.0):
        raise ValidationError(f"threshold must lie in (0, 1), got {threshold}")
    n = 0
    for v in sample.mask:
        if v >= threshold:
            n += 1
        else:
            break
    edges = set()
    for i in range(n):
        for j in range(i + 1, n):
            if sample.adj[i, j] >= threshold:
                edges.add((i, j))
    attrs = None
    if with_attributes:
        attrs = tuple(float(np.clip(a, 0.0, 1.0)) for a in sample.attrs[:n])
    return Graph(n, frozenset(edges), attrs)
