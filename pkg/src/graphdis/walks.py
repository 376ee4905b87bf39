"""Subgraph sampling from a large host graph via biased second-order random walks.

Transition weights follow the return/in-out scheme: from current node v with
previous node t, a candidate neighbor x gets weight 1/p_return if x == t,
1 if x is adjacent to t, and 1/q_inout otherwise. A sample is the induced
subgraph on the first `max_nodes` distinct nodes visited, relabeled in
first-visit order.
"""

from __future__ import annotations

import bisect
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .graphs import Dataset, Graph


@dataclass(frozen=True)
class WalkConfig:
    walk_length: int = 40
    p_return: float = 1.0
    q_inout: float = 1.0
    max_nodes: int = 24

    def validate(self) -> None:
        if self.walk_length < 1:
            raise ValidationError(f"walk_length must be >= 1, got {self.walk_length}")
        if self.max_nodes < 1:
            raise ValidationError(f"max_nodes must be >= 1, got {self.max_nodes}")
        if self.p_return <= 0.0:
            raise ValidationError(f"p_return must be > 0, got {self.p_return}")
        if self.q_inout <= 0.0:
            raise ValidationError(f"q_inout must be > 0, got {self.q_inout}")


def load_edge_list(path) -> Graph:
    """Parse a whitespace-separated edge list file into a Graph.

    Lines are `u v` with integer node ids; blank lines and lines starting with
    '#' are skipped. Node ids are remapped to 0..n-1 in first-appearance
    order; duplicate edges (either orientation) are merged; self-loops are
    dropped with a warning carrying the dropped count.
    """
    path = Path(path)
    label: dict[int, int] = {}
    edges: set = set()
    dropped = 0
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValidationError(f"{path}:{lineno}: expected 'u v', got {line!r}")
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError as exc:
                raise ValidationError(f"{path}:{lineno}: non-integer node id") from exc
            if u == v:
                dropped += 1
                continue
            lu = label.setdefault(u, len(label))
            lv = label.setdefault(v, len(label))
            edges.add((lu, lv) if lu < lv else (lv, lu))
    if dropped:
        warnings.warn(f"{path}: dropped {dropped} self-loop line(s)")
    if not label:
        raise ValidationError(f"{path}: no edges found")
    return Graph(len(label), frozenset(edges))


def transition_weights(g: Graph, prev: int, current: int,
                       cfg: WalkConfig) -> tuple:
    """Unnormalized second-order weights over current's neighbors.

    Returns (neighbors, weights) where weights[i] belongs to neighbors[i].
    """
    neigh = g.neighbor_lists()
    neighbors = neigh[current]
    prev_nb = neigh[prev]
    weights = np.empty(len(neighbors))
    for i, x in enumerate(neighbors):
        if x == prev:
            weights[i] = 1.0 / cfg.p_return
        elif _binary_contains(prev_nb, x):
            weights[i] = 1.0
        else:
            weights[i] = 1.0 / cfg.q_inout
    return neighbors, weights


def biased_walk(g: Graph, start: int, cfg: WalkConfig,
                rng: np.random.Generator) -> list:
    """One second-order walk of up to cfg.walk_length steps from `start`.

    Returns the visited node sequence including the start; the first step is
    uniform over neighbors. Stops early at a node with no neighbors.
    """
    cfg.validate()
    if not 0 <= start < g.n:
        raise ValidationError(f"start node {start} is not in the graph")
    neigh = g.neighbor_lists()
    walk = [start]
    if not neigh[start]:
        return walk
    current = neigh[start][int(rng.integers(0, len(neigh[start])))]
    walk.append(current)
    for _ in range(cfg.walk_length - 1):
        neighbors = neigh[current]
        if not neighbors:
            break
        prev = walk[-2]
        prev_nb = neigh[prev]
        weights = np.empty(len(neighbors))
        for i, x in enumerate(neighbors):
            if x == prev:
                weights[i] = 1.0 / cfg.p_return
            elif _binary_contains(prev_nb, x):
                weights[i] = 1.0
            else:
                weights[i] = 1.0 / cfg.q_inout
        weights /= weights.sum()
        current = neighbors[int(rng.choice(len(neighbors), p=weights))]
        walk.append(current)
    return walk


def _binary_contains(sorted_list: list, x: int) -> bool:
    i = bisect.bisect_left(sorted_list, x)
    return i < len(sorted_list) and sorted_list[i] == x


def rw_sample(g: Graph, cfg: WalkConfig, seed=0) -> Graph:
    """Walk from a uniformly random start node and induce the visited subgraph.

    The first cfg.max_nodes distinct visited nodes are kept and relabeled
    0..k-1 in first-visit order; edges are those of the host graph between
    kept nodes.
    """
    cfg.validate()
    if g.n < 1:
        raise ValidationError("cannot sample from an empty graph")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    start = int(rng.integers(0, g.n))
    walk = biased_walk(g, start, cfg, rng)

    label: dict[int, int] = {}
    for node in walk:
        if node not in label:
            label[node] = len(label)
            if len(label) >= cfg.max_nodes:
                break
    neigh = g.neighbor_lists()
    edges = set()
    for u, lu in label.items():
        for v in neigh[u]:
            lv = label.get(v)
            if lv is not None and lu < lv:
                edges.add((lu, lv))
    return Graph(len(label), frozenset(edges))


def sample_dataset(g: Graph, count: int, cfg: WalkConfig, seed=0) -> Dataset:
    """Sample `count` induced subgraphs with per-record derived seeds."""
    if count < 1:
        raise ValidationError(f"count must be >= 1, got {count}")
    cfg.validate()
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    records = [(rw_sample(g, cfg, np.random.default_rng(child)), None)
               for child in root.spawn(count)]
    return Dataset(records)
