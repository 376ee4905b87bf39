"""Parametric random-graph families, node attributes, and dataset construction.

Supported families:
    ER   -- G(n, p): each of the n(n-1)/2 edges appears independently with probability p
    BA   -- preferential attachment; each arrival wires m edges toward high-degree nodes
    SW   -- Watts-Strogatz ring lattice of even degree k, edges rewired with p_rewire
    TREE -- complete binary tree of a given depth (deterministic)

Datasets are lists of (Graph, GenParams) records persisted as JSON Lines.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ValidationError

Edge = tuple[int, int]
SeedLike = "int | np.random.SeedSequence | np.random.Generator"

FAMILIES = ("ER", "BA", "SW", "TREE")

# Canonical parameter order per family; doubles as the factor order downstream.
FAMILY_PARAMS: dict[str, tuple[str, ...]] = {
    "ER": ("n", "p"),
    "BA": ("n", "m"),
    "SW": ("n", "k", "p_rewire"),
    "TREE": ("depth",),
}
INTEGER_PARAMS = frozenset({"n", "m", "k", "depth"})


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass(frozen=True)
class Graph:
    """Undirected graph: node count, normalized edge set, optional node attributes.

    Edges are stored once with i < j; attributes, when present, are one scalar
    in [0, 1] per node.
    """

    n: int
    edges: frozenset = frozenset()
    attributes: tuple | None = None

    def __post_init__(self):
        if self.n < 0:
            raise ValidationError(f"node count must be >= 0, got {self.n}")
        norm = set()
        for e in self.edges:
            i, j = int(e[0]), int(e[1])
            if i == j:
                raise ValidationError(f"self-loop at node {i}")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ValidationError(f"edge ({i}, {j}) outside node range 0..{self.n - 1}")
            norm.add((i, j) if i < j else (j, i))
        object.__setattr__(self, "edges", frozenset(norm))
        if self.attributes is not None:
            attrs = tuple(float(a) for a in self.attributes)
            if len(attrs) != self.n:
                raise ValidationError(
                    f"attribute vector length {len(attrs)} != node count {self.n}")
            for a in attrs:
                if not (0.0 <= a <= 1.0):
                    raise ValidationError(f"attribute {a} outside [0, 1]")
            object.__setattr__(self, "attributes", attrs)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def sorted_edges(self) -> list[Edge]:
        return sorted(self.edges)

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=np.int64)
        for i, j in self.edges:
            deg[i] += 1
            deg[j] += 1
        return deg

    def neighbor_lists(self) -> list[list[int]]:
        neigh: list[list[int]] = [[] for _ in range(self.n)]
        for i, j in self.edges:
            neigh[i].append(j)
            neigh[j].append(i)
        for lst in neigh:
            lst.sort()
        return neigh

    def adjacency_matrix(self) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=np.float64)
        for i, j in self.edges:
            a[i, j] = 1.0
            a[j, i] = 1.0
        return a

    def with_attributes(self, attrs) -> "Graph":
        return Graph(self.n, self.edges, tuple(attrs))


@dataclass
class GenParams:
    """Tagged generative family plus its named parameter values."""

    family: str
    values: dict

    def validate(self) -> None:
        if self.family not in FAMILIES:
            raise ValidationError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        expected = FAMILY_PARAMS[self.family]
        if tuple(sorted(self.values)) != tuple(sorted(expected)):
            raise ValidationError(
                f"{self.family} expects parameters {expected}, got {tuple(self.values)}")
        v = self.values
        if self.family == "ER":
            if int(v["n"]) < 1:
                raise ValidationError(f"ER requires n >= 1, got n={v['n']}")
            if not (0.0 <= v["p"] <= 1.0):
                raise ValidationError(f"ER requires 0 <= p <= 1, got p={v['p']}")
        elif self.family == "BA":
            if not (1 <= int(v["m"]) < int(v["n"])):
                raise ValidationError(f"BA requires 1 <= m < n, got m={v['m']}, n={v['n']}")
        elif self.family == "SW":
            if int(v["k"]) % 2 != 0:
                raise ValidationError(f"SW requires even k, got k={v['k']}")
            if not (0 <= int(v["k"]) < int(v["n"])):
                raise ValidationError(f"SW requires 0 <= k < n, got k={v['k']}, n={v['n']}")
            if not (0.0 <= v["p_rewire"] <= 1.0):
                raise ValidationError(
                    f"SW requires 0 <= p_rewire <= 1, got p_rewire={v['p_rewire']}")
        elif self.family == "TREE":
            if int(v["depth"]) < 1:
                raise ValidationError(f"TREE requires depth >= 1, got depth={v['depth']}")

    def names(self) -> tuple[str, ...]:
        return FAMILY_PARAMS[self.family]

    def vector(self) -> list[float]:
        """Parameter values in canonical order."""
        return [float(self.values[k]) for k in self.names()]


@dataclass
class Dataset:
    """List of (Graph, GenParams-or-None) records plus the max node count."""

    records: list
    n_max: int = 0

    def __post_init__(self):
        if self.records and self.n_max == 0:
            self.n_max = max(g.n for g, _ in self.records)

    def __len__(self) -> int:
        return len(self.records)

    def graphs(self) -> list[Graph]:
        return [g for g, _ in self.records]

    def family(self) -> str | None:
        for _, params in self.records:
            if params is not None:
                return params.family
        return None

    def factor_names(self) -> tuple[str, ...]:
        fam = self.family()
        return FAMILY_PARAMS[fam] if fam else ()

    def factor_matrix(self) -> np.ndarray:
        """N x K matrix of true generative parameters (canonical order)."""
        rows = [params.vector() for _, params in self.records if params is not None]
        if len(rows) != len(self.records):
            raise ValidationError("dataset contains records without generative parameters")
        return np.asarray(rows, dtype=np.float64)


# ---------------------------------------------------------------------------
# generators


def _gen_er(n: int, p: float, rng: np.random.Generator) -> Graph:
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(iu.size) < p
    edges = frozenset(zip(iu[keep].tolist(), ju[keep].tolist()))
    return Graph(n, edges)


def _gen_ba(n: int, m: int, rng: np.random.Generator) -> Graph:
    # Bootstrap: nodes 0..m-1 start isolated; node m wires a star over all of them.
    edges = set()
    repeated: list[int] = []
    for t in range(m):
        edges.add((t, m))
        repeated.extend((t, m))
    for v in range(m + 1, n):
        targets: set[int] = set()
        while len(targets) < m:
            targets.add(repeated[int(rng.integers(0, len(repeated)))])
        for t in sorted(targets):
            edges.add((t, v))
            repeated.extend((t, v))
    return Graph(n, frozenset(edges))


def _gen_sw(n: int, k: int, p_rewire: float, rng: np.random.Generator) -> Graph:
    half = k // 2
    edges = set()
    for d in range(1, half + 1):
        for u in range(n):
            edges.add(tuple(sorted((u, (u + d) % n))))
    if p_rewire > 0.0:
        degrees = {u: k for u in range(n)}
        for d in range(1, half + 1):
            for u in range(n):
                e = tuple(sorted((u, (u + d) % n)))
                if rng.random() >= p_rewire or e not in edges:
                    continue
                if degrees[u] >= n - 1:
                    continue  # u already linked to everyone; nothing to rewire to
                while True:
                    w = int(rng.integers(0, n))
                    cand = tuple(sorted((u, w)))
                    if w != u and cand not in edges:
                        break
                edges.remove(e)
                edges.add(cand)
                degrees[e[0]] -= 1
                degrees[e[1]] -= 1
                degrees[u] += 1
                degrees[w] += 1
    return Graph(n, frozenset(edges))


def _gen_tree(depth: int) -> Graph:
    n = 2 ** depth - 1
    edges = set()
    for i in range(n):
        for child in (2 * i + 1, 2 * i + 2):
            if child < n:
                edges.add((i, child))
    return Graph(n, frozenset(edges))


def _generate(params: GenParams, rng: np.random.Generator) -> Graph:
    v = params.values
    if params.family == "ER":
        return _gen_er(int(v["n"]), float(v["p"]), rng)
    if params.family == "BA":
        return _gen_ba(int(v["n"]), int(v["m"]), rng)
    if params.family == "SW":
        return _gen_sw(int(v["n"]), int(v["k"]), float(v["p_rewire"]), rng)
    return _gen_tree(int(v["depth"]))


def gen_graph(params: GenParams, seed: SeedLike = 0) -> Graph:
    """Sample one graph from the named family; deterministic given (params, seed)."""
    params.validate()
    return _generate(params, _as_rng(seed))


def assign_uniform_attribute(g: Graph, seed: SeedLike = 0) -> Graph:
    """Give every node the same attribute, drawn uniformly from [0, 1]."""
    c = float(_as_rng(seed).random())
    return g.with_attributes((c,) * g.n)


def randomize_attributes(g: Graph, delta_omega: float, seed: SeedLike = 0) -> Graph:
    """Redraw the attributes of round(delta_omega * n) nodes, chosen without replacement."""
    if g.attributes is None:
        raise ValidationError("randomize_attributes requires a graph with attributes")
    if not (0.0 <= delta_omega <= 1.0):
        raise ValidationError(f"delta_omega must lie in [0, 1], got {delta_omega}")
    count = int(math.floor(delta_omega * g.n + 0.5))  # round half-up
    if count == 0:
        return g
    rng = _as_rng(seed)
    idx = rng.choice(g.n, size=count, replace=False)
    fresh = rng.random(count)
    attrs = list(g.attributes)
    for i, val in zip(idx.tolist(), fresh.tolist()):
        attrs[i] = float(val)
    return g.with_attributes(attrs)


# ---------------------------------------------------------------------------
# dataset construction


def _validate_ranges(family: str, ranges: dict) -> None:
    if family not in FAMILIES:
        raise ValidationError(f"unknown family {family!r}; expected one of {FAMILIES}")
    expected = FAMILY_PARAMS[family]
    if tuple(sorted(ranges)) != tuple(sorted(expected)):
        raise ValidationError(f"{family} expects ranges for {expected}, got {tuple(ranges)}")
    for name, (lo, hi) in ranges.items():
        if lo > hi:
            raise ValidationError(f"range for {name} has lo {lo} > hi {hi}")
    if family == "ER":
        if ranges["n"][0] < 1:
            raise ValidationError("ER requires n >= 1")
        if ranges["p"][0] < 0.0 or ranges["p"][1] > 1.0:
            raise ValidationError("ER requires p within [0, 1]")
    elif family == "BA":
        if ranges["m"][0] < 1:
            raise ValidationError("BA requires m >= 1")
        if ranges["m"][1] >= ranges["n"][0]:
            raise ValidationError(
                "BA requires m < n for every sample: m hi must be below n lo")
    elif family == "SW":
        k_lo, k_hi = int(ranges["k"][0]), int(ranges["k"][1])
        if k_lo % 2 or k_hi % 2:
            raise ValidationError("SW requires even k bounds")
        if k_lo < 0:
            raise ValidationError("SW requires k >= 0")
        if k_hi >= ranges["n"][0]:
            raise ValidationError("SW requires k < n for every sample: k hi must be below n lo")
        if ranges["p_rewire"][0] < 0.0 or ranges["p_rewire"][1] > 1.0:
            raise ValidationError("SW requires p_rewire within [0, 1]")
    elif family == "TREE":
        if ranges["depth"][0] < 1:
            raise ValidationError("TREE requires depth >= 1")


def _sample_params(family: str, ranges: dict, rng: np.random.Generator) -> GenParams:
    values = {}
    for name in FAMILY_PARAMS[family]:
        lo, hi = ranges[name]
        if name == "k":  # even integers only
            values[name] = 2 * int(rng.integers(int(lo) // 2, int(hi) // 2 + 1))
        elif name in INTEGER_PARAMS:
            values[name] = int(rng.integers(int(lo), int(hi) + 1))
        else:
            values[name] = float(rng.uniform(lo, hi))
    return GenParams(family, values)


def gen_dataset(family: str, ranges: dict, count: int, attributes: bool = False,
                seed: SeedLike = 0, threads: int = 1) -> Dataset:
    """Sample `count` (graph, params) records with per-parameter uniform ranges.

    Integer parameters are uniform over the inclusive integer range, probabilities
    uniform over the interval. Per-record seeds are derived from `seed`, so output
    is deterministic regardless of `threads`.
    """
    if count < 1:
        raise ValidationError(f"count must be >= 1, got {count}")
    _validate_ranges(family, ranges)
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    children = root.spawn(count)

    def build(child) -> tuple[Graph, GenParams]:
        rng = np.random.default_rng(child)
        params = _sample_params(family, ranges, rng)
        params.validate()
        g = _generate(params, rng)
        if attributes:
            g = g.with_attributes((float(rng.random()),) * g.n)
        return g, params

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(build, children))
    else:
        records = [build(c) for c in children]
    return Dataset(records)


# ---------------------------------------------------------------------------
# JSON Lines persistence


def _record_to_json(g: Graph, params) -> str:
    rec = {}
    if params is not None:
        rec["family"] = params.family
        rec["params"] = {k: params.values[k] for k in params.names()}
    rec["n"] = g.n
    rec["edges"] = [[i, j] for i, j in g.sorted_edges()]
    if g.attributes is not None:
        rec["attrs"] = list(g.attributes)
    return json.dumps(rec, separators=(",", ":"))


def save_dataset(ds: Dataset, path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for g, params in ds.records:
            fh.write(_record_to_json(g, params))
            fh.write("\n")


def load_dataset(path) -> Dataset:
    path = Path(path)
    records = []
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"{path}:{lineno}: invalid JSON record: {exc}") from exc
            g = Graph(int(rec["n"]),
                      frozenset((int(i), int(j)) for i, j in rec.get("edges", [])),
                      tuple(rec["attrs"]) if "attrs" in rec else None)
            params = None
            if "family" in rec:
                params = GenParams(rec["family"], dict(rec["params"]))
                params.validate()
            records.append((g, params))
    if not records:
        raise ValidationError(f"{path}: empty dataset")
    return Dataset(records)
