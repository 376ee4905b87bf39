"""Experiment drivers built on a trained model.

- latent traversals decoded into graphs (single axis or 2D grids), with an
  SVG contact-sheet renderer for quick inspection
- dataset encode sweeps feeding the MI-gap score
- attribute randomization sweeps measuring which latent reacts to attribute
  changes while topology is held fixed
- topology statistics of walk-sampled subgraphs against their host graph
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .canonical import EncodedSample, threshold_decode, to_padded
from .errors import ValidationError
from .graphs import Dataset, Graph, randomize_attributes
from .metrics import (AttrMigResult, GraphStats, MigReport, graph_stats, mig,
                      mig_attr)
from .model import GraphVae, kl_terms

ENCODE_CHUNK = 256


def _encode_chunked(model: GraphVae, samples: list) -> tuple:
    """Posterior (mu, log_var) for a sample list, in fixed-size chunks.

    Chunking is fixed so identical inputs land in identically shaped batches
    and reproduce bit-identical outputs.
    """
    mus, lvs = [], []
    for start in range(0, len(samples), ENCODE_CHUNK):
        mu, lv = model.encode_batch(samples[start:start + ENCODE_CHUNK])
        mus.append(mu)
        lvs.append(lv)
    return np.concatenate(mus, axis=0), np.concatenate(lvs, axis=0)


# -- latent traversals ---------------------------------------------------------


@dataclass(frozen=True)
class TraversalSpec:
    axis: int
    lo: float = -2.0
    hi: float = 2.0
    steps: int = 9
    base_z: tuple | None = None  # anchor for the non-traversed coordinates; zeros if None
    threshold: float = 0.5

    def validate(self, j_latent: int) -> None:
        if not (0 <= self.axis < j_latent):
            raise ValidationError(f"axis {self.axis} outside 0..{j_latent - 1}")
        if self.steps < 1:
            raise ValidationError(f"steps must be >= 1, got {self.steps}")
        if not (self.lo < self.hi):
            raise ValidationError(f"range needs lo < hi, got [{self.lo}, {self.hi}]")
        if self.base_z is not None and len(self.base_z) != j_latent:
            raise ValidationError(
                f"base_z has {len(self.base_z)} coordinates, expected {j_latent}")
        if not (0.0 < self.threshold < 1.0):
            raise ValidationError(f"threshold must lie in (0, 1), got {self.threshold}")

    def values(self) -> np.ndarray:
        if self.steps == 1:
            return np.array([self.lo])
        return np.linspace(self.lo, self.hi, self.steps)


@dataclass(frozen=True)
class TraversalCell:
    z: np.ndarray
    sample: EncodedSample
    graph: Graph

    def to_dict(self) -> dict:
        d = {"z": [float(v) for v in self.z],
             "n": self.graph.n,
             "edges": [[i, j] for i, j in self.graph.sorted_edges()]}
        if self.graph.attributes is not None:
            d["attrs"] = list(self.graph.attributes)
        return d


def _decode_cell(model: GraphVae, z: np.ndarray, threshold: float) -> TraversalCell:
    sample = model.decode(z)
    graph = threshold_decode(sample, threshold,
                             with_attributes=model.config.use_attributes)
    return TraversalCell(z=z.copy(), sample=sample, graph=graph)


def traverse(model: GraphVae, spec: TraversalSpec) -> list:
    """Decode graphs along one latent axis, other coordinates held at base_z."""
    spec.validate(model.config.j_latent)
    base = _base_z(model, spec.base_z)
    cells = []
    for val in spec.values():
        z = base.copy()
        z[spec.axis] = val
        cells.append(_decode_cell(model, z, spec.threshold))
    return cells


def traverse_grid(model: GraphVae, row_spec: TraversalSpec,
                  col_spec: TraversalSpec) -> list:
    """2D traversal: rows vary row_spec.axis, columns vary col_spec.axis.

    The anchor point and threshold come from row_spec.
    """
    row_spec.validate(model.config.j_latent)
    col_spec.validate(model.config.j_latent)
    if row_spec.axis == col_spec.axis:
        raise ValidationError(f"grid axes must differ, both are {row_spec.axis}")
    base = _base_z(model, row_spec.base_z)
    grid = []
    for rv in row_spec.values():
        row = []
        for cv in col_spec.values():
            z = base.copy()
            z[row_spec.axis] = rv
            z[col_spec.axis] = cv
            row.append(_decode_cell(model, z, row_spec.threshold))
        grid.append(row)
    return grid


def _base_z(model: GraphVae, base_z) -> np.ndarray:
    j = model.config.j_latent
    if base_z is None:
        return np.zeros(j)
    return np.asarray(base_z, dtype=np.float64)


# -- encode sweep ---------------------------------------------------------------


@dataclass(frozen=True)
class SweepResult:
    z_matrix: np.ndarray
    log_var_matrix: np.ndarray
    v_matrix: np.ndarray
    factor_names: tuple
    mig: MigReport
    kl_per_dim: np.ndarray

    def save_csv(self, path) -> None:
        j = self.z_matrix.shape[1]
        header = [f"z_{d}" for d in range(j)] + list(self.factor_names)
        rows = np.concatenate([self.z_matrix, self.v_matrix], axis=1)
        with open(path, "w", newline="") as fh:
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(repr(float(v)) for v in row) + "\n")


def encode_sweep(model: GraphVae, dataset: Dataset, bins: int = 20) -> SweepResult:
    """Encode a dataset to posterior means and score the MI gap against factors."""
    graphs = dataset.graphs()
    if not graphs:
        raise ValidationError("cannot sweep an empty dataset")
    samples = [to_padded(g, model.config.n_max) for g in graphs]
    mu, log_var = _encode_chunked(model, samples)
    v = dataset.factor_matrix()
    report = mig(mu, v, bins=bins, factor_names=dataset.factor_names())
    kl_per_dim = kl_terms(mu, log_var).mean(axis=0)
    return SweepResult(z_matrix=mu, log_var_matrix=log_var, v_matrix=v,
                       factor_names=dataset.factor_names(), mig=report,
                       kl_per_dim=kl_per_dim)


# -- attribute randomization sweep ------------------------------------------------


@dataclass(frozen=True)
class RandomizationResult:
    delta_omega: np.ndarray
    delta_z_abs: np.ndarray
    attr_mig: AttrMigResult

    @property
    def score(self) -> float:
        return self.attr_mig.score

    @property
    def j_max(self) -> int:
        return self.attr_mig.j_max

    def to_dict(self) -> dict:
        d = self.attr_mig.to_dict()
        d["rows"] = int(self.delta_omega.size)
        return d

    def save_rows_csv(self, path) -> None:
        j = self.delta_z_abs.shape[1]
        with open(path, "w", newline="") as fh:
            fh.write(",".join(["delta_omega"] + [f"dz_{d}" for d in range(j)]) + "\n")
            for f, row in zip(self.delta_omega, self.delta_z_abs):
                fh.write(",".join([repr(float(f))] + [repr(float(v)) for v in row]) + "\n")


def randomization_sweep(model: GraphVae, dataset: Dataset, omega_grid,
                        repeats: int = 5, seed: int = 0,
                        bins: int = 20) -> RandomizationResult:
    """Measure |delta mu| responses to re-drawing attributes on a node fraction.

    For every graph, grid level and repeat, the attributes of
    round(level * n) nodes are re-drawn and the absolute change of the
    posterior mean is recorded. Level 0 re-draws nothing: the randomized
    graph IS the original, so its row is exactly zero.
    """
    grid = [float(f) for f in omega_grid]
    if len(set(grid)) < 2:
        raise ValidationError("omega_grid needs at least 2 distinct levels")
    for f in grid:
        if not (0.0 <= f <= 1.0):
            raise ValidationError(f"randomization level {f} outside [0, 1]")
    if repeats < 1:
        raise ValidationError(f"repeats must be >= 1, got {repeats}")
    graphs = dataset.graphs()
    if not graphs:
        raise ValidationError("cannot sweep an empty dataset")
    for g in graphs:
        if g.attributes is None:
            raise ValidationError("randomization sweep requires attributed graphs")

    n_max = model.config.n_max
    base_mu, _ = _encode_chunked(model, [to_padded(g, n_max) for g in graphs])

    n, l, r = len(graphs), len(grid), repeats
    children = np.random.SeedSequence(seed).spawn(n * l * r)
    delta_omega = np.empty(n * l * r)
    delta_z = np.zeros((n * l * r, model.config.j_latent))
    pending: list = []  # (row, graph_index, sample) awaiting batch encode
    row = 0
    for i, g in enumerate(graphs):
        for li, f in enumerate(grid):
            for rep in range(r):
                delta_omega[row] = f
                child = children[(i * l + li) * r + rep]
                g2 = randomize_attributes(g, f, np.random.default_rng(child))
                if g2 is not g:
                    pending.append((row, i, to_padded(g2, n_max)))
                row += 1
    if pending:
        mu2, _ = _encode_chunked(model, [s for _, _, s in pending])
        for (row_idx, i, _), mu_row in zip(pending, mu2):
            delta_z[row_idx] = np.abs(mu_row - base_mu[i])
    result = mig_attr(delta_omega, delta_z, bins=bins)
    return RandomizationResult(delta_omega=delta_omega, delta_z_abs=delta_z,
                               attr_mig=result)


# -- walk-sample statistics --------------------------------------------------------


@dataclass(frozen=True)
class ComparisonReport:
    population: GraphStats
    n_samples: int
    sample_mean: dict
    sample_std: dict
    sample_histogram_mean: tuple

    def to_dict(self) -> dict:
        return {
            "population": self.population.to_dict(),
            "n_samples": self.n_samples,
            "sample_mean": dict(self.sample_mean),
            "sample_std": dict(self.sample_std),
            "sample_histogram_mean": list(self.sample_histogram_mean),
        }

    def save_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def sample_vs_population(host: Graph, samples: list) -> ComparisonReport:
    """Aggregate per-sample topology statistics next to the host graph's."""
    if not samples:
        raise ValidationError("no sampled graphs to compare")
    pop = graph_stats(host)
    stats = [graph_stats(g) for g in samples]
    keys = ("avg_degree", "clustering", "assortativity")
    mean = {k: float(np.mean([getattr(s, k) for s in stats])) for k in keys}
    std = {k: float(np.std([getattr(s, k) for s in stats])) for k in keys}
    max_len = max(len(s.degree_histogram) for s in stats)
    hists = np.zeros((len(stats), max_len))
    for i, s in enumerate(stats):
        hists[i, :len(s.degree_histogram)] = s.degree_histogram
    return ComparisonReport(population=pop, n_samples=len(samples),
                            sample_mean=mean, sample_std=std,
                            sample_histogram_mean=tuple(float(v)
                                                        for v in hists.mean(axis=0)))


# -- SVG rendering -----------------------------------------------------------------


def render_contact_sheet(grid, path, scale: int = 4) -> None:
    """Write an SVG matrix-heatmap sheet for a 2D grid of decoded samples.

    Accepts TraversalCells or EncodedSamples. Each cell draws the adjacency
    probabilities as grayscale squares with the mask probabilities down the
    diagonal. Output is deterministic for identical inputs.
    """
    rows = [[c.sample if isinstance(c, TraversalCell) else c for c in row]
            for row in grid]
    if not rows or not rows[0]:
        raise ValidationError("contact sheet needs at least one cell")
    n = rows[0][0].n_max
    cell = n * scale
    gap, margin = 6, 8
    n_rows, n_cols = len(rows), max(len(r) for r in rows)
    width = 2 * margin + n_cols * (cell + gap) - gap
    height = 2 * margin + n_rows * (cell + gap) - gap

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
             f'height="{height}" viewBox="0 0 {width} {height}">',
             f'<rect width="{width}" height="{height}" fill="white"/>']
    for ri, row in enumerate(rows):
        for ci, sample in enumerate(row):
            x0 = margin + ci * (cell + gap)
            y0 = margin + ri * (cell + gap)
            parts.append(f'<g transform="translate({x0},{y0})">')
            parts.append(f'<rect width="{cell}" height="{cell}" fill="none" '
                         f'stroke="#999" stroke-width="1"/>')
            for i in range(n):
                mv = float(sample.mask[i])
                if mv >= 0.02:
                    parts.append(_square(i, i, scale, mv, "#2b6cb0"))
                for j in range(i + 1, n):
                    av = float(sample.adj[i, j])
                    if av >= 0.02:
                        parts.append(_square(i, j, scale, av, "#111111"))
                        parts.append(_square(j, i, scale, av, "#111111"))
            parts.append("</g>")
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts))
        fh.write("\n")


def _square(i: int, j: int, scale: int, opacity: float, color: str) -> str:
    return (f'<rect x="{j * scale}" y="{i * scale}" width="{scale}" '
            f'height="{scale}" fill="{color}" fill-opacity="{opacity:.3f}"/>')
