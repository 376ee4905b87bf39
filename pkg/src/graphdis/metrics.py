"""Disentanglement and topology metrics.

Mutual information is estimated from joint histograms after discretizing each
continuous column into equal-width bins (integer-valued columns with at most
`bins` distinct values keep their exact values as labels). All information
quantities are in nats.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .graphs import Graph


def discretize(values, bins: int = 20) -> np.ndarray:
    """Map values to integer bin labels in [0, bins).

    Equal-width bins over [min, max]. A constant column collapses to a single
    label; an integer-valued column with <= bins distinct values is kept exact
    (each value its own label) so integer factors like n are never split
    across bin edges.
    """
    if bins < 2:
        raise ValidationError(f"bins must be >= 2, got {bins}")
    x = np.asarray(values, dtype=np.float64).ravel()
    if x.size == 0:
        raise ValidationError("cannot discretize an empty column")
    if not np.all(np.isfinite(x)):
        raise ValidationError("cannot discretize non-finite values")
    uniq = np.unique(x)
    if uniq.size == 1:
        return np.zeros(x.size, dtype=np.int64)
    if uniq.size <= bins and np.all(uniq == np.round(uniq)):
        return np.searchsorted(uniq, x).astype(np.int64)
    lo, hi = uniq[0], uniq[-1]
    labels = np.floor((x - lo) / (hi - lo) * bins).astype(np.int64)
    return np.minimum(labels, bins - 1)


def entropy(labels) -> float:
    """Shannon entropy in nats of a discrete label column."""
    lab = np.asarray(labels)
    if lab.size == 0:
        raise ValidationError("entropy of an empty column is undefined")
    _, counts = np.unique(lab, return_counts=True)
    p = counts / lab.size
    return float(-np.sum(p * np.log(p)))


def mutual_information(a, b) -> float:
    """Joint-histogram mutual information in nats between two label columns."""
    la = np.asarray(a)
    lb = np.asarray(b)
    if la.size != lb.size:
        raise ValidationError(f"label columns differ in length: {la.size} vs {lb.size}")
    if la.size == 0:
        raise ValidationError("mutual information of empty columns is undefined")
    ua, ia = np.unique(la, return_inverse=True)
    ub, ib = np.unique(lb, return_inverse=True)
    joint = np.bincount(ia * ub.size + ib, minlength=ua.size * ub.size)
    joint = joint.reshape(ua.size, ub.size) / la.size
    pa = joint.sum(axis=1, keepdims=True)
    pb = joint.sum(axis=0, keepdims=True)
    nz = joint > 0
    terms = joint[nz] * np.log(joint[nz] / (pa * pb)[nz])
    # summing in sorted order makes the estimate exactly symmetric in (a, b):
    # the term multiset is identical either way, only traversal order changes
    return float(np.sum(np.sort(terms)))


@dataclass(frozen=True)
class MigReport:
    """MI matrix between factors (rows) and latents (columns) plus the gap score.

    Zero-entropy factors contribute no gap; their indices are listed in
    `excluded` and their gap entries are 0.
    """

    mi: np.ndarray
    factor_entropy: np.ndarray
    per_factor_gap: np.ndarray
    j_max: np.ndarray
    score: float
    factor_names: tuple
    excluded: tuple

    def to_dict(self) -> dict:
        return {
            "score": self.score,
            "per_factor_gap": [float(g) for g in self.per_factor_gap],
            "j_max": [int(j) for j in self.j_max],
            "factor_entropy": [float(h) for h in self.factor_entropy],
            "mi": [[float(v) for v in row] for row in self.mi],
            "factor_names": list(self.factor_names),
            "excluded": list(self.excluded),
        }

    def save_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    def save_mi_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["factor"] + [f"z_{j}" for j in range(self.mi.shape[1])])
            for k, name in enumerate(self.factor_names):
                writer.writerow([name] + [f"{v:.12g}" for v in self.mi[k]])


def mig(z_matrix, v_matrix, bins: int = 20, factor_names=None) -> MigReport:
    """Mutual information gap between latent codes and generative factors.

    For each factor the gap is (highest MI - second highest MI) / H(factor),
    averaged over factors with positive entropy.
    """
    z = np.asarray(z_matrix, dtype=np.float64)
    v = np.asarray(v_matrix, dtype=np.float64)
    if z.ndim != 2 or v.ndim != 2:
        raise ValidationError("z_matrix and v_matrix must be 2-dimensional")
    if z.shape[0] != v.shape[0]:
        raise ValidationError(f"sample counts differ: {z.shape[0]} vs {v.shape[0]}")
    if z.shape[0] < 2:
        raise ValidationError("mig needs at least 2 samples")
    n, j_dim = z.shape
    k_dim = v.shape[1]
    if j_dim < 2:
        raise ValidationError("the gap needs at least 2 latent dimensions")
    if k_dim < 1:
        raise ValidationError("mig needs at least 1 factor")
    if factor_names is None:
        names = tuple(f"v_{k}" for k in range(k_dim))
    else:
        names = tuple(factor_names)
        if len(names) != k_dim:
            raise ValidationError(f"{len(names)} factor names for {k_dim} factors")

    z_labels = [discretize(z[:, j], bins) for j in range(j_dim)]
    v_labels = [discretize(v[:, k], bins) for k in range(k_dim)]

    mi = np.zeros((k_dim, j_dim))
    for k in range(k_dim):
        for j in range(j_dim):
            mi[k, j] = mutual_information(v_labels[k], z_labels[j])
    h = np.array([entropy(v_labels[k]) for k in range(k_dim)])

    gaps = np.zeros(k_dim)
    j_max = np.argmax(mi, axis=1)
    excluded = []
    for k in range(k_dim):
        if h[k] <= 0.0:
            excluded.append(k)
            continue
        order = np.sort(mi[k])[::-1]
        gaps[k] = (order[0] - order[1]) / h[k]
    included = [k for k in range(k_dim) if k not in excluded]
    if not included:
        raise ValidationError("every factor has zero entropy; the gap is undefined")
    score = float(np.mean(gaps[included]))
    return MigReport(mi=mi, factor_entropy=h, per_factor_gap=gaps,
                     j_max=j_max, score=score, factor_names=names,
                     excluded=tuple(excluded))


@dataclass(frozen=True)
class AttrMigResult:
    """Single-factor gap between a randomization level and latent responses."""

    score: float
    j_max: int
    mi_per_latent: np.ndarray
    factor_entropy: float

    def to_dict(self) -> dict:
        return {
            "score": self.score,
            "j_max": self.j_max,
            "mi_per_latent": [float(v) for v in self.mi_per_latent],
            "factor_entropy": self.factor_entropy,
        }


def mig_attr(delta_omega, delta_z_abs, bins: int = 20) -> AttrMigResult:
    """Gap variant for one factor: the randomization fraction against |delta z|.

    Returns (top MI - runner-up MI) / H(delta_omega) and the index of the
    latent carrying the top MI.
    """
    f = np.asarray(delta_omega, dtype=np.float64).ravel()
    dz = np.asarray(delta_z_abs, dtype=np.float64)
    if dz.ndim != 2:
        raise ValidationError("delta_z_abs must be 2-dimensional")
    if f.size != dz.shape[0]:
        raise ValidationError(f"row counts differ: {f.size} vs {dz.shape[0]}")
    if dz.shape[1] < 2:
        raise ValidationError("the gap needs at least 2 latent dimensions")
    f_labels = discretize(f, bins)
    h = entropy(f_labels)
    if h <= 0.0:
        raise ValidationError("randomization level is constant; the gap is undefined")
    mi = np.array([mutual_information(f_labels, discretize(dz[:, j], bins))
                   for j in range(dz.shape[1])])
    j_max = int(np.argmax(mi))
    runner_up = np.max(np.delete(mi, j_max)) if mi.size > 1 else 0.0
    score = float((mi[j_max] - runner_up) / h)
    return AttrMigResult(score=score, j_max=j_max, mi_per_latent=mi,
                         factor_entropy=float(h))


# -- topology statistics -------------------------------------------------------


@dataclass(frozen=True)
class GraphStats:
    """Degree histogram plus the three scalar summaries used throughout."""

    n: int
    edge_count: int
    avg_degree: float
    clustering: float
    assortativity: float
    degree_histogram: tuple

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "edge_count": self.edge_count,
            "avg_degree": self.avg_degree,
            "clustering": self.clustering,
            "assortativity": self.assortativity,
            "degree_histogram": list(self.degree_histogram),
        }


def graph_stats(g: Graph) -> GraphStats:
    """Average degree, mean local clustering, degree assortativity, degree histogram."""
    if g.n < 1:
        raise ValidationError("statistics need at least one node")
    degrees = g.degrees()
    neigh = g.neighbor_lists()
    adj = {e for e in g.edges}

    clustering_sum = 0.0
    for v in range(g.n):
        d = degrees[v]
        if d < 2:
            continue
        nb = neigh[v]
        triangles = 0
        for i in range(d):
            for k in range(i + 1, d):
                a, b = nb[i], nb[k]
                if ((a, b) if a < b else (b, a)) in adj:
                    triangles += 1
        clustering_sum += triangles / (d * (d - 1) / 2)
    clustering = clustering_sum / g.n

    if g.edges:
        xs = np.empty(2 * len(g.edges))
        ys = np.empty(2 * len(g.edges))
        for idx, (i, j) in enumerate(g.sorted_edges()):
            xs[2 * idx], ys[2 * idx] = degrees[i], degrees[j]
            xs[2 * idx + 1], ys[2 * idx + 1] = degrees[j], degrees[i]
        if np.var(xs) == 0.0 or np.var(ys) == 0.0:
            assortativity = 0.0
        else:
            assortativity = pearson(xs, ys)
    else:
        assortativity = 0.0

    counts = np.bincount(degrees, minlength=int(degrees.max(initial=0)) + 1)
    histogram = tuple(float(c) / g.n for c in counts)
    return GraphStats(n=g.n, edge_count=len(g.edges),
                      avg_degree=float(2.0 * len(g.edges) / g.n),
                      clustering=float(clustering),
                      assortativity=float(assortativity),
                      degree_histogram=histogram)


def pearson(xs, ys) -> float:
    """Sample Pearson correlation; raises on degenerate (zero variance) input."""
    x = np.asarray(xs, dtype=np.float64).ravel()
    y = np.asarray(ys, dtype=np.float64).ravel()
    if x.size != y.size:
        raise ValidationError(f"columns differ in length: {x.size} vs {y.size}")
    if x.size < 2:
        raise ValidationError("correlation needs at least 2 points")
    xc = x - x.mean()
    yc = y - y.mean()
    denom = np.sqrt(np.sum(xc * xc) * np.sum(yc * yc))
    if denom == 0.0:
        raise ValidationError("correlation is undefined for zero-variance input")
    return float(np.sum(xc * yc) / denom)
