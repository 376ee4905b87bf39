"""Metrics oracles: brute-force MI, hand-computed examples, networkx stats.

mutual_information is cross-checked against a dictionary-based estimator
written from the definition, and graph_stats against networkx. The mig
fixtures pin down the gap normalization and the exclusion rules.
"""

import math

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphdis import (Graph, discretize, entropy, graph_stats, mig, mig_attr,
                      mutual_information, pearson)
from graphdis.errors import ValidationError


def brute_mi(a, b) -> float:
    """Textbook MI from raw counts, no numpy, no shared code with the package."""
    n = len(a)
    joint, ca, cb = {}, {}, {}
    for x, y in zip(a, b):
        joint[(x, y)] = joint.get((x, y), 0) + 1
        ca[x] = ca.get(x, 0) + 1
        cb[y] = cb.get(y, 0) + 1
    total = 0.0
    for (x, y), c in joint.items():
        pxy = c / n
        total += pxy * math.log(pxy / ((ca[x] / n) * (cb[y] / n)))
    return total


def to_nx(g: Graph) -> nx.Graph:
    h = nx.Graph()
    h.add_nodes_from(range(g.n))
    h.add_edges_from(g.edges)
    return h


class TestDiscretize:
    def test_integer_columns_keep_exact_labels(self):
        vals = np.array([3, 7, 3, 11, 7])
        labels = discretize(vals, bins=20)
        assert labels.tolist() == [0, 1, 0, 2, 1]

    def test_equal_width_on_continuous(self):
        vals = np.array([0.0, 0.49, 0.51, 1.0])
        labels = discretize(vals, bins=2)
        assert labels.tolist() == [0, 0, 1, 1]

    def test_max_value_lands_in_last_bin(self):
        labels = discretize(np.linspace(0, 1, 101), bins=20)
        assert labels.max() == 19
        assert labels.min() == 0

    def test_constant_column_single_label(self):
        assert set(discretize(np.full(10, 2.5)).tolist()) == {0}

    def test_too_many_integer_values_fall_back_to_bins(self):
        labels = discretize(np.arange(100), bins=20)
        assert labels.max() == 19

    def test_rejects_bad_input(self):
        with pytest.raises(ValidationError):
            discretize([1.0, 2.0], bins=1)
        with pytest.raises(ValidationError):
            discretize([])
        with pytest.raises(ValidationError):
            discretize([1.0, np.nan])


class TestMutualInformation:
    def test_known_joint_value(self):
        # joint counts [[2,1],[1,2]] over 6 samples
        a = [0, 0, 0, 1, 1, 1]
        b = [0, 0, 1, 0, 1, 1]
        expected = (2 / 3) * math.log(4 / 3) + (1 / 3) * math.log(2 / 3)
        got = mutual_information(a, b)
        assert got == pytest.approx(expected, abs=1e-15)
        assert round(got, 4) == 0.0566

    def test_identical_columns_give_entropy(self):
        a = [0, 1, 2, 0, 1, 2, 2]
        assert mutual_information(a, a) == pytest.approx(entropy(a), abs=1e-15)

    def test_independent_uniform_is_zero(self):
        a = [0, 0, 1, 1]
        b = [0, 1, 0, 1]
        assert mutual_information(a, b) == pytest.approx(0.0, abs=1e-15)

    def test_matches_brute_force_on_100_fixtures(self):
        rng = np.random.default_rng(42)
        for _ in range(100):
            size = int(rng.integers(2, 200))
            a = rng.integers(0, int(rng.integers(2, 12)), size)
            b = rng.integers(0, int(rng.integers(2, 12)), size)
            assert mutual_information(a, b) == pytest.approx(
                brute_mi(a.tolist(), b.tolist()), abs=1e-12)

    def test_rejects_mismatched_or_empty(self):
        with pytest.raises(ValidationError):
            mutual_information([0, 1], [0, 1, 2])
        with pytest.raises(ValidationError):
            mutual_information([], [])

    @given(st.lists(st.integers(0, 5), min_size=1, max_size=60),
           st.integers(0, 2 ** 31))
    @settings(max_examples=100, deadline=None)
    def test_symmetry_exact(self, a, seed):
        b = np.random.default_rng(seed).integers(0, 4, len(a)).tolist()
        assert mutual_information(a, b) == mutual_information(b, a)

    @given(st.lists(st.integers(0, 5), min_size=2, max_size=60),
           st.integers(0, 2 ** 31))
    @settings(max_examples=100, deadline=None)
    def test_bounded_by_marginal_entropies(self, a, seed):
        b = np.random.default_rng(seed).integers(0, 4, len(a)).tolist()
        m = mutual_information(a, b)
        assert m >= -1e-12
        assert m <= min(entropy(a), entropy(b)) + 1e-12


class TestMig:
    def _perfect(self, n=10_000, seed=0):
        rng = np.random.default_rng(seed)
        v = np.column_stack([rng.integers(0, 10, n), rng.integers(0, 8, n)])
        z = np.column_stack([v[:, 0].astype(float), v[:, 1].astype(float),
                             rng.normal(size=n), rng.normal(size=n)])
        return z, v

    def test_perfect_disentanglement_near_one(self):
        z, v = self._perfect()
        report = mig(z, v)
        assert abs(report.score - 1.0) <= 0.02
        assert report.j_max.tolist() == [0, 1]

    def test_independent_latents_near_zero(self):
        rng = np.random.default_rng(1)
        n = 10_000
        v = np.column_stack([rng.integers(0, 10, n), rng.integers(0, 8, n)])
        z = rng.normal(size=(n, 4))
        assert mig(z, v).score <= 0.02

    def test_duplicated_top_latent_kills_the_gap(self):
        rng = np.random.default_rng(2)
        n = 5000
        v = rng.integers(0, 10, n).reshape(-1, 1)
        copy = v[:, 0].astype(float)
        z = np.column_stack([copy, copy, rng.normal(size=n)])
        assert mig(z, v).score == pytest.approx(0.0, abs=1e-12)

    def test_gap_normalized_by_factor_entropy(self):
        # one factor fully captured by z0, nothing else informative:
        # score = (H - mi_second) / H, computable by hand from the report
        z, v = self._perfect(n=2000, seed=3)
        report = mig(z, v[:, :1])
        h = report.factor_entropy[0]
        order = np.sort(report.mi[0])[::-1]
        assert report.score == pytest.approx((order[0] - order[1]) / h, abs=1e-15)

    def test_latent_column_permutation_invariance(self):
        z, v = self._perfect(n=3000, seed=4)
        perm = [2, 0, 3, 1]
        base = mig(z, v)
        shuffled = mig(z[:, perm], v)
        assert shuffled.score == base.score
        assert np.array_equal(shuffled.mi, base.mi[:, perm])
        for k in range(v.shape[1]):
            assert perm[shuffled.j_max[k]] == base.j_max[k]

    def test_factor_relabeling_invariance(self):
        z, v = self._perfect(n=3000, seed=5)
        base = mig(z, v)
        relabeled = mig(z, 3 * v + 7)
        assert relabeled.score == base.score
        assert np.array_equal(relabeled.mi, base.mi)

    def test_zero_entropy_factor_excluded_and_flagged(self):
        z, v = self._perfect(n=2000, seed=6)
        v_const = np.column_stack([v[:, 0], np.full(v.shape[0], 3.0)])
        report = mig(z, v_const, factor_names=("n", "flat"))
        assert report.excluded == (1,)
        assert report.per_factor_gap[1] == 0.0
        only_first = mig(z, v[:, :1])
        assert report.score == pytest.approx(only_first.score, abs=1e-15)

    def test_all_zero_entropy_is_an_error(self):
        z = np.random.default_rng(7).normal(size=(50, 3))
        with pytest.raises(ValidationError):
            mig(z, np.full((50, 2), 1.0))

    def test_shape_validation(self):
        rng = np.random.default_rng(8)
        with pytest.raises(ValidationError):
            mig(rng.normal(size=(10, 1)), rng.integers(0, 3, (10, 1)))
        with pytest.raises(ValidationError):
            mig(rng.normal(size=(10, 3)), rng.integers(0, 3, (9, 1)))
        with pytest.raises(ValidationError):
            mig(rng.normal(size=(1, 3)), rng.integers(0, 3, (1, 1)))
        with pytest.raises(ValidationError):
            mig(rng.normal(size=(10, 3)), rng.integers(0, 3, (10, 2)),
                factor_names=("just_one",))

    def test_report_round_trip_files(self, tmp_path):
        z, v = self._perfect(n=500, seed=9)
        report = mig(z, v, factor_names=("n", "p"))
        report.save_json(tmp_path / "mig.json")
        report.save_mi_csv(tmp_path / "mi.csv")
        import json
        loaded = json.loads((tmp_path / "mig.json").read_text())
        assert loaded["score"] == report.score
        assert loaded["factor_names"] == ["n", "p"]
        rows = (tmp_path / "mi.csv").read_text().strip().split("\n")
        assert rows[0] == "factor,z_0,z_1,z_2,z_3"
        assert len(rows) == 3


class TestMigAttr:
    def test_single_responsive_latent(self):
        rng = np.random.default_rng(10)
        n = 4000
        omega = rng.choice(np.linspace(0, 1, 11), n)
        dz = np.abs(rng.normal(size=(n, 4))) * 0.01
        dz[:, 2] = omega * 2.0
        result = mig_attr(omega, dz)
        assert result.j_max == 2
        assert result.score > 0.5

    def test_unresponsive_latents_near_zero(self):
        rng = np.random.default_rng(11)
        n = 4000
        omega = rng.choice(np.linspace(0, 1, 11), n)
        assert mig_attr(omega, np.abs(rng.normal(size=(n, 4)))).score <= 0.02

    def test_constant_level_is_an_error(self):
        with pytest.raises(ValidationError):
            mig_attr(np.zeros(100), np.abs(np.random.default_rng(0).normal(size=(100, 4))))

    def test_needs_two_latents(self):
        with pytest.raises(ValidationError):
            mig_attr(np.array([0.0, 1.0]), np.array([[0.1], [0.2]]))


class TestGraphStats:
    def test_star_assortativity_minus_one(self):
        g = Graph(5, frozenset({(0, 1), (0, 2), (0, 3), (0, 4)}))
        assert graph_stats(g).assortativity == pytest.approx(-1.0, abs=1e-12)

    def test_triangle_stats(self):
        g = Graph(3, frozenset({(0, 1), (0, 2), (1, 2)}))
        s = graph_stats(g)
        assert s.avg_degree == 2.0
        assert s.clustering == 1.0
        assert s.degree_histogram == (0.0, 0.0, 1.0)

    def test_path_clustering_zero(self):
        g = Graph(4, frozenset({(0, 1), (1, 2), (2, 3)}))
        assert graph_stats(g).clustering == 0.0

    def test_histogram_sums_to_one(self):
        g = Graph(6, frozenset({(0, 1), (0, 2), (3, 4)}))
        assert sum(graph_stats(g).degree_histogram) == pytest.approx(1.0)

    def test_empty_graph(self):
        s = graph_stats(Graph(3))
        assert s.edge_count == 0
        assert s.avg_degree == 0.0
        assert s.assortativity == 0.0
        assert s.degree_histogram == (1.0,)

    def test_matches_networkx_on_random_graphs(self):
        rng = np.random.default_rng(12)
        checked_assort = 0
        for _ in range(40):
            n = int(rng.integers(3, 15))
            iu, ju = np.triu_indices(n, k=1)
            keep = rng.random(iu.size) < 0.4
            g = Graph(n, frozenset(zip(iu[keep].tolist(), ju[keep].tolist())))
            h = to_nx(g)
            s = graph_stats(g)
            assert s.clustering == pytest.approx(nx.average_clustering(h), abs=1e-12)
            if g.edges:
                degs = g.degrees()
                ends = np.array([(degs[i], degs[j]) for i, j in g.edges])
                if np.var(ends) > 0 and not np.isnan(
                        r := nx.degree_assortativity_coefficient(h)):
                    assert s.assortativity == pytest.approx(r, abs=1e-10)
                    checked_assort += 1
        assert checked_assort >= 10


class TestPearson:
    def test_known_value(self):
        assert round(pearson([1, 2, 3], [1, 2, 4]), 4) == 0.9820

    def test_perfect_and_inverse(self):
        assert pearson([1, 2, 3], [2, 4, 6]) == pytest.approx(1.0, abs=1e-15)
        assert pearson([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0, abs=1e-15)

    def test_zero_variance_raises(self):
        with pytest.raises(ValidationError):
            pearson([1, 1, 1], [1, 2, 3])

    def test_length_checks(self):
        with pytest.raises(ValidationError):
            pearson([1, 2], [1, 2, 3])
        with pytest.raises(ValidationError):
            pearson([1], [1])
