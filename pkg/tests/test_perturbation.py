import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import cycle_graph, random_graph
from netdenoise import perturbation as pt
from netdenoise.errors import ParameterError
from netdenoise.graphs import Graph
from netdenoise.perturbation import PerturbationParams, perturb, perturbation_stats

TRIALS = 10**4


def counts(g, p, q, mode):
    ins = np.empty(TRIALS)
    dele = np.empty(TRIALS)
    for seed in range(TRIALS):
        st_ = perturbation_stats(g, perturb(g, PerturbationParams(p, q, seed), mode=mode))
        ins[seed], dele[seed] = st_.inserted, st_.deleted
    return ins, dele


def check_binomial(samples, trials, prob):
    mean, var = trials * prob, trials * prob * (1 - prob)
    sigma_of_mean = math.sqrt(var / len(samples))
    assert abs(samples.mean() - mean) <= 4 * sigma_of_mean
    assert abs(samples.var(ddof=1) - var) <= 0.15 * var


class TestParams:
    @pytest.mark.parametrize("p,q", [(-0.1, 0), (1.1, 0), (0, -0.01), (0, 1.5)])
    def test_ranges(self, p, q):
        with pytest.raises(ParameterError):
            PerturbationParams(p, q)

    def test_unknown_mode(self):
        with pytest.raises(ParameterError):
            perturb(Graph.complete(3), PerturbationParams(0, 0), mode="lazy")


class TestEdgeCases:
    @pytest.mark.parametrize("mode", ["fast", "exact"])
    def test_identity(self, mode, rng):
        g = random_graph(rng, 40, 0.2)
        obs = perturb(g, PerturbationParams(0, 0, 5), mode=mode)
        assert obs.same_edges(g) and obs.label == "observed"

    @pytest.mark.parametrize("mode", ["fast", "exact"])
    def test_delete_all(self, mode, rng):
        assert perturb(random_graph(rng, 40, 0.2), PerturbationParams(1, 0, 5), mode=mode).num_edges == 0

    @pytest.mark.parametrize("mode", ["fast", "exact"])
    def test_insert_all(self, mode, rng):
        assert perturb(random_graph(rng, 40, 0.2), PerturbationParams(0, 1, 5), mode=mode).num_edges == 780

    def test_complete_graph_has_no_room(self):
        assert perturb(Graph.complete(10), PerturbationParams(0, 0.5, 1)).num_edges == 45

    def test_dense_graph_uses_enumeration_fallback(self):
        # a single non-edge among 1225 pairs: rejection often exhausts its budget here
        g = Graph.from_keys(50, np.setdiff1d(Graph.complete(50).edge_keys(), [0 * 50 + 1]))
        obs = perturb(g, PerturbationParams(0, 1, 3))
        assert obs.num_edges == 1225

    def test_determinism(self, rng):
        g = random_graph(rng, 60, 0.1)
        a = perturb(g, PerturbationParams(0.3, 0.05, 99))
        b = perturb(g, PerturbationParams(0.3, 0.05, 99))
        c = perturb(g, PerturbationParams(0.3, 0.05, 100))
        assert a.same_edges(b) and not a.same_edges(c)

    def test_deletions_independent_of_q(self, rng):
        g = random_graph(rng, 80, 0.1)
        kept = [set(np.intersect1d(g.edge_keys(), perturb(g, PerturbationParams(0.3, q, 4)).edge_keys()).tolist())
                for q in (0.0, 0.01, 0.2)]
        assert kept[0] == kept[1] == kept[2]


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 40), st.floats(0, 1), st.floats(0, 1), st.integers(0, 2**63), st.floats(0, 1))
def test_containment_and_bookkeeping(n, p, q, seed, density):
    g = random_graph(np.random.default_rng(seed % 1000), n, density)
    for pp, qq in ((p, 0.0), (0.0, q), (p, q)):
        obs = perturb(g, PerturbationParams(pp, qq, seed))
        s = perturbation_stats(g, obs)
        assert s.deleted + s.retained == g.num_edges
        assert s.inserted + s.retained == obs.num_edges
        if qq == 0.0:
            assert set(obs.edge_keys().tolist()) <= set(g.edge_keys().tolist())
        if pp == 0.0:
            assert set(obs.edge_keys().tolist()) >= set(g.edge_keys().tolist())


class TestStats:
    def test_same(self):
        g = cycle_graph(6)
        assert perturbation_stats(g, g) == pt.PerturbationStats(0, 0, 6)

    def test_all_deleted(self):
        assert perturbation_stats(Graph.complete(3), Graph.empty(3)) == pt.PerturbationStats(3, 0, 0)

    def test_all_inserted(self):
        assert perturbation_stats(Graph.empty(3), Graph.complete(3)) == pt.PerturbationStats(0, 3, 0)

    def test_mismatched_n(self):
        with pytest.raises(ParameterError):
            perturbation_stats(Graph.empty(3), Graph.empty(4))


class TestDistribution:
    def test_cycle_example(self):
        g = cycle_graph(8)
        ins, dele = counts(g, 0.5, 0.1, "fast")
        retained = 8 - dele
        assert abs(retained.mean() - 4.0) <= 3 * math.sqrt(8 * 0.25 / TRIALS)
        assert abs(ins.mean() - 2.0) <= 3 * math.sqrt(20 * 0.09 / TRIALS)

    @pytest.mark.parametrize("mode", ["fast", "exact"])
    def test_binomial_counts(self, mode):
        g = random_graph(np.random.default_rng(7), 30, 0.3)
        m_non = 30 * 29 // 2 - g.num_edges
        ins, dele = counts(g, 0.25, 0.05, mode)
        check_binomial(ins, m_non, 0.05)
        check_binomial(dele, g.num_edges, 0.25)

    def test_fast_insertion_uniform_over_non_edges(self):
        g = cycle_graph(12)
        non_edges = np.setdiff1d(Graph.complete(12).edge_keys(), g.edge_keys())
        hits = np.zeros(len(non_edges))
        trials = 4000
        for seed in range(trials):
            obs = perturb(g, PerturbationParams(0, 0.2, seed))
            hits += np.isin(non_edges, obs.edge_keys())
        freq = hits / trials
        assert np.all(np.abs(freq - 0.2) <= 4 * math.sqrt(0.16 / trials))
