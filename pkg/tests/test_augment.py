import numpy as np

from degnn import pairs
from degnn.augment import AugConfig, make_views, negative_graph, rewire_view, shuffle_feature_view
from degnn.graph import Graph, validate


def random_graph(n, density, seed):
    rng = np.random.default_rng(seed)
    edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < density]
    return Graph.from_edges(n, edges)


class TestPairRanks:
    def test_encode_decode_round_trip(self):
        for n in (2, 3, 7, 20):
            ranks = np.arange(pairs.n_pairs(n))
            i, j = pairs.decode(ranks, n)
            assert np.all(i < j)
            assert np.array_equal(pairs.encode(i, j, n), ranks)

    def test_enumeration_order(self):
        i, j = pairs.decode(np.arange(pairs.n_pairs(4)), 4)
        got = list(zip(i.tolist(), j.tolist()))
        assert got == [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]


class TestRewireView:
    def test_p_zero_identity(self):
        g = random_graph(10, 0.3, 0)
        assert rewire_view(g, 0.0, 4) == g

    def test_p_one_complement(self):
        g = random_graph(8, 0.4, 1)
        comp = rewire_view(g, 1.0, 4)
        total = pairs.n_pairs(8)
        assert comp.n_edges == total - g.n_edges
        assert comp.edge_index_set().isdisjoint(g.edge_index_set())

    def test_flip_fraction_matches_p(self):
        g = random_graph(40, 0.2, 2)
        n_pairs = pairs.n_pairs(40)
        p = 0.4
        fractions = []
        for seed in range(100):
            rewired = rewire_view(g, p, seed)
            flipped = len(g.edge_index_set() ^ rewired.edge_index_set())
            fractions.append(flipped / n_pairs)
        tol = 3 * np.sqrt(p * (1 - p) / n_pairs)
        assert abs(np.mean(fractions) - p) < tol

    def test_outputs_valid_graphs(self):
        g = random_graph(15, 0.3, 3)
        for p in (0.2, 0.4, 0.6):
            for seed in range(5):
                assert validate(rewire_view(g, p, seed)) is None

    def test_involution_with_fixed_mask(self):
        # flipping the same pair set twice restores the original graph
        g = random_graph(9, 0.4, 4)
        n = g.n_nodes
        mask = np.random.default_rng(5).choice(pairs.n_pairs(n), size=10, replace=False)

        def flip(graph, mask_ranks):
            ranks = pairs.encode(*graph.edge_arrays()[:2], n)
            out = np.setxor1d(ranks, mask_ranks)
            i, j = pairs.decode(out, n)
            return Graph.from_edges(n, np.stack([i, j], axis=1))

        assert flip(flip(g, mask), mask) == g


class TestShuffleFeatureView:
    def test_q_zero_identity(self):
        x = np.random.default_rng(0).random((6, 5))
        assert np.array_equal(shuffle_feature_view(x, 0.0, 1), x)

    def test_row_multiset_preserved(self):
        x = np.random.default_rng(1).random((10, 8))
        for q in (0.3, 0.6, 1.0):
            for seed in range(5):
                out = shuffle_feature_view(x, q, seed)
                assert np.array_equal(np.sort(out, axis=1), np.sort(x, axis=1))

    def test_specific_row_sorted_unchanged(self):
        x = np.array([[1.0, 2.0, 3.0, 4.0]])
        out = shuffle_feature_view(x, 0.7, 42)
        assert np.array_equal(np.sort(out[0]), np.array([1.0, 2.0, 3.0, 4.0]))

    def test_q_one_actually_shuffles(self):
        x = np.arange(200, dtype=np.float64).reshape(10, 20)
        moved = sum(
            not np.array_equal(shuffle_feature_view(x, 1.0, s), x) for s in range(10)
        )
        assert moved == 10


class TestNegativeGraph:
    def test_only_nonedges_selected(self):
        g = random_graph(20, 0.3, 0)
        x = np.random.default_rng(0).random((20, 4))
        for seed in range(10):
            g_neg, _ = negative_graph(g, x, seed)
            assert g_neg.edge_index_set().isdisjoint(g.edge_index_set())
            assert validate(g_neg) is None

    def test_almost_complete_graph_single_candidate(self):
        n = 5
        all_pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
        g = Graph.from_edges(n, all_pairs[:-1])  # complete minus (3,4)
        x = np.eye(n)
        for seed in range(20):
            g_neg, _ = negative_graph(g, x, seed)
            assert g_neg.edge_index_set() <= {3 * n + 4}

    def test_expected_negative_edge_count(self):
        # binomial over non-edges at rate |E|/(N^2 - |E|)
        g = random_graph(50, 0.2, 1)
        x = np.random.default_rng(1).random((50, 3))
        n_e = g.n_edges
        n_nonedges = pairs.n_pairs(50) - n_e
        rate = n_e / (50 * 50 - n_e)
        counts = [negative_graph(g, x, s)[0].n_edges for s in range(200)]
        mean = n_nonedges * rate
        sigma = np.sqrt(n_nonedges * rate * (1 - rate))
        assert abs(np.mean(counts) - mean) < 3 * sigma / np.sqrt(200)

    def test_features_row_permuted(self):
        g = random_graph(12, 0.3, 2)
        x = np.random.default_rng(2).random((12, 5))
        _, x_neg = negative_graph(g, x, 7)
        # same multiset of rows
        key = lambda m: sorted(map(tuple, m.tolist()))
        assert key(x_neg) == key(x)


class TestMakeViews:
    def test_p_q_zero_views_are_original(self):
        g = random_graph(10, 0.3, 0)
        x = np.random.default_rng(0).random((10, 4))
        views = make_views(g, x, AugConfig(0.0, 0.0, 5))
        assert views.g1[0] == g and views.g2[0] == g and views.g3[0] == g
        assert np.array_equal(views.g1[1], x)
        assert np.array_equal(views.g2[1], x)
        assert np.array_equal(views.g3[1], x)

    def test_same_seed_bitwise_identical(self):
        g = random_graph(10, 0.3, 1)
        x = np.random.default_rng(1).random((10, 4))
        a = make_views(g, x, AugConfig(0.4, 0.4, 8))
        b = make_views(g, x, AugConfig(0.4, 0.4, 8))
        assert a.g1[0] == b.g1[0]
        assert np.array_equal(a.g2[1], b.g2[1])
        assert a.neg[0] == b.neg[0]
        assert np.array_equal(a.neg[1], b.neg[1])

    def test_shared_draw_invariants(self):
        g = random_graph(10, 0.3, 2)
        x = np.random.default_rng(2).random((10, 4))
        views = make_views(g, x, AugConfig(0.4, 0.4, 9))
        assert views.g3[0] == views.g1[0]
        assert np.array_equal(views.g3[1], views.g2[1])
        assert views.g2[0] == g
        assert np.array_equal(views.g1[1], x)
