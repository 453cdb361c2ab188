"""Acceptance suite. One printed PASS/FAIL/SKIP line per criterion.

Criteria 4 through 8 need the public Cora/Citeseer citation bundles, which
cannot be downloaded in a network-restricted environment. Point the
DEGNN_DATA environment variable at a directory containing cora/ and
citeseer/ bundle subdirectories (or place them under ./data/) to run them;
otherwise they skip with an explicit message.
"""

import contextlib
import os
import time

import numpy as np
import pytest

from degnn import engine
from degnn.augment import AugConfig
from degnn.data import load_bundle, make_split
from degnn.experts import (
    EncoderParams,
    _view_embeddings,
    contrastive_loss,
    encode_t,
    epoch_views,
    pretrain_expert,
)
from degnn.graph import Graph
from degnn.metrics import homophily_sweep
from degnn.pipeline import DiffAdj, TrainConfig, train
from degnn.reconstruct import reconstruct
from degnn.synthetic import planted_clusters

from test_engine import gradcheck
from test_reconstruct import brute_force_rewire


@contextlib.contextmanager
def criterion(num, name):
    try:
        yield
    except pytest.skip.Exception as e:
        print(f"criterion {num} ({name}): SKIP - {e}")
        raise
    except BaseException:
        print(f"criterion {num} ({name}): FAIL")
        raise
    print(f"criterion {num} ({name}): PASS")


def _bundle_dir(name):
    for root in (os.environ.get("DEGNN_DATA"), os.path.join(os.path.dirname(__file__), "..", "data")):
        if root:
            path = os.path.join(root, name)
            if os.path.exists(os.path.join(path, "meta.json")):
                return path
    return None


def _require_bundle(name):
    path = _bundle_dir(name)
    if path is None:
        pytest.skip(
            f"{name} bundle not found (no network access to download it); "
            f"set DEGNN_DATA or create data/{name}/ to enable this criterion"
        )
    return load_bundle(path)


def random_graph(n, density, rng):
    edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < density]
    return Graph.from_edges(n, edges) if edges else Graph.empty(n)


def test_criterion_1_gradient_correctness():
    with criterion(1, "gradient correctness"):
        t0 = time.time()
        ds = planted_clusters(n_nodes=12, d=5, seed=1)
        x = ds.features.astype(np.float64)
        a = ds.graph
        vs = epoch_views(a, x, AugConfig(0.4, 0.4, 2), 0)

        def contrastive_builder(w, slope):
            return lambda: contrastive_loss(*_view_embeddings(w, slope, x, a, vs))

        worst = 0.0
        # node expert loss and edge expert loss share the implementation but
        # get independent random parameters
        for seed in (3, 4):
            w = engine.param(engine.glorot(np.random.default_rng(seed), 5, 4))
            slope = engine.param(np.array(0.25))
            w.zero_grad(), slope.zero_grad()
            worst = max(worst, gradcheck(contrastive_builder(w, slope), [w, slope]))

        # composite objective: classification loss through the rewired
        # adjacency plus both contrastive terms
        labels = ds.labels
        train_idx = np.arange(6)
        w_phi = engine.param(engine.glorot(np.random.default_rng(5), 5, 4))
        s_phi = engine.param(np.array(0.25))
        w_psi = engine.param(engine.glorot(np.random.default_rng(6), 5, 4))
        s_psi = engine.param(np.array(0.25))
        w1 = engine.param(engine.glorot(np.random.default_rng(7), 4, 3))
        w2 = engine.param(engine.glorot(np.random.default_rng(8), 3, 2))
        params = [w_phi, s_phi, w_psi, s_psi, w1, w2]

        # the rewiring selection is a constant within one training step, so
        # the finite-difference oracle must condition on the same masks
        hp0 = encode_t(w_psi, s_psi, x, a).value
        mod = reconstruct(a, hp0, 10.0)

        def composite():
            h = encode_t(w_phi, s_phi, x, a)
            hp = encode_t(w_psi, s_psi, x, a)
            adj = DiffAdj(hp, mod, a.n_nodes)
            layer1 = engine.relu(adj.apply(engine.matmul(h, w1)))
            logits = adj.apply(engine.matmul(layer1, w2))
            l_gnn = engine.softmax_cross_entropy(
                engine.gather_rows(logits, train_idx), labels[train_idx]
            )
            l_n = contrastive_loss(*_view_embeddings(w_phi, s_phi, x, a, vs))
            l_e = contrastive_loss(*_view_embeddings(w_psi, s_psi, x, a, vs))
            return engine.add(l_gnn, engine.add(engine.scale(l_n, 0.1),
                                                engine.scale(l_e, 0.1)))

        for p in params:
            p.zero_grad()
        worst = max(worst, gradcheck(composite, params))
        elapsed = time.time() - t0
        assert worst < 1e-4, f"max relative error {worst}"
        assert elapsed < 30.0, f"took {elapsed:.1f}s"


def test_criterion_2_reconstruction_oracle():
    with criterion(2, "reconstruction matches brute-force oracle"):
        t0 = time.time()
        rng = np.random.default_rng(1)
        checked = 0
        while checked < 1000:
            n = int(rng.integers(3, 7))
            g = random_graph(n, 0.5, rng)
            if g.n_edges == 0:
                continue
            h = rng.standard_normal((n, 3))
            k = float(rng.uniform(0, 100))
            m = int(np.floor(k / 100.0 * g.n_edges))
            if m > n * (n - 1) // 2 - g.n_edges:
                continue
            mod = reconstruct(g, h, k)
            expected = brute_force_rewire(g, h, k)
            i, j, w = mod.s.edge_arrays()
            got = {(int(a), int(b)): float(c) for a, b, c in zip(i, j, w)}
            assert set(got) == set(expected)
            for e in expected:
                assert got[e] == expected[e] or abs(got[e] - expected[e]) < 1e-15
            checked += 1
        elapsed = time.time() - t0
        assert elapsed < 10.0, f"took {elapsed:.1f}s"


def test_criterion_3_edge_count_conservation():
    with criterion(3, "edge count conservation"):
        rng = np.random.default_rng(2)
        graphs = 0
        while graphs < 100:
            n = int(rng.integers(6, 30))
            g = random_graph(n, 0.25, rng)
            if g.n_edges == 0:
                continue
            h = rng.standard_normal((n, 4))
            for k in (1, 5, 10, 15, 20, 25):
                mod = reconstruct(g, h, float(k))
                assert mod.s.adj.nnz // 2 == g.n_edges
            graphs += 1


def _run_seeds(ds, regime, seeds, dtype, **cfg_kw):
    accs = []
    for seed in seeds:
        engine.set_dtype(dtype)
        split = make_split(ds, seed)
        cfg = TrainConfig(regime=regime, seed=seed,
                          aug=AugConfig(0.4, 0.4, seed), **cfg_kw)
        accs.append(train(ds, split, cfg).test_accuracy)
    engine.set_dtype(np.float64)
    return accs


def test_criterion_4_gcn_baseline_cora():
    with criterion(4, "GCN baseline accuracy on clean Cora"):
        ds = _require_bundle("cora")
        accs = _run_seeds(ds, "gcn_baseline", range(10), np.float32, hidden=32)
        mean = float(np.mean(accs))
        assert 0.785 <= mean <= 0.830, f"mean {mean:.4f}"


def test_criterion_5_degnn_i_cora():
    with criterion(5, "DEGNN-I improves over GCN on clean Cora"):
        ds = _require_bundle("cora")
        gcn = float(np.mean(_run_seeds(ds, "gcn_baseline", range(10),
                                       np.float32, hidden=32)))
        # grid tuned on validation accuracy of the clean graph
        best_val, best_cell = -1.0, None
        for alpha in (0.0, 0.1, 1.0, 10.0):
            for beta in (0.0, 0.1, 1.0, 10.0):
                engine.set_dtype(np.float32)
                split = make_split(ds, 0)
                cfg = TrainConfig(regime="degnn_i", alpha=alpha, beta=beta,
                                  k_percent=10.0, aug=AugConfig(0.4, 0.4, 0),
                                  seed=0)
                rep = train(ds, split, cfg)
                val = rep.val_accuracy[rep.best_epoch]
                if val > best_val:
                    best_val, best_cell = val, (alpha, beta)
        alpha, beta = best_cell
        accs = _run_seeds(ds, "degnn_i", range(10), np.float32,
                          alpha=alpha, beta=beta, k_percent=10.0)
        mean = float(np.mean(accs))
        assert mean >= gcn + 0.005, f"DEGNN-I {mean:.4f} vs GCN {gcn:.4f}"
        assert mean >= 0.81, f"mean {mean:.4f}"


def test_criterion_6_degnn_ii_citeseer():
    with criterion(6, "DEGNN-II improves over GCN on clean Citeseer"):
        ds = _require_bundle("citeseer")
        gcn = float(np.mean(_run_seeds(ds, "gcn_baseline", range(10),
                                       np.float32, hidden=32)))
        accs = _run_seeds(ds, "degnn_ii", range(10), np.float32, k_percent=10.0)
        mean = float(np.mean(accs))
        assert mean >= gcn + 0.01, f"DEGNN-II {mean:.4f} vs GCN {gcn:.4f}"


def test_criterion_7_feature_noise_robustness():
    with criterion(7, "node expert beats GCN under feature noise"):
        from dataclasses import replace

        from degnn.noise import inject_feature_noise

        for name in ("cora", "citeseer"):
            ds = _require_bundle(name)
            noisy = replace(ds, features=inject_feature_noise(ds.features, 0.15, 0))
            gcn = float(np.mean(_run_seeds(noisy, "gcn_baseline", range(10),
                                           np.float32, hidden=32)))
            degnn = float(np.mean(_run_seeds(noisy, "degnn_i", range(10),
                                             np.float32, alpha=0.1, beta=0.0,
                                             edge_expert=False)))
            assert degnn >= gcn + 0.01, f"{name}: {degnn:.4f} vs {gcn:.4f}"


def test_criterion_8_homophily_promotion():
    with criterion(8, "rewiring promotes homophily on noisy Cora"):
        ds = _require_bundle("cora")
        engine.set_dtype(np.float32)
        params = EncoderParams.init(ds.features.shape[1], 128, seed=0, tag="edge")
        params, _ = pretrain_expert(params, ds, AugConfig(0.4, 0.4, 0))
        records = homophily_sweep(ds, [0.0, 0.05, 0.1, 0.15], params, k_percent=10.0)
        engine.set_dtype(np.float64)
        by_ratio = {}
        for r in records:
            by_ratio.setdefault(r.noise_ratio, {})[r.graph_tag] = r
        for ratio, pair in by_ratio.items():
            assert pair["refined"].edge_homophily >= pair["noisy"].edge_homophily
            assert pair["refined"].node_homophily >= pair["noisy"].node_homophily


def test_criterion_9_determinism():
    with criterion(9, "bitwise-deterministic loss curves"):
        ds = planted_clusters(n_nodes=40, seed=7)
        for dtype in (np.float32, np.float64):
            reports = []
            for _ in range(2):
                engine.set_dtype(dtype)
                split = make_split(ds, 3, per_class=10, n_val=10, n_test=10)
                cfg = TrainConfig(regime="degnn_i", alpha=0.1, beta=0.1,
                                  aug=AugConfig(0.4, 0.4, 3), d_prime=8,
                                  hidden=8, epochs_pretrain=20, epochs_main=30,
                                  patience_pretrain=10, patience=10, seed=3)
                reports.append(train(ds, split, cfg))
            a, b = reports
            assert a.losses == b.losses  # float equality, hence bitwise
            assert a.val_accuracy == b.val_accuracy
            assert a.test_accuracy == b.test_accuracy
        engine.set_dtype(np.float64)


def test_criterion_10_toy_end_to_end():
    with criterion(10, "toy two-cluster graph, all regimes"):
        t0 = time.time()
        ds = planted_clusters(n_nodes=40, seed=7)
        # independent separability pre-check with a brute-force linear model
        from sklearn.linear_model import LogisticRegression

        clf = LogisticRegression(max_iter=1000).fit(ds.features, ds.labels)
        assert clf.score(ds.features, ds.labels) == 1.0, "toy features not separable"
        for regime in ("gcn_baseline", "degnn_i", "degnn_ii"):
            for seed in range(5):
                split = make_split(ds, seed, per_class=10, n_val=10, n_test=10)
                cfg = TrainConfig(regime=regime, alpha=0.1, beta=0.1,
                                  k_percent=10.0, aug=AugConfig(0.4, 0.4, seed),
                                  d_prime=8, hidden=8, epochs_pretrain=40,
                                  epochs_main=300, patience_pretrain=10,
                                  patience=100, seed=seed)
                report = train(ds, split, cfg)
                assert report.test_accuracy >= 0.9, (
                    f"{regime} seed {seed}: {report.test_accuracy}"
                )
        elapsed = time.time() - t0
        assert elapsed < 60.0, f"took {elapsed:.1f}s"
