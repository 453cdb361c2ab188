"""Planted-cluster toy datasets for sanity checks and demos."""

from __future__ import annotations

import numpy as np

from .data import Dataset
from .graph import Graph


def planted_clusters(n_nodes: int = 40, n_classes: int = 2, d: int = 8,
                     p_in: float = 0.5, p_out: float = 0.05,
                     separation: float = 3.0, noise: float = 0.5,
                     seed: int = 0) -> Dataset:
    """Stochastic block model graph with linearly separable features.

    Class means are orthogonal-ish random directions scaled by `separation`;
    node features are means plus isotropic Gaussian noise.
    """
    rng = np.random.default_rng(seed)
    labels = np.arange(n_nodes) % n_classes
    edges = []
    for i in range(n_nodes):
        for j in range(i + 1, n_nodes):
            p = p_in if labels[i] == labels[j] else p_out
            if rng.random() < p:
                edges.append((i, j))
    graph = Graph.from_edges(n_nodes, edges) if edges else Graph.empty(n_nodes)
    # orthonormal class means guarantee separability for any seed
    q, _ = np.linalg.qr(rng.standard_normal((d, n_classes)))
    means = separation * q.T
    features = (means[labels] + noise * rng.standard_normal((n_nodes, d))).astype(np.float32)
    return Dataset(graph, features, labels.astype(np.int64), n_classes).check()
