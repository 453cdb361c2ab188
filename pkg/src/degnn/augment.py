"""Contrastive-view generation: edge rewiring, within-row feature shuffling,
and the corrupted negative graph.

Views per draw: g1 = (A_rewired, X), g2 = (A, X_shuffled),
g3 = (A_rewired, X_shuffled), plus a negative (A_neg, X_row_permuted).
g1/g3 share one rewiring draw and g2/g3 share one shuffling draw.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import pairs
from .graph import Graph


@dataclass
class AugConfig:
    p: float = 0.4  # pair membership flip probability
    q: float = 0.4  # per-entry row shuffling probability
    seed: int = 0


@dataclass
class ViewSet:
    g1: tuple  # (Graph, features)
    g2: tuple
    g3: tuple
    neg: tuple


def rewire_view(a: Graph, p: float, seed: int) -> Graph:
    """Flip membership of each unordered pair independently with prob p.

    The Bernoulli mask lives on the upper triangle and is mirrored, so the
    result stays symmetric and binary with no self-loops.
    """
    rng = np.random.default_rng(seed)
    n = a.n_nodes
    total = pairs.n_pairs(n)
    n_flips = int(rng.binomial(total, p))
    flip_ranks = rng.choice(total, size=n_flips, replace=False)
    i, j, _ = a.edge_arrays()
    edge_ranks = pairs.encode(i, j, n)
    flipped = np.setxor1d(edge_ranks, flip_ranks)
    if len(flipped) == 0:
        return Graph.empty(n)
    fi, fj = pairs.decode(flipped, n)
    return Graph.from_edges(n, np.stack([fi, fj], axis=1))


def shuffle_feature_view(x: np.ndarray, q: float, seed: int) -> np.ndarray:
    """Per row: select each entry with prob q, then uniformly permute the
    selected values among the selected positions. Row multisets are
    preserved exactly."""
    rng = np.random.default_rng(seed)
    out = np.array(x, copy=True)
    if q == 0:
        return out
    for row in out:
        sel = np.nonzero(rng.random(len(row)) < q)[0]
        if len(sel) > 1:
            row[sel] = row[sel[rng.permutation(len(sel))]]
    return out


def negative_graph(a: Graph, x: np.ndarray, seed: int):
    """Corrupted graph: edges drawn only among non-edges of A at rate
    |E| / (N^2 - |E|), features row-permuted."""
    rng = np.random.default_rng(seed)
    n = a.n_nodes
    n_e = a.n_edges
    total = pairs.n_pairs(n)
    n_nonedges = total - n_e
    rate = min(n_e / max(n * n - n_e, 1), 1.0)
    m = int(rng.binomial(n_nonedges, rate))
    if m > 0:
        from .noise import _sample_nonedges

        ranks = _sample_nonedges(rng, a, m)
        i, j = pairs.decode(ranks, n)
        g_neg = Graph.from_edges(n, np.stack([i, j], axis=1))
    else:
        g_neg = Graph.empty(n)
    x_neg = np.asarray(x)[rng.permutation(n)].copy()
    return g_neg, x_neg


def make_views(a: Graph, x: np.ndarray, cfg: AugConfig) -> ViewSet:
    """One rewiring draw, one shuffling draw, one negative draw."""
    ss = np.random.SeedSequence([int(cfg.seed)])
    s_rewire, s_shuffle, s_neg = [int(s.generate_state(1)[0]) for s in ss.spawn(3)]
    a_tilde = rewire_view(a, cfg.p, s_rewire)
    x_tilde = shuffle_feature_view(x, cfg.q, s_shuffle)
    g_neg, x_neg = negative_graph(a, x, s_neg)
    return ViewSet(
        g1=(a_tilde, np.asarray(x)),
        g2=(a, x_tilde),
        g3=(a_tilde, x_tilde),
        neg=(g_neg, x_neg),
    )
