"""Poisoning-style noise injection: edge remove+insert and Gaussian feature
noise. Noise is generated once, before training, and the same noisy data is
meant to be used for both training and evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass, asdict

import numpy as np

from . import pairs
from .errors import NotEnoughNonEdges
from .graph import Graph


@dataclass
class NoiseSpec:
    edge_ratio: float = 0.0
    lam: float = 0.0
    seed: int = 0

    def to_dict(self):
        return asdict(self)


def _sample_nonedges(rng, g: Graph, m: int, forbidden=None) -> np.ndarray:
    """Draw m distinct pair ranks absent from g (and from `forbidden`),
    uniformly without replacement, by rejection over all pair ranks."""
    total = pairs.n_pairs(g.n_nodes)
    ei, ej, _ = g.edge_arrays()
    existing = set(pairs.encode(ei, ej, g.n_nodes).tolist())
    if forbidden:
        existing = existing | set(forbidden)
    free = total - len(existing)
    if m > free:
        raise NotEnoughNonEdges(f"need {m} non-edges, only {free} available")
    chosen, seen = [], set()
    while len(chosen) < m:
        batch = rng.integers(0, total, size=max(4 * (m - len(chosen)), 16))
        for r in batch:
            r = int(r)
            if r in existing or r in seen:
                continue
            seen.add(r)
            chosen.append(r)
            if len(chosen) == m:
                break
    return np.array(chosen, dtype=np.int64)


def inject_edge_noise(g: Graph, ratio: float, seed: int) -> Graph:
    """Remove round(ratio*|E|) random edges and insert as many fake ones.

    Edge count, symmetry, and self-loop-freedom are preserved; deterministic
    in the seed.
    """
    rng = np.random.default_rng(seed)
    i, j, _ = g.edge_arrays()
    n_e = len(i)
    m = int(round(ratio * n_e))
    if m == 0:
        return g.copy()
    remove_idx = rng.choice(n_e, size=m, replace=False)
    keep = np.ones(n_e, dtype=bool)
    keep[remove_idx] = False
    inserted = _sample_nonedges(rng, g, m)
    ii, jj = pairs.decode(inserted, g.n_nodes)
    new_i = np.concatenate([i[keep], ii])
    new_j = np.concatenate([j[keep], jj])
    return Graph.from_edges(g.n_nodes, np.stack([new_i, new_j], axis=1))


def inject_feature_noise(x: np.ndarray, lam: float, seed: int) -> np.ndarray:
    """Add N(0, (lam*r)^2) noise per entry, where r is the mean over nodes of
    each node's maximum feature value."""
    x = np.asarray(x)
    if lam == 0:
        return x.copy()
    rng = np.random.default_rng(seed)
    r = float(x.max(axis=1).mean())
    eps = rng.standard_normal(size=x.shape)
    return (x + lam * r * eps).astype(x.dtype)
