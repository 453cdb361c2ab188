"""Cosine-similarity edge rewiring driven by the edge expert's embeddings.

Drops the k% of existing edges with the smallest pairwise cosine similarity
and adds the same number of absent pairs with the largest similarity; added
edges carry their (unclamped) cosine value as weight so gradients can flow
back into the embeddings through them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotEnoughNonEdges, ZeroNormRow
from .graph import Graph, NormalizedAdjacency, sym_normalize


@dataclass
class ModifiedAdjacency:
    s: Graph                  # weighted rewired graph
    s_tilde: Graph            # binary graph after deletion only
    kept: np.ndarray            # (n_kept, 2) retained original edges
    deleted: np.ndarray         # (m, 2) removed original edges
    deleted_weights: np.ndarray  # cosine values of the removed edges
    added: np.ndarray           # (m, 2) inserted non-edges
    added_weights: np.ndarray   # cosine values of the inserted pairs
    k_percent: float
    m: int

    def dump_tsv(self, path):
        """Deleted/added edge lists with cosines, for homophily auditing."""
        with open(path, "w") as f:
            f.write("action\ti\tj\tcosine\n")
            for (i, j), c in zip(self.deleted, self.deleted_weights):
                f.write(f"deleted\t{i}\t{j}\t{float(c)!r}\n")
            for (i, j), c in zip(self.added, self.added_weights):
                f.write(f"added\t{i}\t{j}\t{float(c)!r}\n")


def _normalized_rows(h: np.ndarray) -> np.ndarray:
    h = np.asarray(h, dtype=np.float64)
    norms = np.sqrt((h * h).sum(axis=1))
    zero = np.nonzero(norms == 0)[0]
    if len(zero):
        raise ZeroNormRow(f"zero-norm embedding row {int(zero[0])}")
    return h / norms[:, None]


def cosine_matrix(h: np.ndarray) -> np.ndarray:
    """Dense pairwise cosine similarity matrix of the embedding rows."""
    g = _normalized_rows(h)
    return g @ g.T


def cosine_pairs(h: np.ndarray, i: np.ndarray, j: np.ndarray) -> np.ndarray:
    g = _normalized_rows(h)
    return (g[i] * g[j]).sum(axis=1)


def reconstruct(a: Graph, h_prime: np.ndarray, k_percent: float) -> ModifiedAdjacency:
    """Rewire floor(k/100 * |E|) edges by cosine ranking.

    Ties are broken lexicographically: ascending pair order for deletions,
    descending for additions, so the selection is deterministic.
    """
    if not 0 <= k_percent <= 100:
        raise ValueError(f"k_percent {k_percent} outside [0, 100]")
    n = a.n_nodes
    ei, ej, _ = a.edge_arrays()
    n_e = len(ei)
    m = int(np.floor(k_percent / 100.0 * n_e))

    if m == 0:
        edges = np.stack([ei, ej], axis=1)
        return ModifiedAdjacency(
            s=a.copy(), s_tilde=a.copy(), kept=edges,
            deleted=np.empty((0, 2), dtype=np.int64),
            deleted_weights=np.empty(0),
            added=np.empty((0, 2), dtype=np.int64),
            added_weights=np.empty(0), k_percent=k_percent, m=0,
        )

    cos = cosine_matrix(h_prime)

    # deletions: smallest cosine among existing edges
    edge_cos = cos[ei, ej]
    order = np.lexsort((ej, ei, edge_cos))
    del_sel = order[:m]
    keep_mask = np.ones(n_e, dtype=bool)
    keep_mask[del_sel] = False
    deleted = np.stack([ei[del_sel], ej[del_sel]], axis=1)
    deleted_weights = edge_cos[del_sel]
    kept = np.stack([ei[keep_mask], ej[keep_mask]], axis=1)

    # additions: largest cosine among absent pairs (upper triangle only)
    cand = np.triu(np.ones((n, n), dtype=bool), k=1)
    cand[ei, ej] = False
    ci, cj = np.nonzero(cand)
    if len(ci) < m:
        raise NotEnoughNonEdges(f"need {m} non-edges, only {len(ci)} available")
    cand_cos = cos[ci, cj]
    # exact top-m without sorting every non-edge: everything strictly above
    # the m-th value is in, ties at the threshold resolved lex-descending
    thresh = np.partition(cand_cos, len(cand_cos) - m)[len(cand_cos) - m]
    above = np.nonzero(cand_cos > thresh)[0]
    at = np.nonzero(cand_cos == thresh)[0]
    need = m - len(above)
    tie_order = np.lexsort((-cj[at], -ci[at]))[:need]
    add_sel = np.concatenate([above, at[tie_order]])
    add_order = add_sel[np.lexsort((-cj[add_sel], -ci[add_sel], -cand_cos[add_sel]))]
    added = np.stack([ci[add_order], cj[add_order]], axis=1)
    added_weights = cand_cos[add_order]

    s_tilde = (
        Graph.from_edges(n, kept) if len(kept) else Graph.empty(n)
    )
    all_edges = np.concatenate([kept, added])
    all_weights = np.concatenate([np.ones(len(kept)), added_weights])
    s = Graph.from_edges(n, all_edges, all_weights)
    return ModifiedAdjacency(
        s=s, s_tilde=s_tilde, kept=kept, deleted=deleted,
        deleted_weights=deleted_weights, added=added,
        added_weights=added_weights, k_percent=k_percent, m=m,
    )


def weighted_normalize_for_downstream(mod: ModifiedAdjacency) -> NormalizedAdjacency:
    """Symmetric normalization of S + I using weighted degrees."""
    return sym_normalize(mod.s)
