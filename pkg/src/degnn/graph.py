"""Sparse undirected graph container and GCN-style symmetric normalization.

A graph is stored as a symmetric scipy CSR matrix with no diagonal entries.
Edges are canonicalized to sorted (i, j) pairs with i < j so that repeated
runs produce bitwise-identical structures.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .errors import DimensionMismatch, NonPositiveDegree


class Graph:
    """Undirected, optionally weighted graph without self-loops.

    The adjacency is kept as a CSR matrix with sorted indices; the upper
    triangle is the canonical edge list.
    """

    def __init__(self, n_nodes: int, adj: sp.csr_matrix):
        self.n_nodes = int(n_nodes)
        adj = adj.tocsr().astype(np.float64)
        adj.sort_indices()
        self.adj = adj

    # -- construction -----------------------------------------------------

    @classmethod
    def from_edges(cls, n_nodes, edges, weights=None) -> "Graph":
        """Build from unordered (i, j) pairs; duplicates and reversed
        duplicates collapse to a single undirected edge (last weight wins
        is avoided by requiring consistency upstream; here we dedupe)."""
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if weights is None:
            weights = np.ones(len(edges), dtype=np.float64)
        else:
            weights = np.asarray(weights, dtype=np.float64)
        i = np.minimum(edges[:, 0], edges[:, 1])
        j = np.maximum(edges[:, 0], edges[:, 1])
        if len(i) > 0:
            if i.min() < 0 or j.max() >= n_nodes:
                raise DimensionMismatch("edge index out of range")
            if np.any(i == j):
                raise DimensionMismatch("self-loop in edge list")
            key = i * n_nodes + j
            order = np.argsort(key, kind="stable")
            key, i, j, weights = key[order], i[order], j[order], weights[order]
            keep = np.concatenate([[True], key[1:] != key[:-1]])
            i, j, weights = i[keep], j[keep], weights[keep]
        rows = np.concatenate([i, j])
        cols = np.concatenate([j, i])
        vals = np.concatenate([weights, weights])
        adj = sp.csr_matrix((vals, (rows, cols)), shape=(n_nodes, n_nodes))
        return cls(n_nodes, adj)

    @classmethod
    def empty(cls, n_nodes: int) -> "Graph":
        return cls(n_nodes, sp.csr_matrix((n_nodes, n_nodes)))

    # -- views ------------------------------------------------------------

    def edge_arrays(self):
        """Canonical upper-triangle edges as (i, j, w) arrays, lex sorted."""
        coo = sp.triu(self.adj, k=1).tocoo()
        order = np.lexsort((coo.col, coo.row))
        return coo.row[order], coo.col[order], coo.data[order]

    @property
    def n_edges(self) -> int:
        """Number of undirected edges."""
        return sp.triu(self.adj, k=1).nnz

    def edge_index_set(self) -> set:
        i, j, _ = self.edge_arrays()
        n = self.n_nodes
        return set((i * n + j).tolist())

    def copy(self) -> "Graph":
        return Graph(self.n_nodes, self.adj.copy())

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n_nodes == other.n_nodes and (self.adj != other.adj).nnz == 0

    # -- edge-list text format ---------------------------------------------

    def to_edgelist(self, path):
        i, j, w = self.edge_arrays()
        with open(path, "w") as f:
            for a, b, c in zip(i, j, w):
                if c == 1.0:
                    f.write(f"{a}\t{b}\n")
                else:
                    f.write(f"{a}\t{b}\t{float(c)!r}\n")

    @classmethod
    def from_edgelist(cls, path, n_nodes: int) -> "Graph":
        edges, weights = [], []
        with open(path) as f:
            for line in f:
                line = line.strip()
                if not line:
                    continue
                parts = line.split("\t")
                edges.append((int(parts[0]), int(parts[1])))
                weights.append(float(parts[2]) if len(parts) > 2 else 1.0)
        if not edges:
            return cls.empty(n_nodes)
        return cls.from_edges(n_nodes, edges, weights)


class NormalizedAdjacency:
    """D^{-1/2} (A + I) D^{-1/2}, stored as CSR with sorted indices."""

    def __init__(self, n_nodes: int, entries: sp.csr_matrix):
        self.n_nodes = n_nodes
        entries = entries.tocsr()
        entries.sort_indices()
        self.entries = entries


def validate(g: Graph):
    """Check graph invariants; returns None if ok, else a violation string.

    Diagnostic only: never raises.
    """
    coo = g.adj.tocoo()
    if len(coo.row) and (coo.row.min() < 0 or max(coo.row.max(), coo.col.max()) >= g.n_nodes):
        bad = int(coo.row.max())
        return f"out-of-range index {bad}"
    loops = coo.row[coo.row == coo.col]
    if len(loops):
        return f"self-loop at {int(loops[0])}"
    diff = (g.adj - g.adj.T).tocoo()
    bad = np.nonzero(diff.data != 0)[0]
    if len(bad):
        i, j = int(diff.row[bad[0]]), int(diff.col[bad[0]])
        return f"asymmetric pair ({min(i, j)},{max(i, j)})"
    return None


def sym_normalize(g: Graph) -> NormalizedAdjacency:
    """Symmetric GCN normalization with self-loops added.

    Off-diagonal values are computed once per unordered pair and mirrored,
    so the result is symmetric to the last ulp.
    """
    n = g.n_nodes
    deg = np.asarray(g.adj.sum(axis=1)).ravel() + 1.0
    if np.any(deg <= 0):
        bad = int(np.nonzero(deg <= 0)[0][0])
        raise NonPositiveDegree(f"node {bad} has non-positive degree {deg[bad]!r}")
    inv_sqrt = 1.0 / np.sqrt(deg)
    i, j, w = g.edge_arrays()
    off = w * inv_sqrt[i] * inv_sqrt[j]
    diag = 1.0 / deg
    rows = np.concatenate([i, j, np.arange(n)])
    cols = np.concatenate([j, i, np.arange(n)])
    vals = np.concatenate([off, off, diag])
    entries = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    return NormalizedAdjacency(n, entries)


def spmm(adj: NormalizedAdjacency, dense: np.ndarray) -> np.ndarray:
    """Sparse-times-dense product A_norm @ X with fixed accumulation order."""
    dense = np.asarray(dense)
    if dense.ndim != 2 or dense.shape[0] != adj.n_nodes:
        raise DimensionMismatch(
            f"expected ({adj.n_nodes}, F) matrix, got {dense.shape}"
        )
    return adj.entries @ dense
