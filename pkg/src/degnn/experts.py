"""The two contrastive experts: 1-layer GCN encoders trained to pull three
positive views toward the original graph and push one corrupted view away,
scored by an inner-product discriminator under a binary cross-entropy loss.

The node feature expert and the edge expert share this code; they differ
only in their parameters and in what downstream consumes (embeddings H vs
the rewired adjacency built from H')."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import engine
from .augment import AugConfig, ViewSet, make_views
from .data import Dataset
from .engine import Tensor
from .errors import DimensionMismatch, LengthMismatch
from .graph import Graph, sym_normalize
from .seeding import derive

SPARSE_FEATURE_DENSITY = 0.05


@dataclass
class EncoderParams:
    w: np.ndarray      # D x D'
    slope: float       # PReLU slope
    tag: str = "node"  # "node" or "edge"

    @classmethod
    def init(cls, n_features: int, d_prime: int, seed: int, tag: str = "node"):
        rng = np.random.default_rng(seed)
        return cls(engine.glorot(rng, n_features, d_prime), 0.25, tag)

    def copy(self):
        return EncoderParams(self.w.copy(), float(self.slope), self.tag)


def _feature_operand(x: np.ndarray):
    """Lift features to a constant, using CSR when they are sparse enough."""
    x = np.asarray(x, dtype=engine.get_dtype())
    density = np.count_nonzero(x) / max(x.size, 1)
    if density < SPARSE_FEATURE_DENSITY and min(x.shape) > 1:
        return sp.csr_matrix(x)
    return x


def encode_t(w: Tensor, slope: Tensor, x, a: Graph) -> Tensor:
    """Differentiable 1-layer GCN: PReLU(norm(A) @ X @ W)."""
    norm = sym_normalize(a).entries.astype(engine.get_dtype())
    if w.value.shape[0] != x.shape[1]:
        raise DimensionMismatch(f"features D={x.shape[1]} vs W {w.value.shape}")
    if isinstance(x, Tensor):
        xw = engine.matmul(x, w)
    else:
        operand = _feature_operand(x)
        if sp.issparse(operand):
            xw = engine.sparse_matmul(operand, w)
        else:
            xw = engine.matmul(operand, w)
    return engine.prelu(engine.sparse_matmul(norm, xw), slope)


def encode(params: EncoderParams, x: np.ndarray, a: Graph) -> np.ndarray:
    """Plain-numpy forward pass of the encoder."""
    w = engine.Tensor(np.asarray(params.w, dtype=engine.get_dtype()))
    slope = engine.Tensor(np.asarray(params.slope, dtype=engine.get_dtype()))
    return encode_t(w, slope, np.asarray(x), a).value


def discriminate(h_a: np.ndarray, h_b: np.ndarray) -> float:
    """Raw inner-product logit; the sigmoid lives inside the loss."""
    h_a, h_b = np.asarray(h_a), np.asarray(h_b)
    if h_a.shape != h_b.shape:
        raise LengthMismatch(f"{h_a.shape} vs {h_b.shape}")
    return float(h_a @ h_b)


def contrastive_loss(h, h1, h2, h3, h_neg, negative_once_per_node: bool = False):
    """BCE-over-inner-products contrastive loss.

    Per node i and positive view j: log sigmoid(<h_i, h_i^j>) plus
    log(1 - sigmoid(<h_i, h_i^neg>)); the negative term is paired with each
    of the three positive views (so it counts three times per node) unless
    `negative_once_per_node`. Averaged with the 1/(2N) * 1/3 bookkeeping.
    Accepts Tensors or arrays; returns a scalar Tensor.
    """
    h = h if isinstance(h, Tensor) else engine.constant(h)
    views = [v if isinstance(v, Tensor) else engine.constant(v) for v in (h1, h2, h3)]
    h_neg = h_neg if isinstance(h_neg, Tensor) else engine.constant(h_neg)
    for v in views + [h_neg]:
        if v.shape != h.shape:
            raise engine.ShapeMismatch(f"embedding shape {v.shape} vs {h.shape}")
    n = h.shape[0]
    pos = [engine.rowdot(h, v) for v in views]
    neg = engine.rowdot(h, h_neg)
    if negative_once_per_node:
        pos_term = engine.sum_all(engine.softplus(engine.neg(engine.concat(pos))))
        neg_term = engine.sum_all(engine.softplus(neg))
        return engine.add(
            engine.scale(pos_term, 1.0 / (6 * n)), engine.scale(neg_term, 1.0 / (2 * n))
        )
    logits = engine.concat(pos + [neg, neg, neg])
    targets = np.concatenate([np.ones(3 * n), np.zeros(3 * n)])
    return engine.bce_with_logits(logits, targets)


def _view_embeddings(w, slope, x, a: Graph, views: ViewSet):
    h = encode_t(w, slope, x, a)
    h1 = encode_t(w, slope, views.g1[1], views.g1[0])
    h2 = encode_t(w, slope, views.g2[1], views.g2[0])
    h3 = encode_t(w, slope, views.g3[1], views.g3[0])
    h_neg = encode_t(w, slope, views.neg[1], views.neg[0])
    return h, h1, h2, h3, h_neg


def epoch_views(a: Graph, x: np.ndarray, cfg: AugConfig, epoch: int) -> ViewSet:
    """Fresh augmentation draw for one epoch, deterministic in (seed, epoch)."""
    return make_views(a, x, AugConfig(cfg.p, cfg.q, derive(cfg.seed, "views", epoch)))


def pretrain_expert(params: EncoderParams, ds: Dataset, cfg: AugConfig,
                    epochs: int = 500, lr: float = 1e-2,
                    weight_decay: float = 5e-4, patience: int = 50):
    """Adam loop on the contrastive loss with a fresh view draw per epoch.

    Returns (best-loss parameters, loss curve)."""
    w = engine.param(params.w)
    slope = engine.param(np.asarray(params.slope))
    opt = engine.Adam([w, slope], lr=lr, weight_decay=weight_decay)
    best = params.copy()
    best_loss, since_best = np.inf, 0
    curve = []
    for epoch in range(epochs):
        views = epoch_views(ds.graph, ds.features, cfg, epoch)
        loss = contrastive_loss(*_view_embeddings(w, slope, ds.features, ds.graph, views))
        opt.zero_grad()
        loss.backward()
        opt.step()
        value = float(loss.value)
        curve.append(value)
        if value < best_loss - 1e-12:
            best_loss, since_best = value, 0
            best = EncoderParams(w.value.copy(), float(slope.value), params.tag)
        else:
            since_best += 1
            if since_best >= patience:
                break
    return best, curve


# -- checkpoints ----------------------------------------------------------------


def save_checkpoint(params: EncoderParams, path, seed: int = 0, epochs: int = 0):
    """Flat little-endian float32 weights plus a JSON sidecar."""
    with open(path + ".bin", "wb") as f:
        f.write(np.ascontiguousarray(params.w, dtype="<f4").tobytes())
    with open(path + ".json", "w") as f:
        json.dump(
            {
                "shape": list(params.w.shape),
                "slope": float(params.slope),
                "expert": params.tag,
                "seed": seed,
                "epochs": epochs,
            },
            f,
        )


def load_checkpoint(path) -> EncoderParams:
    with open(path + ".json") as f:
        meta = json.load(f)
    raw = open(path + ".bin", "rb").read()
    w = np.frombuffer(raw, dtype="<f4").reshape(meta["shape"]).astype(np.float64)
    return EncoderParams(w, meta["slope"], meta["expert"])
