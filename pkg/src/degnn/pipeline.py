"""Downstream 2-layer GCN and the three training regimes.

Regimes:
  * gcn_baseline : plain 2-layer GCN on the raw (X, A)
  * degnn_i      : pre-train both experts, then fine-tune experts and
                   downstream jointly on L_GNN + alpha*L_N + beta*L_E
  * degnn_ii     : train the experts once, freeze H and S, train only the
                   downstream GCN
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, asdict

import numpy as np
import scipy.sparse as sp

from . import engine
from .augment import AugConfig
from .data import Dataset, Split
from .errors import DimensionMismatch, NonPositiveDegree
from .experts import (
    EncoderParams,
    _feature_operand,
    _view_embeddings,
    contrastive_loss,
    encode,
    encode_t,
    epoch_views,
    pretrain_expert,
)
from .graph import NormalizedAdjacency, sym_normalize
from .reconstruct import ModifiedAdjacency, reconstruct, weighted_normalize_for_downstream
from .seeding import derive

REGIMES = ("gcn_baseline", "degnn_i", "degnn_ii")


@dataclass
class DownstreamParams:
    w1: np.ndarray
    w2: np.ndarray

    @classmethod
    def init(cls, d_in: int, hidden: int, n_classes: int, seed: int):
        rng = np.random.default_rng(seed)
        return cls(engine.glorot(rng, d_in, hidden), engine.glorot(rng, hidden, n_classes))

    def copy(self):
        return DownstreamParams(self.w1.copy(), self.w2.copy())


@dataclass
class TrainConfig:
    regime: str = "gcn_baseline"
    alpha: float = 0.0
    beta: float = 0.0
    k_percent: float = 10.0
    aug: AugConfig = field(default_factory=AugConfig)
    d_prime: int = 128
    hidden: int = 32
    lr_main: float = 1e-2
    lr_pretrain: float = 1e-2
    weight_decay: float = 5e-4
    epochs_pretrain: int = 500
    epochs_main: int = 300
    patience_pretrain: int = 50
    patience: int = 30
    seed: int = 0
    node_expert: bool = True
    edge_expert: bool = True
    node_identity_passthrough: bool = False  # wiring tests only

    def to_dict(self):
        d = asdict(self)
        return d


@dataclass
class RunReport:
    test_accuracy: float
    val_accuracy: list
    losses: dict           # {"gnn": [...], "node": [...], "edge": [...]}
    config: dict
    seed: int
    wall_time: float
    best_epoch: int = -1
    dtype: str = "float64"

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


# -- forward passes ------------------------------------------------------------


class DiffAdj:
    """Normalized rewired adjacency with differentiable added-edge weights.

    Built from the edge expert embedding tensor; retained edges keep
    constant weight 1, added edges carry their cosine similarity, and the
    symmetric normalization is expressed in engine ops so gradients reach
    the embeddings exclusively through the added weights.
    """

    def __init__(self, hp: engine.Tensor, mod: ModifiedAdjacency, n: int):
        ki, kj = mod.kept[:, 0], mod.kept[:, 1]
        ai, aj = mod.added[:, 0], mod.added[:, 1]
        gi, gj = engine.gather_rows(hp, ai), engine.gather_rows(hp, aj)
        num = engine.rowdot(gi, gj)
        denom = engine.mul(
            engine.sqrt(engine.rowdot(gi, gi)), engine.sqrt(engine.rowdot(gj, gj))
        )
        w_add = engine.div(num, denom)
        ones = engine.constant(np.ones(len(ki)))
        w = engine.concat([ones, w_add])
        i_all = np.concatenate([ki, ai])
        j_all = np.concatenate([kj, aj])
        deg = engine.add(
            engine.constant(np.ones(n)),
            engine.add(engine.scatter_add(w, i_all, n), engine.scatter_add(w, j_all, n)),
        )
        if np.any(deg.value <= 0):
            bad = int(np.nonzero(deg.value <= 0)[0][0])
            raise NonPositiveDegree(f"node {bad} degree {deg.value[bad]!r} after rewiring")
        inv = engine.powc(deg, -0.5)
        off = engine.mul(
            engine.mul(w, engine.gather_rows(inv, i_all)), engine.gather_rows(inv, j_all)
        )
        diag = engine.mul(inv, inv)
        idx = np.arange(n)
        self.rows = np.concatenate([i_all, j_all, idx])
        self.cols = np.concatenate([j_all, i_all, idx])
        self.vals = engine.concat([off, off, diag])
        self.n = n

    def apply(self, x):
        return engine.weighted_spmm(self.vals, self.rows, self.cols, self.n, x)


def _apply_adj(s, x):
    if isinstance(s, DiffAdj):
        return s.apply(x)
    return engine.sparse_matmul(s, x)


def downstream_forward_t(w1, w2, h, s):
    """logits = S_norm @ relu(S_norm @ h @ W1) @ W2, in engine ops."""
    hw = engine.matmul(h, w1) if isinstance(h, engine.Tensor) or not sp.issparse(h) \
        else engine.sparse_matmul(h, w1)
    layer1 = engine.relu(_apply_adj(s, hw))
    return _apply_adj(s, engine.matmul(layer1, w2))


def downstream_forward(theta: DownstreamParams, h: np.ndarray,
                       s_norm: NormalizedAdjacency) -> np.ndarray:
    """Plain-numpy 2-layer GCN forward pass."""
    h = np.asarray(h)
    if h.shape[1] != theta.w1.shape[0]:
        raise DimensionMismatch(f"h width {h.shape[1]} vs W1 {theta.w1.shape}")
    s = s_norm.entries
    layer1 = np.maximum(s @ (h @ theta.w1), 0.0)
    return s @ (layer1 @ theta.w2)


def evaluate(theta: DownstreamParams, h: np.ndarray, s_norm: NormalizedAdjacency,
             split: Split, labels: np.ndarray) -> float:
    """Test accuracy; argmax ties go to the lowest class index."""
    logits = downstream_forward(theta, h, s_norm)
    return _accuracy(logits, labels, split.test)


def _accuracy(logits: np.ndarray, labels: np.ndarray, idx: np.ndarray) -> float:
    pred = np.argmax(logits[idx], axis=1)
    return float((pred == labels[idx]).mean())


# -- training -------------------------------------------------------------------


def _downstream_input(ds: Dataset, cfg: TrainConfig, node_params):
    """Frozen-H input for regimes that do not differentiate the node expert."""
    if cfg.node_identity_passthrough:
        return ds.features.astype(engine.get_dtype())
    if not cfg.node_expert:
        rng = np.random.default_rng(derive(cfg.seed, "proj"))
        r = engine.glorot(rng, ds.features.shape[1], cfg.d_prime)
        return np.asarray(ds.features, dtype=engine.get_dtype()) @ r
    return encode(node_params, ds.features, ds.graph)


def _pretrain_both(ds: Dataset, cfg: TrainConfig):
    aug = AugConfig(cfg.aug.p, cfg.aug.q, derive(cfg.seed, "aug"))
    node_params = edge_params = None
    if cfg.node_expert and not cfg.node_identity_passthrough:
        node_params = EncoderParams.init(
            ds.features.shape[1], cfg.d_prime, derive(cfg.seed, "phi"), "node"
        )
        node_params, _ = pretrain_expert(
            node_params, ds, aug, cfg.epochs_pretrain, cfg.lr_pretrain,
            cfg.weight_decay, cfg.patience_pretrain,
        )
    if cfg.edge_expert:
        edge_params = EncoderParams.init(
            ds.features.shape[1], cfg.d_prime, derive(cfg.seed, "psi"), "edge"
        )
        edge_params, _ = pretrain_expert(
            edge_params, ds, aug, cfg.epochs_pretrain, cfg.lr_pretrain,
            cfg.weight_decay, cfg.patience_pretrain,
        )
    return node_params, edge_params


def _run_downstream_loop(ds, split, cfg, h_input, s_norm, d_in):
    """Adam loop over theta only, early stopping on validation accuracy."""
    theta_seed = derive(cfg.seed, "theta")
    w1 = engine.param(engine.glorot(np.random.default_rng(theta_seed), d_in, cfg.hidden))
    w2 = engine.param(
        engine.glorot(np.random.default_rng(derive(cfg.seed, "theta2")), cfg.hidden, ds.n_classes)
    )
    opt = engine.Adam([w1, w2], lr=cfg.lr_main, weight_decay=cfg.weight_decay)
    h_op = _feature_operand(h_input)
    s = s_norm.entries.astype(engine.get_dtype())
    losses = {"gnn": [], "node": [], "edge": []}
    val_curve = []
    best = (-1.0, -1, None, None)  # (val acc, epoch, logits, theta)
    for epoch in range(cfg.epochs_main):
        logits = downstream_forward_t(w1, w2, h_op, s)
        loss = engine.softmax_cross_entropy(
            engine.gather_rows(logits, split.train), ds.labels[split.train]
        )
        opt.zero_grad()
        loss.backward()
        opt.step()
        losses["gnn"].append(float(loss.value))
        losses["node"].append(None)
        losses["edge"].append(None)
        val_acc = _accuracy(logits.value, ds.labels, split.val)
        val_curve.append(val_acc)
        if val_acc > best[0]:
            best = (val_acc, epoch, logits.value.copy(),
                    DownstreamParams(w1.value.copy(), w2.value.copy()))
        elif epoch - best[1] >= cfg.patience:
            break
    test_acc = _accuracy(best[2], ds.labels, split.test)
    return test_acc, val_curve, losses, best[1], best[3]


def train_gcn_baseline(ds: Dataset, split: Split, cfg: TrainConfig) -> RunReport:
    """2-layer GCN on the raw graph and features."""
    t0 = time.perf_counter()
    s_norm = sym_normalize(ds.graph)
    test_acc, val_curve, losses, best_epoch, theta = _run_downstream_loop(
        ds, split, cfg, ds.features.astype(engine.get_dtype()), s_norm,
        ds.features.shape[1],
    )
    report = RunReport(
        test_accuracy=test_acc, val_accuracy=val_curve, losses=losses,
        config=cfg.to_dict(), seed=cfg.seed, wall_time=time.perf_counter() - t0,
        best_epoch=best_epoch, dtype=np.dtype(engine.get_dtype()).name,
    )
    report.artifacts = {"theta": theta, "node": None, "edge": None}
    return report


def train_degnn_ii(ds: Dataset, split: Split, cfg: TrainConfig) -> RunReport:
    """Experts trained once; H and S frozen; only theta is optimized."""
    t0 = time.perf_counter()
    node_params, edge_params = _pretrain_both(ds, cfg)
    h = _downstream_input(ds, cfg, node_params)
    if cfg.edge_expert:
        hp = encode(edge_params, ds.features, ds.graph)
        mod = reconstruct(ds.graph, hp, cfg.k_percent)
        s_norm = weighted_normalize_for_downstream(mod)
    else:
        s_norm = sym_normalize(ds.graph)
    test_acc, val_curve, losses, best_epoch, theta = _run_downstream_loop(
        ds, split, cfg, h, s_norm, h.shape[1]
    )
    report = RunReport(
        test_accuracy=test_acc, val_accuracy=val_curve, losses=losses,
        config=cfg.to_dict(), seed=cfg.seed, wall_time=time.perf_counter() - t0,
        best_epoch=best_epoch, dtype=np.dtype(engine.get_dtype()).name,
    )
    report.artifacts = {"theta": theta, "node": node_params, "edge": edge_params,
                        "h": h, "s_norm": s_norm}
    return report


def train_degnn_i(ds: Dataset, split: Split, cfg: TrainConfig) -> RunReport:
    """Pre-train the experts, then fine-tune everything jointly on
    L_GNN + alpha*L_N + beta*L_E with fresh views per epoch."""
    t0 = time.perf_counter()
    node_params, edge_params = _pretrain_both(ds, cfg)

    params = []
    if node_params is not None:
        w_phi = engine.param(node_params.w)
        s_phi = engine.param(np.asarray(node_params.slope))
        params += [w_phi, s_phi]
    if edge_params is not None:
        w_psi = engine.param(edge_params.w)
        s_psi = engine.param(np.asarray(edge_params.slope))
        params += [w_psi, s_psi]

    h_const = None
    if node_params is None:
        h_const = _feature_operand(_downstream_input(ds, cfg, None))
        d_in = h_const.shape[1]
    else:
        d_in = cfg.d_prime
    w1 = engine.param(
        engine.glorot(np.random.default_rng(derive(cfg.seed, "theta")), d_in, cfg.hidden)
    )
    w2 = engine.param(
        engine.glorot(
            np.random.default_rng(derive(cfg.seed, "theta2")), cfg.hidden, ds.n_classes
        )
    )
    params += [w1, w2]
    opt = engine.Adam(params, lr=cfg.lr_main, weight_decay=cfg.weight_decay)

    aug_ft = AugConfig(cfg.aug.p, cfg.aug.q, derive(cfg.seed, "aug-ft"))
    s_const = None
    if edge_params is None:
        s_const = sym_normalize(ds.graph).entries.astype(engine.get_dtype())

    losses = {"gnn": [], "node": [], "edge": []}
    val_curve = []
    best = (-1.0, -1, None, None)
    for epoch in range(cfg.epochs_main):
        h = encode_t(w_phi, s_phi, ds.features, ds.graph) if node_params is not None else h_const
        if edge_params is not None:
            hp = encode_t(w_psi, s_psi, ds.features, ds.graph)
            mod = reconstruct(ds.graph, hp.value, cfg.k_percent)
            adj = DiffAdj(hp, mod, ds.graph.n_nodes)
        else:
            adj = s_const
        logits = downstream_forward_t(w1, w2, h, adj)
        loss = engine.softmax_cross_entropy(
            engine.gather_rows(logits, split.train), ds.labels[split.train]
        )
        l_gnn = float(loss.value)
        l_node = l_edge = None
        need_views = (cfg.alpha != 0 and node_params is not None) or (
            cfg.beta != 0 and edge_params is not None
        )
        if need_views:
            views = epoch_views(ds.graph, ds.features, aug_ft, epoch)
            if cfg.alpha != 0 and node_params is not None:
                l_n = contrastive_loss(
                    *_view_embeddings(w_phi, s_phi, ds.features, ds.graph, views)
                )
                l_node = float(l_n.value)
                loss = engine.add(loss, engine.scale(l_n, cfg.alpha))
            if cfg.beta != 0 and edge_params is not None:
                l_e = contrastive_loss(
                    *_view_embeddings(w_psi, s_psi, ds.features, ds.graph, views)
                )
                l_edge = float(l_e.value)
                loss = engine.add(loss, engine.scale(l_e, cfg.beta))
        opt.zero_grad()
        loss.backward()
        opt.step()
        losses["gnn"].append(l_gnn)
        losses["node"].append(l_node)
        losses["edge"].append(l_edge)
        val_acc = _accuracy(logits.value, ds.labels, split.val)
        val_curve.append(val_acc)
        if val_acc > best[0]:
            snapshot = {
                "theta": DownstreamParams(w1.value.copy(), w2.value.copy()),
                "node": EncoderParams(w_phi.value.copy(), float(s_phi.value), "node")
                if node_params is not None else None,
                "edge": EncoderParams(w_psi.value.copy(), float(s_psi.value), "edge")
                if edge_params is not None else None,
            }
            best = (val_acc, epoch, logits.value.copy(), snapshot)
        elif epoch - best[1] >= cfg.patience:
            break
    test_acc = _accuracy(best[2], ds.labels, split.test)
    report = RunReport(
        test_accuracy=test_acc, val_accuracy=val_curve, losses=losses,
        config=cfg.to_dict(), seed=cfg.seed, wall_time=time.perf_counter() - t0,
        best_epoch=best[1], dtype=np.dtype(engine.get_dtype()).name,
    )
    report.artifacts = best[3]
    return report


def train(ds: Dataset, split: Split, cfg: TrainConfig) -> RunReport:
    """Dispatch on cfg.regime."""
    if cfg.regime == "gcn_baseline":
        return train_gcn_baseline(ds, split, cfg)
    if cfg.regime == "degnn_i":
        return train_degnn_i(ds, split, cfg)
    if cfg.regime == "degnn_ii":
        return train_degnn_ii(ds, split, cfg)
    raise ValueError(f"unknown regime {cfg.regime!r}; expected one of {REGIMES}")
