"""Verify the differentiation engine against central finite differences.

Builds a small end-to-end loss (encoder -> rewired adjacency -> downstream
classifier -> cross-entropy plus both contrastive terms) and compares every
analytic gradient entry to a finite-difference estimate in 64-bit mode.
"""

import numpy as np

from degnn import engine
from degnn.augment import AugConfig
from degnn.experts import _view_embeddings, contrastive_loss, encode_t, epoch_views
from degnn.pipeline import DiffAdj
from degnn.reconstruct import reconstruct
from degnn.synthetic import planted_clusters

engine.set_dtype(np.float64)

ds = planted_clusters(n_nodes=12, d=5, seed=1)
x = ds.features.astype(np.float64)
views = epoch_views(ds.graph, x, AugConfig(0.4, 0.4, 2), epoch=0)

w_phi = engine.param(engine.glorot(np.random.default_rng(5), 5, 4))
s_phi = engine.param(np.array(0.25))
w_psi = engine.param(engine.glorot(np.random.default_rng(6), 5, 4))
s_psi = engine.param(np.array(0.25))
w1 = engine.param(engine.glorot(np.random.default_rng(7), 4, 3))
w2 = engine.param(engine.glorot(np.random.default_rng(8), 3, 2))
params = [w_phi, s_phi, w_psi, s_psi, w1, w2]

# freeze the rewiring selection: within one step it is a constant, and the
# finite-difference oracle must condition on the same masks
mod = reconstruct(ds.graph, encode_t(w_psi, s_psi, x, ds.graph).value, 10.0)
train_idx = np.arange(6)


def loss_fn():
    h = encode_t(w_phi, s_phi, x, ds.graph)
    hp = encode_t(w_psi, s_psi, x, ds.graph)
    adj = DiffAdj(hp, mod, ds.graph.n_nodes)
    layer1 = engine.relu(adj.apply(engine.matmul(h, w1)))
    logits = adj.apply(engine.matmul(layer1, w2))
    l_gnn = engine.softmax_cross_entropy(
        engine.gather_rows(logits, train_idx), ds.labels[train_idx]
    )
    l_n = contrastive_loss(*_view_embeddings(w_phi, s_phi, x, ds.graph, views))
    l_e = contrastive_loss(*_view_embeddings(w_psi, s_psi, x, ds.graph, views))
    return engine.add(l_gnn, engine.add(engine.scale(l_n, 0.1), engine.scale(l_e, 0.1)))


loss = loss_fn()
loss.backward()
print(f"loss value: {float(loss.value):.6f}")

h = 1e-5
worst = 0.0
for p in params:
    flat = p.value.reshape(-1)
    gflat = p.grad.reshape(-1)
    for idx in range(flat.size):
        orig = flat[idx]
        flat[idx] = orig + h
        up = float(loss_fn().value)
        flat[idx] = orig - h
        down = float(loss_fn().value)
        flat[idx] = orig
        fd = (up - down) / (2 * h)
        rel = abs(gflat[idx] - fd) / max(abs(fd), abs(gflat[idx]), 1e-8)
        worst = max(worst, rel)

print(f"checked {sum(p.value.size for p in params)} parameter entries")
print(f"max relative error vs central finite differences: {worst:.3e}")
assert worst < 1e-4
print("gradient check passed")
