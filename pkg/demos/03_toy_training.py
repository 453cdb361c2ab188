"""Train all three regimes on a planted two-cluster graph.

The toy dataset has linearly separable features and a community structure,
so every regime should reach high test accuracy within seconds. This is the
fastest way to see the whole pipeline run end to end.
"""

import numpy as np

from degnn.augment import AugConfig
from degnn.data import make_split
from degnn.pipeline import TrainConfig, train
from degnn.synthetic import planted_clusters

ds = planted_clusters(n_nodes=40, seed=7)
print(f"dataset: {ds.graph.n_nodes} nodes, {ds.graph.n_edges} edges, "
      f"{ds.n_classes} classes")

for regime in ("gcn_baseline", "degnn_i", "degnn_ii"):
    accs = []
    for seed in range(3):
        split = make_split(ds, seed, per_class=10, n_val=10, n_test=10)
        cfg = TrainConfig(
            regime=regime, alpha=0.1, beta=0.1, k_percent=10.0,
            aug=AugConfig(0.4, 0.4, seed), d_prime=8, hidden=8,
            epochs_pretrain=40, epochs_main=300, patience_pretrain=10,
            patience=100, seed=seed,
        )
        report = train(ds, split, cfg)
        accs.append(report.test_accuracy)
    print(f"{regime:13s} test accuracy over 3 seeds: "
          f"{np.mean(accs):.3f} +/- {np.std(accs, ddof=1):.3f}")
