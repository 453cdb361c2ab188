"""Show that cosine rewiring driven by the edge expert promotes homophily.

Edge noise lowers the fraction of same-label edges; after pre-training the
edge expert and rewiring with k=10%, the refined graph should recover some
of it. Emits the per-ratio records as CSV, the format the report command
consumes.
"""

from degnn.augment import AugConfig
from degnn.experts import EncoderParams, pretrain_expert
from degnn.metrics import edge_homophily, homophily_sweep, node_homophily, write_records_csv
from degnn.synthetic import planted_clusters

ds = planted_clusters(n_nodes=60, p_in=0.4, p_out=0.05, seed=3)
print(f"clean graph edge homophily: {edge_homophily(ds.graph, ds.labels):.3f}")
print(f"clean graph node homophily: {node_homophily(ds.graph, ds.labels):.3f}")

params = EncoderParams.init(ds.features.shape[1], 8, seed=0, tag="edge")
params, curve = pretrain_expert(params, ds, AugConfig(0.4, 0.4, 0),
                                epochs=150, patience=30)
print(f"edge expert pre-trained: loss {curve[0]:.4f} -> {min(curve):.4f} "
      f"over {len(curve)} epochs")

records = homophily_sweep(ds, [0.0, 0.05, 0.1, 0.15], params, k_percent=10.0)

print()
print(f"{'ratio':>6s} {'tag':>8s} {'edge_h':>7s} {'node_h':>7s}")
for r in records:
    print(f"{r.noise_ratio:6.2f} {r.graph_tag:>8s} "
          f"{r.edge_homophily:7.3f} {r.node_homophily:7.3f}")

write_records_csv(records, "homophily_records.csv")
print()
print("wrote homophily_records.csv")
