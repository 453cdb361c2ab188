"""DEGNN: dual-expert graph neural network robust to edge and node-feature
noise, with the noise-injection and homophily-analysis machinery needed to
study it at desk scale."""

from .augment import AugConfig, ViewSet, make_views, negative_graph, rewire_view, shuffle_feature_view
from .data import Dataset, Split, convert_raw, load_bundle, make_split, save_bundle
from .experts import EncoderParams, contrastive_loss, discriminate, encode, pretrain_expert
from .graph import Graph, NormalizedAdjacency, spmm, sym_normalize, validate
from .metrics import aggregate_runs, edge_homophily, homophily_sweep, node_homophily
from .noise import NoiseSpec, inject_edge_noise, inject_feature_noise
from .pipeline import (
    DownstreamParams,
    RunReport,
    TrainConfig,
    downstream_forward,
    evaluate,
    train,
    train_degnn_i,
    train_degnn_ii,
    train_gcn_baseline,
)
from .reconstruct import (
    ModifiedAdjacency,
    cosine_matrix,
    reconstruct,
    weighted_normalize_for_downstream,
)
from .synthetic import planted_clusters

__version__ = "0.1.0"
