"""Command-line front end.

Subcommands: convert, noise, pretrain, train, eval, run, report.
Exit codes: 0 ok, 1 usage, 2 data error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace

import numpy as np

from . import engine
from .augment import AugConfig
from .bench import (
    ExperimentPlan,
    render_markdown,
    run_plan,
    aggregate_reports,
    write_curves_csv,
    write_report,
)
from .data import convert_raw, load_bundle, make_split, save_bundle
from .errors import DataError, DegnnError
from .experts import EncoderParams, encode, load_checkpoint, pretrain_expert, save_checkpoint
from .graph import sym_normalize
from .noise import NoiseSpec, inject_edge_noise, inject_feature_noise
from .pipeline import DownstreamParams, TrainConfig, evaluate, train
from .reconstruct import reconstruct, weighted_normalize_for_downstream

REGIME_ALIASES = {"gcn": "gcn_baseline", "degnn1": "degnn_i", "degnn2": "degnn_ii"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(1)


def build_parser():
    parser = _Parser(prog="degnn", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("convert", help="convert a raw dataset layout to a bundle")
    p.add_argument("raw")
    p.add_argument("--out", required=True)

    p = sub.add_parser("noise", help="write a noisy copy of a bundle")
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--edge-noise", type=float, default=0.0)
    p.add_argument("--feature-noise", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("pretrain", help="contrastively pre-train one expert")
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True, help="checkpoint path prefix")
    p.add_argument("--expert", choices=["node", "edge"], default="edge")
    p.add_argument("--dprime", type=int, default=128)
    p.add_argument("--aug-p", type=float, default=0.4)
    p.add_argument("--aug-q", type=float, default=0.4)
    p.add_argument("--lr", type=float, default=1e-2)
    p.add_argument("--epochs", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--float64", action="store_true")

    p = sub.add_parser("train", help="run one training job and write a report")
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True, help="report JSON path")
    p.add_argument("--regime", choices=sorted(REGIME_ALIASES), default="gcn")
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--beta", type=float, default=0.0)
    p.add_argument("--k", type=float, default=10.0)
    p.add_argument("--aug-p", type=float, default=0.4)
    p.add_argument("--aug-q", type=float, default=0.4)
    p.add_argument("--dprime", type=int, default=128)
    p.add_argument("--hidden", type=int, default=32)
    p.add_argument("--edge-noise", type=float, default=0.0)
    p.add_argument("--feature-noise", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--per-class", type=int, default=20)
    p.add_argument("--n-val", type=int, default=500)
    p.add_argument("--n-test", type=int, default=1000)
    p.add_argument("--save-params", help="checkpoint path prefix for trained parameters")
    p.add_argument("--float64", action="store_true")

    p = sub.add_parser("eval", help="evaluate saved checkpoints on a bundle")
    p.add_argument("--dataset", required=True)
    p.add_argument("--params", required=True, help="prefix used with train --save-params")
    p.add_argument("--k", type=float, default=10.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--per-class", type=int, default=20)
    p.add_argument("--n-val", type=int, default=500)
    p.add_argument("--n-test", type=int, default=1000)

    p = sub.add_parser("run", help="execute an experiment plan (grid x seeds)")
    p.add_argument("plan", nargs="?", help="plan JSON file")
    p.add_argument("--dataset")
    p.add_argument("--out")
    p.add_argument("--regime", choices=sorted(REGIME_ALIASES))
    p.add_argument("--seeds", type=int, help="number of seeded repetitions")
    p.add_argument("--max-workers", type=int)

    p = sub.add_parser("report", help="aggregate run reports into table + curves")
    p.add_argument("reports_dir")
    p.add_argument("--curves-csv")

    return parser


def _cmd_convert(args):
    ds = convert_raw(args.raw, args.out)
    print(f"wrote bundle with N={ds.graph.n_nodes} D={ds.features.shape[1]} "
          f"C={ds.n_classes} to {args.out}")


def _cmd_noise(args):
    ds = load_bundle(args.dataset)
    spec = NoiseSpec(args.edge_noise, args.feature_noise, args.seed)
    graph = ds.graph
    if spec.edge_ratio:
        graph = inject_edge_noise(graph, spec.edge_ratio, spec.seed)
    features = inject_feature_noise(ds.features, spec.lam, spec.seed + 1) \
        if spec.lam else ds.features
    noisy = replace(ds, graph=graph, features=features)
    save_bundle(noisy, args.out)
    with open(os.path.join(args.out, "provenance.json"), "w") as f:
        json.dump(
            {
                "spec": spec.to_dict(),
                "source": os.path.abspath(args.dataset),
                "n_edges_before": ds.graph.n_edges,
                "n_edges_after": noisy.graph.n_edges,
            },
            f, indent=2,
        )
    print(f"wrote noisy bundle to {args.out}")


def _cmd_pretrain(args):
    engine.set_dtype(np.float64 if args.float64 else np.float32)
    ds = load_bundle(args.dataset)
    params = EncoderParams.init(ds.features.shape[1], args.dprime, args.seed, args.expert)
    cfg = AugConfig(args.aug_p, args.aug_q, args.seed)
    params, curve = pretrain_expert(params, ds, cfg, args.epochs, args.lr)
    save_checkpoint(params, args.out, seed=args.seed, epochs=len(curve))
    print(f"final loss {curve[-1]:.6f} after {len(curve)} epochs; wrote {args.out}.bin")


def _cmd_train(args):
    engine.set_dtype(np.float64 if args.float64 else np.float32)
    ds = load_bundle(args.dataset)
    if args.edge_noise:
        ds = replace(ds, graph=inject_edge_noise(ds.graph, args.edge_noise, args.seed))
    if args.feature_noise:
        ds = replace(ds, features=inject_feature_noise(ds.features, args.feature_noise,
                                                       args.seed + 1))
    split = make_split(ds, args.seed, args.per_class, args.n_val, args.n_test)
    cfg = TrainConfig(
        regime=REGIME_ALIASES[args.regime], alpha=args.alpha, beta=args.beta,
        k_percent=args.k, aug=AugConfig(args.aug_p, args.aug_q, args.seed),
        d_prime=args.dprime, hidden=args.hidden, seed=args.seed,
    )
    report = train(ds, split, cfg)
    write_report(report, args.out)
    if args.save_params:
        _save_params(report, args)
    print(f"test accuracy {report.test_accuracy:.4f}; wrote {args.out}")


def _save_params(report, args):
    arts = report.artifacts
    theta = arts["theta"]
    save_checkpoint(EncoderParams(theta.w1, 0.0, "downstream-w1"),
                    args.save_params + ".w1", seed=args.seed)
    save_checkpoint(EncoderParams(theta.w2, 0.0, "downstream-w2"),
                    args.save_params + ".w2", seed=args.seed)
    if arts.get("node") is not None:
        save_checkpoint(arts["node"], args.save_params + ".node", seed=args.seed)
    if arts.get("edge") is not None:
        save_checkpoint(arts["edge"], args.save_params + ".edge", seed=args.seed)


def _cmd_eval(args):
    ds = load_bundle(args.dataset)
    split = make_split(ds, args.seed, args.per_class, args.n_val, args.n_test)
    theta = DownstreamParams(
        load_checkpoint(args.params + ".w1").w,
        load_checkpoint(args.params + ".w2").w,
    )
    if os.path.exists(args.params + ".node.json"):
        h = encode(load_checkpoint(args.params + ".node"), ds.features, ds.graph)
    else:
        h = ds.features.astype(np.float64)
    if os.path.exists(args.params + ".edge.json"):
        hp = encode(load_checkpoint(args.params + ".edge"), ds.features, ds.graph)
        s_norm = weighted_normalize_for_downstream(reconstruct(ds.graph, hp, args.k))
    else:
        s_norm = sym_normalize(ds.graph)
    acc = evaluate(theta, h, s_norm, split, ds.labels)
    print(f"test accuracy {acc:.4f}")


def _cmd_run(args):
    overrides = {
        "dataset": args.dataset,
        "out": args.out,
        "regime": REGIME_ALIASES.get(args.regime) if args.regime else None,
        "n_seeds": args.seeds,
        "max_workers": args.max_workers,
    }
    if args.plan:
        plan = ExperimentPlan.from_json(args.plan, **overrides)
    else:
        if not args.dataset or not args.out:
            raise SystemExit(1)
        plan = ExperimentPlan(
            **{k: v for k, v in overrides.items() if v is not None}
        )
    table = run_plan(plan)
    print(render_markdown(table))


def _cmd_report(args):
    table = aggregate_reports(args.reports_dir)
    print(render_markdown(table))
    if args.curves_csv:
        write_curves_csv(table, args.curves_csv)
        print(f"wrote {args.curves_csv}")


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "convert": _cmd_convert,
        "noise": _cmd_noise,
        "pretrain": _cmd_pretrain,
        "train": _cmd_train,
        "eval": _cmd_eval,
        "run": _cmd_run,
        "report": _cmd_report,
    }
    try:
        handlers[args.command](args)
    except DataError as e:
        print(f"data error: {e}", file=sys.stderr)
        return 2
    except DegnnError as e:
        print(f"runtime error: {e}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
