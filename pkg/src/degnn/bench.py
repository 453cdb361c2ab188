"""Grid-sweep benchmark harness: (config x seed) cells, resumable reports,
and mean +/- std aggregation."""

from __future__ import annotations

import hashlib
import itertools
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import engine
from .augment import AugConfig
from .data import Dataset, load_bundle, make_split
from .errors import NoReports
from .metrics import aggregate_runs
from .noise import inject_edge_noise, inject_feature_noise
from .pipeline import RunReport, TrainConfig, train
from .seeding import derive

PAPER_GRIDS = {
    "alpha": [0.0, 0.1, 1.0, 10.0],
    "beta": [0.0, 0.1, 1.0, 10.0],
    "k": [1, 5, 10, 15, 20, 25],
    "p": [0.2, 0.4, 0.6],
    "q": [0.2, 0.4, 0.6],
    "d_prime": [128, 256, 512],
    "lr_pretrain": [1e-2, 5e-3, 1e-3],
}


@dataclass
class ExperimentPlan:
    dataset: str
    out: str
    regime: str = "gcn_baseline"
    edge_noise: list = field(default_factory=lambda: [0.0])
    lambdas: list = field(default_factory=lambda: [0.0])
    alphas: list = field(default_factory=lambda: [0.0])
    betas: list = field(default_factory=lambda: [0.0])
    ks: list = field(default_factory=lambda: [10.0])
    ps: list = field(default_factory=lambda: [0.4])
    qs: list = field(default_factory=lambda: [0.4])
    d_primes: list = field(default_factory=lambda: [128])
    hiddens: list = field(default_factory=lambda: [32])
    lrs: list = field(default_factory=lambda: [1e-2])
    n_seeds: int = 10
    base_seed: int = 0
    per_class: int = 20
    n_val: int = 500
    n_test: int = 1000
    epochs_pretrain: int = 500
    epochs_main: int = 300
    dtype: str = "float32"
    max_workers: int = 1

    @classmethod
    def from_json(cls, path, **overrides):
        with open(path) as f:
            d = json.load(f)
        d.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**d)

    def cells(self):
        for ratio, lam, a, b, k, p, q, dp, hid, lr in itertools.product(
            self.edge_noise, self.lambdas, self.alphas, self.betas, self.ks,
            self.ps, self.qs, self.d_primes, self.hiddens, self.lrs,
        ):
            yield {
                "regime": self.regime, "edge_noise": ratio, "lam": lam,
                "alpha": a, "beta": b, "k": k, "p": p, "q": q,
                "d_prime": dp, "hidden": hid, "lr": lr,
            }

    def seeds(self):
        return [self.base_seed + i for i in range(self.n_seeds)]


def cell_id(cell: dict) -> str:
    return hashlib.sha1(json.dumps(cell, sort_keys=True).encode()).hexdigest()[:12]


def _report_path(out_dir, cell, seed):
    return os.path.join(out_dir, f"run_{cell_id(cell)}_seed{seed}.json")


def write_report(report: RunReport, path):
    tmp = path + ".tmp"
    with open(tmp, "w") as f:
        json.dump(report.to_dict(), f)
    os.replace(tmp, path)


def prepare_cell_dataset(bundle_path, cell, seed) -> Dataset:
    """Load the bundle and apply the cell's poisoning noise."""
    ds = load_bundle(bundle_path)
    if cell["edge_noise"]:
        graph = inject_edge_noise(ds.graph, cell["edge_noise"], derive(seed, "edge-noise"))
        ds = replace(ds, graph=graph)
    if cell["lam"]:
        feats = inject_feature_noise(ds.features, cell["lam"], derive(seed, "feat-noise"))
        ds = replace(ds, features=feats)
    return ds


def run_cell(bundle_path, cell, seed, plan: ExperimentPlan) -> RunReport:
    engine.set_dtype(np.float32 if plan.dtype == "float32" else np.float64)
    ds = prepare_cell_dataset(bundle_path, cell, seed)
    split = make_split(ds, seed, plan.per_class, plan.n_val, plan.n_test)
    cfg = TrainConfig(
        regime=cell["regime"], alpha=cell["alpha"], beta=cell["beta"],
        k_percent=cell["k"], aug=AugConfig(cell["p"], cell["q"], seed),
        d_prime=cell["d_prime"], hidden=cell["hidden"], lr_main=cell["lr"],
        epochs_pretrain=plan.epochs_pretrain, epochs_main=plan.epochs_main,
        seed=seed,
    )
    report = train(ds, split, cfg)
    report.config["cell"] = cell
    return report


def _worker(args):
    bundle_path, cell, seed, plan, path = args
    report = run_cell(bundle_path, cell, seed, plan)
    write_report(report, path)
    return path


def run_plan(plan: ExperimentPlan, progress=print):
    """Execute every missing (cell x seed) report, then aggregate."""
    os.makedirs(plan.out, exist_ok=True)
    jobs = []
    for cell in plan.cells():
        for seed in plan.seeds():
            path = _report_path(plan.out, cell, seed)
            if os.path.exists(path):
                continue
            jobs.append((plan.dataset, cell, seed, plan, path))
    if progress:
        progress(f"{len(jobs)} cell runs to execute")
    if plan.max_workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=plan.max_workers) as pool:
            for path in pool.map(_worker, jobs):
                if progress:
                    progress(f"wrote {path}")
    else:
        for job in jobs:
            path = _worker(job)
            if progress:
                progress(f"wrote {path}")
    table = aggregate_reports(plan.out)
    agg_path = os.path.join(plan.out, "aggregate.json")
    with open(agg_path + ".tmp", "w") as f:
        json.dump(table, f, indent=2)
    os.replace(agg_path + ".tmp", agg_path)
    return table


def load_reports(reports_dir):
    reports = []
    for fname in sorted(os.listdir(reports_dir)):
        if fname.startswith("run_") and fname.endswith(".json"):
            with open(os.path.join(reports_dir, fname)) as f:
                reports.append(json.load(f))
    if not reports:
        raise NoReports(f"no run_*.json reports under {reports_dir}")
    return reports


def aggregate_reports(reports_dir):
    """Group reports by cell (config minus seed) and compute mean/std."""
    reports = load_reports(reports_dir)
    groups = {}
    for rep in reports:
        cell = rep["config"].get("cell")
        if cell is None:  # standalone `train` report
            cell = {k: rep["config"].get(k) for k in ("regime", "alpha", "beta")}
        key = json.dumps(cell, sort_keys=True)
        groups.setdefault(key, {"cell": cell, "accuracies": [], "vals": [], "seeds": []})
        groups[key]["accuracies"].append(rep["test_accuracy"])
        best_epoch = rep.get("best_epoch", -1)
        val_curve = rep.get("val_accuracy") or [float("nan")]
        groups[key]["vals"].append(val_curve[best_epoch])
        groups[key]["seeds"].append(rep["seed"])
    table = []
    for key in sorted(groups):
        g = groups[key]
        accs = g["accuracies"]
        if len(accs) >= 2:
            mean, std = aggregate_runs(accs)
        else:
            mean, std = float(accs[0]), 0.0
        table.append(
            {"cell": g["cell"], "n_runs": len(accs), "mean": mean, "std": std,
             "val_mean": float(np.mean(g["vals"])), "seeds": sorted(g["seeds"])}
        )
    return table


def render_markdown(table) -> str:
    lines = [
        "| regime | edge noise | lambda | alpha | beta | k | runs | accuracy |",
        "|---|---|---|---|---|---|---|---|",
    ]
    for row in table:
        c = row["cell"]
        lines.append(
            "| {} | {} | {} | {} | {} | {} | {} | {:.1f} ± {:.1f} |".format(
                c.get("regime", "?"), c.get("edge_noise", 0.0), c.get("lam", 0.0),
                c.get("alpha", 0.0), c.get("beta", 0.0), c.get("k", 0.0),
                row["n_runs"], 100 * row["mean"], 100 * row["std"],
            )
        )
    return "\n".join(lines) + "\n"


def write_curves_csv(table, path):
    """Accuracy-vs-noise-ratio curves, one row per (variant, ratio)."""
    import csv

    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["regime", "lambda", "edge_noise", "mean", "std", "n_runs"])
        for row in sorted(
            table,
            key=lambda r: (
                str(r["cell"].get("regime")),
                float(r["cell"].get("lam", 0.0) or 0.0),
                float(r["cell"].get("edge_noise", 0.0) or 0.0),
            ),
        ):
            c = row["cell"]
            writer.writerow(
                [c.get("regime"), c.get("lam", 0.0), c.get("edge_noise", 0.0),
                 row["mean"], row["std"], row["n_runs"]]
            )
