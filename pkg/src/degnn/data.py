"""Dataset bundles, semi-supervised splits, and raw-format conversion.

Bundle directory layout:
    meta.json     {"n_nodes": N, "n_features": D, "n_classes": C}
    edges.tsv     one "i<TAB>j[<TAB>weight]" line per undirected edge
    features.bin  N*D little-endian float32, row-major
    labels.txt    one integer per line
Optional: names.txt, one identifier per line.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np

from .errors import (
    BadLabel,
    InsufficientNodes,
    IoError,
    MissingFile,
    ShapeMismatch,
    UnrecognizedFormat,
)
from .graph import Graph, validate


@dataclass
class Dataset:
    graph: Graph
    features: np.ndarray  # N x D float32
    labels: np.ndarray    # N ints in [0, C)
    n_classes: int
    names: list | None = None

    def check(self):
        n = self.graph.n_nodes
        if self.features.shape[0] != n or len(self.labels) != n:
            raise ShapeMismatch(
                f"features/labels rows {self.features.shape[0]}/{len(self.labels)} vs {n} nodes"
            )
        if len(self.labels) and (self.labels.min() < 0 or self.labels.max() >= self.n_classes):
            raise BadLabel(f"label outside [0, {self.n_classes})")
        counts = np.bincount(self.labels, minlength=self.n_classes)
        if np.any(counts == 0):
            raise BadLabel(f"empty class {int(np.argmin(counts))}")
        bad = validate(self.graph)
        if bad is not None:
            raise ShapeMismatch(f"invalid graph: {bad}")
        return self


@dataclass
class Split:
    train: np.ndarray
    val: np.ndarray
    test: np.ndarray
    seed: int = 0

    def to_json(self, path):
        with open(path, "w") as f:
            json.dump(
                {
                    "train": self.train.tolist(),
                    "val": self.val.tolist(),
                    "test": self.test.tolist(),
                    "seed": self.seed,
                },
                f,
            )

    @classmethod
    def from_json(cls, path):
        with open(path) as f:
            d = json.load(f)
        return cls(
            np.array(d["train"], dtype=np.int64),
            np.array(d["val"], dtype=np.int64),
            np.array(d["test"], dtype=np.int64),
            d.get("seed", 0),
        )


def save_bundle(ds: Dataset, path):
    """Write a dataset bundle; round-trips bitwise through load_bundle."""
    ds.check()
    try:
        os.makedirs(path, exist_ok=True)
        with open(os.path.join(path, "meta.json"), "w") as f:
            json.dump(
                {
                    "n_nodes": ds.graph.n_nodes,
                    "n_features": int(ds.features.shape[1]),
                    "n_classes": ds.n_classes,
                },
                f,
            )
        ds.graph.to_edgelist(os.path.join(path, "edges.tsv"))
        with open(os.path.join(path, "features.bin"), "wb") as f:
            f.write(np.ascontiguousarray(ds.features, dtype="<f4").tobytes())
        with open(os.path.join(path, "labels.txt"), "w") as f:
            f.writelines(f"{int(y)}\n" for y in ds.labels)
        if ds.names is not None:
            with open(os.path.join(path, "names.txt"), "w") as f:
                f.writelines(f"{name}\n" for name in ds.names)
    except OSError as e:
        raise IoError(str(e)) from e


def load_bundle(path) -> Dataset:
    """Load and validate a bundle directory."""
    meta_path = os.path.join(path, "meta.json")
    for fname in ("meta.json", "edges.tsv", "features.bin", "labels.txt"):
        if not os.path.exists(os.path.join(path, fname)):
            raise MissingFile(os.path.join(path, fname))
    with open(meta_path) as f:
        meta = json.load(f)
    n, d, c = meta["n_nodes"], meta["n_features"], meta["n_classes"]
    raw = open(os.path.join(path, "features.bin"), "rb").read()
    if len(raw) != n * d * 4:
        raise ShapeMismatch(f"features.bin has {len(raw)} bytes, expected {n * d * 4}")
    features = np.frombuffer(raw, dtype="<f4").reshape(n, d).copy()
    labels = np.loadtxt(os.path.join(path, "labels.txt"), dtype=np.int64, ndmin=1)
    if len(labels) != n:
        raise ShapeMismatch(f"labels.txt has {len(labels)} lines, expected {n}")
    graph = Graph.from_edgelist(os.path.join(path, "edges.tsv"), n)
    names = None
    names_path = os.path.join(path, "names.txt")
    if os.path.exists(names_path):
        names = [line.rstrip("\n") for line in open(names_path)]
    return Dataset(graph, features, labels, c, names).check()


def make_split(ds: Dataset, seed: int, per_class: int = 20, n_val: int = 500,
               n_test: int = 1000) -> Split:
    """Uniform class-balanced train split plus disjoint val/test samples."""
    rng = np.random.default_rng(seed)
    train = []
    for c in range(ds.n_classes):
        members = np.nonzero(ds.labels == c)[0]
        if len(members) < per_class:
            raise InsufficientNodes(
                f"class {c} has {len(members)} nodes, need {per_class}"
            )
        train.append(rng.choice(members, size=per_class, replace=False))
    train = np.sort(np.concatenate(train))
    rest = np.setdiff1d(np.arange(ds.graph.n_nodes), train)
    if len(rest) < n_val + n_test:
        raise InsufficientNodes(
            f"{len(rest)} nodes left for val+test, need {n_val + n_test}"
        )
    perm = rng.permutation(rest)
    val = np.sort(perm[:n_val])
    test = np.sort(perm[n_val:n_val + n_test])
    return Split(train, val, test, seed)


def convert_raw(raw_path, out_path) -> Dataset:
    """Convert a public raw dataset layout into a bundle.

    Recognized layouts:
      * a directory containing <name>.content and <name>.cites (the public
        Cora/Citeseer distribution format)
      * an existing bundle (validated pass-through copy)
    """
    if os.path.isdir(raw_path) and os.path.exists(os.path.join(raw_path, "meta.json")):
        ds = load_bundle(raw_path)
        save_bundle(ds, out_path)
        return ds
    content, cites = None, None
    if os.path.isdir(raw_path):
        for fname in sorted(os.listdir(raw_path)):
            if fname.endswith(".content"):
                content = os.path.join(raw_path, fname)
            elif fname.endswith(".cites"):
                cites = os.path.join(raw_path, fname)
    if content is None or cites is None:
        raise UnrecognizedFormat(f"no bundle or .content/.cites pair under {raw_path}")

    ids, rows, label_names = [], [], []
    try:
        with open(content) as f:
            for line in f:
                parts = line.split()
                if len(parts) < 3:
                    raise UnrecognizedFormat(f"malformed content line: {line[:60]!r}")
                ids.append(parts[0])
                rows.append([float(v) for v in parts[1:-1]])
                label_names.append(parts[-1])
    except ValueError as e:
        raise UnrecognizedFormat(f"bad feature value in {content}: {e}") from e
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise UnrecognizedFormat(f"inconsistent feature widths {sorted(widths)}")
    index = {pid: k for k, pid in enumerate(ids)}
    classes = sorted(set(label_names))
    labels = np.array([classes.index(name) for name in label_names], dtype=np.int64)
    features = np.array(rows, dtype=np.float32)

    edges = []
    with open(cites) as f:
        for line in f:
            parts = line.split()
            if len(parts) != 2:
                raise UnrecognizedFormat(f"malformed cites line: {line[:60]!r}")
            a, b = index.get(parts[0]), index.get(parts[1])
            if a is None or b is None or a == b:
                continue  # citations to papers outside the content file
            edges.append((a, b))
    graph = Graph.from_edges(len(ids), edges) if edges else Graph.empty(len(ids))
    ds = Dataset(graph, features, labels, len(classes), names=ids).check()
    save_bundle(ds, out_path)
    return ds
