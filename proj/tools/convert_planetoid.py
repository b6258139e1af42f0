#!/usr/bin/env python3
# Copyright 2026 The SPGCL Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Convert Planetoid `ind.<name>.*` files into the spgcl CSV layout.

    python3 tools/convert_planetoid.py --raw planetoid/data --name cora --out data/cora

Uses the standard public split: the first len(y) nodes train, the next 500
validate, and the nodes in test.index test. Citeseer test ids that are
missing from the graph file get zero features and label 0.
"""

import argparse
import pathlib
import pickle
import sys

import numpy as np
import scipy.sparse as sp


def load_part(raw: pathlib.Path, name: str, part: str):
    with open(raw / f"ind.{name}.{part}", "rb") as f:
        return pickle.load(f, encoding="latin1")


def dense(m) -> np.ndarray:
    return m.toarray() if sp.issparse(m) else np.asarray(m)


def convert(raw: pathlib.Path, name: str, out: pathlib.Path, normalize: bool) -> None:
    x, y, tx, ty, allx, ally, graph = (
        load_part(raw, name, p) for p in ("x", "y", "tx", "ty", "allx", "ally", "graph"))
    test_index = np.loadtxt(raw / f"ind.{name}.test.index", dtype=np.int64)
    test_sorted = np.sort(test_index)

    tx, ty = dense(tx), dense(ty)
    if name == "citeseer":
        # Isolated test nodes are absent from tx/ty; pad them with zeros.
        full = np.arange(test_sorted.min(), test_sorted.max() + 1)
        tx_ext = np.zeros((len(full), tx.shape[1]))
        ty_ext = np.zeros((len(full), ty.shape[1]))
        tx_ext[test_sorted - test_sorted.min()] = tx
        ty_ext[test_sorted - test_sorted.min()] = ty
        tx, ty = tx_ext, ty_ext

    features = np.vstack([dense(allx), tx])
    labels = np.vstack([dense(ally), ty])
    features[test_index] = features[test_sorted]
    labels[test_index] = labels[test_sorted]
    n = features.shape[0]

    if normalize:
        sums = features.sum(axis=1, keepdims=True)
        features = np.divide(features, sums, out=np.zeros_like(features), where=sums != 0)

    edges = set()
    for u, nbrs in graph.items():
        for v in nbrs:
            if u != v and u < n and v < n:
                edges.add((min(u, v), max(u, v)))

    splits = np.full(n, "none", dtype=object)
    splits[np.arange(len(dense(y)))] = "train"
    splits[np.arange(len(dense(y)), len(dense(y)) + 500)] = "val"
    splits[test_index] = "test"

    out.mkdir(parents=True, exist_ok=True)
    with open(out / "edges.csv", "w") as f:
        f.writelines(f"{u},{v}\n" for u, v in sorted(edges))
    np.savetxt(out / "features.csv", features, fmt="%.9g", delimiter=",")
    np.savetxt(out / "labels.csv", labels.argmax(axis=1), fmt="%d")
    with open(out / "splits.csv", "w") as f:
        f.writelines(s + "\n" for s in splits)

    counts = {s: int((splits == s).sum()) for s in ("train", "val", "test")}
    print(f"{name}: N={n} |E|={len(edges)} d={features.shape[1]} "
          f"C={labels.shape[1]} splits={counts}")


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--raw", type=pathlib.Path, required=True, help="directory with ind.* files")
    ap.add_argument("--name", required=True, choices=["cora", "citeseer", "pubmed"])
    ap.add_argument("--out", type=pathlib.Path, required=True)
    ap.add_argument("--no-normalize", action="store_true",
                    help="keep raw features instead of scaling rows to sum 1")
    args = ap.parse_args()
    convert(args.raw, args.name, args.out, not args.no_normalize)
    return 0


if __name__ == "__main__":
    sys.exit(main())
