#!/usr/bin/env python3
"""Convert Planetoid-format citation data (ind.<name>.*) to plain text files.

Outputs three files understood by the dog CLI:
  <name>.features  one node per line, D whitespace-separated values
  <name>.edges     one undirected edge per line, "src dst", 0-based, src < dst
  <name>.labels    one node per line, "label split" with split in
                   {train, val, test, none}

Reconstruction follows the reference semi-supervised GCN setup: rows of
allx stacked over tx, with the tx block permuted into the positions given
by ind.<name>.test.index; train = first 140 nodes, val = next 500,
test = the test-index nodes.
"""

import argparse
import pickle
import sys
from pathlib import Path

import numpy as np
import scipy.sparse as sp


def load_pickle(path: Path):
    with open(path, "rb") as fh:
        return pickle.load(fh, encoding="latin1")


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("src", type=Path, help="directory with ind.<name>.* files")
    ap.add_argument("name", help="dataset name, e.g. cora")
    ap.add_argument("out", type=Path, help="output directory")
    args = ap.parse_args()

    def part(suffix):
        return load_pickle(args.src / f"ind.{args.name}.{suffix}")

    x, y, tx, ty, allx, ally, graph = (part(s) for s in
                                       ("x", "y", "tx", "ty", "allx", "ally", "graph"))
    test_idx = np.loadtxt(args.src / f"ind.{args.name}.test.index", dtype=np.int64)
    test_sorted = np.sort(test_idx)

    features = sp.vstack((allx, tx)).tolil()
    features[test_idx, :] = features[test_sorted, :]
    features = features.toarray()
    labels_1hot = np.vstack((ally, ty))
    labels_1hot[test_idx, :] = labels_1hot[test_sorted, :]
    labels = labels_1hot.argmax(axis=1)
    # Rows with no label bit at all stay unlabeled (citeseer has a few).
    has_label = labels_1hot.sum(axis=1) > 0

    n = features.shape[0]
    n_train, n_val = y.shape[0], 500
    split = np.array(["none"] * n, dtype=object)
    split[:n_train] = "train"
    split[n_train:n_train + n_val] = "val"
    split[test_sorted] = "test"

    edges = set()
    self_loops = dupes = 0
    for u, nbrs in graph.items():
        for v in nbrs:
            if u == v:
                self_loops += 1
                continue
            e = (min(u, v), max(u, v))
            if e in edges:
                dupes += 1
            edges.add(e)
    edges = sorted(edges)

    args.out.mkdir(parents=True, exist_ok=True)
    is_int = np.all(features == features.astype(np.int64))
    with open(args.out / f"{args.name}.features", "w") as fh:
        for row in features:
            if is_int:
                fh.write(" ".join(str(int(v)) for v in row) + "\n")
            else:
                fh.write(" ".join(repr(float(v)) for v in row) + "\n")
    with open(args.out / f"{args.name}.edges", "w") as fh:
        for u, v in edges:
            fh.write(f"{u} {v}\n")
    with open(args.out / f"{args.name}.labels", "w") as fh:
        for i in range(n):
            lab = str(labels[i]) if has_label[i] else "-"
            fh.write(f"{lab} {split[i]}\n")

    deg = np.zeros(n, dtype=np.int64)
    same = tot = 0
    for u, v in edges:
        deg[u] += 1
        deg[v] += 1
        if has_label[u] and has_label[v]:
            tot += 1
            same += labels[u] == labels[v]
    print(f"N={n} D={features.shape[1]} C={labels_1hot.shape[1]} |E|={len(edges)}")
    print(f"splits: train={np.sum(split == 'train')} val={np.sum(split == 'val')} "
          f"test={np.sum(split == 'test')} none={np.sum(split == 'none')}")
    print(f"raw graph dict: self_loops={self_loops} duplicate_pairs={dupes}")
    print(f"homophily={same / tot:.4f} avg_degree={deg.mean():.4f} "
          f"isolated={int(np.sum(deg == 0))} unlabeled={int(np.sum(~has_label))}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
