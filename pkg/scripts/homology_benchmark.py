#!/usr/bin/env python3
"""Time the homology core on spheres of growing size and scale.

Prints simplex counts and build/reduce wall clock, which is the quickest
way to pick a max_eps that fits a time or memory budget before running a
full audit.
"""

import argparse
import time

import numpy as np

from creodrift.embedding import PointCloud
from creodrift.seeding import stream
from creodrift.topology import build_vr_filtration, compute_persistence, pairwise_distances


def sphere_cloud(n, seed):
    rng = stream(seed, "bench-sphere")
    pts = rng.normal(size=(n, 3))
    pts /= np.linalg.norm(pts, axis=1)[:, None]
    return PointCloud(labels=tuple(f"w{i}" for i in range(n)), points=pts,
                      metric_tag="angular")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", type=int, nargs="+", default=[50, 100, 150])
    ap.add_argument("--eps", type=float, nargs="+", default=[0.5, 0.6, 0.66])
    ap.add_argument("--max-dim", type=int, default=2)
    ap.add_argument("--seed", type=int, default=42)
    args = ap.parse_args()

    print("n,eps,counts,build_s,reduce_s,top_dim2_bar")
    for n in args.sizes:
        dm = pairwise_distances(sphere_cloud(n, args.seed))
        for eps in args.eps:
            t0 = time.perf_counter()
            filt = build_vr_filtration(dm, max_dim=args.max_dim, max_eps=eps)
            t1 = time.perf_counter()
            diag = compute_persistence(filt, with_generators=False)
            t2 = time.perf_counter()
            bars = sorted((p.persistence for p in diag.pairs_of(2)), reverse=True)
            top = f"{bars[0]:.4f}" if bars else "-"
            print(f"{n},{eps},{filt.counts()},{t1 - t0:.2f},{t2 - t1:.2f},{top}")


if __name__ == "__main__":
    main()
