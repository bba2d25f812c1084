#!/usr/bin/env python3
"""Generate synthetic demo inputs plus ready-to-run manifests.

Writes four self-contained experiment setups under the target directory:
toy user clusters, a diverging two-community corpus, a 150-point sphere
cloud for the isotropy audit, and an echo-chamber config. Prints the
creodrift commands that consume them.
"""

import argparse
import json
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from creodrift.seeding import stream


def month_ts(year, month, i):
    base = int(datetime(year, month, 1, tzinfo=timezone.utc).timestamp())
    return base + 3600 * (i % (27 * 24))


def write_dump(path, rows):
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row) + "\n")


def toy_clusters(root: Path, seed: int):
    dumps = {}
    for comm in ("red", "green", "blue"):
        rng = stream(seed, "demo", comm)
        pool = [f"{comm}word{i:02d}" for i in range(25)]
        rows = []
        for u in range(3):
            for i in range(30):
                words = rng.choice(pool, size=8)
                rows.append({"author": f"{comm}_u{u}",
                             "created_utc": month_ts(2016, 1, i),
                             "subreddit": comm, "body": " ".join(words)})
        path = root / f"{comm}.jsonl"
        write_dump(path, rows)
        dumps[comm] = path.name
    manifest = {
        "experiment": "user-clusters",
        "seed": seed,
        "output_dir": "out_user_clusters",
        "inputs": {"dumps": dumps},
        "params": {
            "users": {"top_k": 3},
            "embedding": {"dim": 12, "window": 3, "negatives": 3, "epochs": 2,
                          "min_count": 3, "top_n": 25, "metric": "angular"},
            "topology": {"max_dim": 1, "max_eps": 1.0},
            "distance": {"dims": [0, 1]},
            "tsne": {"perplexity": 3, "iterations": 300, "projection_dim": 0},
        },
    }
    (root / "user_clusters.json").write_text(json.dumps(manifest, indent=2))


def diverging(root: Path, seed: int, months=6):
    shared = [f"commonword{i:02d}" for i in range(30)]
    pools = {c: [f"{c}word{i:02d}" for i in range(30)] for c in ("alpha", "beta")}
    dumps = {}
    for comm in ("alpha", "beta"):
        rng = stream(seed, "demo-diverge", comm)
        rows = []
        for m in range(months):
            year, month = divmod(5 + m, 12)
            year, month = 2015 + year, month + 1
            frac = 1.0 - m / (months - 1)
            for i in range(120):
                words = [shared[int(rng.integers(30))] if rng.random() < frac
                         else pools[comm][int(rng.integers(30))]
                         for _ in range(10)]
                rows.append({"author": f"{comm}_user{i % 8}",
                             "created_utc": month_ts(year, month, i),
                             "subreddit": comm, "body": " ".join(words)})
        path = root / f"{comm}.jsonl"
        write_dump(path, rows)
        dumps[comm] = path.name
    manifest = {
        "experiment": "subreddit-divergence",
        "seed": seed,
        "output_dir": "out_divergence",
        "inputs": {"dumps": dumps},
        "params": {
            "embedding": {"dim": 12, "window": 3, "negatives": 3, "epochs": 2,
                          "min_count": 3, "top_n": 30, "metric": "angular"},
            "topology": {"max_dim": 1, "max_eps": 1.0},
            "distance": {"dims": [0]},
        },
    }
    (root / "divergence.json").write_text(json.dumps(manifest, indent=2))


def sphere(root: Path, seed: int, n=150):
    rng = stream(seed, "sphere")
    pts = rng.normal(size=(n, 3))
    pts /= np.linalg.norm(pts, axis=1)[:, None]
    with open(root / "sphere_cloud.csv", "w") as fh:
        fh.write("word,x1,x2,x3\n")
        for i, row in enumerate(pts):
            fh.write(f"w{i}," + ",".join(repr(float(x)) for x in row) + "\n")
    manifest = {
        "experiment": "isotropy-audit",
        "seed": seed,
        "output_dir": "out_isotropy",
        "inputs": {"cloud": "sphere_cloud.csv"},
        "params": {"embedding": {"metric": "angular"},
                   "topology": {"max_dim": 2, "max_eps": 0.66, "min_persistence": 0.1}},
    }
    (root / "isotropy.json").write_text(json.dumps(manifest, indent=2))


def sim(root: Path, seed: int):
    (root / "sim_complete20.cfg").write_text(
        "graph.kind=complete\ngraph.n=20\n"
        "vocab_size=50\ndim=16\nsteps=20000\nutterance_length=8\n"
        f"beta=5.0\neta=0.05\ninit=independent\nglobal_seed={seed}\n"
        "sample_interval=100\n")
    manifest = {
        "experiment": "simulate",
        "seed": seed,
        "output_dir": "out_simulate",
        "inputs": {},
        "params": {"sim": {
            "runs": [
                {"name": "complete20", "config": "sim_complete20.cfg"},
                {"name": "two_cliques", "graph": {"kind": "two_cliques", "a": 10,
                                                  "b": 10, "bridge": 1},
                 "params": {"vocab_size": 50, "dim": 16, "steps": 20000,
                            "sample_interval": 100}},
            ],
            "checkpoints": [],
        }},
    }
    (root / "simulate.json").write_text(json.dumps(manifest, indent=2))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--dir", default="demo", help="directory for fixtures and manifests")
    ap.add_argument("--seed", type=int, default=42)
    args = ap.parse_args()
    root = Path(args.dir)
    root.mkdir(parents=True, exist_ok=True)
    toy_clusters(root, args.seed)
    diverging(root, args.seed)
    sphere(root, args.seed)
    sim(root, args.seed)
    print(f"fixtures in {root}/; run e.g.:")
    for exp, man in (("user-clusters", "user_clusters.json"),
                     ("subreddit-divergence", "divergence.json"),
                     ("isotropy-audit", "isotropy.json"),
                     ("simulate", "simulate.json")):
        print(f"  creodrift {exp} --manifest {root / man}")


if __name__ == "__main__":
    main()
