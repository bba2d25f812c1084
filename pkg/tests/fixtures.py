"""Synthetic corpora, clouds, and manifests for pipeline-level tests."""

import json
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from creodrift.seeding import stream


def month_timestamp(year: int, month: int, i: int) -> int:
    base = int(datetime(year, month, 1, tzinfo=timezone.utc).timestamp())
    return base + 3600 * (i % (27 * 24))  # stay inside the month


def write_dump(path: Path, rows: list[dict]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row) + "\n")


def community_dump(path: Path, community: str, users: list[str], topics: list[str],
                   docs_per_user: int = 40, tokens_per_doc: int = 8,
                   year: int = 2016, month: int = 1, seed: int = 0) -> None:
    """One month of synthetic comments; every user draws from the community pool."""
    rng = stream(seed, "dump", community)
    rows = []
    i = 0
    for user in users:
        for _ in range(docs_per_user):
            words = rng.choice(topics, size=tokens_per_doc)
            rows.append({
                "author": user,
                "created_utc": month_timestamp(year, month, i),
                "subreddit": community,
                "body": " ".join(words),
            })
            i += 1
    write_dump(path, rows)


def word_pool(tag: str, size: int) -> list[str]:
    return [f"{tag}word{i:02d}" for i in range(size)]


def diverging_dumps(dir_path: Path, months: int = 6, docs_per_month: int = 120,
                    tokens_per_doc: int = 10, seed: int = 0,
                    identical: bool = False) -> dict[str, str]:
    """Two communities whose vocabularies drift apart month by month.

    Month m mixes a shared pool with a community pool at shared fraction
    1 - m/(months-1): identical distributions at the start, fully disjoint
    at the end. With identical=True both dumps carry the same documents
    (the drift control).
    """
    shared = word_pool("common", 30)
    pools = {"alpha": word_pool("alpha", 30), "beta": word_pool("beta", 30)}
    paths = {}
    for comm in ("alpha", "beta"):
        rng = stream(seed, "diverge", "alpha" if identical else comm)
        rows = []
        for m in range(months):
            year, month = divmod(6 - 1 + m, 12)
            year, month = 2015 + year, month + 1  # June 2015 onward
            shared_frac = 1.0 - m / max(1, months - 1)
            for i in range(docs_per_month):
                words = []
                for _ in range(tokens_per_doc):
                    if rng.random() < shared_frac:
                        words.append(shared[int(rng.integers(len(shared)))])
                    else:
                        pool = pools["alpha" if identical else comm]
                        words.append(pool[int(rng.integers(len(pool)))])
                rows.append({
                    "author": f"{comm}_user{i % 8}",
                    "created_utc": month_timestamp(year, month, i),
                    "subreddit": comm,
                    "body": " ".join(words),
                })
        path = dir_path / f"{comm}.jsonl"
        write_dump(path, rows)
        paths[comm] = str(path)
    return paths


def toy_cluster_dumps(dir_path: Path, n_users: int = 3, seed: int = 0) -> dict[str, str]:
    """Three tiny communities with distinct topic pools, one month each."""
    paths = {}
    for comm in ("red", "green", "blue"):
        users = [f"{comm}_u{i}" for i in range(n_users)]
        path = dir_path / f"{comm}.jsonl"
        community_dump(path, comm, users, word_pool(comm, 25),
                       docs_per_user=30, seed=seed)
        paths[comm] = str(path)
    return paths


def sphere_cloud_rows(n: int = 150, seed: int = 42) -> tuple[tuple[str, ...], np.ndarray]:
    rng = stream(seed, "sphere")
    pts = rng.normal(size=(n, 3))
    pts /= np.linalg.norm(pts, axis=1)[:, None]
    return tuple(f"w{i}" for i in range(n)), pts


def write_cloud_csv(path: Path, labels, points) -> None:
    dim = points.shape[1]
    with open(path, "w") as fh:
        fh.write("word," + ",".join(f"x{i + 1}" for i in range(dim)) + "\n")
        for label, row in zip(labels, points):
            fh.write(label + "," + ",".join(repr(float(x)) for x in row) + "\n")


def write_manifest(path: Path, experiment: str, inputs: dict, params: dict,
                   output_dir: str, seed: int = 42) -> Path:
    path.write_text(json.dumps({
        "experiment": experiment,
        "seed": seed,
        "output_dir": output_dir,
        "inputs": inputs,
        "params": params,
    }, indent=2))
    return path


def lloyd_kmeans(pts, k, rng, iters=60, restarts=8):
    best, best_inertia = None, np.inf
    for _ in range(restarts):
        centers = pts[rng.choice(len(pts), k, replace=False)].copy()
        for _ in range(iters):
            d = ((pts[:, None, :] - centers[None]) ** 2).sum(-1)
            lab = d.argmin(1)
            for c in range(k):
                if (lab == c).any():
                    centers[c] = pts[lab == c].mean(0)
        inertia = ((pts - centers[lab]) ** 2).sum()
        if inertia < best_inertia:
            best, best_inertia = lab.copy(), inertia
    return best


def best_label_agreement(lab, truth, k=3):
    import itertools

    return max((np.array([p[l] for l in lab]) == truth).mean()
               for p in itertools.permutations(range(k)))
