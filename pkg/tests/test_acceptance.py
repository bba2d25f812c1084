"""Acceptance suite: one test per criterion, at the stated tolerances.

Run with `pytest tests/test_acceptance.py -v`; a PASS/FAIL line per
criterion is printed in the terminal summary.
"""

import json
import math

import numpy as np
import pytest
from scipy.stats import spearmanr

from creodrift.diagram_distance import bottleneck_distance
from creodrift.echochamber import SimParams, Simulation, make_graph, simulate
from creodrift.embedding import PointCloud, sgns_pair_gradients, sgns_pair_loss
from creodrift.manifest import RunManifest
from creodrift.pipeline import run_experiment
from creodrift.projection import TsneParams, tsne_precomputed
from creodrift.seeding import stream
from creodrift.topology import (
    INF,
    DistanceMatrix,
    PersistenceDiagram,
    PersistencePair,
    betti_numbers,
    build_vr_filtration,
    compute_persistence,
    vr_diagram,
)

from fixtures import (
    best_label_agreement,
    diverging_dumps,
    lloyd_kmeans,
    sphere_cloud_rows,
    toy_cluster_dumps,
    write_cloud_csv,
    write_manifest,
)
from oracles import oracle_bottleneck, oracle_diagram

SQRT2 = math.sqrt(2.0)


def random_cloud(rng, n, d, metric):
    pts = rng.normal(size=(n, d))
    if metric == "angular":
        pts /= np.linalg.norm(pts, axis=1)[:, None]
    return PointCloud(labels=tuple(f"p{i}" for i in range(n)), points=pts,
                      metric_tag=metric)


def synthetic_diagram(rng, max_points=5):
    pts = []
    for _ in range(int(rng.integers(0, max_points + 1))):
        b = float(rng.uniform(0, 5))
        pts.append((b, b + float(rng.uniform(0.05, 5))))
    pairs = [PersistencePair(0, b, d) for b, d in pts]
    return PersistenceDiagram(pairs=pairs, max_dim=1, max_eps=1e9, n_points=0), pts


def test_criterion_01_persistence_oracle_equivalence():
    """200 random clouds (n<=8, d<=3, both metrics) match the rank-nullity oracle."""
    rng = stream(11, "acceptance-oracle")
    for trial in range(200):
        n = int(rng.integers(3, 9))
        d = int(rng.integers(2, 4))
        metric = "angular" if trial % 2 == 0 else "euclidean"
        cloud = random_cloud(rng, n, d, metric)
        from creodrift.topology import pairwise_distances

        dm = pairwise_distances(cloud)
        max_eps = 1.0 if metric == "angular" else float(rng.uniform(1.0, 3.0))
        diag = compute_persistence(build_vr_filtration(dm, 2, max_eps),
                                   with_generators=False)
        expected = oracle_diagram(dm.entries, 2, max_eps)
        for k in range(3):
            got = sorted((p.birth, p.death) for p in diag.pairs_of(k))
            want = sorted(expected[k])
            assert len(got) == len(want), (trial, k)
            for (gb, gd), (wb, wd) in zip(got, want):
                assert abs(gb - wb) <= 1e-12
                if wd == INF:
                    assert gd == INF
                else:
                    assert abs(gd - wd) <= 1e-12


def test_criterion_02_unit_square_fixture():
    pts = np.array([[0, 0], [1, 0], [0, 1], [1, 1]], dtype=float)
    cloud = PointCloud(labels=("w1", "w2", "w3", "w4"), points=pts,
                       metric_tag="euclidean")
    diag = vr_diagram(cloud, max_dim=1, max_eps=2.0)
    dim1 = [(p.birth, p.death) for p in diag.pairs_of(1)]
    assert len(dim1) == 1
    assert abs(dim1[0][0] - 1.0) <= 1e-9
    assert abs(dim1[0][1] - SQRT2) <= 1e-9
    assert betti_numbers(diag, 1.5)[0] == 1
    assert betti_numbers(diag, 1.2)[1] == 1


def test_criterion_03_circle_fixture():
    rng = stream(42, "circle")
    theta = rng.uniform(0, 2 * np.pi, size=100)
    pts = np.column_stack([np.cos(theta), np.sin(theta)])
    cloud = PointCloud(labels=tuple(f"p{i}" for i in range(100)), points=pts,
                       metric_tag="euclidean")
    diag = vr_diagram(cloud, max_dim=1, max_eps=1.8, with_generators=False)
    pers = sorted((p.persistence for p in diag.pairs_of(1)), reverse=True)
    assert len(pers) >= 1 and pers[0] != INF
    second = pers[1] if len(pers) > 1 else 0.0
    assert pers[0] >= 3 * second


def test_criterion_04_sphere_isotropy_audit(tmp_path):
    labels, pts = sphere_cloud_rows(n=150, seed=42)
    cloud_path = tmp_path / "sphere.csv"
    write_cloud_csv(cloud_path, labels, pts)
    manifest = RunManifest.load(write_manifest(
        tmp_path / "manifest.json", "isotropy-audit",
        inputs={"cloud": str(cloud_path)},
        params={"embedding": {"metric": "angular"},
                "topology": {"max_dim": 2, "max_eps": 0.66, "min_persistence": 0.1}},
        output_dir="out"))
    run_experiment(manifest)
    holes = (manifest.output_dir / "holes.csv").read_text().strip().split("\n")[1:]
    dim2_rows = [r for r in holes if r.startswith("2,")]
    assert len(dim2_rows) == 1  # one dominant void reported
    rows = (manifest.output_dir / "diagram.csv").read_text().strip().split("\n")[1:]
    pers2 = sorted((float(r.split(",")[2]) - float(r.split(",")[1])
                    for r in rows if r.split(",")[0] == "2" and r.split(",")[2] != "inf"),
                   reverse=True)
    top = pers2[0]
    second = pers2[1] if len(pers2) > 1 else 0.0
    assert top >= 3 * second


def test_criterion_05_bottleneck_metric_axioms():
    rng = stream(77, "axioms")
    for _ in range(200):
        da, pa = synthetic_diagram(rng)
        db, pb = synthetic_diagram(rng)
        dc, _ = synthetic_diagram(rng)
        ab = bottleneck_distance(da, db, 0)
        assert bottleneck_distance(db, da, 0) == ab
        assert bottleneck_distance(da, da, 0) == 0.0
        ac = bottleneck_distance(da, dc, 0)
        cb = bottleneck_distance(dc, db, 0)
        assert ab <= ac + cb + 1e-9
        assert ab == oracle_bottleneck(pa, pb)


def test_criterion_06_stability():
    rng = stream(13, "stability")
    delta = 0.05
    for _ in range(100):
        n = int(rng.integers(5, 9))
        base = rng.uniform(0.3, 2.0, size=(n, n))
        base = np.triu(base, 1)
        base = base + base.T
        noise = rng.uniform(-delta, delta, size=(n, n))
        noise = np.triu(noise, 1)
        noise = noise + noise.T
        pert = base + noise
        np.fill_diagonal(pert, 0.0)
        d1 = compute_persistence(build_vr_filtration(DistanceMatrix(n, base), 1, 10.0),
                                 with_generators=False)
        d2 = compute_persistence(build_vr_filtration(DistanceMatrix(n, pert), 1, 10.0),
                                 with_generators=False)
        for dim in (0, 1):
            assert bottleneck_distance(d1, d2, dim) <= delta + 1e-9


def test_criterion_07_sgns_gradient_check():
    rng = stream(5, "gradcheck")
    h = 1e-5
    worst = 0.0
    for _ in range(100):
        d = int(rng.integers(3, 16))
        n_neg = int(rng.integers(1, 6))
        v = rng.normal(scale=0.8, size=d)
        u_o = rng.normal(scale=0.8, size=d)
        u_n = rng.normal(scale=0.8, size=(n_neg, d))
        grad_v, grad_uo, grad_un = sgns_pair_gradients(v, u_o, u_n)
        for i in range(d):
            vp, vm = v.copy(), v.copy()
            vp[i] += h
            vm[i] -= h
            num = (sgns_pair_loss(vp, u_o, u_n) - sgns_pair_loss(vm, u_o, u_n)) / (2 * h)
            worst = max(worst, abs(grad_v[i] - num) / max(abs(num), 1e-8))
            up, um = u_o.copy(), u_o.copy()
            up[i] += h
            um[i] -= h
            num = (sgns_pair_loss(v, up, u_n) - sgns_pair_loss(v, um, u_n)) / (2 * h)
            worst = max(worst, abs(grad_uo[i] - num) / max(abs(num), 1e-8))
        r = int(rng.integers(n_neg))
        for i in range(d):
            up, um = u_n.copy(), u_n.copy()
            up[r, i] += h
            um[r, i] -= h
            num = (sgns_pair_loss(v, u_o, up) - sgns_pair_loss(v, u_o, um)) / (2 * h)
            worst = max(worst, abs(grad_un[r, i] - num) / max(abs(num), 1e-8))
    assert worst < 1e-4


def test_criterion_08_echo_chamber_convergence():
    graph = make_graph("complete", n=20)
    converged = 0
    plateaued = 0
    for seed in range(10):
        series, _ = simulate(graph, SimParams(global_seed=seed))
        values = np.array(series.values)
        initial = values[0]
        final_smoothed = values[-5:].mean()
        tail = values[int(len(values) * 0.75):]
        converged += final_smoothed < 0.5 * initial
        plateaued += (tail.max() - tail.min()) < 0.10 * initial
    assert converged >= 9
    assert plateaued >= 9


def test_criterion_09_echo_chamber_locality():
    params = SimParams(vocab_size=20, dim=8, steps=2000, global_seed=31,
                       sample_interval=200)
    full_graph = make_graph("two_cliques", a=10, b=10, bridge=0)

    def key(e):
        return (e.time, e.speaker, e.listener, e.topic, e.words)

    sim_full = Simulation(full_graph, params)
    full_events = [sim_full.step() for _ in range(params.steps)]

    for clique, members in (("first", range(0, 10)), ("second", range(10, 20))):
        members = set(members)
        sub_edges = [(i, j, w) for i, j, w in full_graph.edges if i in members]
        sub_graph = make_graph("custom", n=20, edges=sub_edges)
        clique_events = [e for e in full_events if e.speaker in members]
        sim_sub = Simulation(sub_graph, params)
        sub_events = [sim_sub.step() for _ in range(len(clique_events))]
        assert [key(e) for e in sub_events] == [key(e) for e in clique_events]
        for i in members:
            assert np.array_equal(sim_full.population[i].representation,
                                  sim_sub.population[i].representation)


def test_criterion_10_tsne_cluster_recovery():
    from creodrift.diagram_distance import DiagramDistanceMatrix

    n_per, blocks = 10, 3
    n = n_per * blocks
    entries = np.full((n, n), 0.9)
    for b in range(blocks):
        s = slice(b * n_per, (b + 1) * n_per)
        entries[s, s] = 0.1
    np.fill_diagonal(entries, 0.0)
    dm = DiagramDistanceMatrix(labels=tuple(f"u{i:02d}" for i in range(n)),
                               dim=0, entries=entries)
    truth = np.repeat(np.arange(3), n_per)
    wins = 0
    for seed in range(10):
        proj = tsne_precomputed(dm, TsneParams(perplexity=5, seed=seed))
        labels = lloyd_kmeans(proj.coordinates.copy(), 3, np.random.default_rng(seed))
        wins += best_label_agreement(labels, truth) >= 0.95
    assert wins >= 9


def test_criterion_11_divergence_pipeline(tmp_path):
    params = {
        "embedding": {"dim": 12, "window": 3, "negatives": 3, "epochs": 2,
                      "min_count": 3, "top_n": 30, "metric": "angular"},
        "topology": {"max_dim": 1, "max_eps": 1.0},
        "distance": {"dims": [0]},
    }
    drift_dir = tmp_path / "drift"
    drift_dir.mkdir()
    dumps = diverging_dumps(drift_dir)
    manifest = RunManifest.load(write_manifest(
        drift_dir / "manifest.json", "subreddit-divergence",
        inputs={"dumps": dumps}, params=params, output_dir="out"))
    run_experiment(manifest)
    rows = (manifest.output_dir / "divergence.csv").read_text().strip().split("\n")[1:]
    series = [float(r.split(",")[3]) for r in rows]
    assert len(series) == 6
    rho, _ = spearmanr(range(len(series)), series)
    assert rho >= 0.7

    control_dir = tmp_path / "control"
    control_dir.mkdir()
    dumps = diverging_dumps(control_dir, identical=True)
    manifest = RunManifest.load(write_manifest(
        control_dir / "manifest.json", "subreddit-divergence",
        inputs={"dumps": dumps}, params=params, output_dir="out"))
    run_experiment(manifest)
    rows = (manifest.output_dir / "divergence.csv").read_text().strip().split("\n")[1:]
    assert all(float(r.split(",")[3]) == 0.0 for r in rows)


def test_criterion_12_end_to_end_determinism(tmp_path):
    dumps = toy_cluster_dumps(tmp_path)
    man_path = write_manifest(
        tmp_path / "manifest.json", "user-clusters",
        inputs={"dumps": dumps},
        params={
            "users": {"top_k": 3},
            "embedding": {"dim": 12, "window": 3, "negatives": 3, "epochs": 2,
                          "min_count": 3, "top_n": 25, "metric": "angular"},
            "topology": {"max_dim": 1, "max_eps": 1.0},
            "distance": {"dims": [0, 1]},
            "tsne": {"perplexity": 3, "iterations": 300, "projection_dim": 0},
        },
        output_dir="out")
    rec1 = run_experiment(RunManifest.load(man_path, out_override="run1"))
    rec2 = run_experiment(RunManifest.load(man_path, out_override="run2"))
    assert rec1.manifest_hash == rec2.manifest_hash
    assert rec1.artifact_hashes() == rec2.artifact_hashes()
