"""The five manifest-driven experiments.

Each experiment is a chain of stages that communicate through files under
the output directory (corpora as internal JSONL, point clouds and
diagrams as CSV), so any stage can be re-run or audited in isolation and
every artifact is hashed into provenance.json.
"""

from __future__ import annotations

import dataclasses
import json
from pathlib import Path
from typing import Optional

from . import corpus as corpus_mod
from . import echochamber as ec
from .diagram_distance import (
    bottleneck_distance,
    distance_matrix,
    mean_group_distance,
    read_matrix_csv,
    wasserstein_distance,
    write_matrix_csv,
    write_pair_report_csv,
)
from .embedding import (
    TrainParams,
    export_point_cloud_csv,
    load_point_cloud_csv,
    point_cloud,
    train_incremental,
    train_skipgram,
)
from .errors import ManifestError
from .manifest import ProvenanceRecord, RunManifest, Stage, run_stages
from .projection import TsneParams, export_scatter, tsne_precomputed
from .topology import (
    hole_report,
    read_barcode_csv,
    vr_diagram,
    write_barcode_csv,
    write_generators_csv,
)


def _label(community: str, author: str) -> str:
    return f"{community}:{author}".replace(",", "_")


def _month_key(year: int, month: int) -> str:
    return f"{year:04d}-{month:02d}"


def _corpus_filter(manifest: RunManifest) -> corpus_mod.CorpusFilter:
    block = manifest.block("corpus")
    communities = block.get("communities")
    return corpus_mod.CorpusFilter(
        communities=set(communities) if communities else None,
        min_timestamp=block.get("min_timestamp"),
        max_timestamp=block.get("max_timestamp"),
        min_doc_tokens=block.get("min_doc_tokens", 3),
    )


def _train_params(manifest: RunManifest) -> TrainParams:
    block = manifest.block("embedding")
    return TrainParams(
        dim=block.get("dim", 64),
        window=block.get("window", 5),
        negatives=block.get("negatives", 5),
        epochs=block.get("epochs", 5),
        learning_rate=block.get("learning_rate", 0.025),
        min_count=block.get("min_count", 5),
        subsample_threshold=block.get("subsample_threshold", 1e-3),
        seed=manifest.seed,
    )


def _cloud_settings(manifest: RunManifest) -> tuple[int, str]:
    block = manifest.block("embedding")
    return block.get("top_n", 200), block.get("metric", "angular")


def _topology_settings(manifest: RunManifest) -> dict:
    block = manifest.block("topology")
    return {
        "max_dim": block.get("max_dim", 2),
        "max_eps": block.get("max_eps", 1.0),
        "budget": block.get("budget", 50_000_000),
        "min_persistence": block.get("min_persistence", 0.1),
    }


def _distance_settings(manifest: RunManifest, max_dim: int) -> dict:
    block = manifest.block("distance")
    return {
        "dims": block.get("dims", list(range(max_dim + 1))),
        "kind": block.get("kind", "bottleneck"),
        "q": block.get("q", 1.0),
    }


def _tsne_params(manifest: RunManifest) -> tuple[TsneParams, int]:
    block = manifest.block("tsne")
    params = TsneParams(
        perplexity=block.get("perplexity", 10.0),
        iterations=block.get("iterations", 1000),
        learning_rate=block.get("learning_rate", 200.0),
        seed=manifest.seed,
    )
    return params, block.get("projection_dim", 0)


def _ingest_stage(manifest: RunManifest, out: Path) -> tuple[Stage, dict[str, Path]]:
    """One corpus JSONL per community under out/corpus/."""
    dumps = manifest.inputs.get("dumps")
    if not isinstance(dumps, dict) or not dumps:
        raise ManifestError("inputs.dumps must map community names to JSONL paths")
    corpus_dir = out / "corpus"
    targets = {comm: corpus_dir / f"{comm}.jsonl" for comm in sorted(dumps)}

    def run():
        corpus_dir.mkdir(parents=True, exist_ok=True)
        filt = _corpus_filter(manifest)
        for comm, dump_path in sorted(dumps.items()):
            with open(manifest.resolve(dump_path), "r", encoding="utf-8") as fh:
                corp = corpus_mod.ingest_jsonl(fh, filt)
            with open(targets[comm], "w", encoding="utf-8") as fh:
                for line in corpus_mod.serialize_jsonl(corp):
                    fh.write(line + "\n")

    return Stage("ingest", run,
                 inputs=[manifest.resolve(p) for p in sorted(dumps.values())],
                 outputs=list(targets.values())), targets


def _load_corpus(path: Path) -> corpus_mod.Corpus:
    with open(path, "r", encoding="utf-8") as fh:
        return corpus_mod.load_jsonl(fh)


# ---------------------------------------------------------------------------
# user-clusters
# ---------------------------------------------------------------------------

def run_user_clusters(manifest: RunManifest,
                      from_stage: Optional[str] = None) -> ProvenanceRecord:
    out = manifest.output_dir
    out.mkdir(parents=True, exist_ok=True)
    ingest, corpora = _ingest_stage(manifest, out)
    top_k = manifest.block("users").get("top_k", 50)
    top_n, metric = _cloud_settings(manifest)
    topo = _topology_settings(manifest)
    users_json = out / "users.json"
    clouds_dir = out / "clouds"
    diagrams_dir = out / "diagrams"

    def select_users():
        selected = {}
        for comm, path in corpora.items():
            corp = _load_corpus(path)
            ranked = corpus_mod.top_users(corp, top_k)
            selected[comm] = [author for author, _ in ranked]
        users_json.write_text(json.dumps(selected, indent=2, sort_keys=True))

    def embed_users():
        clouds_dir.mkdir(parents=True, exist_ok=True)
        params = _train_params(manifest)
        selected = json.loads(users_json.read_text())
        for comm, path in corpora.items():
            corp = _load_corpus(path)
            per_user = dict(corpus_mod.top_users(corp, top_k))
            for author in selected[comm]:
                model = train_skipgram(per_user[author], params)
                cloud = point_cloud(model, top_n, metric)
                with open(clouds_dir / f"{_label(comm, author)}.csv", "w") as fh:
                    export_point_cloud_csv(cloud, fh)

    def persist():
        diagrams_dir.mkdir(parents=True, exist_ok=True)
        selected = json.loads(users_json.read_text())
        for comm in sorted(selected):
            for author in selected[comm]:
                label = _label(comm, author)
                with open(clouds_dir / f"{label}.csv") as fh:
                    cloud = load_point_cloud_csv(fh, metric_tag=metric)
                diag = vr_diagram(cloud, max_dim=topo["max_dim"], max_eps=topo["max_eps"],
                                  budget=topo["budget"], with_generators=False)
                with open(diagrams_dir / f"{label}.csv", "w") as fh:
                    write_barcode_csv(diag, fh)

    dist = _distance_settings(manifest, topo["max_dim"])
    matrix_paths = {d: out / f"distance_dim{d}.csv" for d in dist["dims"]}

    def distances():
        selected = json.loads(users_json.read_text())
        labeled = []
        for comm in sorted(selected):
            for author in selected[comm]:
                label = _label(comm, author)
                with open(diagrams_dir / f"{label}.csv") as fh:
                    labeled.append((label, read_barcode_csv(
                        fh, max_dim=topo["max_dim"], max_eps=topo["max_eps"])))
        for d in dist["dims"]:
            dm = distance_matrix(labeled, d, kind=dist["kind"], q=dist["q"])
            with open(matrix_paths[d], "w") as fh:
                write_matrix_csv(dm, fh)
            with open(out / f"pairs_dim{d}.csv", "w") as fh:
                write_pair_report_csv(dm, dist["kind"], fh)

    tsne_params, proj_dim = _tsne_params(manifest)
    if proj_dim not in matrix_paths:
        raise ManifestError(f"tsne.projection_dim {proj_dim} not in distance.dims")

    def project():
        with open(matrix_paths[proj_dim]) as fh:
            dm = read_matrix_csv(fh, dim=proj_dim)
        proj = tsne_precomputed(dm, tsne_params)
        groups = {label: label.split(":", 1)[0] for label in dm.labels}
        with open(out / "proj.csv", "w") as cf, open(out / "proj.svg", "w") as sf:
            export_scatter(proj, groups, cf, sf)

    stages = [
        ingest,
        Stage("users", select_users, inputs=list(corpora.values()), outputs=[users_json]),
        Stage("embed", embed_users, inputs=[users_json, *corpora.values()],
              outputs=[clouds_dir]),
        Stage("persist", persist, inputs=[users_json, clouds_dir], outputs=[diagrams_dir]),
        Stage("distances", distances, inputs=[users_json, diagrams_dir],
              outputs=list(matrix_paths.values())),
        Stage("project", project, inputs=[matrix_paths[proj_dim]],
              outputs=[out / "proj.csv", out / "proj.svg"]),
    ]
    return run_stages(manifest, stages, from_stage)


# ---------------------------------------------------------------------------
# subreddit-divergence
# ---------------------------------------------------------------------------

def _chain_embed(corpora_by_month: dict[str, Optional[corpus_mod.Corpus]],
                 params: TrainParams, top_n: int, metric: str):
    """Walk months in order, warm-starting each from the previous model.

    Yields (month, cloud or None, carried_flag). Months before the first
    non-empty corpus yield None clouds.
    """
    model = None
    for month in sorted(corpora_by_month):
        corp = corpora_by_month[month]
        carried = corp is None
        if corp is not None:
            model = train_skipgram(corp, params) if model is None \
                else train_incremental(model, corp)
        if model is None:
            yield month, None, carried
        else:
            yield month, point_cloud(model, top_n, metric), carried


def run_subreddit_divergence(manifest: RunManifest,
                             from_stage: Optional[str] = None) -> ProvenanceRecord:
    out = manifest.output_dir
    out.mkdir(parents=True, exist_ok=True)
    ingest, corpora = _ingest_stage(manifest, out)
    top_n, metric = _cloud_settings(manifest)
    topo = _topology_settings(manifest)
    dist = _distance_settings(manifest, topo["max_dim"])
    windows_dir = out / "windows"
    months_json = out / "months.json"
    clouds_dir = out / "clouds"
    flags_json = out / "carried.json"
    diagrams_dir = out / "diagrams"
    divergence_csv = out / "divergence.csv"

    def window():
        windows_dir.mkdir(parents=True, exist_ok=True)
        all_months = set()
        for comm, path in corpora.items():
            corp = _load_corpus(path)
            (windows_dir / comm).mkdir(exist_ok=True)
            for year, month, sub in corpus_mod.window_by_month(corp):
                key = _month_key(year, month)
                all_months.add(key)
                with open(windows_dir / comm / f"{key}.jsonl", "w") as fh:
                    for line in corpus_mod.serialize_jsonl(sub):
                        fh.write(line + "\n")
        months_json.write_text(json.dumps(sorted(all_months)))

    def embed_chain():
        clouds_dir.mkdir(parents=True, exist_ok=True)
        params = _train_params(manifest)
        months = json.loads(months_json.read_text())
        carried: dict[str, list[str]] = {}
        for comm in sorted(corpora):
            by_month = {}
            for key in months:
                path = windows_dir / comm / f"{key}.jsonl"
                by_month[key] = _load_corpus(path) if path.exists() else None
            carried[comm] = []
            for month, cloud, was_carried in _chain_embed(by_month, params, top_n, metric):
                if was_carried:
                    carried[comm].append(month)
                if cloud is not None:
                    with open(clouds_dir / f"{comm}__{month}.csv", "w") as fh:
                        export_point_cloud_csv(cloud, fh)
        flags_json.write_text(json.dumps(carried, indent=2, sort_keys=True))

    def persist():
        diagrams_dir.mkdir(parents=True, exist_ok=True)
        for path in sorted(clouds_dir.glob("*.csv")):
            with open(path) as fh:
                cloud = load_point_cloud_csv(fh, metric_tag=metric)
            diag = vr_diagram(cloud, max_dim=topo["max_dim"], max_eps=topo["max_eps"],
                              budget=topo["budget"], with_generators=False)
            with open(diagrams_dir / path.name, "w") as fh:
                write_barcode_csv(diag, fh)

    def divergence():
        months = json.loads(months_json.read_text())
        carried = json.loads(flags_json.read_text())
        comms = sorted(corpora)
        rows = []
        for month in months:
            diags = {}
            for comm in comms:
                path = diagrams_dir / f"{comm}__{month}.csv"
                if path.exists():
                    with open(path) as fh:
                        diags[comm] = read_barcode_csv(
                            fh, max_dim=topo["max_dim"], max_eps=topo["max_eps"])
            for i, ca in enumerate(comms):
                for cb in comms[i + 1:]:
                    if ca not in diags or cb not in diags:
                        continue
                    n_carried = (month in carried.get(ca, [])) + (month in carried.get(cb, []))
                    for d in dist["dims"]:
                        if dist["kind"] == "bottleneck":
                            value = bottleneck_distance(diags[ca], diags[cb], d)
                        else:
                            value = wasserstein_distance(diags[ca], diags[cb], d,
                                                         q=dist["q"])
                        rows.append((month, f"{ca}~{cb}", d, value, n_carried))
        with open(divergence_csv, "w") as fh:
            fh.write("month,pair,dim,distance,carried\n")
            for month, pair, d, value, flag in rows:
                fh.write(f"{month},{pair},{d},{repr(float(value))},{flag}\n")

    stages = [
        ingest,
        Stage("window", window, inputs=list(corpora.values()),
              outputs=[months_json, windows_dir]),
        Stage("embed-chain", embed_chain, inputs=[months_json, windows_dir],
              outputs=[clouds_dir, flags_json]),
        Stage("persist", persist, inputs=[clouds_dir], outputs=[diagrams_dir]),
        Stage("divergence", divergence,
              inputs=[months_json, flags_json, diagrams_dir],
              outputs=[divergence_csv]),
    ]
    return run_stages(manifest, stages, from_stage)


# ---------------------------------------------------------------------------
# isotropy-audit
# ---------------------------------------------------------------------------

def run_isotropy_audit(manifest: RunManifest,
                       from_stage: Optional[str] = None) -> ProvenanceRecord:
    out = manifest.output_dir
    out.mkdir(parents=True, exist_ok=True)
    top_n, metric = _cloud_settings(manifest)
    topo = _topology_settings(manifest)
    cloud_csv = out / "cloud.csv"
    stages: list[Stage] = []

    if "cloud" in manifest.inputs:
        src = manifest.resolve(manifest.inputs["cloud"])

        def import_cloud():
            with open(src) as fh:
                cloud = load_point_cloud_csv(fh, metric_tag=metric)
            with open(cloud_csv, "w") as fh:
                export_point_cloud_csv(cloud, fh)

        stages.append(Stage("import-cloud", import_cloud, inputs=[src],
                            outputs=[cloud_csv]))
    elif "dumps" in manifest.inputs:
        ingest, corpora = _ingest_stage(manifest, out)
        if len(corpora) != 1:
            raise ManifestError("isotropy-audit expects exactly one community dump")
        (corpus_path,) = corpora.values()
        stages.append(ingest)

        def embed_community():
            corp = _load_corpus(corpus_path)
            model = train_skipgram(corp, _train_params(manifest))
            cloud = point_cloud(model, top_n, metric)
            with open(cloud_csv, "w") as fh:
                export_point_cloud_csv(cloud, fh)

        stages.append(Stage("embed", embed_community, inputs=[corpus_path],
                            outputs=[cloud_csv]))
    else:
        raise ManifestError("isotropy-audit needs inputs.cloud or inputs.dumps")

    holes_csv = out / "holes.csv"
    summary_json = out / "audit_summary.json"
    diagram_csv = out / "diagram.csv"
    generators_csv = out / "generators.csv"

    def audit():
        with open(cloud_csv) as fh:
            cloud = load_point_cloud_csv(fh, metric_tag=metric)
        diag = vr_diagram(cloud, max_dim=topo["max_dim"], max_eps=topo["max_eps"],
                          budget=topo["budget"], with_generators=True)
        with open(diagram_csv, "w") as fh:
            write_barcode_csv(diag, fh)
        with open(generators_csv, "w") as fh:
            write_generators_csv(diag, cloud, fh)
        report = hole_report(diag, topo["min_persistence"], cloud)
        with open(holes_csv, "w") as fh:
            fh.write("dim,birth,death,persistence,words\n")
            for dim, birth, death, words in report:
                pers = death - birth
                death_s = "inf" if death == float("inf") else repr(death)
                pers_s = "inf" if pers == float("inf") else repr(pers)
                fh.write(f"{dim},{repr(birth)},{death_s},{pers_s},{' '.join(words)}\n")
        counts: dict[str, int] = {}
        for dim, *_ in report:
            counts[str(dim)] = counts.get(str(dim), 0) + 1
        summary_json.write_text(json.dumps(
            {"large_bars_per_dim": counts,
             "min_persistence": topo["min_persistence"],
             "n_points": cloud.n}, indent=2, sort_keys=True))

    stages.append(Stage("audit", audit, inputs=[cloud_csv],
                        outputs=[holes_csv, summary_json, diagram_csv, generators_csv]))
    return run_stages(manifest, stages, from_stage)


# ---------------------------------------------------------------------------
# user-drift
# ---------------------------------------------------------------------------

def run_user_drift(manifest: RunManifest,
                   from_stage: Optional[str] = None) -> ProvenanceRecord:
    out = manifest.output_dir
    out.mkdir(parents=True, exist_ok=True)
    ingest, corpora = _ingest_stage(manifest, out)
    top_k = manifest.block("users").get("top_k", 50)
    top_n, metric = _cloud_settings(manifest)
    topo = _topology_settings(manifest)
    dist = _distance_settings(manifest, topo["max_dim"])
    users_json = out / "users.json"
    months_json = out / "months.json"
    clouds_dir = out / "clouds"
    flags_json = out / "carried.json"
    diagrams_dir = out / "diagrams"
    drift_csv = out / "drift_users.csv"

    def select_and_window():
        selected = {}
        months = set()
        for comm, path in corpora.items():
            corp = _load_corpus(path)
            ranked = corpus_mod.top_users(corp, top_k)
            selected[comm] = [author for author, _ in ranked]
            for author, sub in ranked:
                for year, month, _ in corpus_mod.window_by_month(sub):
                    months.add(_month_key(year, month))
        users_json.write_text(json.dumps(selected, indent=2, sort_keys=True))
        months_json.write_text(json.dumps(sorted(months)))

    def embed_chains():
        clouds_dir.mkdir(parents=True, exist_ok=True)
        params = _train_params(manifest)
        months = json.loads(months_json.read_text())
        selected = json.loads(users_json.read_text())
        carried: dict[str, list[str]] = {}
        for comm in sorted(selected):
            corp = _load_corpus(corpora[comm])
            per_user = dict(corpus_mod.top_users(corp, top_k))
            for author in selected[comm]:
                label = _label(comm, author)
                windows = {_month_key(y, m): sub
                           for y, m, sub in corpus_mod.window_by_month(per_user[author])}
                by_month = {key: windows.get(key) for key in months}
                carried[label] = []
                for month, cloud, was_carried in _chain_embed(by_month, params,
                                                              top_n, metric):
                    if was_carried:
                        carried[label].append(month)
                    if cloud is not None:
                        with open(clouds_dir / f"{label}__{month}.csv", "w") as fh:
                            export_point_cloud_csv(cloud, fh)
        flags_json.write_text(json.dumps(carried, indent=2, sort_keys=True))

    def persist():
        diagrams_dir.mkdir(parents=True, exist_ok=True)
        for path in sorted(clouds_dir.glob("*.csv")):
            with open(path) as fh:
                cloud = load_point_cloud_csv(fh, metric_tag=metric)
            diag = vr_diagram(cloud, max_dim=topo["max_dim"], max_eps=topo["max_eps"],
                              budget=topo["budget"], with_generators=False)
            with open(diagrams_dir / path.name, "w") as fh:
                write_barcode_csv(diag, fh)

    def drift():
        months = json.loads(months_json.read_text())
        carried = json.loads(flags_json.read_text())
        selected = json.loads(users_json.read_text())
        groups = {}
        for comm in selected:
            for author in selected[comm]:
                groups[_label(comm, author)] = comm
        rows = []
        for month in months:
            labeled = []
            for label in sorted(groups):
                path = diagrams_dir / f"{label}__{month}.csv"
                if path.exists():
                    with open(path) as fh:
                        labeled.append((label, read_barcode_csv(
                            fh, max_dim=topo["max_dim"], max_eps=topo["max_eps"])))
            if len(labeled) < 2:
                continue
            month_groups = {l: groups[l] for l, _ in labeled}
            n_carried = sum(month in carried.get(l, []) for l, _ in labeled)
            for d in dist["dims"]:
                dm = distance_matrix(labeled, d, kind=dist["kind"], q=dist["q"])
                means = mean_group_distance(dm, month_groups, mode="all")
                for (ga, gb), value in sorted(means.items()):
                    rows.append((month, ga, gb, d, value, n_carried))
        with open(drift_csv, "w") as fh:
            fh.write("month,group_a,group_b,dim,mean_distance,carried_users\n")
            for month, ga, gb, d, value, flag in rows:
                fh.write(f"{month},{ga},{gb},{d},{repr(float(value))},{flag}\n")

    stages = [
        ingest,
        Stage("users", select_and_window, inputs=list(corpora.values()),
              outputs=[users_json, months_json]),
        Stage("embed", embed_chains, inputs=[users_json, months_json, *corpora.values()],
              outputs=[clouds_dir, flags_json]),
        Stage("persist", persist, inputs=[clouds_dir], outputs=[diagrams_dir]),
        Stage("drift", drift, inputs=[users_json, months_json, flags_json, diagrams_dir],
              outputs=[drift_csv]),
    ]
    return run_stages(manifest, stages, from_stage)


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def _sim_run_setup(manifest: RunManifest, run_spec: dict) -> tuple[ec.PopulationGraph, ec.SimParams]:
    if "config" in run_spec:
        text = manifest.resolve(run_spec["config"]).read_text()
        graph_kw, params = ec.parse_sim_config(text)
    else:
        graph_kw = dict(run_spec.get("graph", {}))
        params = ec.SimParams(**run_spec.get("params", {}))
    if "global_seed" not in run_spec.get("params", {}) and "config" not in run_spec:
        params = dataclasses.replace(params, global_seed=manifest.seed)
    return ec.graph_from_spec(graph_kw), params


def run_simulate(manifest: RunManifest,
                 from_stage: Optional[str] = None) -> ProvenanceRecord:
    out = manifest.output_dir
    out.mkdir(parents=True, exist_ok=True)
    sim_block = manifest.block("sim")
    runs = sim_block.get("runs") or [dict(sim_block, name=sim_block.get("name", "run"))]
    checkpoints = sorted(set(sim_block.get("checkpoints", [])))
    snap = sim_block.get("snapshot", {})

    stages = []
    for run_spec in runs:
        name = run_spec.get("name", "run")
        run_dir = out / name
        graph, params = _sim_run_setup(manifest, run_spec)
        drift_path = run_dir / "drift.csv"
        events_path = run_dir / "events.csv"
        outputs = [drift_path, events_path]
        diagram_paths = []
        for ck in checkpoints:
            for learner in range(graph.n):
                diagram_paths.append(
                    run_dir / "diagrams" / f"step{ck:06d}_learner{learner:03d}.csv")
        outputs.extend(diagram_paths)

        def run_one(run_dir=run_dir, graph=graph, params=params):
            run_dir.mkdir(parents=True, exist_ok=True)
            if checkpoints:
                (run_dir / "diagrams").mkdir(exist_ok=True)
            sim = ec.Simulation(graph, params)
            series = ec.DriftSeries()
            events = []

            def snapshot(step):
                diags = ec.snapshot_diagrams(
                    sim.population,
                    top_n=snap.get("top_n", params.vocab_size),
                    max_dim=snap.get("max_dim", 1),
                    max_eps=snap.get("max_eps", 1.0))
                for learner, diag in enumerate(diags):
                    path = run_dir / "diagrams" / f"step{step:06d}_learner{learner:03d}.csv"
                    with open(path, "w") as fh:
                        write_barcode_csv(diag, fh)

            series.steps.append(0)
            series.values.append(ec.mean_pairwise_distance(sim.population))
            if 0 in checkpoints:
                snapshot(0)
            for t in range(params.steps):
                ev = sim.step()
                if ev is not None:
                    events.append(ev)
                if (t + 1) % params.sample_interval == 0:
                    series.steps.append(t + 1)
                    series.values.append(ec.mean_pairwise_distance(sim.population))
                if (t + 1) in checkpoints:
                    snapshot(t + 1)
            with open(run_dir / "drift.csv", "w") as fh:
                ec.write_drift_csv(series, fh)
            with open(run_dir / "events.csv", "w") as fh:
                ec.write_events_csv(events, fh)

        inputs = [manifest.resolve(run_spec["config"])] if "config" in run_spec else []
        stages.append(Stage(f"simulate:{name}", run_one, inputs=inputs, outputs=outputs))

    return run_stages(manifest, stages, from_stage)


EXPERIMENT_RUNNERS = {
    "user-clusters": run_user_clusters,
    "subreddit-divergence": run_subreddit_divergence,
    "isotropy-audit": run_isotropy_audit,
    "user-drift": run_user_drift,
    "simulate": run_simulate,
}


def run_experiment(manifest: RunManifest,
                   from_stage: Optional[str] = None) -> ProvenanceRecord:
    return EXPERIMENT_RUNNERS[manifest.experiment](manifest, from_stage=from_stage)
