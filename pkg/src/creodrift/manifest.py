"""Manifest-driven runs with per-stage provenance.

A manifest is one JSON document naming the experiment, the global seed,
input paths, and per-module parameter blocks. Experiments are chains of
stages; every stage declares the files it consumes and produces, inputs
are checked before a stage runs (so re-running a later stage after
deleting its inputs fails fast instead of recomputing), and all artifact
hashes land in provenance.json.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

from . import __version__
from .errors import ManifestError, StageInputError

EXPERIMENTS = ("user-clusters", "subreddit-divergence", "isotropy-audit",
               "user-drift", "simulate")


@dataclass
class RunManifest:
    experiment: str
    seed: int
    output_dir: Path
    inputs: dict
    params: dict
    base_dir: Path  # directory the manifest lives in; relative paths resolve here

    @classmethod
    def load(cls, path: str | Path, out_override: Optional[str] = None,
             seed_override: Optional[int] = None) -> "RunManifest":
        path = Path(path)
        try:
            raw = json.loads(path.read_text())
        except FileNotFoundError:
            raise ManifestError(f"manifest not found: {path}")
        except json.JSONDecodeError as err:
            raise ManifestError(f"manifest is not valid JSON: {err}")
        if not isinstance(raw, dict):
            raise ManifestError("manifest must be a JSON object")
        experiment = raw.get("experiment")
        if experiment not in EXPERIMENTS:
            raise ManifestError(
                f"experiment must be one of {EXPERIMENTS}, got {experiment!r}")
        seed = seed_override if seed_override is not None else raw.get("seed")
        if not isinstance(seed, int):
            raise ManifestError("manifest must carry an integer seed")
        out = out_override or raw.get("output_dir")
        if not out:
            raise ManifestError("manifest must name an output_dir")
        base = path.parent
        manifest = cls(
            experiment=experiment,
            seed=seed,
            output_dir=(base / out).resolve() if not Path(out).is_absolute() else Path(out),
            inputs=raw.get("inputs", {}),
            params=raw.get("params", {}),
            base_dir=base.resolve(),
        )
        manifest.validate_paths()
        return manifest

    def resolve(self, rel: str) -> Path:
        p = Path(rel)
        return p if p.is_absolute() else (self.base_dir / p).resolve()

    def _iter_input_paths(self, obj=None):
        obj = self.inputs if obj is None else obj
        if isinstance(obj, str):
            yield obj
        elif isinstance(obj, dict):
            for v in obj.values():
                yield from self._iter_input_paths(v)
        elif isinstance(obj, list):
            for v in obj:
                yield from self._iter_input_paths(v)

    def validate_paths(self) -> None:
        missing = [p for p in self._iter_input_paths() if not self.resolve(p).exists()]
        if missing:
            raise ManifestError(f"input path(s) do not exist: {missing}")

    def block(self, name: str) -> dict:
        value = self.params.get(name, {})
        if not isinstance(value, dict):
            raise ManifestError(f"params.{name} must be an object")
        return dict(value)

    def canonical(self) -> dict:
        return {
            "experiment": self.experiment,
            "seed": self.seed,
            "inputs": self.inputs,
            "params": self.params,
        }

    def content_hash(self) -> str:
        blob = json.dumps(self.canonical(), sort_keys=True,
                          separators=(",", ":")).encode()
        return hashlib.sha256(blob).hexdigest()


def sha256_file(path: Path) -> str:
    if path.is_dir():
        h = hashlib.sha256()
        for sub in sorted(path.rglob("*")):
            if sub.is_file():
                h.update(str(sub.relative_to(path)).encode())
                h.update(bytes.fromhex(sha256_file(sub)))
        return h.hexdigest()
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


@dataclass
class Stage:
    name: str
    fn: Callable[[], None]
    inputs: list[Path] = field(default_factory=list)
    outputs: list[Path] = field(default_factory=list)


@dataclass
class ProvenanceRecord:
    manifest_hash: str
    tool_version: str
    stages: list[dict] = field(default_factory=list)

    def artifact_hashes(self) -> dict[str, str]:
        out: dict[str, str] = {}
        for stage in self.stages:
            out.update(stage["outputs"])
        return out

    def to_json(self) -> str:
        return json.dumps(
            {
                "manifest_hash": self.manifest_hash,
                "tool_version": self.tool_version,
                "stages": self.stages,
                "artifact_hashes": self.artifact_hashes(),
            },
            indent=2, sort_keys=True)


def run_stages(manifest: RunManifest, stages: list[Stage],
               from_stage: Optional[str] = None) -> ProvenanceRecord:
    """Execute stages in order, fail-fast on missing declared inputs."""
    names = [s.name for s in stages]
    if from_stage is not None and from_stage not in names:
        raise ManifestError(f"unknown stage {from_stage!r}; stages are {names}")
    start_at = names.index(from_stage) if from_stage else 0
    record = ProvenanceRecord(manifest_hash=manifest.content_hash(),
                              tool_version=__version__)
    out_root = manifest.output_dir
    for stage in stages[start_at:]:
        missing = [str(p) for p in stage.inputs if not p.exists()]
        if missing:
            raise StageInputError(
                f"stage {stage.name!r} is missing input artifact(s): {missing}")
        t0 = time.perf_counter()
        stage.fn()
        elapsed = time.perf_counter() - t0
        not_produced = [str(p) for p in stage.outputs if not p.exists()]
        if not_produced:
            raise StageInputError(
                f"stage {stage.name!r} did not produce declared output(s): {not_produced}")

        def rel(p: Path) -> str:
            try:
                return str(p.relative_to(out_root))
            except ValueError:
                return str(p)

        record.stages.append({
            "name": stage.name,
            "inputs": {rel(p): sha256_file(p) for p in stage.inputs},
            "outputs": {rel(p): sha256_file(p) for p in stage.outputs},
            "wall_clock_s": elapsed,
        })
    (out_root / "provenance.json").write_text(record.to_json())
    return record
