"""Agent-based echo-chamber simulator on a population graph.

Learners hold row-normalized word representations. Conversations fire on
edges raced by independent exponential clocks (probability of an edge
speaking next is proportional to its weight), the speaker utters words
similar to a random topic under its own representation, and the listener
moves its mentioned rows toward the speaker's.

Every random draw comes from a stream keyed per entity: learner streams
(seed, learner, id) drive initialization, edge streams (seed, edge, i, j)
drive that edge's clock and conversation draws. Because an edge's draws
never depend on the rest of the graph, learners in one connected component
evolve bit-identically whether or not other components exist.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import IO, Optional

import numpy as np

from .embedding import PointCloud
from .errors import GraphGenerationError, InvalidInputError
from .seeding import stream

ER_RETRY_BUDGET = 100


@dataclass
class PopulationGraph:
    n: int
    edges: list[tuple[int, int, float]]  # (i, j, weight), i < j
    generator_tag: str

    def __post_init__(self):
        seen = set()
        for i, j, w in self.edges:
            if not 0 <= i < j < self.n:
                raise InvalidInputError(f"bad edge ({i},{j}) for n={self.n}")
            if (i, j) in seen:
                raise InvalidInputError(f"duplicate edge ({i},{j})")
            if w <= 0:
                raise InvalidInputError("edge weights must be positive")
            seen.add((i, j))


def _connected(n: int, edges) -> bool:
    if n == 0:
        return True
    adj = [[] for _ in range(n)]
    for i, j, _ in edges:
        adj[i].append(j)
        adj[j].append(i)
    seen = [False] * n
    queue = [0]
    seen[0] = True
    while queue:
        u = queue.pop()
        for v in adj[u]:
            if not seen[v]:
                seen[v] = True
                queue.append(v)
    return all(seen)


def make_graph(kind: str, *, n: Optional[int] = None, p: Optional[float] = None,
               a: Optional[int] = None, b: Optional[int] = None, bridge: int = 0,
               edges=None, seed: int = 0, weight: float = 1.0) -> PopulationGraph:
    """Population graph constructors; random specs are deterministic given seed."""
    if kind == "complete":
        if n is None or n < 1:
            raise InvalidInputError("complete graph needs n >= 1")
        es = [(i, j, weight) for i in range(n) for j in range(i + 1, n)]
        return PopulationGraph(n, es, "complete")
    if kind == "ring":
        if n is None or n < 3:
            raise InvalidInputError("ring needs n >= 3")
        es = [(i, (i + 1) % n, weight) for i in range(n - 1)] + [(0, n - 1, weight)]
        es = sorted({(min(i, j), max(i, j), w) for i, j, w in es})
        return PopulationGraph(n, es, "ring")
    if kind == "erdos_renyi":
        if n is None or p is None or not 0 < p <= 1:
            raise InvalidInputError("erdos_renyi needs n and p in (0,1]")
        for attempt in range(ER_RETRY_BUDGET):
            rng = stream(seed, "graph", attempt)
            mask = rng.random((n, n)) < p
            es = [(i, j, weight) for i in range(n) for j in range(i + 1, n) if mask[i, j]]
            if _connected(n, es):
                return PopulationGraph(n, es, f"erdos_renyi({p})")
        raise GraphGenerationError(
            f"no connected G({n},{p}) within {ER_RETRY_BUDGET} attempts")
    if kind == "two_cliques":
        if a is None or b is None or a < 1 or b < 1:
            raise InvalidInputError("two_cliques needs clique sizes a, b >= 1")
        if bridge > min(a, b):
            raise InvalidInputError("bridge count exceeds clique size")
        es = [(i, j, weight) for i in range(a) for j in range(i + 1, a)]
        es += [(a + i, a + j, weight) for i in range(b) for j in range(i + 1, b)]
        es += [(i, a + i, weight) for i in range(bridge)]
        es = sorted(es)
        return PopulationGraph(a + b, es, f"two_cliques({bridge})")
    if kind == "custom":
        if n is None or edges is None:
            raise InvalidInputError("custom graph needs n and edges")
        es = sorted((min(i, j), max(i, j), float(w)) for i, j, w in edges)
        return PopulationGraph(n, es, "custom")
    raise InvalidInputError(f"unknown graph kind {kind!r}")


@dataclass(frozen=True)
class SimParams:
    vocab_size: int = 50
    dim: int = 16
    steps: int = 20000
    utterance_length: int = 8
    beta: float = 5.0
    eta: float = 0.05
    init: str = "independent"  # or "shared_perturbed"
    sigma: float = 0.1         # perturbation scale for shared_perturbed
    global_seed: int = 0
    sample_interval: int = 100

    def __post_init__(self):
        if self.vocab_size < 2 or self.dim < 2:
            raise InvalidInputError("vocab_size and dim must be >= 2")
        if self.steps < 0 or self.utterance_length < 1 or self.sample_interval < 1:
            raise InvalidInputError("steps, utterance_length, sample_interval must be positive")
        if self.beta <= 0:
            raise InvalidInputError("beta must be > 0")
        if not 0 <= self.eta <= 1:
            raise InvalidInputError("eta must lie in [0, 1]")
        if self.init not in ("independent", "shared_perturbed"):
            raise InvalidInputError(f"unknown init {self.init!r}")
        if self.sigma < 0:
            raise InvalidInputError("sigma must be >= 0")


@dataclass
class LearnerState:
    id: int
    representation: np.ndarray  # vocab_size x dim, unit rows
    rng_stream: np.random.Generator


@dataclass(frozen=True)
class ConversationEvent:
    step: int
    time: float
    speaker: int
    listener: int
    topic: int
    words: tuple[int, ...]


@dataclass
class DriftSeries:
    steps: list[int] = field(default_factory=list)
    values: list[float] = field(default_factory=list)
    per_pair: Optional[dict[tuple[int, int], list[float]]] = None


def _normalize_rows(m: np.ndarray) -> np.ndarray:
    return m / np.linalg.norm(m, axis=1)[:, None]


def init_population(graph: PopulationGraph, params: SimParams) -> list[LearnerState]:
    """shared_perturbed: one base matrix plus per-learner noise; independent: own draws."""
    pop = []
    if params.init == "shared_perturbed":
        base = stream(params.global_seed, "init-base").normal(
            size=(params.vocab_size, params.dim))
    for i in range(graph.n):
        rng = stream(params.global_seed, "learner", i)
        if params.init == "shared_perturbed":
            rep = base + params.sigma * rng.normal(size=base.shape)
        else:
            rep = rng.normal(size=(params.vocab_size, params.dim))
        pop.append(LearnerState(id=i, representation=_normalize_rows(rep), rng_stream=rng))
    return pop


def _rep_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Mean per-word angular distance; exactly 0 for bitwise-equal rows."""
    dots = np.clip(np.einsum("vd,vd->v", a, b), -1.0, 1.0)
    dist = np.arccos(dots) / np.pi
    dist[np.all(a == b, axis=1)] = 0.0
    return float(np.mean(dist))


def mean_pairwise_distance(pop: list[LearnerState]) -> float:
    """Mean over learner pairs of the mean per-word angular distance."""
    n = len(pop)
    if n < 2:
        return 0.0
    total = 0.0
    count = 0
    for i in range(n):
        for j in range(i + 1, n):
            total += _rep_distance(pop[i].representation, pop[j].representation)
            count += 1
    return total / count


class Simulation:
    """One sequential run; events are causally ordered by the edge clocks."""

    def __init__(self, graph: PopulationGraph, params: SimParams):
        self.graph = graph
        self.params = params
        self.population = init_population(graph, params)
        self.step_index = 0
        self._edge_rngs = [stream(params.global_seed, "edge", i, j)
                           for i, j, _ in graph.edges]
        self._heap: list[tuple[float, int]] = []
        for idx, (_, _, w) in enumerate(graph.edges):
            gap = self._edge_rngs[idx].exponential(1.0 / w)
            heapq.heappush(self._heap, (gap, idx))

    def step(self) -> Optional[ConversationEvent]:
        """Fire the next conversation; returns None on an edgeless graph."""
        if not self._heap:
            self.step_index += 1
            return None
        params = self.params
        time, edge_idx = heapq.heappop(self._heap)
        i, j, w = self.graph.edges[edge_idx]
        rng = self._edge_rngs[edge_idx]

        speaker, listener = (i, j) if rng.random() < 0.5 else (j, i)
        topic = int(rng.integers(params.vocab_size))
        uniforms = rng.random(params.vocab_size)

        rep_s = self.population[speaker].representation
        sims = rep_s @ rep_s[topic]  # rows are unit norm, so this is the cosine
        gumbel = -np.log(-np.log(np.clip(uniforms, 1e-300, 1.0 - 1e-16)))
        keys = params.beta * sims + gumbel
        k = min(params.utterance_length, params.vocab_size)
        words = tuple(sorted(int(x) for x in np.argpartition(-keys, k - 1)[:k]))

        if params.eta > 0:
            rep_l = self.population[listener].representation
            touched = sorted(set(words) | {topic})
            delta = rep_s[touched] - rep_l[touched]
            moved = np.any(delta != 0.0, axis=1)
            if moved.any():
                rows = [t for t, m in zip(touched, moved) if m]
                updated = rep_l[rows] + params.eta * delta[moved]
                rep_l[rows] = _normalize_rows(updated)

        gap = rng.exponential(1.0 / w)
        heapq.heappush(self._heap, (time + gap, edge_idx))

        event = ConversationEvent(step=self.step_index, time=float(time),
                                  speaker=speaker, listener=listener,
                                  topic=topic, words=words)
        self.step_index += 1
        return event

    def _pair_distances(self) -> dict[tuple[int, int], float]:
        out = {}
        for i in range(len(self.population)):
            for j in range(i + 1, len(self.population)):
                out[(i, j)] = _rep_distance(self.population[i].representation,
                                            self.population[j].representation)
        return out

    def run(self, track_pairs: bool = False) -> tuple[DriftSeries, list[ConversationEvent]]:
        params = self.params
        series = DriftSeries(per_pair={} if track_pairs else None)
        events: list[ConversationEvent] = []

        def sample(step):
            series.steps.append(step)
            series.values.append(mean_pairwise_distance(self.population))
            if track_pairs:
                for pair, value in self._pair_distances().items():
                    series.per_pair.setdefault(pair, []).append(value)

        sample(0)
        for t in range(params.steps):
            ev = self.step()
            if ev is not None:
                events.append(ev)
            if (t + 1) % params.sample_interval == 0:
                sample(t + 1)
        return series, events


def simulate(graph: PopulationGraph, params: SimParams,
             track_pairs: bool = False) -> tuple[DriftSeries, list[ConversationEvent]]:
    """Run params.steps conversations; deterministic given global_seed."""
    return Simulation(graph, params).run(track_pairs=track_pairs)


def snapshot_diagrams(pop: list[LearnerState], top_n: int, max_dim: int,
                      max_eps: float = 1.0):
    """Per-learner persistence diagrams of the representation point clouds."""
    from .topology import vr_diagram

    out = []
    for learner in pop:
        rep = learner.representation
        n = min(top_n, rep.shape[0])
        cloud = PointCloud(labels=tuple(f"w{i}" for i in range(n)),
                           points=rep[:n].copy(), metric_tag="angular",
                           clamped=top_n > rep.shape[0])
        out.append(vr_diagram(cloud, max_dim=max_dim, max_eps=max_eps,
                              with_generators=False))
    return out


# ---------------------------------------------------------------------------
# Flat key=value run config and CSV outputs
# ---------------------------------------------------------------------------

_SIM_FIELDS = {f: t for f, t in (("vocab_size", int), ("dim", int), ("steps", int),
                                 ("utterance_length", int), ("beta", float),
                                 ("eta", float), ("init", str), ("sigma", float),
                                 ("global_seed", int), ("sample_interval", int))}
_GRAPH_FIELDS = {"kind": str, "n": int, "p": float, "a": int, "b": int,
                 "bridge": int, "seed": int, "weight": float}


def parse_sim_config(text: str) -> tuple[dict, SimParams]:
    """Flat key=value config: sim params plus graph.* keys for the graph spec."""
    graph_kw: dict = {}
    sim_kw: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise InvalidInputError(f"config line {lineno} is not key=value: {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key.startswith("graph."):
            gkey = key[len("graph."):]
            if gkey not in _GRAPH_FIELDS:
                raise InvalidInputError(f"unknown graph key {key!r}")
            graph_kw[gkey] = _GRAPH_FIELDS[gkey](value)
        elif key in _SIM_FIELDS:
            sim_kw[key] = _SIM_FIELDS[key](value)
        else:
            raise InvalidInputError(f"unknown config key {key!r}")
    if "kind" not in graph_kw:
        raise InvalidInputError("config must set graph.kind")
    return graph_kw, SimParams(**sim_kw)


def graph_from_spec(graph_kw: dict) -> PopulationGraph:
    kw = dict(graph_kw)
    kind = kw.pop("kind")
    return make_graph(kind, **kw)


def write_drift_csv(series: DriftSeries, fh: IO[str]) -> None:
    fh.write("step,mean_distance\n")
    for s, v in zip(series.steps, series.values):
        fh.write(f"{s},{repr(float(v))}\n")


def write_events_csv(events: list[ConversationEvent], fh: IO[str]) -> None:
    fh.write("step,speaker,listener,topic,words\n")
    for e in events:
        words = " ".join(str(w) for w in e.words)
        fh.write(f"{e.step},{e.speaker},{e.listener},{e.topic},{words}\n")
