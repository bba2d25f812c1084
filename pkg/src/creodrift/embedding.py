"""Skip-gram-with-negative-sampling embeddings trained per corpus.

The trainer is deliberately from scratch (no gensim): gradients are simple
enough to verify against finite differences, and training is bit-for-bit
deterministic given a seed, which the downstream topology comparisons rely
on. Models can be continued on later time windows (warm start + vocabulary
extension) to produce temporal embedding chains.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from typing import IO, Optional

import numpy as np

from .corpus import Corpus
from .errors import EmptyVocabularyError, InvalidInputError
from .seeding import stream

LR_FLOOR = 1e-4
NEGATIVE_EXPONENT = 0.75

MODEL_MAGIC = b"CREO-EMB"
MODEL_VERSION = 1


@dataclass(frozen=True)
class Vocabulary:
    words: tuple[str, ...]
    counts: tuple[int, ...]
    index: dict[str, int]

    def __len__(self) -> int:
        return len(self.words)

    @classmethod
    def from_counts(cls, counts: dict[str, int], min_count: int) -> "Vocabulary":
        kept = [(w, c) for w, c in counts.items() if c >= min_count]
        if not kept:
            raise EmptyVocabularyError(
                f"no token reached min_count={min_count} (distinct tokens: {len(counts)})"
            )
        kept.sort(key=lambda wc: (-wc[1], wc[0]))
        words = tuple(w for w, _ in kept)
        return cls(words=words, counts=tuple(c for _, c in kept),
                   index={w: i for i, w in enumerate(words)})


def _count_tokens(corpus: Corpus) -> dict[str, int]:
    counts: dict[str, int] = {}
    for doc in corpus.documents:
        for tok in doc.tokens:
            counts[tok] = counts.get(tok, 0) + 1
    return counts


def build_vocab(corpus: Corpus, min_count: int) -> Vocabulary:
    """Tokens with corpus count >= min_count, ordered by count desc then lexicographic."""
    return Vocabulary.from_counts(_count_tokens(corpus), min_count)


@dataclass(frozen=True)
class TrainParams:
    dim: int = 64
    window: int = 5
    negatives: int = 5
    epochs: int = 5
    learning_rate: float = 0.025  # linearly decayed to LR_FLOOR over the run
    min_count: int = 5
    subsample_threshold: float = 1e-3
    seed: int = 0

    def __post_init__(self):
        if self.dim < 2:
            raise InvalidInputError("dim must be >= 2")
        if self.window < 1:
            raise InvalidInputError("window must be >= 1")
        if self.negatives < 1:
            raise InvalidInputError("negatives must be >= 1")
        if self.learning_rate <= 0:
            raise InvalidInputError("learning_rate must be > 0")


@dataclass
class EmbeddingModel:
    vocab: Vocabulary
    input_vectors: np.ndarray   # |V| x dim
    output_vectors: np.ndarray  # |V| x dim
    params: TrainParams
    rng_seed: int
    increment_index: int = 0

    def __post_init__(self):
        if self.input_vectors.shape != (len(self.vocab), self.params.dim):
            raise InvalidInputError("input matrix shape does not match vocabulary")
        if self.output_vectors.shape != self.input_vectors.shape:
            raise InvalidInputError("output matrix shape does not match input matrix")
        if not (np.isfinite(self.input_vectors).all() and np.isfinite(self.output_vectors).all()):
            raise InvalidInputError("non-finite values in embedding matrices")


@dataclass
class PointCloud:
    labels: tuple[str, ...]
    points: np.ndarray  # n x d
    metric_tag: str  # "angular" | "euclidean"
    clamped: bool = False

    def __post_init__(self):
        if self.points.shape[0] != len(self.labels):
            raise InvalidInputError("label/point count mismatch")
        if not np.isfinite(self.points).all():
            raise InvalidInputError("non-finite coordinates in point cloud")
        if self.metric_tag not in ("angular", "euclidean"):
            raise InvalidInputError(f"unknown metric_tag {self.metric_tag!r}")

    @property
    def n(self) -> int:
        return self.points.shape[0]


def sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def sgns_pair_loss(v_c: np.ndarray, u_o: np.ndarray, u_neg: np.ndarray) -> float:
    """Loss of one (center, context) pair with sampled negative output rows."""
    pos = -np.log(sigmoid(u_o @ v_c))
    neg = -np.log(sigmoid(-(u_neg @ v_c))).sum() if len(u_neg) else 0.0
    return float(pos + neg)


def sgns_pair_gradients(v_c, u_o, u_neg):
    """Analytic gradients of sgns_pair_loss w.r.t. (v_c, u_o, each u_neg row)."""
    g_pos = sigmoid(u_o @ v_c) - 1.0  # d loss / d (u_o.v_c)
    g_neg = sigmoid(u_neg @ v_c)
    grad_v = g_pos * u_o
    if len(u_neg):
        grad_v = grad_v + g_neg @ u_neg
    grad_uo = g_pos * v_c
    grad_uneg = g_neg[:, None] * v_c[None, :]
    return grad_v, grad_uo, grad_uneg


def _negative_cumtable(counts: np.ndarray) -> Optional[np.ndarray]:
    weights = counts.astype(np.float64) ** NEGATIVE_EXPONENT
    total = weights.sum()
    if total <= 0:
        return None
    return np.cumsum(weights) / total


def _init_input_rows(n_rows: int, dim: int, rng: np.random.Generator) -> np.ndarray:
    return (rng.random((n_rows, dim)) - 0.5) / dim


def _train_pass(
    input_vectors: np.ndarray,
    output_vectors: np.ndarray,
    vocab: Vocabulary,
    corpus: Corpus,
    params: TrainParams,
    rng: np.random.Generator,
) -> None:
    """Run params.epochs of SGNS over the corpus, updating the matrices in place."""
    dim = params.dim
    docs = [
        np.array([vocab.index[t] for t in doc.tokens if t in vocab.index], dtype=np.int64)
        for doc in corpus.documents
    ]
    docs = [d for d in docs if len(d) > 0]
    if not docs:
        return
    counts = np.zeros(len(vocab), dtype=np.int64)
    for d in docs:
        np.add.at(counts, d, 1)
    total_tokens = int(counts.sum())

    # word2vec-style frequency downsampling: keep prob min(1, sqrt(t / f_rel))
    if params.subsample_threshold > 0:
        freq = counts / total_tokens
        with np.errstate(divide="ignore"):
            keep_prob = np.minimum(1.0, np.sqrt(params.subsample_threshold / freq))
        keep_prob[counts == 0] = 0.0
    else:
        keep_prob = np.ones(len(vocab))

    cumtable = _negative_cumtable(counts)
    n_vocab = len(vocab)
    n_sampleable = int((counts > 0).sum())
    negatives = params.negatives if n_vocab > 1 else 0
    lr0, lr1 = params.learning_rate, LR_FLOOR
    word_budget = max(1, params.epochs * total_tokens)
    words_seen = 0
    window = params.window

    for _epoch in range(params.epochs):
        order = rng.permutation(len(docs))
        for doc_idx in order:
            ids = docs[doc_idx]
            keep_draws = rng.random(len(ids))
            kept = ids[keep_draws < keep_prob[ids]]
            words_seen += len(ids)
            lr = lr0 + (lr1 - lr0) * min(1.0, words_seen / word_budget)
            for pos in range(len(kept)):
                c = kept[pos]
                lo = max(0, pos - window)
                hi = min(len(kept), pos + window + 1)
                v_c = input_vectors[c]
                for ctx in range(lo, hi):
                    if ctx == pos:
                        continue
                    o = kept[ctx]
                    neg: list[int] = []
                    # skip if the positive word carries all the sampling mass
                    if negatives and not (n_sampleable == 1 and counts[o] > 0):
                        while len(neg) < negatives:
                            cand = int(np.searchsorted(cumtable, rng.random(), side="right"))
                            cand = min(cand, n_vocab - 1)
                            if cand != o:
                                neg.append(cand)
                    u_o = output_vectors[o]
                    g_pos = 1.0 - sigmoid(u_o @ v_c)
                    delta_v = g_pos * u_o
                    output_vectors[o] = u_o + (lr * g_pos) * v_c
                    if neg:
                        u_n = output_vectors[neg]
                        g_neg = sigmoid(u_n @ v_c)
                        delta_v = delta_v - g_neg @ u_n
                        output_vectors[neg] = u_n - (lr * g_neg)[:, None] * v_c
                    input_vectors[c] = v_c = v_c + lr * delta_v


def train_skipgram(corpus: Corpus, params: TrainParams) -> EmbeddingModel:
    """Train a fresh SGNS model; bit-identical output for identical (corpus, params)."""
    vocab = build_vocab(corpus, params.min_count)
    init_rng = stream(params.seed, "init", 0)
    input_vectors = _init_input_rows(len(vocab), params.dim, init_rng)
    output_vectors = np.zeros((len(vocab), params.dim))
    train_rng = stream(params.seed, "train", 0)
    _train_pass(input_vectors, output_vectors, vocab, corpus, params, train_rng)
    return EmbeddingModel(vocab, input_vectors, output_vectors, params, params.seed)


def train_incremental(model: EmbeddingModel, next_corpus: Corpus) -> EmbeddingModel:
    """Continue a trained model on the next time window.

    New words meeting min_count in next_corpus join the vocabulary (rows
    seeded from (rng_seed, window_index)); existing rows warm-start.
    Counts accumulate, so the vocabulary never shrinks along a chain.
    """
    params = model.params
    next_counts = _count_tokens(next_corpus)
    merged: dict[str, int] = {w: c for w, c in zip(model.vocab.words, model.vocab.counts)}
    new_words = []
    for w, c in next_counts.items():
        if w in merged:
            merged[w] += c
        elif c >= params.min_count:
            merged[w] = c
            new_words.append(w)

    vocab = Vocabulary.from_counts(merged, min_count=0)
    step = model.increment_index + 1
    new_rng = stream(model.rng_seed, "increment", step)
    fresh_inputs = _init_input_rows(len(new_words), params.dim, new_rng)
    fresh_by_word = {w: fresh_inputs[i] for i, w in enumerate(new_words)}

    input_vectors = np.empty((len(vocab), params.dim))
    output_vectors = np.zeros((len(vocab), params.dim))
    for i, w in enumerate(vocab.words):
        old = model.vocab.index.get(w)
        if old is not None:
            input_vectors[i] = model.input_vectors[old]
            output_vectors[i] = model.output_vectors[old]
        else:
            input_vectors[i] = fresh_by_word[w]

    train_rng = stream(model.rng_seed, "train", step)
    _train_pass(input_vectors, output_vectors, vocab, next_corpus, params, train_rng)
    return EmbeddingModel(vocab, input_vectors, output_vectors, params, model.rng_seed,
                          increment_index=step)


def point_cloud(model: EmbeddingModel, top_n: int, metric_tag: str = "angular") -> PointCloud:
    """Input vectors of the top_n most frequent words; angular clouds are row-normalized."""
    if top_n < 2:
        raise InvalidInputError("top_n must be >= 2")
    clamped = top_n > len(model.vocab)
    n = min(top_n, len(model.vocab))
    labels = model.vocab.words[:n]
    points = np.array(model.input_vectors[:n], dtype=np.float64)
    if metric_tag == "angular":
        norms = np.linalg.norm(points, axis=1)
        if np.any(norms == 0):
            raise InvalidInputError("cannot normalize a zero embedding row")
        points = points / norms[:, None]
    elif metric_tag != "euclidean":
        raise InvalidInputError(f"unknown metric_tag {metric_tag!r}")
    return PointCloud(labels=labels, points=points, metric_tag=metric_tag, clamped=clamped)


# ---------------------------------------------------------------------------
# Serialization: CREO-EMB binary model file, CSV point clouds
# ---------------------------------------------------------------------------

def save_model(model: EmbeddingModel, fh: IO[bytes]) -> None:
    header = {
        "params": {
            "dim": model.params.dim,
            "window": model.params.window,
            "negatives": model.params.negatives,
            "epochs": model.params.epochs,
            "learning_rate": model.params.learning_rate,
            "min_count": model.params.min_count,
            "subsample_threshold": model.params.subsample_threshold,
            "seed": model.params.seed,
        },
        "increment_index": model.increment_index,
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    fh.write(MODEL_MAGIC)
    fh.write(struct.pack("<IQQq", MODEL_VERSION, len(model.vocab), model.params.dim,
                         model.rng_seed))
    fh.write(struct.pack("<I", len(blob)))
    fh.write(blob)
    for word, count in zip(model.vocab.words, model.vocab.counts):
        wb = word.encode("utf-8")
        fh.write(struct.pack("<IQ", len(wb), count))
        fh.write(wb)
    fh.write(np.ascontiguousarray(model.input_vectors, dtype="<f8").tobytes())
    fh.write(np.ascontiguousarray(model.output_vectors, dtype="<f8").tobytes())


def load_model(fh: IO[bytes]) -> EmbeddingModel:
    magic = fh.read(len(MODEL_MAGIC))
    if magic != MODEL_MAGIC:
        raise InvalidInputError(f"bad model magic {magic!r}")
    version, n_vocab, dim, seed = struct.unpack("<IQQq", fh.read(28))
    if version != MODEL_VERSION:
        raise InvalidInputError(f"unsupported model version {version}")
    (blob_len,) = struct.unpack("<I", fh.read(4))
    header = json.loads(fh.read(blob_len).decode("utf-8"))
    params = TrainParams(**header["params"])
    words, counts = [], []
    for _ in range(n_vocab):
        wlen, count = struct.unpack("<IQ", fh.read(12))
        words.append(fh.read(wlen).decode("utf-8"))
        counts.append(count)
    vocab = Vocabulary(words=tuple(words), counts=tuple(counts),
                       index={w: i for i, w in enumerate(words)})
    n_floats = n_vocab * dim
    input_vectors = np.frombuffer(fh.read(8 * n_floats), dtype="<f8").reshape(n_vocab, dim).copy()
    output_vectors = np.frombuffer(fh.read(8 * n_floats), dtype="<f8").reshape(n_vocab, dim).copy()
    return EmbeddingModel(vocab, input_vectors, output_vectors, params, seed,
                          increment_index=header["increment_index"])


def export_point_cloud_csv(cloud: PointCloud, fh: IO[str]) -> None:
    dim = cloud.points.shape[1]
    fh.write("word," + ",".join(f"x{i + 1}" for i in range(dim)) + "\n")
    for label, row in zip(cloud.labels, cloud.points):
        fh.write(label + "," + ",".join(repr(float(x)) for x in row) + "\n")


def load_point_cloud_csv(fh: IO[str], metric_tag: str = "angular") -> PointCloud:
    header = fh.readline()
    if not header.startswith("word,"):
        raise InvalidInputError("point cloud CSV must start with a 'word,x1,...' header")
    labels, rows = [], []
    for line in fh:
        line = line.strip()
        if not line:
            continue
        parts = line.split(",")
        labels.append(parts[0])
        rows.append([float(x) for x in parts[1:]])
    if not rows:
        raise InvalidInputError("empty point cloud CSV")
    points = np.array(rows, dtype=np.float64)
    if metric_tag == "angular":
        norms = np.linalg.norm(points, axis=1)
        if np.any(norms == 0):
            raise InvalidInputError("cannot normalize a zero row")
        points = points / norms[:, None]
    return PointCloud(labels=tuple(labels), points=points, metric_tag=metric_tag)
