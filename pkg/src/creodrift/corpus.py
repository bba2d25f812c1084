"""Reddit-style comment ingestion, tokenization, and corpus slicing.

Input is JSONL with one comment object per line (fields: author,
created_utc, subreddit, body). Internally a corpus is a timestamp-sorted
list of tokenized documents that can be sliced per user or per UTC
calendar month.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import IO, Iterable, Iterator, Optional

from .errors import EmptyCorpusError, InvalidInputError

_URL_RE = re.compile(r"(?:https?://|www\.)\S*", re.IGNORECASE)
_SPLIT_RE = re.compile(r"[^a-z0-9]+")

MIN_TOKEN_LEN = 2
MAX_TOKEN_LEN = 50

_SKIP_BODIES = {"[deleted]", "[removed]"}


def tokenize(text: str) -> list[str]:
    """Lowercase, strip URLs, split on non-alphanumerics, keep tokens of length 2..50.

    Deterministic by construction: no stemming, no stop-word removal.
    """
    text = _URL_RE.sub(" ", text.lower())
    return [
        tok
        for tok in _SPLIT_RE.split(text)
        if MIN_TOKEN_LEN <= len(tok) <= MAX_TOKEN_LEN
    ]


@dataclass(frozen=True)
class Document:
    author: str
    timestamp: int  # seconds since epoch, UTC
    community: str
    tokens: tuple[str, ...]

    def __post_init__(self):
        if self.timestamp < 0:
            raise InvalidInputError(f"negative timestamp {self.timestamp}")
        if not self.tokens:
            raise InvalidInputError("document with no tokens")


@dataclass
class Corpus:
    documents: list[Document]
    span: tuple[int, int]
    skipped_lines: int = 0

    def __post_init__(self):
        self.documents = sorted(self.documents, key=lambda d: d.timestamp)
        if self.documents:
            lo, hi = self.span
            if lo > self.documents[0].timestamp or hi < self.documents[-1].timestamp:
                raise InvalidInputError("span does not cover document timestamps")

    def __len__(self) -> int:
        return len(self.documents)

    def __iter__(self) -> Iterator[Document]:
        return iter(self.documents)

    @classmethod
    def from_documents(cls, documents: Iterable[Document], skipped_lines: int = 0) -> "Corpus":
        docs = list(documents)
        if not docs:
            raise EmptyCorpusError("no documents")
        ts = [d.timestamp for d in docs]
        return cls(documents=docs, span=(min(ts), max(ts)), skipped_lines=skipped_lines)

    def token_sequences(self) -> Iterator[tuple[str, ...]]:
        for doc in self.documents:
            yield doc.tokens


@dataclass
class CorpusFilter:
    communities: Optional[set[str]] = None
    min_timestamp: Optional[int] = None
    max_timestamp: Optional[int] = None
    min_doc_tokens: int = 3

    def __post_init__(self):
        if (
            self.min_timestamp is not None
            and self.max_timestamp is not None
            and self.min_timestamp > self.max_timestamp
        ):
            raise InvalidInputError("min_timestamp > max_timestamp")

    def admits(self, author: str, timestamp: int, community: str, tokens: list[str]) -> bool:
        if self.communities is not None and community not in self.communities:
            return False
        if self.min_timestamp is not None and timestamp < self.min_timestamp:
            return False
        if self.max_timestamp is not None and timestamp > self.max_timestamp:
            return False
        return len(tokens) >= max(1, self.min_doc_tokens)


def ingest_jsonl(stream: Iterable[str | bytes] | IO, filt: Optional[CorpusFilter] = None) -> Corpus:
    """Parse a line-oriented JSONL stream of Reddit comments into a Corpus.

    Malformed lines (bad JSON, missing fields, non-numeric created_utc,
    negative timestamps) are counted on ``Corpus.skipped_lines`` and
    skipped; ``[deleted]``/``[removed]`` bodies are skipped the same way.
    Raises EmptyCorpusError if nothing survives.
    """
    filt = filt or CorpusFilter()
    docs: list[Document] = []
    skipped = 0
    for raw in stream:
        if isinstance(raw, bytes):
            raw = raw.decode("utf-8", errors="replace")
        line = raw.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
            author = obj["author"]
            created = obj["created_utc"]
            community = obj["subreddit"]
            body = obj["body"]
            timestamp = int(created)
            if not isinstance(author, str) or not isinstance(community, str):
                raise TypeError("author/subreddit must be strings")
            if not isinstance(body, str):
                raise TypeError("body must be a string")
            if timestamp < 0:
                raise ValueError("negative created_utc")
        except (ValueError, TypeError, KeyError, json.JSONDecodeError):
            skipped += 1
            continue
        if body in _SKIP_BODIES:
            skipped += 1
            continue
        tokens = tokenize(body)
        if not tokens:
            continue
        if not filt.admits(author, timestamp, community, tokens):
            continue
        docs.append(Document(author, timestamp, community, tuple(tokens)))
    if not docs:
        raise EmptyCorpusError(f"no documents survived ingestion ({skipped} lines skipped)")
    return Corpus.from_documents(docs, skipped_lines=skipped)


def serialize_jsonl(corpus: Corpus) -> Iterator[str]:
    """Internal JSONL form: author, ts, community, tokens. Lossless round trip."""
    for doc in corpus.documents:
        yield json.dumps(
            {
                "author": doc.author,
                "ts": doc.timestamp,
                "community": doc.community,
                "tokens": list(doc.tokens),
            },
            ensure_ascii=False,
            sort_keys=True,
        )


def load_jsonl(stream: Iterable[str | bytes] | IO) -> Corpus:
    """Read the internal JSONL form written by serialize_jsonl."""
    docs = []
    for raw in stream:
        if isinstance(raw, bytes):
            raw = raw.decode("utf-8")
        line = raw.strip()
        if not line:
            continue
        obj = json.loads(line)
        docs.append(
            Document(obj["author"], int(obj["ts"]), obj["community"], tuple(obj["tokens"]))
        )
    if not docs:
        raise EmptyCorpusError("no documents in stream")
    return Corpus.from_documents(docs)


def window_by_month(corpus: Corpus) -> list[tuple[int, int, Corpus]]:
    """Partition documents by UTC calendar month; empty months are omitted."""
    if not corpus.documents:
        raise EmptyCorpusError("cannot window an empty corpus")
    buckets: dict[tuple[int, int], list[Document]] = {}
    for doc in corpus.documents:
        dt = datetime.fromtimestamp(doc.timestamp, tz=timezone.utc)
        buckets.setdefault((dt.year, dt.month), []).append(doc)
    return [
        (year, month, Corpus.from_documents(buckets[(year, month)]))
        for year, month in sorted(buckets)
    ]


def top_users(corpus: Corpus, k: int) -> list[tuple[str, Corpus]]:
    """The k most prolific authors (total token count, ties lexicographic) with their sub-corpora."""
    if k < 1:
        raise InvalidInputError(f"k must be >= 1, got {k}")
    if not corpus.documents:
        raise EmptyCorpusError("cannot rank users of an empty corpus")
    by_author: dict[str, list[Document]] = {}
    counts: dict[str, int] = {}
    for doc in corpus.documents:
        by_author.setdefault(doc.author, []).append(doc)
        counts[doc.author] = counts.get(doc.author, 0) + len(doc.tokens)
    ranked = sorted(counts, key=lambda a: (-counts[a], a))
    return [(a, Corpus.from_documents(by_author[a])) for a in ranked[:k]]
