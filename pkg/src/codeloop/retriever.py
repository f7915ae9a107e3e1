"""Similarity search over corpus requirements.

Two strategies: token-set Jaccard (lexical) and embedding cosine
(semantic). ``search`` scores every entry in the given view, sorts by
descending score with a stable sort so ties keep corpus order, and
returns the top k.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Protocol

from .corpus import Corpus, CorpusEntry
from .embedding import EmbeddingVector, HashingEmbedder
from .errors import DimensionMismatchError


class EmbeddingProvider(Protocol):
    dim: int

    def embed(self, text: str) -> EmbeddingVector: ...


def tokenize(text: str) -> frozenset[str]:
    """Whitespace-split, lowercase, deduplicate."""
    return frozenset(text.lower().split())


def jaccard(a: frozenset[str], b: frozenset[str]) -> float:
    """|a ∩ b| / |a ∪ b|; defined as 0 when both sets are empty."""
    union = len(a | b)
    if union == 0:
        return 0.0
    return len(a & b) / union


def cosine(a: EmbeddingVector, b: EmbeddingVector) -> float:
    """Dot product over product of norms; 0 if either norm is 0."""
    if a.dim != b.dim:
        raise DimensionMismatchError(a.dim, b.dim)
    dot = sum(x * y for x, y in zip(a.values, b.values))
    na = sum(x * x for x in a.values) ** 0.5
    nb = sum(y * y for y in b.values) ** 0.5
    if na == 0.0 or nb == 0.0:
        return 0.0
    return dot / (na * nb)


@dataclass(frozen=True)
class RetrievalHit:
    entry: CorpusEntry
    score: float


@dataclass(frozen=True)
class SimilarityStrategy:
    kind: Literal["token-jaccard", "embedding-cosine"]
    provider: EmbeddingProvider | None = None

    def __post_init__(self):
        if self.kind == "embedding-cosine" and self.provider is None:
            raise ValueError("embedding-cosine strategy requires a provider")


def default_strategy(kind: str, provider: EmbeddingProvider | None = None) -> SimilarityStrategy:
    if kind == "embedding-cosine" and provider is None:
        provider = HashingEmbedder()
    return SimilarityStrategy(kind=kind, provider=provider)  # type: ignore[arg-type]


@dataclass
class Retriever:
    """Scores queries against corpus requirements with a fixed strategy.

    Corpus-side token sets and embeddings are computed once per task_id
    and cached; query-side representations are computed per call. The
    cache is filled before queries are served, so concurrent searches
    only ever read it.
    """

    strategy: SimilarityStrategy
    _embed_cache: dict[str, EmbeddingVector] = field(default_factory=dict)
    _token_cache: dict[str, frozenset[str]] = field(default_factory=dict)

    def warm(self, corpus: Corpus) -> None:
        """Precompute per-entry representations for the whole corpus."""
        for entry in corpus:
            self._entry_repr(entry)

    def _entry_repr(self, entry: CorpusEntry):
        if self.strategy.kind == "token-jaccard":
            cached = self._token_cache.get(entry.task_id)
            if cached is None:
                cached = tokenize(entry.requirement)
                self._token_cache[entry.task_id] = cached
            return cached
        cached = self._embed_cache.get(entry.task_id)
        if cached is None:
            cached = self.strategy.provider.embed(entry.requirement)
            self._embed_cache[entry.task_id] = cached
        return cached

    def search(self, query: str, view: Corpus, k: int) -> list[RetrievalHit]:
        if k < 1:
            raise ValueError("k must be >= 1")
        if self.strategy.kind == "token-jaccard":
            q = tokenize(query)
            score = lambda entry: jaccard(q, self._entry_repr(entry))
        else:
            q = self.strategy.provider.embed(query)
            score = lambda entry: cosine(q, self._entry_repr(entry))
        hits = [RetrievalHit(entry=e, score=score(e)) for e in view]
        # stable descending sort: ties keep corpus order
        hits.sort(key=lambda h: -h.score)
        return hits[:k]
