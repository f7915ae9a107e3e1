"""Text embedding providers.

Two implementations of the same one-text-in, fixed-dim-vector-out
contract:

* ``HashingEmbedder`` -- deterministic, dependency-free fallback.
  Whitespace tokens (lowercased) are hashed with 64-bit FNV-1a into one
  of ``dim`` buckets; the bucket counts are L2-normalized. Good enough
  for tests and offline runs.
* ``RemoteEmbeddingProvider`` -- HTTP provider for plugging in a real
  encoder model serving endpoint.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import requests

from .errors import DimensionMismatchError, ProviderError

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF


@dataclass(frozen=True)
class EmbeddingVector:
    values: tuple[float, ...]

    @property
    def dim(self) -> int:
        return len(self.values)

    def __post_init__(self):
        if not all(math.isfinite(v) for v in self.values):
            raise ValueError("embedding contains non-finite components")


def fnv1a_64(data: bytes) -> int:
    h = _FNV_OFFSET
    for b in data:
        h ^= b
        h = (h * _FNV_PRIME) & _MASK64
    return h


class HashingEmbedder:
    """Deterministic feature-hashing embedder (no external calls)."""

    def __init__(self, dim: int = 256):
        if dim < 1:
            raise ValueError("dim must be positive")
        self.dim = dim

    def bucket(self, token: str) -> int:
        return fnv1a_64(token.encode("utf-8")) % self.dim

    def embed(self, text: str) -> EmbeddingVector:
        counts = [0.0] * self.dim
        for token in text.lower().split():
            counts[self.bucket(token)] += 1.0
        norm = math.sqrt(sum(c * c for c in counts))
        if norm > 0.0:
            counts = [c / norm for c in counts]
        return EmbeddingVector(values=tuple(counts))


class RemoteEmbeddingProvider:
    """HTTP embedding endpoint: POST {"input": text} -> {"embedding": [...]}.

    The declared dimension is checked on every response. The bearer token,
    if any, comes from the environment so it never lands in manifests.
    """

    def __init__(
        self,
        endpoint: str,
        dim: int,
        token_env: str = "CODELOOP_EMBED_TOKEN",
        timeout: float = 30.0,
        session: requests.Session | None = None,
    ):
        self.endpoint = endpoint
        self.dim = dim
        self.token_env = token_env
        self.timeout = timeout
        self._session = session or requests.Session()

    def embed(self, text: str) -> EmbeddingVector:
        headers = {}
        token = os.environ.get(self.token_env)
        if token:
            headers["Authorization"] = f"Bearer {token}"
        try:
            resp = self._session.post(
                self.endpoint,
                json={"input": text},
                headers=headers,
                timeout=self.timeout,
            )
            resp.raise_for_status()
            payload = resp.json()
            values = payload["embedding"]
        except (requests.RequestException, KeyError, ValueError) as exc:
            raise ProviderError(f"embedding provider failed: {exc}") from exc
        if len(values) != self.dim:
            raise DimensionMismatchError(self.dim, len(values))
        return EmbeddingVector(values=tuple(float(v) for v in values))
