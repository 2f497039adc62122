"""Embedding and entailment providers: a deterministic stub and an HTTP client.

Both expose the same two calls:

    embed_batch(texts)  -> (n, dim) float64 array, rows unit-L2-normalized
    entail_batch(pairs) -> (n,) float64 array of probabilities in [0, 1]

The stub is pure and bit-identical across runs, platforms, and worker
counts, which is what makes the whole pipeline testable end to end.
"""

from __future__ import annotations

import time
from typing import Sequence

import numpy as np
from zlib import crc32

import httpx

__all__ = [
    "ProviderError",
    "ProviderUnavailableError",
    "ProviderProtocolError",
    "StubProvider",
    "HttpProvider",
    "make_provider",
]

DEFAULT_STUB_DIM = 256


class ProviderError(Exception):
    pass


class ProviderUnavailableError(ProviderError):
    """Transport failure that persisted through all retries."""


class ProviderProtocolError(ProviderError):
    """The provider answered, but the payload violates the wire contract."""


class StubProvider:
    """Deterministic model-free provider.

    Embeddings are hashed bags of words: lowercased whitespace tokens are
    counted into `dim` buckets (crc32 of the UTF-8 token bytes, mod dim)
    and the count vector is L2-normalized, so lexical overlap shows up as
    cosine similarity. Entailment is the token Jaccard of the pair.
    """

    def __init__(self, dim: int = DEFAULT_STUB_DIM):
        if dim < 1:
            raise ValueError("dim must be >= 1")
        self.dim = dim

    def embed_batch(self, texts: Sequence[str]) -> np.ndarray:
        if not texts:
            raise ValueError("embed_batch requires a non-empty list")
        out = np.zeros((len(texts), self.dim), dtype=np.float64)
        for row, text in enumerate(texts):
            tokens = text.lower().split()
            if not tokens:
                raise ValueError(f"text at index {row} has no tokens")
            for tok in tokens:
                out[row, crc32(tok.encode("utf-8")) % self.dim] += 1.0
            out[row] /= np.linalg.norm(out[row])
        return out

    def entail_batch(self, pairs: Sequence[tuple[str, str]]) -> np.ndarray:
        if not pairs:
            raise ValueError("entail_batch requires a non-empty list")
        probs = np.empty(len(pairs), dtype=np.float64)
        for i, (premise, hypothesis) in enumerate(pairs):
            a = set(premise.lower().split())
            b = set(hypothesis.lower().split())
            union = a | b
            # two empty texts are identical, score them as fully entailed
            probs[i] = len(a & b) / len(union) if union else 1.0
        return probs


class HttpProvider:
    """Client for the inference sidecar's JSON-over-HTTP protocol.

    Requests are chunked to `batch_size` items, retried `retries` times
    with exponential backoff on transport errors and 5xx responses, and
    validated against the wire contract before use. Safe for concurrent
    callers; connections are pooled by the underlying httpx client.
    """

    def __init__(
        self,
        base_url: str,
        batch_size: int = 64,
        retries: int = 3,
        backoff: float = 0.25,
        timeout: float = 30.0,
        max_connections: int = 16,
        client: httpx.Client | None = None,
    ):
        if batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        self.base_url = base_url.rstrip("/")
        self.batch_size = batch_size
        self.retries = retries
        self.backoff = backoff
        self._client = client or httpx.Client(
            timeout=timeout,
            limits=httpx.Limits(max_connections=max_connections),
        )

    def close(self) -> None:
        self._client.close()

    def _post(self, path: str, payload: dict) -> dict:
        last_exc: Exception | None = None
        for attempt in range(self.retries + 1):
            if attempt:
                time.sleep(self.backoff * 2 ** (attempt - 1))
            try:
                resp = self._client.post(self.base_url + path, json=payload)
            except httpx.HTTPError as exc:
                last_exc = exc
                continue
            if resp.status_code >= 500:
                last_exc = ProviderUnavailableError(
                    f"{path} returned {resp.status_code}"
                )
                continue
            if resp.status_code != 200:
                raise ProviderProtocolError(
                    f"{path} returned {resp.status_code}: {resp.text[:200]}"
                )
            try:
                return resp.json()
            except ValueError as exc:
                raise ProviderProtocolError(f"{path} returned non-JSON body") from exc
        raise ProviderUnavailableError(
            f"{path} unavailable after {self.retries} retries"
        ) from last_exc

    def embed_batch(self, texts: Sequence[str]) -> np.ndarray:
        if not texts:
            raise ValueError("embed_batch requires a non-empty list")
        chunks = []
        dim: int | None = None
        for start in range(0, len(texts), self.batch_size):
            chunk = list(texts[start : start + self.batch_size])
            body = self._post("/embed", {"texts": chunk})
            vectors = body.get("vectors")
            if not isinstance(vectors, list) or len(vectors) != len(chunk):
                raise ProviderProtocolError("embed response count mismatch")
            arr = np.asarray(vectors, dtype=np.float64)
            if arr.ndim != 2:
                raise ProviderProtocolError("embed dimension mismatch across batch")
            if dim is None:
                dim = arr.shape[1]
            elif arr.shape[1] != dim:
                raise ProviderProtocolError("embed dimension mismatch across batch")
            if not np.all(np.isfinite(arr)):
                raise ProviderProtocolError("embed response contains non-finite values")
            norms = np.linalg.norm(arr, axis=1)
            if np.any(norms < 1e-6) or np.any(np.abs(norms - 1.0) > 1e-3):
                raise ProviderProtocolError("embed response vectors are not unit-norm")
            # renormalize in float64 so downstream cosine math is exact
            chunks.append(arr / norms[:, None])
        return np.concatenate(chunks, axis=0)

    def entail_batch(self, pairs: Sequence[tuple[str, str]]) -> np.ndarray:
        if not pairs:
            raise ValueError("entail_batch requires a non-empty list")
        out = np.empty(len(pairs), dtype=np.float64)
        pos = 0
        for start in range(0, len(pairs), self.batch_size):
            chunk = list(pairs[start : start + self.batch_size])
            body = self._post(
                "/entail",
                {"pairs": [{"premise": p, "hypothesis": h} for p, h in chunk]},
            )
            probs = body.get("probs")
            if not isinstance(probs, list) or len(probs) != len(chunk):
                raise ProviderProtocolError("entail response count mismatch")
            arr = np.asarray(probs, dtype=np.float64)
            if not np.all(np.isfinite(arr)):
                raise ProviderProtocolError("entail response contains non-finite values")
            if np.any(arr < -1e-6) or np.any(arr > 1.0 + 1e-6):
                raise ProviderProtocolError("entail probability outside [0, 1]")
            out[pos : pos + len(chunk)] = np.clip(arr, 0.0, 1.0)
            pos += len(chunk)
        return out

    def health(self) -> dict:
        try:
            resp = self._client.get(self.base_url + "/health")
        except httpx.HTTPError as exc:
            raise ProviderUnavailableError("health check failed") from exc
        if resp.status_code != 200:
            raise ProviderUnavailableError(f"health returned {resp.status_code}")
        return resp.json()


def make_provider(kind: str, url: str | None = None, stub_dim: int = DEFAULT_STUB_DIM):
    if kind == "stub":
        return StubProvider(dim=stub_dim)
    if kind == "http":
        if not url:
            raise ValueError("http provider requires a base url")
        return HttpProvider(url)
    raise ValueError(f"unknown provider kind: {kind!r}")
