"""Language-model backends and embedders.

Two generation backends implement the same contract: "scripted" (an
ordered rule list mapping prompt substrings/regexes to canned responses,
for deterministic offline runs) and "http" (JSON-over-HTTP to any
completion endpoint, with a configurable prompt-in/text-out mapping).
Embedders mirror the split: a deterministic bag-of-words stub and an
HTTP embedding client. All backends count their calls so tests can audit
the engine's call budget.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import threading
from dataclasses import dataclass, field
from typing import Mapping, Protocol, Sequence

import httpx

__all__ = [
    "TransportError",
    "GenerationRequest",
    "BackendStats",
    "LMBackend",
    "Embedder",
    "ScriptedRule",
    "ScriptedBackend",
    "HttpBackend",
    "BagOfWordsEmbedder",
    "HttpEmbedder",
    "load_backend",
    "load_embedder",
]


class TransportError(RuntimeError):
    """Backend unreachable or responded malformed; safe to retry.

    Distinct from a backend legitimately returning empty text.
    """

    retryable = True


@dataclass(frozen=True)
class GenerationRequest:
    prompt: str
    max_tokens: int = 128
    decoding: str = "greedy"  # "greedy" | "sampled"
    seed: int | None = None
    stop_sequences: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.max_tokens <= 0:
            raise ValueError("max_tokens must be positive")
        if self.decoding not in ("greedy", "sampled"):
            raise ValueError(f"unknown decoding mode {self.decoding!r}")


class BackendStats:
    """Thread-safe monotone call counters, resettable between runs."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._generate = 0
        self._embed = 0

    @property
    def generate_calls(self) -> int:
        with self._lock:
            return self._generate

    @property
    def embed_calls(self) -> int:
        with self._lock:
            return self._embed

    def record_generate(self) -> None:
        with self._lock:
            self._generate += 1

    def record_embed(self) -> None:
        with self._lock:
            self._embed += 1

    def reset(self) -> None:
        with self._lock:
            self._generate = 0
            self._embed = 0


class LMBackend(Protocol):
    stats: BackendStats

    def generate(self, request: GenerationRequest) -> str: ...


class Embedder(Protocol):
    stats: BackendStats

    def embed(self, text: str) -> Sequence[float]: ...


def truncate_at_stop(text: str, stop_sequences: Sequence[str]) -> str:
    """Cut ``text`` at the earliest occurrence of any stop sequence."""
    cut = len(text)
    for stop in stop_sequences:
        idx = text.find(stop)
        if idx != -1:
            cut = min(cut, idx)
    return text[:cut]


@dataclass(frozen=True)
class ScriptedRule:
    """First rule whose pattern hits the prompt supplies the response."""

    match: str
    response: str
    regex: bool = False

    def hits(self, prompt: str) -> bool:
        if self.regex:
            return re.search(self.match, prompt) is not None
        return self.match in prompt


class ScriptedBackend:
    """Deterministic stub: ordered match rules plus a default response.

    Immutable after construction and pure, so it is safe under any
    concurrency schedule.
    """

    def __init__(self, rules: Sequence[ScriptedRule] = (), default: str = "") -> None:
        self.rules = tuple(rules)
        self.default = default
        self.stats = BackendStats()

    @classmethod
    def from_config(cls, config: Mapping) -> "ScriptedBackend":
        rules = [
            ScriptedRule(
                match=r["match"],
                response=r["response"],
                regex=bool(r.get("regex", False)),
            )
            for r in config.get("rules", [])
        ]
        return cls(rules=rules, default=config.get("default", ""))

    def generate(self, request: GenerationRequest) -> str:
        self.stats.record_generate()
        for rule in self.rules:
            if rule.hits(request.prompt):
                return truncate_at_stop(rule.response, request.stop_sequences)
        return truncate_at_stop(self.default, request.stop_sequences)


def _resolve_headers(config: Mapping) -> dict:
    headers = dict(config.get("headers", {}))
    key_env = config.get("api_key_env")
    if key_env:
        key = os.environ.get(key_env)
        if key is None:
            raise TransportError(f"environment variable {key_env} is not set")
        headers[config.get("api_key_header", "Authorization")] = (
            config.get("api_key_prefix", "Bearer ") + key
        )
    return headers


def _dig(payload, path: str):
    """Extract a value by dotted path, e.g. "choices.0.text"."""
    node = payload
    for part in path.split("."):
        if isinstance(node, list):
            node = node[int(part)]
        else:
            node = node[part]
    return node


@dataclass
class HttpBackend:
    """Completion client for a JSON-over-HTTP endpoint.

    The request body is ``extra_body`` plus the prompt under
    ``prompt_field`` and the stop list under ``stop_field``; the response
    text is extracted at ``response_path``.
    """

    endpoint: str
    headers: dict = field(default_factory=dict)
    timeout_ms: int = 30_000
    prompt_field: str = "prompt"
    stop_field: str = "stop"
    max_tokens_field: str = "max_tokens"
    response_path: str = "text"
    extra_body: dict = field(default_factory=dict)
    stats: BackendStats = field(default_factory=BackendStats)

    @classmethod
    def from_config(cls, config: Mapping) -> "HttpBackend":
        return cls(
            endpoint=config["endpoint"],
            headers=_resolve_headers(config),
            timeout_ms=int(config.get("timeout_ms", 30_000)),
            prompt_field=config.get("prompt_field", "prompt"),
            stop_field=config.get("stop_field", "stop"),
            max_tokens_field=config.get("max_tokens_field", "max_tokens"),
            response_path=config.get("response_path", "text"),
            extra_body=dict(config.get("extra_body", {})),
        )

    def generate(self, request: GenerationRequest) -> str:
        self.stats.record_generate()
        body = dict(self.extra_body)
        body[self.prompt_field] = request.prompt
        body[self.max_tokens_field] = request.max_tokens
        if request.stop_sequences:
            body[self.stop_field] = list(request.stop_sequences)
        try:
            resp = httpx.post(
                self.endpoint,
                json=body,
                headers=self.headers,
                timeout=self.timeout_ms / 1000.0,
            )
            resp.raise_for_status()
            text = _dig(resp.json(), self.response_path)
        except (httpx.HTTPError, json.JSONDecodeError, KeyError, IndexError, ValueError) as exc:
            raise TransportError(f"generation endpoint {self.endpoint}: {exc}") from exc
        if not isinstance(text, str):
            raise TransportError(f"generation endpoint returned non-text at {self.response_path}")
        return truncate_at_stop(text, request.stop_sequences)


class BagOfWordsEmbedder:
    """Deterministic unit-count bag-of-words embedding.

    Lowercased whitespace tokens are hashed (md5, salt-free) into a fixed
    number of buckets; the vector holds token counts. Empty text embeds
    to the zero vector. Intended for tests and offline demos where
    cosine values must be checkable by hand.
    """

    def __init__(self, dimension: int = 65_536) -> None:
        if dimension <= 0:
            raise ValueError("dimension must be positive")
        self.dimension = dimension
        self.stats = BackendStats()

    def _bucket(self, token: str) -> int:
        digest = hashlib.md5(token.encode("utf-8")).digest()
        return int.from_bytes(digest[:8], "big") % self.dimension

    def embed(self, text: str) -> list[float]:
        self.stats.record_embed()
        vector = [0.0] * self.dimension
        for token in text.lower().split():
            vector[self._bucket(token)] += 1.0
        return vector


@dataclass
class HttpEmbedder:
    """Embedding client: POST {"text": ...} -> {"embedding": [...]}."""

    endpoint: str
    headers: dict = field(default_factory=dict)
    timeout_ms: int = 30_000
    text_field: str = "text"
    response_path: str = "embedding"
    stats: BackendStats = field(default_factory=BackendStats)

    @classmethod
    def from_config(cls, config: Mapping) -> "HttpEmbedder":
        return cls(
            endpoint=config["endpoint"],
            headers=_resolve_headers(config),
            timeout_ms=int(config.get("timeout_ms", 30_000)),
            text_field=config.get("text_field", "text"),
            response_path=config.get("response_path", "embedding"),
        )

    def embed(self, text: str) -> list[float]:
        self.stats.record_embed()
        try:
            resp = httpx.post(
                self.endpoint,
                json={self.text_field: text},
                headers=self.headers,
                timeout=self.timeout_ms / 1000.0,
            )
            resp.raise_for_status()
            vector = _dig(resp.json(), self.response_path)
        except (httpx.HTTPError, json.JSONDecodeError, KeyError, IndexError, ValueError) as exc:
            raise TransportError(f"embedding endpoint {self.endpoint}: {exc}") from exc
        return [float(x) for x in vector]


def load_backend(config: Mapping) -> LMBackend:
    kind = config.get("kind")
    if kind == "scripted":
        return ScriptedBackend.from_config(config)
    if kind == "http":
        return HttpBackend.from_config(config)
    raise ValueError(f"unknown backend kind {kind!r}")


def load_embedder(config: Mapping) -> Embedder:
    kind = config.get("kind", "bow")
    if kind == "bow":
        return BagOfWordsEmbedder(dimension=int(config.get("dimension", 65_536)))
    if kind == "http":
        return HttpEmbedder.from_config(config)
    raise ValueError(f"unknown embedder kind {kind!r}")
