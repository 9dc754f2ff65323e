"""Minimal chat-completion client used by the judge and the curation pipeline.

Speaks the de-facto chat-completions JSON shape (messages in, choices out) so
any hosted or local endpoint works; endpoint and model name are pure
configuration.  Responses can be cached on disk keyed by a content hash of
the request, which makes curation and judging re-runnable without cost.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import requests

__all__ = [
    "ChatRequest",
    "ClientConfig",
    "RunStats",
    "LlmError",
    "TransportError",
    "RequestError",
    "request_hash",
    "complete",
    "complete_batch",
]


class LlmError(Exception):
    """Base class for client failures."""


class TransportError(LlmError):
    """Retries exhausted on transient transport/5xx/429 failures."""

    def __init__(self, message: str, attempts: int):
        super().__init__(f"{message} (after {attempts} attempts)")
        self.attempts = attempts


class RequestError(LlmError):
    """Non-retryable failure: 4xx status or malformed completion payload."""

    def __init__(self, message: str, status: int | None = None):
        super().__init__(message)
        self.status = status


@dataclass(frozen=True)
class ChatRequest:
    model: str
    messages: tuple[tuple[str, str], ...]
    temperature: float = 0.0
    max_output_tokens: int = 1024

    def __post_init__(self):
        object.__setattr__(
            self, "messages", tuple((str(r), str(c)) for r, c in self.messages)
        )
        if not self.messages:
            raise ValueError("a chat request needs at least one message")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_output_tokens <= 0:
            raise ValueError("max_output_tokens must be positive")

    def payload(self) -> dict:
        return {
            "model": self.model,
            "messages": [{"role": r, "content": c} for r, c in self.messages],
            "temperature": self.temperature,
            "max_tokens": self.max_output_tokens,
        }


@dataclass(frozen=True)
class ClientConfig:
    endpoint: str = "http://localhost:8080/v1/chat/completions"
    api_key_env: str = "GROUNDCITE_API_KEY"
    timeout: float = 60.0
    max_retries: int = 3
    max_concurrency: int = 8
    cache_dir: str | None = None
    backoff_base: float = 0.5
    backoff_cap: float = 30.0

    def __post_init__(self):
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.max_concurrency < 1:
            raise ValueError("max_concurrency must be >= 1")


@dataclass
class RunStats:
    """Simple per-run accounting."""

    requests: int = 0
    cache_hits: int = 0
    retries: int = 0
    failures: int = 0
    completion_chars: int = 0


def request_hash(req: ChatRequest) -> str:
    canonical = json.dumps(req.payload(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _cache_path(cfg: ClientConfig, key: str) -> str:
    return os.path.join(cfg.cache_dir, f"{key}.json")


def _cache_read(cfg: ClientConfig, key: str) -> str | None:
    if cfg.cache_dir is None:
        return None
    path = _cache_path(cfg, key)
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)["text"]
    except (OSError, ValueError, KeyError):
        return None


def _cache_write(cfg: ClientConfig, key: str, text: str) -> None:
    if cfg.cache_dir is None:
        return
    os.makedirs(cfg.cache_dir, exist_ok=True)
    # Write-then-rename keeps concurrent writers of the same key safe.
    fd, tmp = tempfile.mkstemp(dir=cfg.cache_dir, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            json.dump({"request_hash": key, "text": text}, fh)
        os.replace(tmp, _cache_path(cfg, key))
    except OSError:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _default_transport(url: str, payload: dict, headers: dict, timeout: float):
    resp = requests.post(url, json=payload, headers=headers, timeout=timeout)
    return resp.status_code, resp.text


def _extract_text(body: str) -> str:
    try:
        data = json.loads(body)
        content = data["choices"][0]["message"]["content"]
    except (ValueError, KeyError, IndexError, TypeError) as exc:
        raise RequestError(f"malformed completion response: {exc}") from exc
    if not isinstance(content, str):
        raise RequestError("completion content is not a string")
    return content


def complete(
    req: ChatRequest,
    cfg: ClientConfig,
    *,
    force_refresh: bool = False,
    transport=None,
    sleeper=time.sleep,
    stats: RunStats | None = None,
) -> str:
    """Return the first completion's text, with retries and optional caching.

    Transient failures (transport errors, 5xx, 429) are retried with
    exponential backoff up to ``cfg.max_retries`` extra attempts; other 4xx
    statuses fail immediately.  ``force_refresh`` bypasses the cache read but
    still refreshes the cached entry on success.
    """
    transport = transport or _default_transport
    key = request_hash(req)
    if not force_refresh:
        cached = _cache_read(cfg, key)
        if cached is not None:
            if stats:
                stats.cache_hits += 1
            return cached
    headers = {"Content-Type": "application/json"}
    api_key = os.environ.get(cfg.api_key_env, "")
    if api_key:
        headers["Authorization"] = f"Bearer {api_key}"
    attempts = cfg.max_retries + 1
    last_failure = "no attempt made"
    for attempt in range(attempts):
        if stats:
            stats.requests += 1
        try:
            status, body = transport(cfg.endpoint, req.payload(), headers, cfg.timeout)
        except (requests.RequestException, ConnectionError, OSError) as exc:
            last_failure = f"transport error: {exc}"
            status = None
        else:
            if status == 200:
                text = _extract_text(body)
                _cache_write(cfg, key, text)
                if stats:
                    stats.completion_chars += len(text)
                return text
            if status == 429 or 500 <= status < 600:
                last_failure = f"retryable status {status}"
            else:
                if stats:
                    stats.failures += 1
                raise RequestError(
                    f"request rejected with status {status}: {body[:200]}",
                    status=status,
                )
        if attempt + 1 < attempts:
            if stats:
                stats.retries += 1
            sleeper(min(cfg.backoff_cap, cfg.backoff_base * 2**attempt))
    if stats:
        stats.failures += 1
    raise TransportError(last_failure, attempts=attempts)


def complete_batch(
    reqs: list[ChatRequest],
    cfg: ClientConfig,
    *,
    transport=None,
    sleeper=time.sleep,
    stats: RunStats | None = None,
) -> list[tuple[int, str | LlmError]]:
    """Complete many requests with bounded concurrency.

    Results are aligned to input indices; an individual failure yields the
    exception instance at its slot instead of aborting the batch.
    """
    if not reqs:
        return []

    def one(idx_req):
        idx, req = idx_req
        try:
            return idx, complete(
                req, cfg, transport=transport, sleeper=sleeper, stats=stats
            )
        except LlmError as exc:
            return idx, exc

    with ThreadPoolExecutor(max_workers=cfg.max_concurrency) as pool:
        results = list(pool.map(one, enumerate(reqs)))
    results.sort(key=lambda pair: pair[0])
    return results
