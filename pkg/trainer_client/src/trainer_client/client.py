"""HTTP client for the reward service's /v1/score and /v1/health endpoints."""

from __future__ import annotations

import time

import requests

__all__ = [
    "ClientHandle",
    "ScoreError",
    "TransportFailure",
    "score_batch",
    "reward_fn_adapter",
]


class TransportFailure(ConnectionError):
    """The service could not be reached or kept failing after retries."""


class ScoreError(RuntimeError):
    """The service answered but reported per-sample or request-level errors."""


def _default_transport(method: str, url: str, json_body, timeout: float):
    resp = requests.request(method, url, json=json_body, timeout=timeout)
    return resp.status_code, resp.json() if resp.content else {}


class ClientHandle:
    """Connection handle; verifies the service is reachable at construction.

    Safe for concurrent use: every call is independent and no mutable state
    is shared beyond the configuration captured here.
    """

    def __init__(
        self,
        base_url: str,
        timeout: float = 30.0,
        batch_limit: int = 1000,
        max_retries: int = 2,
        backoff_base: float = 0.2,
        transport=None,
        sleeper=time.sleep,
    ):
        if batch_limit < 1:
            raise ValueError("batch_limit must be >= 1")
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self.batch_limit = batch_limit
        self.max_retries = max_retries
        self.backoff_base = backoff_base
        self._transport = transport or _default_transport
        self._sleeper = sleeper
        health = self._request("GET", "/v1/health", None)
        self.engine_version = health.get("engine_version", "")
        self.config_digest = health.get("config_digest", "")

    def _request(self, method: str, path: str, body):
        url = self.base_url + path
        attempts = self.max_retries + 1
        last = "no attempt made"
        for attempt in range(attempts):
            try:
                status, payload = self._transport(method, url, body, self.timeout)
            except (requests.RequestException, ConnectionError, OSError) as exc:
                last = f"transport error: {exc}"
            else:
                if status == 200:
                    return payload
                if status in (429,) or 500 <= status < 600:
                    last = f"retryable status {status}"
                else:
                    raise ScoreError(
                        f"{method} {path} rejected with status {status}: {payload}"
                    )
            if attempt + 1 < attempts:
                self._sleeper(self.backoff_base * 2**attempt)
        raise TransportFailure(f"{method} {path} failed after {attempts} attempts: {last}")


def score_batch(
    handle: ClientHandle,
    outputs: list[str],
    documents: list[str],
    gt_citations: list[list[str]],
    overrides: dict | None = None,
) -> list[dict]:
    """Score aligned (output, document, gt_citations) triples.

    Chunks into service-limit batches, posts each to /v1/score and
    reassembles results in input order.  Raises ``ScoreError`` if any sample
    comes back as an error entry and ``TransportFailure`` once retries are
    exhausted.
    """
    if not (len(outputs) == len(documents) == len(gt_citations)):
        raise ValueError(
            f"outputs ({len(outputs)}), documents ({len(documents)}) and "
            f"gt_citations ({len(gt_citations)}) must be the same length"
        )
    if not outputs:
        return []
    results: list[dict] = []
    for lo in range(0, len(outputs), handle.batch_limit):
        hi = min(lo + handle.batch_limit, len(outputs))
        samples = [
            {
                "output": outputs[i],
                "document": documents[i],
                "gt_citations": list(gt_citations[i]),
            }
            for i in range(lo, hi)
        ]
        body = {"samples": samples}
        if overrides:
            body["overrides"] = dict(overrides)
        payload = handle._request("POST", "/v1/score", body)
        chunk = payload.get("results")
        if not isinstance(chunk, list) or len(chunk) != len(samples):
            raise ScoreError(
                f"service returned {len(chunk) if isinstance(chunk, list) else 'no'} "
                f"results for a batch of {len(samples)}"
            )
        bad = [lo + i for i, entry in enumerate(chunk) if "error" in entry]
        if bad:
            raise ScoreError(f"service reported errors for sample indices {bad}")
        results.extend(chunk)
    return results


def reward_fn_adapter(handle: ClientHandle, overrides: dict | None = None):
    """Adapt the service to a (prompts, completions, metadata) reward function.

    Each metadata entry either carries ``document``/``gt_citations`` inline
    (optionally with an ``id`` under which they are cached) or just an ``id``
    referring to an earlier entry.  Returns the weighted total per sample.
    """
    known: dict[object, tuple[str, list[str]]] = {}

    def reward_fn(prompts, completions, metadata) -> list[float]:
        if not (len(prompts) == len(completions) == len(metadata)):
            raise ValueError("prompts, completions and metadata must align")
        documents, citations = [], []
        for meta in metadata:
            if "document" in meta:
                entry = (meta["document"], list(meta.get("gt_citations") or []))
                if meta.get("id") is not None:
                    known[meta["id"]] = entry
            else:
                try:
                    entry = known[meta["id"]]
                except KeyError:
                    raise ValueError(
                        f"metadata id {meta.get('id')!r} has no cached document"
                    ) from None
            documents.append(entry[0])
            citations.append(entry[1])
        scored = score_batch(handle, list(completions), documents, citations, overrides)
        return [entry["total"] for entry in scored]

    return reward_fn
