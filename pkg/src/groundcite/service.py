"""Long-running reward service for RL rollout scoring.

POST /v1/score takes a batch of {output, document, gt_citations} samples and
returns one reward breakdown per sample, aligned by index; a bad sample
yields an error entry at its slot, never a failed batch.  GET /v1/health
reports the engine version and a digest of the startup configuration.
Only alpha and the three weights may be overridden per request; the
similarity mode stays fixed so latency stays predictable.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from . import __version__ as ENGINE_VERSION
from .records import SCHEMA_VERSION
from .rewards import RewardConfig, compute_rewards_batch
from .window import warmup

__all__ = ["ServiceConfig", "create_app", "serve", "config_digest"]

_OVERRIDABLE = ("alpha", "weight_format", "weight_validity", "weight_accuracy")


@dataclasses.dataclass(frozen=True)
class ServiceConfig:
    reward: RewardConfig = RewardConfig()
    max_batch: int = 1000
    max_workers: int | None = None


def config_digest(cfg: ServiceConfig) -> str:
    canonical = json.dumps(
        {
            "reward": dataclasses.asdict(cfg.reward),
            "max_batch": cfg.max_batch,
        },
        sort_keys=True,
        separators=(",", ":"),
    )
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _error(status: int, message: str, **extra) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": {"message": message, **extra}})


def _apply_overrides(base: RewardConfig, overrides: dict) -> RewardConfig:
    unknown = set(overrides) - set(_OVERRIDABLE)
    if unknown:
        raise ValueError(
            f"override keys not allowed: {sorted(unknown)}; "
            f"only {list(_OVERRIDABLE)} may change per request"
        )
    fields = {k: float(v) for k, v in overrides.items()}
    return dataclasses.replace(base, **fields)


def _check_sample(sample) -> str | None:
    if not isinstance(sample, dict):
        return "sample must be an object"
    if not isinstance(sample.get("output"), str):
        return "field 'output' must be a string"
    if not isinstance(sample.get("document"), str):
        return "field 'document' must be a string"
    gt = sample.get("gt_citations")
    if not isinstance(gt, list) or not all(isinstance(c, str) for c in gt):
        return "field 'gt_citations' must be a list of strings"
    return None


def create_app(cfg: ServiceConfig = ServiceConfig()) -> FastAPI:
    app = FastAPI(title="groundcite reward service", version=ENGINE_VERSION)
    digest = config_digest(cfg)

    @app.get("/v1/health")
    def health():
        return {
            "status": "ok",
            "engine_version": ENGINE_VERSION,
            "config_digest": digest,
        }

    @app.post("/v1/score")
    async def score(request: Request):
        body = await request.body()
        try:
            data = json.loads(body)
        except json.JSONDecodeError as exc:
            return _error(
                400,
                f"malformed JSON: {exc.msg}",
                line=exc.lineno,
                column=exc.colno,
                position=exc.pos,
            )
        if not isinstance(data, dict):
            return _error(400, "request body must be a JSON object")
        samples = data.get("samples")
        if not isinstance(samples, list) or not samples:
            return _error(400, "'samples' must be a non-empty list")
        if len(samples) > cfg.max_batch:
            return _error(
                413,
                f"batch of {len(samples)} exceeds the configured limit",
                limit=cfg.max_batch,
            )
        try:
            reward_cfg = _apply_overrides(cfg.reward, data.get("overrides") or {})
        except (TypeError, ValueError) as exc:
            return _error(400, str(exc))

        slots: list[dict | None] = [None] * len(samples)
        scorable = []
        for i, sample in enumerate(samples):
            problem = _check_sample(sample)
            if problem is not None:
                slots[i] = {"error": problem}
            else:
                scorable.append((i, sample))
        breakdowns = compute_rewards_batch(
            [(s["output"], s["document"], s["gt_citations"]) for _, s in scorable],
            reward_cfg,
            max_workers=cfg.max_workers,
        )
        for (i, _), breakdown in zip(scorable, breakdowns):
            slots[i] = breakdown.as_dict()
        return {
            "schema_version": SCHEMA_VERSION,
            "engine_version": ENGINE_VERSION,
            "config": dataclasses.asdict(reward_cfg),
            "results": slots,
        }

    return app


def serve(host: str, port: int, cfg: ServiceConfig = ServiceConfig()) -> None:
    """Run the service until interrupted (blocking)."""
    import uvicorn

    warmup()
    uvicorn.run(create_app(cfg), host=host, port=port, log_level="warning")
