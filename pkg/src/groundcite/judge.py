"""LLM-as-judge evaluation: citation normalization, prompt construction,
response parsing and CS/IS aggregation.

The judge scores a citation list against a part of the answer on two rubrics:
a collective support score (0-2, the whole list vs the answer part) and an
individual support score (0/1 per citation).  Dataset-level numbers normalize
both to [0, 1]; the IS aggregate is a mean of per-sample means so every
sample weighs equally regardless of how many citations it produced.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from ._jsonutil import first_balanced_object
from .llmclient import ChatRequest, ClientConfig, LlmError, complete
from .prompts import JUDGE_PROMPT, fill
from .textkit import normalize, split_sentences

__all__ = [
    "JudgeScores",
    "JudgeAggregate",
    "JudgeConfig",
    "JudgeResponseError",
    "JudgeParseError",
    "JudgeValidationError",
    "JudgeTransportError",
    "normalize_citations",
    "build_judge_prompt",
    "parse_judge_response",
    "judge_sample",
    "judge_batch",
    "aggregate_judge",
]


class JudgeResponseError(Exception):
    """The judge's reply could not be turned into scores."""


class JudgeParseError(JudgeResponseError):
    """No parseable JSON object in the reply."""


class JudgeValidationError(JudgeResponseError):
    """JSON parsed but the scores are out of range or misshapen."""


class JudgeTransportError(Exception):
    """The judge endpoint could not be reached; carries the sample id."""

    def __init__(self, message: str, sample_id=None):
        super().__init__(message)
        self.sample_id = sample_id


@dataclass(frozen=True)
class JudgeScores:
    collective_support: int
    individual_support: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(
            self, "individual_support", tuple(int(x) for x in self.individual_support)
        )

    def as_dict(self) -> dict:
        return {
            "collective_support_score": self.collective_support,
            "individual_support_scores": list(self.individual_support),
        }


@dataclass(frozen=True)
class JudgeAggregate:
    is_mean: float
    cs_mean: float
    n_samples: int
    n_parse_failures: int


@dataclass(frozen=True)
class JudgeConfig:
    model: str = "gpt-4.1"
    temperature: float = 0.0
    max_output_tokens: int = 512
    parse_retries: int = 1
    client: ClientConfig = ClientConfig()


def normalize_citations(c_pred: list[str], document: str) -> list[str]:
    """Filter unfound citations and break survivors into single sentences.

    A citation survives only if its whitespace-normalized form occurs in the
    normalized document.  Multi-sentence citations are split; exact repeats
    are dropped while preserving first-occurrence order.  Idempotent.
    """
    doc = normalize(document)
    out: list[str] = []
    seen: set[str] = set()
    for c in c_pred:
        nc = normalize(c)
        if not nc or nc not in doc:
            continue
        for span in split_sentences(nc):
            sentence = normalize(span.text)
            if sentence and sentence not in seen:
                seen.add(sentence)
                out.append(sentence)
    return out


def build_judge_prompt(question: str, answer_part: str, citations: list[str]) -> str:
    """Instantiate the judge rubric template; citations render as a quoted list."""
    return fill(
        JUDGE_PROMPT,
        question=question,
        answer_part=answer_part,
        citation_list=json.dumps(list(citations)),
    )


def _as_score(value, allowed: tuple[int, ...], what: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise JudgeValidationError(f"{what} must be an integer, got {value!r}")
    if value not in allowed:
        raise JudgeValidationError(f"{what} must be in {allowed}, got {value}")
    return value


def parse_judge_response(text: str, expected_count: int | None = None) -> JudgeScores:
    """Extract and validate the judge's JSON verdict.

    Scans for the first balanced JSON object (tolerating surrounding prose)
    and makes exactly one parse attempt on it.
    """
    candidate = first_balanced_object(text)
    if candidate is None:
        raise JudgeParseError("no JSON object in judge response")
    try:
        data = json.loads(candidate)
    except ValueError as exc:
        raise JudgeParseError(f"judge response is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise JudgeParseError("judge response JSON is not an object")
    if "collective_support_score" not in data or "individual_support_scores" not in data:
        raise JudgeValidationError("judge response is missing a required score field")
    cs = _as_score(data["collective_support_score"], (0, 1, 2), "collective_support_score")
    raw_is = data["individual_support_scores"]
    if not isinstance(raw_is, list):
        raise JudgeValidationError("individual_support_scores must be a list")
    is_scores = tuple(
        _as_score(x, (0, 1), "individual_support_scores entry") for x in raw_is
    )
    if expected_count is not None and len(is_scores) != expected_count:
        raise JudgeValidationError(
            f"expected {expected_count} individual scores, got {len(is_scores)}"
        )
    return JudgeScores(collective_support=cs, individual_support=is_scores)


def judge_sample(
    instance,
    citations: list[str],
    cfg: JudgeConfig,
    *,
    sample_id=None,
    transport=None,
) -> JudgeScores:
    """Judge one citation list: build prompt, call the model, parse.

    A bad reply is retried ``cfg.parse_retries`` times with the cache
    bypassed (a cached bad reply would just come back).  Transport failures
    surface as :class:`JudgeTransportError` carrying the sample id.
    """
    prompt = build_judge_prompt(instance.question, instance.answer_part, citations)
    req = ChatRequest(
        model=cfg.model,
        messages=(("user", prompt),),
        temperature=cfg.temperature,
        max_output_tokens=cfg.max_output_tokens,
    )
    last_error: JudgeResponseError | None = None
    for attempt in range(cfg.parse_retries + 1):
        try:
            text = complete(
                req, cfg.client, force_refresh=attempt > 0, transport=transport
            )
        except LlmError as exc:
            raise JudgeTransportError(
                f"judge call failed for sample {sample_id!r}: {exc}",
                sample_id=sample_id,
            ) from exc
        try:
            return parse_judge_response(text, expected_count=len(citations))
        except JudgeResponseError as exc:
            last_error = exc
    raise last_error


def judge_batch(
    samples: list[tuple],
    cfg: JudgeConfig,
    *,
    transport=None,
) -> list[tuple[object, JudgeScores | None, str | None]]:
    """Judge many (instance, citations, sample_id) triples concurrently.

    Returns (sample_id, scores-or-None, error-or-None) per input, aligned to
    input order.  Per-sample failures never abort the batch.
    """

    def one(sample):
        instance, citations, sample_id = sample
        try:
            scores = judge_sample(
                instance, citations, cfg, sample_id=sample_id, transport=transport
            )
            return sample_id, scores, None
        except (JudgeResponseError, JudgeTransportError) as exc:
            return sample_id, None, str(exc)

    if not samples:
        return []
    with ThreadPoolExecutor(max_workers=cfg.client.max_concurrency) as pool:
        return list(pool.map(one, samples))


def aggregate_judge(
    samples: list[JudgeScores], n_parse_failures: int = 0
) -> JudgeAggregate:
    """Normalize CS/IS to [0, 1] and average over successfully judged samples.

    cs_mean averages CS/2 over all samples; is_mean averages each sample's
    own IS mean, skipping samples with no citations (IS is undefined there,
    though they still contribute to CS).
    """
    if not samples:
        raise ValueError("aggregate_judge needs at least one judged sample")
    cs_mean = sum(s.collective_support for s in samples) / (2.0 * len(samples))
    per_sample = [
        sum(s.individual_support) / len(s.individual_support)
        for s in samples
        if s.individual_support
    ]
    is_mean = sum(per_sample) / len(per_sample) if per_sample else 0.0
    return JudgeAggregate(
        is_mean=is_mean,
        cs_mean=cs_mean,
        n_samples=len(samples),
        n_parse_failures=n_parse_failures,
    )
