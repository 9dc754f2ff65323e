"""Three-step training-data pipeline: context extension, intermediate
decomposition annotation, attribution matching, and SFT record assembly.

Extension masks the original sentences of a short passage behind ``<si>``
tags, asks an LLM to write around them, then structurally verifies the
output (every tag exactly once, word count reached) and reinserts the
originals verbatim so that ground-truth citations stay valid.  Decomposition
and matching are annotator-LLM calls whose outputs are parsed as JSON when
possible and as plain lines otherwise.  Assembly is pure: it rejects any
record whose citation is not verbatim in the documents, so every accepted
record scores a perfect format and validity reward by construction.
"""

from __future__ import annotations

import json
import re
import warnings
from collections import Counter
from dataclasses import dataclass, field

from ._jsonutil import first_balanced_object
from .llmclient import ChatRequest, ClientConfig, LlmError, complete
from .prompts import (
    CONTEXT_EXTENSION_PROMPT,
    DECOMPOSITION_PROMPT,
    MUSIQUE_ATTRIBUTION_PROMPT,
    TRAINING_PROMPT,
    UNIT_MATCHING_PROMPT,
    fill,
)
from .tagfmt import Decomposition, serialize
from .textkit import normalize, split_sentences

__all__ = [
    "AttributionInstance",
    "SFTRecord",
    "ExtensionJob",
    "ExtensionRejection",
    "RecordRejection",
    "CurationConfig",
    "CurationParseError",
    "render_documents",
    "mask_original_sentences",
    "build_extension_prompt",
    "verify_and_reinsert",
    "filter_context_to_citations",
    "build_decomposition_prompt",
    "build_matching_prompt",
    "build_musique_attribution_prompt",
    "verify_musique_attribution",
    "parse_decomposition_response",
    "parse_matching_response",
    "assemble_sft_record",
    "dataset_stats",
    "run_extend_stage",
    "run_decompose_stage",
    "run_match_stage",
    "run_assemble_stage",
]

_TAG_RE = re.compile(r"<s(\d+)>")


class CurationParseError(Exception):
    """An annotator response could not be parsed into the expected fields."""


@dataclass(frozen=True)
class AttributionInstance:
    """One unit of scoring and curation.

    ``answer_part`` is the chunk being attributed right now;
    ``accumulated_text`` is the answer generated before it.
    """

    documents: tuple[tuple[str, str], ...]
    question: str
    answer: str
    answer_part: str
    accumulated_text: str = ""
    gt_citations: tuple[str, ...] | None = None

    def __post_init__(self):
        object.__setattr__(
            self, "documents", tuple((str(i), str(t)) for i, t in self.documents)
        )
        if self.gt_citations is not None:
            object.__setattr__(
                self, "gt_citations", tuple(str(c) for c in self.gt_citations)
            )

    def missing_gt_citations(self) -> list[str]:
        """Ground-truth citations not verbatim (normalized) in any document."""
        if not self.gt_citations:
            return []
        norm_docs = [normalize(text) for _, text in self.documents]
        return [
            c
            for c in self.gt_citations
            if not normalize(c) or not any(normalize(c) in doc for doc in norm_docs)
        ]


@dataclass(frozen=True)
class SFTRecord:
    """A training pair: instantiated prompt plus serialized target completion."""

    prompt: str
    target: str
    meta: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ExtensionJob:
    original_sentences: tuple[str, ...]
    template: str
    target_words: int = 500

    def __post_init__(self):
        if not self.original_sentences:
            raise ValueError("an extension job needs at least one sentence")
        if self.target_words <= 0:
            raise ValueError("target_words must be positive")


@dataclass(frozen=True)
class ExtensionRejection:
    """Structural verification failures for one extension output."""

    missing: tuple[int, ...] = ()
    duplicated: tuple[int, ...] = ()
    out_of_range: tuple[int, ...] = ()
    word_count: tuple[int, int] | None = None  # (got, required)

    @property
    def reasons(self) -> list[str]:
        out = [f"missing tag <s{i}>" for i in self.missing]
        out += [f"duplicate tag <s{i}>" for i in self.duplicated]
        out += [f"out-of-range tag <s{i}>" for i in self.out_of_range]
        if self.word_count is not None:
            got, need = self.word_count
            out.append(f"word count {got} below target {need}")
        return out


@dataclass(frozen=True)
class RecordRejection:
    offending_citations: tuple[str, ...]
    reasons: tuple[str, ...]


@dataclass(frozen=True)
class CurationConfig:
    model: str = "annotator"
    client: ClientConfig = ClientConfig()
    target_words: int = 500
    extension_retries: int = 2
    max_output_tokens: int = 4096


def render_documents(documents) -> str:
    """Render (id, text) documents as the prompt's references section."""
    blocks = [f"Document [{doc_id}]:\n{text}" for doc_id, text in documents]
    return "\n\n".join(blocks)


def mask_original_sentences(passage: str, target_words: int = 500) -> ExtensionJob:
    """Replace sentence i of the passage with the literal tag ``<si>``."""
    spans = split_sentences(passage)
    if not spans:
        raise ValueError("passage must contain at least one sentence")
    parts = []
    prev_end = 0
    for i, span in enumerate(spans):
        parts.append(passage[prev_end : span.start])
        parts.append(f"<s{i}>")
        prev_end = span.end
    parts.append(passage[prev_end:])
    return ExtensionJob(
        original_sentences=tuple(s.text for s in spans),
        template="".join(parts),
        target_words=target_words,
    )


def build_extension_prompt(job: ExtensionJob) -> str:
    return fill(
        CONTEXT_EXTENSION_PROMPT,
        num_words=str(job.target_words),
        passage=job.template,
    )


def verify_and_reinsert(llm_output: str, job: ExtensionJob) -> str | ExtensionRejection:
    """Check tag structure, reinsert the originals verbatim, check length.

    Every index 0..n-1 must appear exactly once and nothing outside that
    range; the reinserted document must reach ``job.target_words`` words.
    Returns the extended document or a rejection listing every violation.
    """
    n = len(job.original_sentences)
    counts = Counter(int(m.group(1)) for m in _TAG_RE.finditer(llm_output))
    missing = tuple(i for i in range(n) if counts.get(i, 0) == 0)
    duplicated = tuple(sorted(i for i, c in counts.items() if 0 <= i < n and c > 1))
    out_of_range = tuple(sorted(i for i in counts if i >= n))

    def reinsert(match: re.Match) -> str:
        idx = int(match.group(1))
        return job.original_sentences[idx] if idx < n else match.group(0)

    document = _TAG_RE.sub(reinsert, llm_output)
    word_count = len(document.split())
    short = (
        (word_count, job.target_words) if word_count < job.target_words else None
    )
    if missing or duplicated or out_of_range or short:
        return ExtensionRejection(
            missing=missing,
            duplicated=duplicated,
            out_of_range=out_of_range,
            word_count=short,
        )
    return document


def filter_context_to_citations(
    document: str, gt_citations: list[str], window_sentences: int = 0
) -> str:
    """Keep only sentences related to the ground-truth citations.

    A sentence is kept when a normalized citation occurs inside it, or the
    sentence lies inside a (multi-sentence) citation; ``window_sentences``
    neighbors on each side are kept too.  Output preserves document order.
    """
    spans = split_sentences(document)
    norm_citations = [normalize(c) for c in gt_citations if normalize(c)]
    hits = set()
    for idx, span in enumerate(spans):
        ns = normalize(span.text)
        for nc in norm_citations:
            if nc in ns or ns in nc:
                hits.add(idx)
                break
    if not hits:
        warnings.warn(
            "no ground-truth citation found in the document; filtered context is empty",
            stacklevel=2,
        )
        return ""
    kept = set()
    for idx in hits:
        lo = max(0, idx - window_sentences)
        hi = min(len(spans), idx + window_sentences + 1)
        kept.update(range(lo, hi))
    return "\n".join(spans[i].text for i in sorted(kept))


def build_decomposition_prompt(instance: AttributionInstance) -> str:
    return fill(
        DECOMPOSITION_PROMPT,
        references=render_documents(instance.documents),
        question=instance.question,
        accumulated_text=instance.accumulated_text,
        latest_text_chunk=instance.answer_part,
    )


def _numbered(items: list[str]) -> str:
    return "\n".join(f"{i + 1}. {json.dumps(item)}" for i, item in enumerate(items))


def build_matching_prompt(instance: AttributionInstance, units: list[str]) -> str:
    """Prompt for attribution matching: references are the ground-truth
    citations only, never the full documents."""
    if not instance.gt_citations:
        raise ValueError("attribution matching requires ground-truth citations")
    return fill(
        UNIT_MATCHING_PROMPT,
        references=_numbered(list(instance.gt_citations)),
        units=_numbered(list(units)),
    )


def build_musique_attribution_prompt(context: str, question: str, answer: str) -> str:
    return fill(
        MUSIQUE_ATTRIBUTION_PROMPT, context=context, question=question, answer=answer
    )


def verify_musique_attribution(response: str, context: str) -> list[str]:
    """Structural checks on generated sentence attributions.

    Each returned line must occur in the context, and every paragraph (blank
    line separated) must contribute at least one returned sentence.
    """
    violations = []
    lines = [normalize(line) for line in response.splitlines() if normalize(line)]
    norm_context = normalize(context)
    if not lines:
        return ["empty attribution output"]
    for line in lines:
        if line not in norm_context:
            violations.append(f"sentence not found in context: {line[:80]!r}")
    paragraphs = [normalize(p) for p in re.split(r"\n\s*\n", context) if normalize(p)]
    for i, para in enumerate(paragraphs):
        if not any(line in para for line in lines):
            violations.append(f"no sentence selected from paragraph {i}")
    return violations


def parse_decomposition_response(text: str) -> tuple[str, list[str]]:
    """Extract (reasoning, units) from an annotator decomposition reply.

    Accepts a JSON object with ``reasoning``/``units`` fields, or falls back
    to one unit per non-empty line with bullets and numbering stripped.
    """
    candidate = first_balanced_object(text)
    if candidate is not None:
        try:
            data = json.loads(candidate)
        except ValueError:
            data = None
        if isinstance(data, dict) and isinstance(data.get("units"), list):
            units = [str(u).strip() for u in data["units"] if str(u).strip()]
            if units:
                return str(data.get("reasoning", "")), units
    units = []
    for line in text.splitlines():
        line = re.sub(r"^\s*(?:[-*]|\d+[.)])\s*", "", line).strip()
        if line:
            units.append(line)
    if not units:
        raise CurationParseError("no information units in annotator response")
    return "", units


def parse_matching_response(text: str, n_units: int) -> list[str]:
    """Extract one citation per unit from an annotator matching reply."""
    citations: list[str] | None = None
    candidate = first_balanced_object(text)
    if candidate is not None:
        try:
            data = json.loads(candidate)
        except ValueError:
            data = None
        if isinstance(data, dict) and isinstance(data.get("citations"), list):
            citations = [str(c) for c in data["citations"]]
    if citations is None:
        stripped = text.strip()
        if stripped.startswith("["):
            try:
                arr = json.loads(stripped)
                if isinstance(arr, list):
                    citations = [str(c) for c in arr]
            except ValueError:
                citations = None
    if citations is None:
        citations = []
        for line in text.splitlines():
            line = re.sub(r"^\s*(?:[-*]|\d+[.)])\s*", "", line).strip()
            if line.startswith('"') and line.endswith('"') and len(line) >= 2:
                try:
                    line = json.loads(line)
                except ValueError:
                    pass
            if line:
                citations.append(line)
    if len(citations) != n_units:
        raise CurationParseError(
            f"expected {n_units} citations, got {len(citations)}"
        )
    return citations


def assemble_sft_record(
    instance: AttributionInstance,
    decomposition: Decomposition,
    *,
    dataset: str = "",
    sample_id: str = "",
) -> SFTRecord | RecordRejection:
    """Build the training pair, rejecting citations not verbatim in the documents."""
    norm_docs = [normalize(text) for _, text in instance.documents]
    offending = []
    for citation in decomposition.citations:
        nc = normalize(citation)
        if not nc or not any(nc in doc for doc in norm_docs):
            offending.append(citation)
    if offending:
        return RecordRejection(
            offending_citations=tuple(offending),
            reasons=tuple(
                f"citation not found in documents: {c[:80]!r}" for c in offending
            ),
        )
    try:
        target = serialize(decomposition)
    except ValueError as exc:
        return RecordRejection(offending_citations=(), reasons=(str(exc),))
    prompt = fill(
        TRAINING_PROMPT,
        question=instance.question,
        documents=render_documents(instance.documents),
        answer_till_now=instance.accumulated_text,
        answer_part=instance.answer_part,
    )
    return SFTRecord(
        prompt=prompt,
        target=target,
        meta={"dataset": dataset, "sample_id": sample_id},
    )


def _percentile(sorted_values: list[int], q: float) -> int:
    if not sorted_values:
        return 0
    idx = min(len(sorted_values) - 1, int(round(q / 100.0 * (len(sorted_values) - 1))))
    return sorted_values[idx]


def dataset_stats(records: list[SFTRecord]) -> dict:
    """Counts per source, unit/citation histograms, prompt-length percentiles."""
    from .tagfmt import parse

    per_dataset: Counter = Counter()
    unit_hist: Counter = Counter()
    citation_hist: Counter = Counter()
    prompt_lengths = []
    for record in records:
        per_dataset[record.meta.get("dataset", "")] += 1
        outcome = parse(record.target)
        if outcome.decomposition is not None:
            unit_hist[len(outcome.decomposition.pairs)] += 1
            citation_hist[len(set(outcome.decomposition.citations))] += 1
        prompt_lengths.append(len(record.prompt))
    prompt_lengths.sort()
    return {
        "n_records": len(records),
        "per_dataset": dict(per_dataset),
        "unit_count_hist": dict(sorted(unit_hist.items())),
        "citation_count_hist": dict(sorted(citation_hist.items())),
        "prompt_length_percentiles": {
            str(q): _percentile(prompt_lengths, q) for q in (0, 25, 50, 75, 90, 99, 100)
        },
    }


# ---------------------------------------------------------------------------
# Stage drivers over JSONL-style rows (see records module for the schema).
# Each returns (accepted_rows, reject_rows); rejects carry the stage name and
# every violated check so they can land in a sidecar file.
# ---------------------------------------------------------------------------


def _reject_row(row: dict, stage: str, reasons: list[str]) -> dict:
    return {
        "schema_version": 1,
        "id": row.get("id", ""),
        "stage": stage,
        "reasons": list(reasons),
        "sample": row,
    }


def _accept_row(row: dict, **updates) -> dict:
    out = dict(row)
    out["schema_version"] = 1
    out.update(updates)
    return out


def _complete_text(prompt: str, cfg: CurationConfig, transport, force_refresh=False) -> str:
    req = ChatRequest(
        model=cfg.model,
        messages=(("user", prompt),),
        temperature=0.0,
        max_output_tokens=cfg.max_output_tokens,
    )
    return complete(req, cfg.client, transport=transport, force_refresh=force_refresh)


def _word_count(text: str) -> int:
    return len(text.split())


def run_extend_stage(rows: list[dict], cfg: CurationConfig, transport=None):
    """Extend every document shorter than the word target.

    A structurally broken extension is regenerated up to
    ``cfg.extension_retries`` times (bypassing the response cache) before the
    whole sample is dropped.
    """
    accepted, rejects = [], []
    for row in rows:
        new_documents = []
        reject_reasons: list[str] | None = None
        for doc in row.get("documents", []):
            text = doc["text"]
            if _word_count(text) >= cfg.target_words:
                new_documents.append(dict(doc))
                continue
            job = mask_original_sentences(text, target_words=cfg.target_words)
            prompt = build_extension_prompt(job)
            outcome: str | ExtensionRejection | None = None
            for attempt in range(cfg.extension_retries + 1):
                try:
                    reply = _complete_text(
                        prompt, cfg, transport, force_refresh=attempt > 0
                    )
                except LlmError as exc:
                    reject_reasons = [f"annotator call failed: {exc}"]
                    break
                outcome = verify_and_reinsert(reply, job)
                if isinstance(outcome, str):
                    break
            if reject_reasons is None and not isinstance(outcome, str):
                reject_reasons = (
                    outcome.reasons if outcome is not None else ["no extension produced"]
                )
            if reject_reasons is not None:
                break
            new_documents.append({"id": doc["id"], "text": outcome})
        if reject_reasons is not None:
            rejects.append(_reject_row(row, "extend", reject_reasons))
        else:
            accepted.append(_accept_row(row, documents=new_documents))
    return accepted, rejects


def run_decompose_stage(rows: list[dict], cfg: CurationConfig, transport=None):
    """Annotate each row with a reasoning trace and information units."""
    from .records import instance_from_row

    accepted, rejects = [], []
    for row in rows:
        instance = instance_from_row(row)
        prompt = build_decomposition_prompt(instance)
        try:
            reply = _complete_text(prompt, cfg, transport)
            reasoning, units = parse_decomposition_response(reply)
        except (LlmError, CurationParseError) as exc:
            rejects.append(_reject_row(row, "decompose", [str(exc)]))
            continue
        accepted.append(_accept_row(row, reasoning=reasoning, units=units))
    return accepted, rejects


def run_match_stage(rows: list[dict], cfg: CurationConfig, transport=None):
    """Match each information unit to one ground-truth citation."""
    from .records import instance_from_row

    accepted, rejects = [], []
    for row in rows:
        units = row.get("units") or []
        if not units:
            rejects.append(_reject_row(row, "match", ["row has no units"]))
            continue
        instance = instance_from_row(row)
        missing = instance.missing_gt_citations()
        if missing:
            rejects.append(
                _reject_row(
                    row,
                    "match",
                    [f"gt citation not in documents: {c[:80]!r}" for c in missing],
                )
            )
            continue
        try:
            prompt = build_matching_prompt(instance, units)
            reply = _complete_text(prompt, cfg, transport)
            citations = parse_matching_response(reply, len(units))
        except (LlmError, CurationParseError, ValueError) as exc:
            rejects.append(_reject_row(row, "match", [str(exc)]))
            continue
        accepted.append(_accept_row(row, citations=citations))
    return accepted, rejects


def run_assemble_stage(rows: list[dict]):
    """Assemble SFT records; purely structural, no LLM calls."""
    from .records import instance_from_row, sft_record_row

    accepted, rejects = [], []
    for row in rows:
        units = row.get("units") or []
        citations = row.get("citations") or []
        if not units or len(units) != len(citations):
            rejects.append(
                _reject_row(row, "assemble", ["units and citations do not align"])
            )
            continue
        instance = instance_from_row(row)
        decomposition = Decomposition(
            reasoning=row.get("reasoning", ""),
            pairs=tuple(zip(units, citations)),
        )
        result = assemble_sft_record(
            instance,
            decomposition,
            dataset=row.get("dataset", ""),
            sample_id=row.get("id", ""),
        )
        if isinstance(result, RecordRejection):
            rejects.append(_reject_row(row, "assemble", list(result.reasons)))
        else:
            accepted.append(sft_record_row(result))
    return accepted, rejects
