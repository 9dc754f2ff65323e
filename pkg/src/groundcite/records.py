"""Line-delimited record schemas shared by the CLI, the service and the
curation pipeline.  See FORMATS.md at the repository root for the field-level
reference; every written row carries ``schema_version``.
"""

from __future__ import annotations

import json
import os
import tempfile

from .curation import AttributionInstance, SFTRecord
from .rewards import RewardBreakdown

__all__ = [
    "SCHEMA_VERSION",
    "read_jsonl",
    "write_jsonl",
    "instance_from_row",
    "instance_to_row",
    "breakdown_row",
    "sft_record_row",
    "sft_record_from_row",
]

SCHEMA_VERSION = 1


def read_jsonl(path: str) -> list[dict]:
    """Read one JSON object per non-blank line; errors carry the line number."""
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
            if not isinstance(row, dict):
                raise ValueError(f"{path}:{lineno}: expected a JSON object")
            rows.append(row)
    return rows


def write_jsonl(path: str, rows: list[dict]) -> None:
    """Atomically write rows, one compact JSON object per line."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            for row in rows:
                fh.write(json.dumps(row, ensure_ascii=False) + "\n")
        os.replace(tmp, path)
    except OSError:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def instance_from_row(row: dict) -> AttributionInstance:
    documents = tuple(
        (str(d.get("id", i)), str(d["text"]))
        for i, d in enumerate(row.get("documents", []))
    )
    gt = row.get("gt_citations")
    return AttributionInstance(
        documents=documents,
        question=str(row.get("question", "")),
        answer=str(row.get("answer", "")),
        answer_part=str(row.get("answer_part", row.get("answer", ""))),
        accumulated_text=str(row.get("accumulated_text", "")),
        gt_citations=tuple(str(c) for c in gt) if gt is not None else None,
    )


def instance_to_row(
    instance: AttributionInstance, *, sample_id: str = "", dataset: str = ""
) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "id": sample_id,
        "dataset": dataset,
        "documents": [{"id": i, "text": t} for i, t in instance.documents],
        "question": instance.question,
        "answer": instance.answer,
        "answer_part": instance.answer_part,
        "accumulated_text": instance.accumulated_text,
        "gt_citations": list(instance.gt_citations)
        if instance.gt_citations is not None
        else None,
    }


def breakdown_row(breakdown: RewardBreakdown, sample_id=None) -> dict:
    row = {"schema_version": SCHEMA_VERSION}
    if sample_id is not None:
        row["id"] = sample_id
    row.update(breakdown.as_dict())
    return row


def sft_record_row(record: SFTRecord) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "id": record.meta.get("sample_id", ""),
        "dataset": record.meta.get("dataset", ""),
        "prompt": record.prompt,
        "target": record.target,
        "meta": record.meta,
    }


def sft_record_from_row(row: dict) -> SFTRecord:
    meta = dict(row.get("meta") or {})
    meta.setdefault("sample_id", row.get("id", ""))
    meta.setdefault("dataset", row.get("dataset", ""))
    return SFTRecord(prompt=row["prompt"], target=row["target"], meta=meta)
