import pytest

from groundcite.curation import AttributionInstance
from groundcite.records import (
    SCHEMA_VERSION,
    instance_from_row,
    instance_to_row,
    read_jsonl,
    write_jsonl,
)


def test_jsonl_round_trip(tmp_path):
    rows = [{"id": "a", "n": 1}, {"id": "b", "nested": {"x": [1, 2]}}]
    path = tmp_path / "rows.jsonl"
    write_jsonl(str(path), rows)
    assert read_jsonl(str(path)) == rows


def test_read_jsonl_skips_blank_lines(tmp_path):
    path = tmp_path / "rows.jsonl"
    path.write_text('{"a": 1}\n\n{"b": 2}\n')
    assert read_jsonl(str(path)) == [{"a": 1}, {"b": 2}]


def test_read_jsonl_reports_line_number(tmp_path):
    path = tmp_path / "rows.jsonl"
    path.write_text('{"ok": 1}\nnot json\n')
    with pytest.raises(ValueError, match=":2:"):
        read_jsonl(str(path))


def test_read_jsonl_rejects_non_objects(tmp_path):
    path = tmp_path / "rows.jsonl"
    path.write_text("[1, 2]\n")
    with pytest.raises(ValueError, match="expected a JSON object"):
        read_jsonl(str(path))


def test_instance_round_trip():
    instance = AttributionInstance(
        documents=(("d0", "text zero"), ("d1", "text one")),
        question="q",
        answer="a",
        answer_part="part",
        accumulated_text="acc",
        gt_citations=("c1",),
    )
    row = instance_to_row(instance, sample_id="s1", dataset="unit")
    assert row["schema_version"] == SCHEMA_VERSION
    assert instance_from_row(row) == instance


def test_instance_from_row_defaults():
    instance = instance_from_row({"question": "q", "answer": "a"})
    assert instance.documents == ()
    assert instance.answer_part == "a"
    assert instance.gt_citations is None
