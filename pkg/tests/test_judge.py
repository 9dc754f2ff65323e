import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fakes import FakeTransport, chat_body
from groundcite.curation import AttributionInstance
from groundcite.judge import (
    JudgeConfig,
    JudgeParseError,
    JudgeScores,
    JudgeTransportError,
    JudgeValidationError,
    aggregate_judge,
    build_judge_prompt,
    judge_batch,
    judge_sample,
    normalize_citations,
    parse_judge_response,
)
from groundcite.llmclient import ClientConfig
from groundcite.textkit import normalize

DOC = "Moscow is the capital of Russia. Russia is the largest country. A. B."


# ------------------------------------------------------- normalize_citations


def test_normalize_keeps_verbatim_singleton():
    assert normalize_citations(["Moscow is the capital of Russia."], DOC) == [
        "Moscow is the capital of Russia."
    ]


def test_normalize_splits_multi_sentence_citation():
    assert normalize_citations(["A. B."], DOC) == ["A.", "B."]


def test_normalize_drops_unfound_citation():
    assert normalize_citations(["Paris is in France."], DOC) == []


def test_normalize_deduplicates_exact_repeats():
    citations = ["Moscow is the capital of Russia.", "Moscow  is the capital of Russia."]
    assert normalize_citations(citations, DOC) == ["Moscow is the capital of Russia."]


def test_normalize_outputs_are_document_substrings():
    out = normalize_citations(["A. B.", "Russia is the largest country."], DOC)
    for sentence in out:
        assert sentence in normalize(DOC)


def test_normalize_idempotent():
    once = normalize_citations(["A. B.", "Russia is the largest country."], DOC)
    assert normalize_citations(once, DOC) == once


def test_normalize_drops_empty_strings():
    assert normalize_citations(["", "   "], DOC) == []


# ----------------------------------------------------------------- prompting


def test_judge_prompt_contains_rubrics_and_examples():
    prompt = build_judge_prompt("Q?", "part", ["c1", "c2"])
    assert "If the citations FULLY support the answer part, then 2." in prompt
    assert "If the citation supports (fully or partially) the answer part, then 1." in prompt
    assert "What is the capital of the largest country in the world (by area)?" in prompt
    assert '"individual_support_scores": [0, 1, 1]' in prompt
    assert 'Output: "collective_support_score": 1, "individual_support_scores": [1]' in prompt


def test_judge_prompt_fills_placeholders():
    prompt = build_judge_prompt("My question?", "my part", ["alpha", "beta"])
    assert "Question: My question?" in prompt
    assert "Answer part: my part" in prompt
    assert '["alpha", "beta"]' in prompt


def test_judge_prompt_empty_list_still_valid():
    prompt = build_judge_prompt("Q?", "part", [])
    assert "If the citation list is empty" in prompt
    assert "[]" in prompt


def test_judge_prompt_ends_with_json_instruction():
    prompt = build_judge_prompt("Q?", "part", ["c"])
    assert prompt.rstrip().endswith(
        '{ "collective_support_score": 0, 1, or 2,  '
        '"individual_support_scores": [list of 0s and 1s corresponding to each citation]}'
    )


# ------------------------------------------------------- parse_judge_response


def test_parse_first_worked_example():
    scores = parse_judge_response(
        '{"collective_support_score": 2, "individual_support_scores": [1, 1]}'
    )
    assert scores.collective_support == 2
    assert scores.individual_support == (1, 1)


def test_parse_second_worked_example():
    scores = parse_judge_response(
        '{"collective_support_score": 1, "individual_support_scores": [1]}'
    )
    assert scores.collective_support == 1
    assert scores.individual_support == (1,)


def test_parse_no_json_is_parse_failure():
    with pytest.raises(JudgeParseError):
        parse_judge_response("no json here")


def test_parse_tolerates_surrounding_prose():
    text = 'Sure! Here is my verdict:\n{"collective_support_score": 0, "individual_support_scores": []}\nThanks.'
    scores = parse_judge_response(text)
    assert scores.collective_support == 0
    assert scores.individual_support == ()


def test_parse_out_of_range_is_validation_error():
    with pytest.raises(JudgeValidationError):
        parse_judge_response(
            '{"collective_support_score": 3, "individual_support_scores": []}'
        )
    with pytest.raises(JudgeValidationError):
        parse_judge_response(
            '{"collective_support_score": 1, "individual_support_scores": [2]}'
        )
    with pytest.raises(JudgeValidationError):
        parse_judge_response(
            '{"collective_support_score": true, "individual_support_scores": []}'
        )


def test_parse_length_mismatch_is_validation_error():
    with pytest.raises(JudgeValidationError):
        parse_judge_response(
            '{"collective_support_score": 1, "individual_support_scores": [1]}',
            expected_count=2,
        )


def test_parse_render_round_trip():
    scores = JudgeScores(collective_support=2, individual_support=(1, 0, 1))
    assert parse_judge_response(json.dumps(scores.as_dict())) == scores


# ---------------------------------------------------------------- aggregation


def test_aggregate_single_sample():
    agg = aggregate_judge([JudgeScores(2, (1, 1))])
    assert agg.cs_mean == 1.0
    assert agg.is_mean == 1.0


def test_aggregate_cs_mean():
    agg = aggregate_judge([JudgeScores(2, (1,)), JudgeScores(0, (0,))])
    assert agg.cs_mean == 0.5


def test_aggregate_is_mean_of_means():
    agg = aggregate_judge([JudgeScores(1, (1, 0)), JudgeScores(1, (1, 1, 1))])
    assert agg.is_mean == pytest.approx(0.75)


def test_aggregate_skips_empty_is_lists():
    agg = aggregate_judge([JudgeScores(2, ()), JudgeScores(1, (1, 0))])
    assert agg.is_mean == pytest.approx(0.5)
    assert agg.cs_mean == pytest.approx(0.75)


def test_aggregate_empty_rejected():
    with pytest.raises(ValueError):
        aggregate_judge([])


@given(
    st.lists(
        st.builds(
            JudgeScores,
            collective_support=st.integers(min_value=0, max_value=2),
            individual_support=st.lists(
                st.integers(min_value=0, max_value=1), max_size=4
            ).map(tuple),
        ),
        min_size=1,
        max_size=8,
    ),
    st.randoms(use_true_random=False),
)
@settings(max_examples=100)
def test_aggregate_bounds_and_permutation(samples, rng):
    agg = aggregate_judge(samples)
    assert 0.0 <= agg.is_mean <= 1.0
    assert 0.0 <= agg.cs_mean <= 1.0
    shuffled = list(samples)
    rng.shuffle(shuffled)
    agg2 = aggregate_judge(shuffled)
    assert agg2.cs_mean == pytest.approx(agg.cs_mean)
    assert agg2.is_mean == pytest.approx(agg.is_mean)


# ---------------------------------------------------------------- judge calls


def _instance():
    return AttributionInstance(
        documents=(("d0", DOC),),
        question="What is the capital?",
        answer="Moscow.",
        answer_part="Moscow.",
    )


def _judge_cfg(cache_dir=None):
    return JudgeConfig(
        model="judge-model",
        client=ClientConfig(
            endpoint="http://fake/v1/chat/completions",
            backoff_base=0.0,
            cache_dir=cache_dir,
        ),
    )


def test_judge_sample_happy_path():
    transport = FakeTransport(
        (200, chat_body('{"collective_support_score": 2, "individual_support_scores": [1]}'))
    )
    scores = judge_sample(_instance(), ["Moscow is the capital of Russia."],
                          _judge_cfg(), transport=transport)
    assert scores.collective_support == 2
    prompt = transport.calls[0]["payload"]["messages"][0]["content"]
    assert "What is the capital?" in prompt


def test_judge_sample_retries_bad_reply_bypassing_cache(tmp_path):
    transport = FakeTransport(
        (200, chat_body("not a json verdict")),
        (200, chat_body('{"collective_support_score": 1, "individual_support_scores": [1]}')),
    )
    scores = judge_sample(
        _instance(), ["c"], _judge_cfg(cache_dir=str(tmp_path)), transport=transport
    )
    assert scores.collective_support == 1
    assert len(transport.calls) == 2


def test_judge_sample_gives_up_after_retry():
    transport = FakeTransport((200, chat_body("never json")))
    with pytest.raises(JudgeParseError):
        judge_sample(_instance(), ["c"], _judge_cfg(), transport=transport)


def test_judge_sample_transport_error_carries_sample_id():
    transport = FakeTransport((500, "down"))
    with pytest.raises(JudgeTransportError) as err:
        judge_sample(
            _instance(), ["c"], _judge_cfg(), sample_id="s42", transport=transport
        )
    assert err.value.sample_id == "s42"


def test_judge_batch_isolation_and_order():
    def scripted(payload):
        prompt = payload["messages"][0]["content"]
        if "broken" in prompt:
            return (200, chat_body("not json"))
        return (
            200,
            chat_body('{"collective_support_score": 2, "individual_support_scores": [1]}'),
        )

    transport = FakeTransport(scripted)
    good = _instance()
    bad = AttributionInstance(
        documents=(("d0", DOC),), question="broken", answer="a", answer_part="a"
    )
    results = judge_batch(
        [(good, ["c"], "s0"), (bad, ["c"], "s1"), (good, ["c"], "s2")],
        _judge_cfg(),
        transport=transport,
    )
    assert [r[0] for r in results] == ["s0", "s1", "s2"]
    assert results[0][1] is not None and results[0][2] is None
    assert results[1][1] is None and "JSON" in results[1][2]
    assert results[2][1] is not None
