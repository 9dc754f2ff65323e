import json

import pytest
import requests

from fakes import FakeTransport, chat_body, flaky_then_ok
from groundcite.llmclient import (
    ChatRequest,
    ClientConfig,
    RequestError,
    RunStats,
    TransportError,
    complete,
    complete_batch,
    request_hash,
)


def _req(content="hello", model="m1"):
    return ChatRequest(model=model, messages=(("user", content),))


def _cfg(**kw):
    kw.setdefault("endpoint", "http://fake/v1/chat/completions")
    kw.setdefault("backoff_base", 0.0)
    return ClientConfig(**kw)


def test_request_validation():
    with pytest.raises(ValueError):
        ChatRequest(model="m", messages=())
    with pytest.raises(ValueError):
        ChatRequest(model="m", messages=(("user", "x"),), temperature=-1)
    with pytest.raises(ValueError):
        ClientConfig(timeout=0)


def test_complete_returns_canned_response():
    transport = FakeTransport((200, chat_body("canned")))
    assert complete(_req(), _cfg(), transport=transport) == "canned"
    payload = transport.calls[0]["payload"]
    assert payload["messages"] == [{"role": "user", "content": "hello"}]
    assert payload["temperature"] == 0.0


def test_retries_then_success():
    transport = flaky_then_ok(2, "ok")
    sleeps = []
    text = complete(
        _req(), _cfg(max_retries=3), transport=transport, sleeper=sleeps.append
    )
    assert text == "ok"
    assert len(transport.calls) == 3
    assert len(sleeps) == 2


def test_retries_exhausted_raise_transport_error():
    transport = FakeTransport(requests.ConnectionError("down"))
    with pytest.raises(TransportError) as err:
        complete(_req(), _cfg(max_retries=2), transport=transport, sleeper=lambda s: None)
    assert err.value.attempts == 3


def test_5xx_and_429_retry_but_4xx_fails_fast():
    transport = FakeTransport((503, "oops"), (429, "slow down"), (200, chat_body("ok")))
    assert complete(_req(), _cfg(), transport=transport, sleeper=lambda s: None) == "ok"

    bad = FakeTransport((401, "denied"))
    with pytest.raises(RequestError) as err:
        complete(_req(), _cfg(), transport=bad, sleeper=lambda s: None)
    assert err.value.status == 401
    assert len(bad.calls) == 1


def test_malformed_success_body_is_request_error():
    transport = FakeTransport((200, "not json"))
    with pytest.raises(RequestError):
        complete(_req(), _cfg(), transport=transport)


def test_backoff_is_exponential_and_capped():
    transport = FakeTransport(
        (503, ""), (503, ""), (503, ""), (200, chat_body("ok"))
    )
    sleeps = []
    complete(
        _req(),
        _cfg(max_retries=3, backoff_base=1.0, backoff_cap=3.0),
        transport=transport,
        sleeper=sleeps.append,
    )
    assert sleeps == [1.0, 2.0, 3.0]


def test_cache_hit_is_byte_identical(tmp_path):
    cfg = _cfg(cache_dir=str(tmp_path))
    transport = FakeTransport((200, chat_body("response one")))
    stats = RunStats()
    first = complete(_req(), cfg, transport=transport, stats=stats)
    second = complete(_req(), cfg, transport=transport, stats=stats)
    assert first == second == "response one"
    assert len(transport.calls) == 1
    assert stats.cache_hits == 1


def test_cache_distinguishes_requests(tmp_path):
    cfg = _cfg(cache_dir=str(tmp_path))
    transport = FakeTransport(
        lambda payload: (200, chat_body(payload["messages"][0]["content"]))
    )
    assert complete(_req("a"), cfg, transport=transport) == "a"
    assert complete(_req("b"), cfg, transport=transport) == "b"
    assert request_hash(_req("a")) != request_hash(_req("b"))
    assert len(transport.calls) == 2


def test_force_refresh_bypasses_cache(tmp_path):
    cfg = _cfg(cache_dir=str(tmp_path))
    transport = FakeTransport((200, chat_body("v1")), (200, chat_body("v2")))
    assert complete(_req(), cfg, transport=transport) == "v1"
    assert complete(_req(), cfg, transport=transport, force_refresh=True) == "v2"
    # The refreshed value replaced the cached entry.
    assert complete(_req(), cfg, transport=transport) == "v2"


def test_batch_alignment_and_isolation():
    def scripted(payload):
        content = payload["messages"][0]["content"]
        if content == "bad":
            return (400, "rejected")
        return (200, chat_body(content.upper()))

    transport = FakeTransport(scripted)
    reqs = [_req("a"), _req("bad"), _req("c")]
    results = complete_batch(reqs, _cfg(max_concurrency=3), transport=transport)
    assert [idx for idx, _ in results] == [0, 1, 2]
    assert results[0][1] == "A"
    assert isinstance(results[1][1], RequestError)
    assert results[2][1] == "C"
    assert complete_batch([], _cfg()) == []


def test_payload_round_trips_as_json():
    req = ChatRequest(
        model="m", messages=(("system", "s"), ("user", "u")), max_output_tokens=7
    )
    payload = json.loads(json.dumps(req.payload()))
    assert payload["max_tokens"] == 7
    assert payload["messages"][0] == {"role": "system", "content": "s"}
