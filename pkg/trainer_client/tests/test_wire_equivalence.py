"""Wire-equivalence acceptance: score_batch against a live service must return
byte-identical breakdowns (after JSON round trip at full float precision) to
the primary CLI's offline scoring, and chunked calls must equal unchunked."""

import json
import random
import socket
import subprocess
import sys
import time
from contextlib import contextmanager

import pytest
import requests

from trainer_client import ClientHandle, reward_fn_adapter, score_batch

GOOD_DOC = (
    "The committee approved the budget in early March. "
    "A second reading was scheduled for late April. "
    "Funding for the harbor project remained contested. "
    "The final vote passed with a narrow margin."
)


def _block(reasoning, pairs):
    parts = [f"<think> {reasoning} </think>"]
    for unit, citation in pairs:
        parts.append(f"<unit> {unit} </unit> <citation> {citation} </citation>")
    return " ".join(parts)


def make_fixtures(n=100):
    """Deterministic mix of perfect, fuzzy, partial and garbage completions."""
    rng = random.Random(808)
    sentences = [s + "." for s in GOOD_DOC.split(". ")]
    sentences[-1] = sentences[-1].rstrip(".") + "."
    fixtures = []
    for i in range(n):
        kind = i % 5
        gt = rng.sample(sentences, rng.randint(1, 3))
        if kind == 0:
            output = _block(f"reasoning {i}", [(f"unit {j}", c) for j, c in enumerate(gt)])
        elif kind == 1:
            noisy = []
            for c in gt:
                chars = list(c)
                for pos in rng.sample(range(len(chars)), 3):
                    chars[pos] = rng.choice("abcxyz")
                noisy.append("".join(chars))
            output = _block(f"fuzzy {i}", [(f"unit {j}", c) for j, c in enumerate(noisy)])
        elif kind == 2:
            output = "PREAMBLE " + _block("partial", [("u", gt[0])])
        elif kind == 3:
            output = f"no structure at all {i}"
        else:
            output = _block("wrong citations", [("u", f"made up claim {i}")])
        fixtures.append({"id": f"f{i:03d}", "output": output,
                         "document": GOOD_DOC, "gt_citations": gt})
    return fixtures


def _free_port():
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


@contextmanager
def live_service():
    port = _free_port()
    proc = subprocess.Popen(
        [sys.executable, "-m", "groundcite.cli", "serve",
         "--host", "127.0.0.1", "--port", str(port)],
        stdout=subprocess.DEVNULL,
        stderr=subprocess.DEVNULL,
    )
    base = f"http://127.0.0.1:{port}"
    try:
        deadline = time.time() + 60
        while True:
            try:
                if requests.get(base + "/v1/health", timeout=2).status_code == 200:
                    break
            except requests.RequestException:
                pass
            if time.time() > deadline:
                raise RuntimeError("service did not come up in time")
            if proc.poll() is not None:
                raise RuntimeError("service process exited early")
            time.sleep(0.3)
        yield base
    finally:
        proc.terminate()
        proc.wait(timeout=10)


@pytest.fixture(scope="module")
def service_url():
    with live_service() as base:
        yield base


def _cli_score(fixtures, tmp_path) -> list[dict]:
    from groundcite.cli import main as groundcite_main

    inp = tmp_path / "samples.jsonl"
    out = tmp_path / "breakdowns.jsonl"
    inp.write_text(
        "".join(json.dumps(row) + "\n" for row in fixtures), encoding="utf-8"
    )
    assert groundcite_main(["score", "--input", str(inp), "--output", str(out)]) == 0
    rows = [json.loads(line) for line in out.read_text().splitlines() if line.strip()]
    keys = ("format", "validity", "accuracy", "total", "valid_fraction_exact")
    return [{k: row[k] for k in keys} for row in rows]


def test_wire_equivalence_with_cli(service_url, tmp_path):
    fixtures = make_fixtures(100)
    expected = _cli_score(fixtures, tmp_path)

    handle = ClientHandle(service_url)
    got = score_batch(
        handle,
        [f["output"] for f in fixtures],
        [f["document"] for f in fixtures],
        [f["gt_citations"] for f in fixtures],
    )
    assert len(got) == 100
    for i, (wire, offline) in enumerate(zip(got, expected)):
        assert wire == offline, f"sample {i} diverged: {wire} != {offline}"
    print("[ACCEPTANCE] trainer-client wire equivalence (100 fixtures): PASS")


def test_chunked_equals_unchunked(service_url):
    fixtures = make_fixtures(40)
    args = (
        [f["output"] for f in fixtures],
        [f["document"] for f in fixtures],
        [f["gt_citations"] for f in fixtures],
    )
    unchunked = score_batch(ClientHandle(service_url, batch_limit=1000), *args)
    chunked = score_batch(ClientHandle(service_url, batch_limit=7), *args)
    assert chunked == unchunked
    print("[ACCEPTANCE] trainer-client chunked = unchunked: PASS")


def test_overrides_round_trip(service_url):
    fixtures = make_fixtures(5)
    handle = ClientHandle(service_url)
    args = (
        [f["output"] for f in fixtures],
        [f["document"] for f in fixtures],
        [f["gt_citations"] for f in fixtures],
    )
    base = score_batch(handle, *args)
    reweighted = score_batch(handle, *args, overrides={"weight_format": 2.0})
    for before, after in zip(base, reweighted):
        assert after["total"] == pytest.approx(before["total"] + before["format"])


def test_reward_fn_adapter_against_service(service_url):
    fixtures = make_fixtures(10)
    handle = ClientHandle(service_url)
    fn = reward_fn_adapter(handle)
    totals = fn(
        ["prompt"] * len(fixtures),
        [f["output"] for f in fixtures],
        [
            {"id": f["id"], "document": f["document"], "gt_citations": f["gt_citations"]}
            for f in fixtures
        ],
    )
    direct = score_batch(
        handle,
        [f["output"] for f in fixtures],
        [f["document"] for f in fixtures],
        [f["gt_citations"] for f in fixtures],
    )
    assert totals == [d["total"] for d in direct]
