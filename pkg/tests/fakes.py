"""Test doubles for the chat-completion transport."""

from __future__ import annotations

import json

import requests


def chat_body(text: str) -> str:
    """A minimal chat-completions success payload."""
    return json.dumps({"choices": [{"message": {"content": text}}]})


class FakeTransport:
    """Scripted transport: pops queued (status, body) pairs or exceptions.

    The last entry is sticky, so a single entry behaves like a constant
    responder.  A callable entry is invoked with the request payload.
    """

    def __init__(self, *responses):
        self.queue = list(responses)
        self.calls: list[dict] = []

    def __call__(self, url, payload, headers, timeout):
        self.calls.append({"url": url, "payload": payload, "headers": headers})
        entry = self.queue.pop(0) if len(self.queue) > 1 else self.queue[0]
        if isinstance(entry, Exception):
            raise entry
        if callable(entry):
            entry = entry(payload)
        return entry


def flaky_then_ok(failures: int, text: str) -> FakeTransport:
    script = [requests.ConnectionError("boom")] * failures
    script.append((200, chat_body(text)))
    return FakeTransport(*script)
