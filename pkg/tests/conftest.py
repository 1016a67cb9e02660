from __future__ import annotations

import threading
from pathlib import Path

import pytest

from polyroute.llm import ChatRequest, ChatResponse
from polyroute.stubs import graph_stub, sparql_stub

import toyworld

FIXTURES = Path(__file__).parent / "fixtures"
GOLDENS = Path(__file__).parent / "goldens"


class CountingProvider:
    """Wraps a provider (or a fixed reply) and counts calls and peak concurrency."""

    def __init__(self, inner=None, reply: str = "{}", delay: float = 0.0):
        self.inner = inner
        self.reply = reply
        self.delay = delay
        self.calls = 0
        self.active = 0
        self.peak = 0
        self.requests: list[ChatRequest] = []
        self._lock = threading.Lock()

    def complete(self, request: ChatRequest) -> ChatResponse:
        with self._lock:
            self.calls += 1
            self.active += 1
            self.peak = max(self.peak, self.active)
            self.requests.append(request)
        try:
            if self.delay:
                threading.Event().wait(self.delay)
            if self.inner is not None:
                return self.inner.complete(request)
            return ChatResponse(self.reply, 0.0, "counting")
        finally:
            with self._lock:
                self.active -= 1


@pytest.fixture(scope="session")
def stubs():
    with sparql_stub(toyworld.SPARQL_TABLE) as sparql, graph_stub(toyworld.GRAPH_TABLE) as graph:
        yield sparql, graph


@pytest.fixture
def toy(tmp_path, stubs):
    sparql, graph = stubs
    return toyworld.write_world(tmp_path / "toy", sparql.url, graph.url)
