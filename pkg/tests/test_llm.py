from __future__ import annotations

import json
import threading

import httpx
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import CountingProvider
from polyroute.errors import Auth, MalformedJson, NoJsonFound, RateLimited, ScriptMiss, Transport
from polyroute.llm import ChatRequest, Gateway, HttpProvider, ScriptedProvider, extract_json_object


def req(user="hello", tag="selection"):
    return ChatRequest(system="sys", user=user, tag=tag)


def test_scripted_first_match_wins():
    p = ScriptedProvider().add("selection", "hello", "A").add("*", "", "B", match="any")
    assert p.complete(req()).text == "A"
    assert p.complete(req("other")).text == "B"


def test_scripted_miss():
    p = ScriptedProvider().add("evidence", "hello", "A")
    with pytest.raises(ScriptMiss):
        p.complete(req())


def test_scripted_match_rules(tmp_path):
    path = tmp_path / "s.json"
    path.write_text(json.dumps({"entries": [
        {"tag": "judge", "match": "exact", "key": "x", "response": "1"},
        {"tag": "judge", "match": "regex", "key": r"^y\d$", "response": "2"},
    ]}))
    p = ScriptedProvider.from_file(path)
    assert p.complete(req("x", "judge")).text == "1"
    assert p.complete(req("y7", "judge")).text == "2"
    with pytest.raises(ScriptMiss):
        p.complete(req("xx", "judge"))


def _http(handler, **kw):
    return HttpProvider("http://llm.test/v1", "key", "m", backoff=(0, 0, 0),
                        client=httpx.Client(transport=httpx.MockTransport(handler)), **kw)


def test_http_provider_happy_path():
    seen = {}

    def handler(request: httpx.Request) -> httpx.Response:
        seen["body"] = json.loads(request.content)
        seen["auth"] = request.headers["authorization"]
        return httpx.Response(200, json={"choices": [{"message": {"content": "ok"}}]})

    resp = _http(handler).complete(req())
    assert resp.text == "ok"
    assert seen["body"]["messages"][1] == {"role": "user", "content": "hello"}
    assert seen["body"]["temperature"] == 0.0
    assert seen["auth"] == "Bearer key"


def test_http_provider_retries_then_gives_up():
    calls = []

    def handler(request):
        calls.append(1)
        return httpx.Response(429, text="slow down")

    with pytest.raises(RateLimited):
        _http(handler).complete(req())
    assert len(calls) == 3


def test_http_provider_recovers_from_5xx():
    calls = []

    def handler(request):
        calls.append(1)
        if len(calls) < 2:
            return httpx.Response(503)
        return httpx.Response(200, json={"choices": [{"message": {"content": "late"}}]})

    assert _http(handler).complete(req()).text == "late"


def test_http_provider_auth_is_not_retried():
    calls = []

    def handler(request):
        calls.append(1)
        return httpx.Response(401)

    with pytest.raises(Auth):
        _http(handler).complete(req())
    assert len(calls) == 1


def test_http_provider_transport_error():
    def handler(request):
        raise httpx.ConnectError("refused")

    with pytest.raises(Transport):
        _http(handler).complete(req())


def test_http_provider_needs_config(monkeypatch):
    monkeypatch.delenv("OMNI_LLM_BASE_URL", raising=False)
    monkeypatch.delenv("OMNI_LLM_MODEL", raising=False)
    with pytest.raises(ValueError):
        HttpProvider()


def test_gateway_bounds_concurrency():
    inner = CountingProvider(reply="x", delay=0.02)
    gw = Gateway(inner, max_concurrency=2, tracing=True)
    threads = [threading.Thread(target=gw.complete, args=(req(),)) for _ in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert inner.calls == 8
    assert inner.peak <= 2
    assert len(gw.trace) == 8


def test_extract_json_variants():
    assert extract_json_object('{"a": 1}') == {"a": 1}
    assert extract_json_object('Sure!\n```json\n{"a": [1, 2]}\n```') == {"a": [1, 2]}
    assert extract_json_object('prefix {"s": "a } brace"} suffix') == {"s": "a } brace"}
    with pytest.raises(NoJsonFound):
        extract_json_object("no json here")
    with pytest.raises(MalformedJson):
        extract_json_object('{"a": 1,,}')


@given(st.dictionaries(st.text(max_size=8), st.one_of(st.integers(), st.text(max_size=10), st.booleans()), max_size=5),
       st.text(alphabet="abc xyz.!\n", max_size=20))
def test_extract_json_roundtrip(obj, noise):
    assert extract_json_object(f"{noise}{json.dumps(obj)}{noise}") == obj
