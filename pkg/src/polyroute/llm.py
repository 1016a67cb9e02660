"""Chat-completion gateway: HTTP and scripted providers, JSON payload extraction."""

from __future__ import annotations

import json
import logging
import os
import re
import threading
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Protocol

import httpx

from polyroute.errors import Auth, MalformedJson, NoJsonFound, RateLimited, ScriptMiss, Transport

log = logging.getLogger(__name__)

DEFAULT_TEMPERATURE = 0.0
DEFAULT_MAX_TOKENS = 1024
RETRY_BACKOFF = (0.5, 1.0, 2.0)


@dataclass(frozen=True)
class ChatRequest:
    system: str
    user: str
    temperature: float = DEFAULT_TEMPERATURE
    max_tokens: int = DEFAULT_MAX_TOKENS
    tag: str = ""

    def __post_init__(self) -> None:
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be >= 1")


@dataclass(frozen=True)
class ChatResponse:
    text: str
    latency: float
    provider_id: str


class Provider(Protocol):
    provider_id: str

    def complete(self, request: ChatRequest) -> ChatResponse: ...


@dataclass(frozen=True)
class ScriptEntry:
    tag: str
    match: str  # exact | contains | regex | any
    key: str
    response: str

    def matches(self, request: ChatRequest) -> bool:
        if self.tag not in ("*", request.tag):
            return False
        if self.match == "exact":
            return request.user == self.key
        if self.match == "contains":
            return self.key in request.user
        if self.match == "regex":
            return re.search(self.key, request.user, re.S) is not None
        return self.match == "any"


class ScriptedProvider:
    """Deterministic provider backed by an ordered table of canned responses.

    The first entry whose tag and match rule accept the request wins.
    A request no entry accepts raises ``ScriptMiss``.
    """

    provider_id = "scripted"

    def __init__(self, entries: list[ScriptEntry] | None = None):
        self.entries: list[ScriptEntry] = list(entries or [])

    def add(self, tag: str, key: str, response: str, match: str = "contains") -> ScriptedProvider:
        if match not in ("exact", "contains", "regex", "any"):
            raise ValueError(f"unknown match rule {match!r}")
        self.entries.append(ScriptEntry(tag, match, key, response))
        return self

    @classmethod
    def from_file(cls, path: str | Path) -> ScriptedProvider:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        rows = doc["entries"] if isinstance(doc, dict) else doc
        provider = cls()
        for row in rows:
            provider.add(row.get("tag", "*"), row.get("key", ""), row["response"], row.get("match", "contains"))
        return provider

    def complete(self, request: ChatRequest) -> ChatResponse:
        start = time.perf_counter()
        for entry in self.entries:
            if entry.matches(request):
                return ChatResponse(entry.response, time.perf_counter() - start, self.provider_id)
        raise ScriptMiss(f"no script entry for tag={request.tag!r}: {request.user[:120]!r}")


class HttpProvider:
    """OpenAI-compatible chat-completions client."""

    def __init__(
        self,
        base_url: str | None = None,
        api_key: str | None = None,
        model: str | None = None,
        *,
        timeout: float = 60.0,
        max_attempts: int = len(RETRY_BACKOFF),
        backoff: tuple[float, ...] = RETRY_BACKOFF,
        client: httpx.Client | None = None,
    ):
        self.base_url = (base_url or os.environ.get("OMNI_LLM_BASE_URL", "")).rstrip("/")
        self.api_key = api_key if api_key is not None else os.environ.get("OMNI_LLM_API_KEY", "")
        self.model = model or os.environ.get("OMNI_LLM_MODEL", "")
        if not self.base_url or not self.model:
            raise ValueError("HTTP provider needs a base URL and model (OMNI_LLM_BASE_URL / OMNI_LLM_MODEL)")
        self.max_attempts = max(1, max_attempts)
        self.backoff = backoff
        self.provider_id = f"http:{self.model}"
        self._client = client or httpx.Client(timeout=timeout)

    def _body(self, request: ChatRequest) -> dict[str, Any]:
        return {
            "model": self.model,
            "messages": [
                {"role": "system", "content": request.system},
                {"role": "user", "content": request.user},
            ],
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        }

    def complete(self, request: ChatRequest) -> ChatResponse:
        headers = {"Authorization": f"Bearer {self.api_key}"} if self.api_key else {}
        url = f"{self.base_url}/chat/completions"
        last: Exception | None = None
        start = time.perf_counter()
        for attempt in range(self.max_attempts):
            if attempt:
                time.sleep(self.backoff[min(attempt - 1, len(self.backoff) - 1)])
            try:
                resp = self._client.post(url, json=self._body(request), headers=headers)
            except (httpx.TimeoutException, httpx.TransportError) as exc:
                last = Transport(f"{type(exc).__name__}: {exc}")
                continue
            if resp.status_code in (401, 403):
                raise Auth(f"HTTP {resp.status_code}: {resp.text[:200]}")
            if resp.status_code == 429:
                last = RateLimited(f"HTTP 429: {resp.text[:200]}")
                continue
            if resp.status_code >= 500:
                last = Transport(f"HTTP {resp.status_code}: {resp.text[:200]}")
                continue
            if resp.status_code >= 400:
                raise Transport(f"HTTP {resp.status_code}: {resp.text[:200]}")
            try:
                text = resp.json()["choices"][0]["message"].get("content") or ""
            except (ValueError, KeyError, IndexError, TypeError) as exc:
                raise Transport(f"unexpected completion payload: {exc}") from None
            return ChatResponse(text, time.perf_counter() - start, self.provider_id)
        assert last is not None
        raise last


@dataclass
class Gateway:
    """Wraps a provider with a global concurrency bound and optional tracing."""

    provider: Provider
    max_concurrency: int = 4
    tracing: bool = False
    trace: list[dict[str, Any]] = field(default_factory=list)

    def __post_init__(self) -> None:
        self._sem = threading.BoundedSemaphore(self.max_concurrency)
        self._lock = threading.Lock()

    def complete(self, request: ChatRequest) -> ChatResponse:
        with self._sem:
            try:
                response = self.provider.complete(request)
            except Exception as exc:
                self._record(request, None, repr(exc))
                raise
        self._record(request, response, None)
        return response

    def _record(self, request: ChatRequest, response: ChatResponse | None, error: str | None) -> None:
        if not self.tracing:
            return
        entry = {"request": asdict(request), "response": response.text if response else None, "error": error}
        with self._lock:
            self.trace.append(entry)


def complete(provider: Provider | Gateway, request: ChatRequest) -> ChatResponse:
    return provider.complete(request)


_FENCE_RE = re.compile(r"```[A-Za-z0-9_-]*\s*\n?(.*?)```", re.S)


def _balanced_objects(text: str):
    """Yield every top-level ``{...}`` span, skipping braces in string literals."""
    i, n = 0, len(text)
    while i < n:
        if text[i] != "{":
            i += 1
            continue
        depth, in_str, esc = 0, False, False
        for j in range(i, n):
            ch = text[j]
            if in_str:
                if esc:
                    esc = False
                elif ch == "\\":
                    esc = True
                elif ch == '"':
                    in_str = False
            elif ch == '"':
                in_str = True
            elif ch == "{":
                depth += 1
            elif ch == "}":
                depth -= 1
                if depth == 0:
                    yield text[i : j + 1]
                    i = j + 1
                    break
        else:
            # unbalanced from here; a later brace may still open a complete object
            yield text[i:]
            i += 1


def extract_json_object(text: str) -> Any:
    """Pull the first parseable top-level JSON object out of LLM output."""
    candidates = [m.group(1) for m in _FENCE_RE.finditer(text)] + [text]
    saw_brace = False
    first_error: str | None = None
    for chunk in candidates:
        for span in _balanced_objects(chunk):
            saw_brace = True
            try:
                value = json.loads(span)
            except json.JSONDecodeError as exc:
                first_error = first_error or f"{exc.msg} in {span[:80]!r}"
                continue
            if isinstance(value, dict):
                return value
    if not saw_brace:
        raise NoJsonFound(f"no JSON object in {text[:80]!r}")
    raise MalformedJson(first_error or "no complete JSON object")
