"""HTTP-backed executors: SPARQL 1.1 protocol and the Neo4j Query API."""

from __future__ import annotations

import base64
import json
import os
import threading
from typing import Any

import httpx

from polyroute.errors import Auth, BackendError, ExecTimeout, QuerySyntax, Transport
from polyroute.execution.outcomes import Bindings, ExecLimits, Records, Scalar, normalize_value

USER_AGENT = "polyroute/0.1 (federated retrieval engine)"
ENDPOINT_CONCURRENCY = 2
_GET_LIMIT = 1800

_INT_TYPES = {
    "integer", "int", "long", "short", "byte", "nonNegativeInteger", "positiveInteger",
    "negativeInteger", "nonPositiveInteger", "unsignedLong", "unsignedInt", "unsignedShort",
    "unsignedByte",
}
_REAL_TYPES = {"decimal", "double", "float"}
XSD = "http://www.w3.org/2001/XMLSchema#"


class EndpointGate:
    """Per-endpoint concurrency caps shared by all executors in a process."""

    def __init__(self, cap: int = ENDPOINT_CONCURRENCY):
        self.cap = cap
        self._sems: dict[str, threading.BoundedSemaphore] = {}
        self._lock = threading.Lock()

    def __call__(self, url: str) -> threading.BoundedSemaphore:
        with self._lock:
            if url not in self._sems:
                self._sems[url] = threading.BoundedSemaphore(self.cap)
            return self._sems[url]


default_gate = EndpointGate()


def sparql_term_value(term: dict[str, Any]) -> Scalar:
    kind = term.get("type")
    value = term.get("value", "")
    if kind == "bnode":
        return f"_:{value}"
    if kind in ("literal", "typed-literal"):
        dtype = term.get("datatype", "")
        local = dtype[len(XSD):] if dtype.startswith(XSD) else ""
        try:
            if local in _INT_TYPES:
                return int(value)
            if local in _REAL_TYPES:
                return normalize_value(float(value))
        except ValueError:
            return value
        if local == "boolean":
            return value.strip() in ("true", "1")
    return value


def parse_sparql_json(doc: dict[str, Any], max_rows: int) -> Bindings:
    if "boolean" in doc:
        return Bindings((), (), bool(doc["boolean"]))
    head_vars = tuple(doc.get("head", {}).get("vars", []))
    raw = doc.get("results", {}).get("bindings", [])
    kept = raw[:max_rows]
    solutions = tuple({var: sparql_term_value(term) for var, term in row.items()} for row in kept)
    return Bindings(head_vars, solutions, None, len(raw) > max_rows, len(raw))


def exec_sparql(
    url: str,
    sparql: str,
    limits: ExecLimits = ExecLimits(),
    *,
    client: httpx.Client | None = None,
    gate: EndpointGate = default_gate,
) -> Bindings:
    headers = {"Accept": "application/sparql-results+json", "User-Agent": USER_AGENT}
    own = client is None
    client = client or httpx.Client()
    try:
        with gate(url):
            if len(sparql) <= _GET_LIMIT:
                resp = client.get(url, params={"query": sparql}, headers=headers, timeout=limits.timeout)
            else:
                resp = client.post(url, data={"query": sparql}, headers=headers, timeout=limits.timeout)
    except httpx.TimeoutException:
        raise ExecTimeout(f"SPARQL endpoint did not answer within {limits.timeout}s") from None
    except httpx.TransportError as exc:
        raise Transport(f"{url}: {exc}") from None
    finally:
        if own:
            client.close()
    if resp.status_code == 400:
        raise QuerySyntax(resp.text.strip())
    if resp.status_code in (401, 403):
        raise Auth(f"HTTP {resp.status_code}: {resp.text[:200]}")
    if resp.status_code >= 400:
        raise BackendError(f"HTTP {resp.status_code}: {resp.text[:500]}")
    try:
        doc = resp.json()
    except json.JSONDecodeError:
        raise BackendError(f"endpoint returned non-JSON results: {resp.text[:200]!r}") from None
    return parse_sparql_json(doc, limits.max_rows)


# -- property graph ---------------------------------------------------------


def _fmt_prop(value: Any) -> str:
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False)
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return "null"
    if isinstance(value, list):
        return "[" + ", ".join(_fmt_prop(v) for v in value) + "]"
    if isinstance(value, dict):
        return "{" + ", ".join(f"{k}: {_fmt_prop(v)}" for k, v in sorted(value.items())) + "}"
    return str(value)


def _props(props: dict[str, Any]) -> str:
    return " {" + ", ".join(f"{k}: {_fmt_prop(v)}" for k, v in sorted(props.items())) + "}" if props else ""


def _is_node(v: Any) -> bool:
    return isinstance(v, dict) and "elementId" in v and "labels" in v


def _is_rel(v: Any) -> bool:
    return isinstance(v, dict) and "elementId" in v and "type" in v and "startNodeElementId" in v


def serialize_node(node: dict[str, Any]) -> str:
    labels = ":".join(node.get("labels", []))
    return f"({labels}{_props(node.get('properties', {}))})"


def serialize_rel(rel: dict[str, Any]) -> str:
    return f"[{rel.get('type', '')}{_props(rel.get('properties', {}))}]"


def serialize_path(elements: list[dict[str, Any]]) -> str:
    out: list[str] = []
    prev_node: dict[str, Any] | None = None
    pending: dict[str, Any] | None = None
    for el in elements:
        if _is_rel(el):
            pending = el
            continue
        if pending is not None and prev_node is not None:
            if pending.get("startNodeElementId") == prev_node.get("elementId"):
                out.append(f"-{serialize_rel(pending)}->")
            else:
                out.append(f"<-{serialize_rel(pending)}-")
            pending = None
        out.append(serialize_node(el))
        prev_node = el
    return "".join(out)


def graph_value(value: Any) -> Scalar:
    """Render a Query API value; scalars pass through, graph values become text without element ids."""
    if _is_node(value):
        return serialize_node(value)
    if _is_rel(value):
        return serialize_rel(value)
    if isinstance(value, list):
        if value and all(_is_node(v) or _is_rel(v) for v in value) and _is_node(value[0]):
            return serialize_path(value)
        return "[" + ", ".join(str(graph_value(v)) if not isinstance(v, str) else json.dumps(v) for v in value) + "]"
    if isinstance(value, dict):
        return _fmt_prop(value)
    return normalize_value(value)


def _auth_header(credentials_ref: str | None) -> dict[str, str]:
    if not credentials_ref:
        return {}
    raw = os.environ.get(credentials_ref, "")
    if not raw:
        raise Auth(f"credentials variable {credentials_ref} is not set")
    return {"Authorization": "Basic " + base64.b64encode(raw.encode()).decode()}


def exec_cypher(
    url: str,
    database: str,
    cypher: str,
    limits: ExecLimits = ExecLimits(),
    *,
    credentials_ref: str | None = None,
    client: httpx.Client | None = None,
    gate: EndpointGate = default_gate,
) -> Records:
    endpoint = f"{url.rstrip('/')}/db/{database}/query/v2"
    headers = {"Accept": "application/json", "Content-Type": "application/json", "User-Agent": USER_AGENT}
    headers.update(_auth_header(credentials_ref))
    body = {"statement": cypher, "accessMode": "READ"}
    own = client is None
    client = client or httpx.Client()
    try:
        with gate(url):
            resp = client.post(endpoint, json=body, headers=headers, timeout=limits.timeout)
    except httpx.TimeoutException:
        raise ExecTimeout(f"graph endpoint did not answer within {limits.timeout}s") from None
    except httpx.TransportError as exc:
        raise Transport(f"{url}: {exc}") from None
    finally:
        if own:
            client.close()
    if resp.status_code == 401:
        raise Auth(resp.text[:200])
    try:
        doc = resp.json()
    except json.JSONDecodeError:
        raise BackendError(f"HTTP {resp.status_code}: {resp.text[:200]}") from None
    errors = doc.get("errors") or []
    if errors:
        code = errors[0].get("code", "")
        message = errors[0].get("message", "")
        if "Security" in code:
            raise Auth(f"{code}: {message}")
        if "Syntax" in code or "Statement" in code:
            raise QuerySyntax(f"{code}: {message}")
        raise BackendError(f"{code}: {message}")
    if resp.status_code >= 400:
        raise BackendError(f"HTTP {resp.status_code}: {resp.text[:200]}")
    data = doc.get("data", {})
    keys = tuple(data.get("fields", []))
    values = data.get("values", [])
    kept = values[: limits.max_rows]
    records = tuple(tuple(graph_value(v) for v in row) for row in kept)
    return Records(keys, records, len(values) > limits.max_rows, len(values))
