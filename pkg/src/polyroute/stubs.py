"""Table-driven HTTP stand-ins for a SPARQL endpoint and a graph Query API.

Each stub answers known queries (matched after whitespace normalization) from
a fixed table and returns the backend's native syntax error for anything else.
Used for offline tests and demos.
"""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Any
from urllib.parse import parse_qs, urlparse


def normalize_query(text: str) -> str:
    return " ".join(text.split())


class _StubServer:
    def __init__(self, table: dict[str, Any], handler: type[BaseHTTPRequestHandler]):
        self.table = {normalize_query(k): v for k, v in table.items()}
        self.requests: list[str] = []
        self._lock = threading.Lock()
        self._httpd = ThreadingHTTPServer(("127.0.0.1", 0), handler)
        self._httpd.daemon_threads = True
        self._httpd.stub = self  # type: ignore[attr-defined]
        self._thread = threading.Thread(target=self._httpd.serve_forever, daemon=True)

    @property
    def url(self) -> str:
        host, port = self._httpd.server_address[:2]
        return f"http://{host}:{port}"

    def lookup(self, query: str) -> Any | None:
        with self._lock:
            self.requests.append(query)
        return self.table.get(normalize_query(query))

    def start(self) -> _StubServer:
        self._thread.start()
        return self

    def stop(self) -> None:
        self._httpd.shutdown()
        self._httpd.server_close()

    def __enter__(self) -> _StubServer:
        return self.start()

    def __exit__(self, *exc: object) -> None:
        self.stop()


class _Handler(BaseHTTPRequestHandler):
    def log_message(self, fmt: str, *args: Any) -> None:
        pass

    def _send(self, status: int, body: Any, content_type: str) -> None:
        raw = body if isinstance(body, bytes) else json.dumps(body).encode()
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(raw)))
        self.end_headers()
        self.wfile.write(raw)

    def _body(self) -> bytes:
        return self.rfile.read(int(self.headers.get("Content-Length") or 0))


class _SparqlHandler(_Handler):
    def _answer(self, query: str | None) -> None:
        if query is None:
            self._send(400, b"missing query parameter", "text/plain")
            return
        result = self.server.stub.lookup(query)  # type: ignore[attr-defined]
        if result is None:
            self._send(400, b"Parse error: unrecognized query", "text/plain")
            return
        self._send(200, result, "application/sparql-results+json")

    def do_GET(self) -> None:
        params = parse_qs(urlparse(self.path).query)
        self._answer(params.get("query", [None])[0])

    def do_POST(self) -> None:
        params = parse_qs(self._body().decode())
        self._answer(params.get("query", [None])[0])


class _GraphHandler(_Handler):
    def do_POST(self) -> None:
        if not urlparse(self.path).path.endswith("/query/v2"):
            self._send(404, {"errors": [{"code": "Neo.ClientError.Request.Invalid", "message": "not found"}]},
                       "application/json")
            return
        try:
            statement = json.loads(self._body())["statement"]
        except (json.JSONDecodeError, KeyError, TypeError):
            self._send(400, {"errors": [{"code": "Neo.ClientError.Request.Invalid", "message": "bad body"}]},
                       "application/json")
            return
        result = self.server.stub.lookup(statement)  # type: ignore[attr-defined]
        if result is None:
            err = {"code": "Neo.ClientError.Statement.SyntaxError", "message": "Invalid input"}
            self._send(400, {"errors": [err]}, "application/json")
            return
        self._send(202, {"data": result}, "application/json")


def sparql_stub(table: dict[str, dict[str, Any]]) -> _StubServer:
    """``table`` maps query text to a SPARQL JSON results document."""
    return _StubServer(table, _SparqlHandler)


def graph_stub(table: dict[str, dict[str, Any]]) -> _StubServer:
    """``table`` maps Cypher text to ``{"fields": [...], "values": [[...], ...]}``."""
    return _StubServer(table, _GraphHandler)
