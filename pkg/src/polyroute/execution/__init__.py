"""Execution of native queries against their sources."""

from __future__ import annotations

import threading
from typing import TYPE_CHECKING

import httpx

from polyroute.execution.http import EndpointGate, default_gate, exec_cypher, exec_sparql
from polyroute.execution.outcomes import (
    Bindings,
    ExecLimits,
    ExecOutcome,
    Passage,
    Passages,
    Records,
    Rows,
    is_empty,
    outcome_from_dict,
    outcome_to_dict,
)
from polyroute.execution.search import (
    DocumentIndex,
    EmbeddingRetriever,
    build_index,
    retrieve_documents,
)
from polyroute.execution.sql import exec_sql
from polyroute.execution.verbalize import VerbalizeCaps, verbalize
from polyroute.registry import CorpusPath, GraphEndpoint, SourceDescriptor, SparqlEndpoint, SqlFile

if TYPE_CHECKING:
    from polyroute.formulation import NativeQuery

__all__ = [
    "Bindings", "DocumentIndex", "ExecLimits", "ExecOutcome", "Executor", "Passage", "Passages",
    "Records", "Rows", "VerbalizeCaps", "build_index", "exec_cypher", "exec_sparql", "exec_sql",
    "execute", "is_empty", "outcome_from_dict", "outcome_to_dict", "retrieve_documents", "verbalize",
]

SEARCH_TOP_N = 10


class Executor:
    """Dispatches native queries to backends; holds shared, read-only per-source state.

    Indexes are built lazily once per corpus and reused across questions.
    """

    def __init__(self, *, gate: EndpointGate = default_gate, client: httpx.Client | None = None,
                 top_n: int = SEARCH_TOP_N):
        self.gate = gate
        self.client = client
        self.top_n = top_n
        self._indexes: dict[str, DocumentIndex] = {}
        self._dense: dict[str, EmbeddingRetriever] = {}
        self._lock = threading.Lock()

    def index_for(self, desc: SourceDescriptor) -> DocumentIndex:
        with self._lock:
            if desc.kb_id not in self._indexes:
                self._indexes[desc.kb_id] = build_index(desc.connection.path)
            return self._indexes[desc.kb_id]

    def execute(self, desc: SourceDescriptor, query: NativeQuery, limits: ExecLimits = ExecLimits()) -> ExecOutcome:
        if query.kind is not desc.kind:
            raise ValueError(f"{query.kind} query sent to {desc.kind} source {desc.kb_id}")
        conn = desc.connection
        if isinstance(conn, SqlFile):
            return exec_sql(conn.path, query.text, limits)
        if isinstance(conn, SparqlEndpoint):
            return exec_sparql(conn.url, query.text, limits, client=self.client, gate=self.gate)
        if isinstance(conn, GraphEndpoint):
            return exec_cypher(conn.url, conn.database, query.text, limits,
                               credentials_ref=conn.credentials_ref, client=self.client, gate=self.gate)
        if isinstance(conn, CorpusPath):
            index = self.index_for(desc)
            if conn.embedding_url:
                with self._lock:
                    dense = self._dense.setdefault(
                        desc.kb_id, EmbeddingRetriever(conn.embedding_url, index, timeout=limits.timeout)
                    )
                return dense.retrieve(query.text, self.top_n)
            return retrieve_documents(index, query.text, self.top_n)
        raise TypeError(f"unsupported connection {type(conn).__name__}")


def execute(desc: SourceDescriptor, query: NativeQuery, limits: ExecLimits = ExecLimits()) -> ExecOutcome:
    return Executor().execute(desc, query, limits)
