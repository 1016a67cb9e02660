"""Advisory grounding checks: does a generated query only name things its source exposes?"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import TYPE_CHECKING, Union

from polyroute.registry import BackendKind
from polyroute.validation import cypher, sparql, sql
from polyroute.validation.cypher import GraphSchema
from polyroute.validation.sparql import RdfContext
from polyroute.validation.sql import RelationalSchema

if TYPE_CHECKING:
    from polyroute.formulation import NativeQuery
    from polyroute.registry import SourceDescriptor

SchemaModel = Union[RelationalSchema, RdfContext, GraphSchema]

__all__ = [
    "GraphSchema",
    "GroundingReport",
    "RdfContext",
    "RelationalSchema",
    "SchemaModel",
    "check_grounding",
    "check_query_against",
    "check_text",
    "parse_context",
]


@dataclass(frozen=True)
class GroundingReport:
    unknown_identifiers: list[str] = field(default_factory=list)
    parse_notes: list[str] = field(default_factory=list)

    @property
    def grounded(self) -> bool:
        return not self.unknown_identifiers

    def to_dict(self) -> dict:
        return {
            "grounded": self.grounded,
            "unknown_identifiers": list(self.unknown_identifiers),
            "parse_notes": list(self.parse_notes),
        }


@lru_cache(maxsize=256)
def parse_context(kind: BackendKind, context_text: str) -> SchemaModel:
    if kind is BackendKind.SQL:
        return sql.parse_schema(context_text)
    if kind is BackendKind.SPARQL:
        return sparql.parse_context(context_text)
    if kind is BackendKind.CYPHER:
        return cypher.parse_context(context_text)
    raise ValueError("search sources expose no queryable schema")


_CHECKERS = {
    RelationalSchema: (BackendKind.SQL, sql.check),
    RdfContext: (BackendKind.SPARQL, sparql.check),
    GraphSchema: (BackendKind.CYPHER, cypher.check),
}


def check_text(kind: BackendKind, query_text: str, schema: SchemaModel) -> GroundingReport:
    expected, checker = _CHECKERS[type(schema)]
    if kind is not expected:
        raise ValueError(f"{kind} query cannot be checked against a {type(schema).__name__}")
    unknown, notes = checker(query_text, schema)
    return GroundingReport(unknown, notes)


def check_grounding(query: NativeQuery, schema: SchemaModel) -> GroundingReport:
    return check_text(query.kind, query.text, schema)


def check_query_against(query: NativeQuery, desc: SourceDescriptor) -> GroundingReport:
    """Validate ``query`` against its source; unparseable contexts yield a noted, ungrounded report."""
    from polyroute.errors import ContextParse

    try:
        schema = parse_context(desc.kind, desc.context_text)
    except ContextParse as exc:
        return GroundingReport(["<context>"], [str(exc)])
    return check_grounding(query, schema)
