"""Knowledge-source registry and routing-catalog rendering."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterator, Union
from urllib.parse import urlparse

from polyroute.errors import (
    BadConnection,
    ConfigParse,
    DuplicateKbId,
    EmptyCatalog,
    MissingContextFile,
)

CATALOG_LINE_MAX = 200


class BackendKind(str, Enum):
    SEARCH = "SEARCH"
    SQL = "SQL"
    SPARQL = "SPARQL"
    CYPHER = "CYPHER"

    def __str__(self) -> str:
        return self.value

    @classmethod
    def parse(cls, text: str) -> BackendKind:
        try:
            return cls(text.strip().upper())
        except ValueError:
            raise ValueError(f"unknown backend kind {text!r}") from None


KIND_ORDER = (BackendKind.SEARCH, BackendKind.SQL, BackendKind.SPARQL, BackendKind.CYPHER)


@dataclass(frozen=True)
class CorpusPath:
    path: Path
    # optional dense retriever service; None means built-in BM25
    embedding_url: str | None = None


@dataclass(frozen=True)
class SqlFile:
    path: Path


@dataclass(frozen=True)
class SparqlEndpoint:
    url: str


@dataclass(frozen=True)
class GraphEndpoint:
    url: str
    database: str = "neo4j"
    # name of an environment variable holding "user:password"
    credentials_ref: str | None = None


ConnectionSpec = Union[CorpusPath, SqlFile, SparqlEndpoint, GraphEndpoint]

_CONNECTION_FOR_KIND = {
    BackendKind.SEARCH: CorpusPath,
    BackendKind.SQL: SqlFile,
    BackendKind.SPARQL: SparqlEndpoint,
    BackendKind.CYPHER: GraphEndpoint,
}


def _valid_url(url: str) -> bool:
    parsed = urlparse(url)
    return parsed.scheme in ("http", "https") and bool(parsed.netloc)


def validate_connection(kind: BackendKind, conn: ConnectionSpec) -> None:
    expected = _CONNECTION_FOR_KIND[kind]
    if not isinstance(conn, expected):
        raise BadConnection(f"{kind} source needs a {expected.__name__} connection, got {type(conn).__name__}")
    if isinstance(conn, (CorpusPath, SqlFile)):
        if not conn.path.exists():
            raise BadConnection(f"path does not exist: {conn.path}")
        if isinstance(conn, CorpusPath) and conn.embedding_url and not _valid_url(conn.embedding_url):
            raise BadConnection(f"invalid embedding service URL: {conn.embedding_url!r}")
    elif not _valid_url(conn.url):
        raise BadConnection(f"invalid endpoint URL: {conn.url!r}")


def derive_catalog_line(context_text: str) -> str:
    first = context_text.strip().splitlines()[0].strip() if context_text.strip() else ""
    return first[:CATALOG_LINE_MAX]


@dataclass(frozen=True)
class SourceDescriptor:
    kb_id: str
    kind: BackendKind
    context_text: str
    connection: ConnectionSpec
    catalog_line: str = ""

    def __post_init__(self) -> None:
        if not self.kb_id or not self.kb_id.strip():
            raise ConfigParse("kb_id must be non-empty")
        if not self.context_text.strip():
            raise ConfigParse(f"{self.kb_id}: context_text must be non-empty")
        if not self.catalog_line:
            object.__setattr__(self, "catalog_line", derive_catalog_line(self.context_text))
        validate_connection(self.kind, self.connection)


@dataclass(frozen=True)
class Catalog:
    """Ordered, immutable pool of registered sources."""

    sources: tuple[SourceDescriptor, ...] = ()
    _by_id: dict[str, SourceDescriptor] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self) -> None:
        index: dict[str, SourceDescriptor] = {}
        for desc in self.sources:
            if desc.kb_id in index:
                raise DuplicateKbId(desc.kb_id)
            index[desc.kb_id] = desc
        object.__setattr__(self, "_by_id", index)

    def __len__(self) -> int:
        return len(self.sources)

    def __iter__(self) -> Iterator[SourceDescriptor]:
        return iter(self.sources)

    def __contains__(self, kb_id: object) -> bool:
        return kb_id in self._by_id

    def get(self, kb_id: str) -> SourceDescriptor | None:
        return self._by_id.get(kb_id)

    def lookup(self, kb_id: str) -> SourceDescriptor:
        try:
            return self._by_id[kb_id]
        except KeyError:
            raise KeyError(f"unknown kb_id {kb_id!r}") from None

    def by_kind(self, kind: BackendKind) -> list[SourceDescriptor]:
        return [d for d in self.sources if d.kind is kind]

    def restrict(self, kind: BackendKind) -> Catalog:
        return Catalog(tuple(self.by_kind(kind)))


def register_source(catalog: Catalog, desc: SourceDescriptor) -> Catalog:
    """Return a new catalog with ``desc`` appended; the input is left untouched."""
    if desc.kb_id in catalog:
        raise DuplicateKbId(desc.kb_id)
    return Catalog(catalog.sources + (desc,))


def render_catalog(catalog: Catalog) -> str:
    """Render the "Available knowledge bases" block of the routing prompt.

    Groups always appear in SEARCH, SQL, SPARQL, CYPHER order; empty groups
    are omitted.
    """
    if len(catalog) == 0:
        raise EmptyCatalog("cannot render an empty catalog")
    lines = ["Available knowledge bases:", ""]
    for kind in KIND_ORDER:
        members = catalog.by_kind(kind)
        if not members:
            continue
        lines.append(f"  {kind.value}:")
        lines.extend(f"    - {d.kb_id} [{d.catalog_line}]" for d in members)
    return "\n".join(lines)


def _parse_connection(kind: BackendKind, raw: object, base: Path, kb_id: str) -> ConnectionSpec:
    if not isinstance(raw, dict):
        raise BadConnection(f"{kb_id}: connection must be an object")
    try:
        if kind is BackendKind.SEARCH:
            return CorpusPath(base / raw["path"], raw.get("embedding_url"))
        if kind is BackendKind.SQL:
            return SqlFile(base / raw["path"])
        if kind is BackendKind.SPARQL:
            return SparqlEndpoint(raw["url"])
        return GraphEndpoint(raw["url"], raw.get("database", "neo4j"), raw.get("credentials_ref"))
    except KeyError as exc:
        raise BadConnection(f"{kb_id}: connection missing field {exc.args[0]!r}") from None


def load_catalog(config_path: str | Path) -> Catalog:
    """Load and validate a catalog config.

    Context files and local connection paths resolve relative to the config
    file's directory.
    """
    config_path = Path(config_path)
    try:
        doc = json.loads(config_path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigParse(f"catalog config not found: {config_path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigParse(f"{config_path}: {exc}") from None
    if not isinstance(doc, dict) or not isinstance(doc.get("sources"), list):
        raise ConfigParse(f"{config_path}: expected an object with a 'sources' list")

    base = config_path.parent
    catalog = Catalog()
    for i, entry in enumerate(doc["sources"]):
        if not isinstance(entry, dict):
            raise ConfigParse(f"sources[{i}] is not an object")
        missing = [k for k in ("kb_id", "kind", "context_file", "connection") if k not in entry]
        if missing:
            raise ConfigParse(f"sources[{i}] missing fields {missing}")
        kb_id = str(entry["kb_id"])
        try:
            kind = BackendKind.parse(str(entry["kind"]))
        except ValueError as exc:
            raise ConfigParse(f"{kb_id}: {exc}") from None
        if kb_id in catalog:
            raise DuplicateKbId(kb_id)
        context_path = base / entry["context_file"]
        if not context_path.is_file():
            raise MissingContextFile(f"{kb_id}: {context_path}")
        desc = SourceDescriptor(
            kb_id=kb_id,
            kind=kind,
            context_text=context_path.read_text(encoding="utf-8"),
            connection=_parse_connection(kind, entry["connection"], base, kb_id),
            catalog_line=entry.get("catalog_line") or "",
        )
        catalog = register_source(catalog, desc)
    return catalog


def catalog_summary(catalog: Catalog) -> list[dict[str, str]]:
    return [{"kb_id": d.kb_id, "kind": d.kind.value, "catalog_line": d.catalog_line} for d in catalog]
