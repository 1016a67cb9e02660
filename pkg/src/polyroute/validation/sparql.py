"""Wikidata-style RDF context parsing and SPARQL identifier grounding."""

from __future__ import annotations

import re
from dataclasses import dataclass

from polyroute.errors import ContextParse

# Predeclared on public Wikidata-style endpoints; queries may use them without
# the context listing them.
BUILTIN_PREFIXES = frozenset({"rdf", "rdfs", "xsd", "owl", "wikibase", "bd", "schema", "skos"})

# prefixes whose local names must be entity ids / property ids
ENTITY_PREFIXES = frozenset({"wd"})
PROPERTY_PREFIXES = frozenset(
    {"wdt", "p", "ps", "pq", "pr", "psv", "pqv", "prv", "wdno", "psn", "pqn", "prn", "wdtn"}
)

_ENTITY_RE = re.compile(r"\bwd:(Q\d+)\b")
_PROPERTY_RE = re.compile(r"(?<![A-Za-z0-9_])(P\d+)\b")
_PREFIX_DECL_RE = re.compile(r"\bPREFIX\s+([A-Za-z][\w-]*)?:", re.I)
_LISTED_PREFIX_RE = re.compile(r"(?<![\w:])([A-Za-z][\w-]*):\s*\(")

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>\#[^\n]*)
  | (?P<string>\"\"\".*?\"\"\"|'''.*?'''|"(?:[^"\\\n]|\\.)*"|'(?:[^'\\\n]|\\.)*')
  | (?P<iri><[^<>"{}|^`\\\s]*>)
  | (?P<var>[?$][A-Za-z0-9_]+)
  | (?P<pname>(?:[A-Za-z][\w.-]*)?:(?:[A-Za-z0-9_](?:[\w.-]*\w)?)?)
  | (?P<word>[A-Za-z_][\w]*)
  | (?P<other>.)
    """,
    re.X | re.S,
)

_IRI_ENTITY_RE = re.compile(r"wikidata\.org/entity/(Q\d+|P\d+)$")
_IRI_PROP_RE = re.compile(r"wikidata\.org/prop/(?:direct/|statement/|qualifier/|direct-normalized/)?(P\d+)$")


@dataclass(frozen=True)
class RdfContext:
    entity_ids: frozenset[str]
    property_ids: frozenset[str]
    known_prefixes: frozenset[str]


def parse_context(context_text: str) -> RdfContext:
    entities = set(_ENTITY_RE.findall(context_text))
    properties = set(_PROPERTY_RE.findall(context_text))
    prefixes = {m.group(1) or "" for m in _PREFIX_DECL_RE.finditer(context_text)}

    in_prefix_block = False
    for line in context_text.splitlines():
        stripped = line.strip()
        if stripped.lower().startswith("prefixes:"):
            in_prefix_block = True
            stripped = stripped[len("prefixes:"):]
        elif in_prefix_block and not line[:1].isspace():
            in_prefix_block = False
        if in_prefix_block:
            prefixes.update(_LISTED_PREFIX_RE.findall(stripped))

    if not entities and not properties:
        first = context_text.strip().splitlines()[0] if context_text.strip() else ""
        raise ContextParse("no entity or property identifiers in RDF context", first)
    return RdfContext(frozenset(entities), frozenset(properties), frozenset(prefixes))


def check(query: str, ctx: RdfContext) -> tuple[list[str], list[str]]:
    unknown: list[str] = []
    notes: list[str] = []
    known = set(ctx.known_prefixes) | BUILTIN_PREFIXES
    known |= {m.group(1) or "" for m in _PREFIX_DECL_RE.finditer(query)}

    def flag(item: str) -> None:
        if item not in unknown:
            unknown.append(item)

    def check_id(ident: str, shown: str) -> None:
        pool = ctx.entity_ids if ident.startswith("Q") else ctx.property_ids
        if ident not in pool:
            flag(shown)

    for m in _TOKEN_RE.finditer(query):
        kind, text = m.lastgroup, m.group()
        if kind == "iri":
            iri = text[1:-1]
            em = _IRI_ENTITY_RE.search(iri) or _IRI_PROP_RE.search(iri)
            if em:
                check_id(em.group(1), text)
            continue
        if kind != "pname":
            continue
        prefix, _, local = text.partition(":")
        if prefix not in known:
            flag(f"{prefix}:")
            continue
        if not local:
            continue
        if prefix in ENTITY_PREFIXES:
            if re.fullmatch(r"[QP]\d+", local):
                check_id(local, text)
            else:
                notes.append(f"non-id local name {text}")
                flag(text)
        elif prefix in PROPERTY_PREFIXES:
            if re.fullmatch(r"P\d+", local):
                check_id(local, text)
            else:
                flag(text)
    return unknown, notes
