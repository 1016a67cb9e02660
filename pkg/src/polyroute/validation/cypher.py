"""Property-graph schema parsing and Cypher label / relationship-type grounding."""

from __future__ import annotations

import re
from dataclasses import dataclass

from polyroute.errors import ContextParse

_TRIPLE_RE = re.compile(r"\(:\s*`?(\w+)`?\s*\)\s*<?-\[:\s*`?(\w+)`?\s*\]->?\s*\(:\s*`?(\w+)`?\s*\)")
_HEADER_RE = re.compile(r"^-\s+`?(\w+)`?\s*$")
_PROPKEY_RE = re.compile(r"^\s+-\s+`(\w+)")

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>//[^\n]*|/\*.*?(?:\*/|\Z))
  | (?P<string>"(?:[^"\\]|\\.)*"?|'(?:[^'\\]|\\.)*'?)
  | (?P<bident>`(?:[^`]|``)*`?)
  | (?P<param>\$\w+)
  | (?P<number>\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][\w]*)
  | (?P<op><-|->|\.\.|[-()\[\]{}:|&,.*=<>+/%!^;])
  | (?P<other>.)
    """,
    re.X | re.S,
)


@dataclass(frozen=True)
class GraphSchema:
    node_labels: frozenset[str]
    relationship_types: frozenset[str]
    property_keys: frozenset[str]


def parse_context(context_text: str) -> GraphSchema:
    labels: set[str] = set()
    rels: set[str] = set()
    keys: set[str] = set()
    section = None
    for line in context_text.splitlines():
        stripped = line.strip()
        low = stripped.lower()
        if low.startswith("node properties"):
            section = "node"
            continue
        if low.startswith("relationship properties"):
            section = "rel"
            continue
        if low.startswith("the relationships"):
            section = "triples"
            continue
        for a, r, b in _TRIPLE_RE.findall(line):
            labels.update((a, b))
            rels.add(r)
        if section in ("node", "rel"):
            header = _HEADER_RE.match(line)
            if header:
                (labels if section == "node" else rels).add(header.group(1))
                continue
            key = _PROPKEY_RE.match(line)
            if key:
                keys.add(key.group(1))
    if not labels:
        first = context_text.strip().splitlines()[0] if context_text.strip() else ""
        raise ContextParse("no node labels found in graph context", first)
    return GraphSchema(frozenset(labels), frozenset(rels), frozenset(keys))


def _tokens(query: str) -> list[tuple[str, str]]:
    return [
        (m.lastgroup, m.group())
        for m in _TOKEN_RE.finditer(query)
        if m.lastgroup not in ("ws", "comment")
    ]


def _name(kind: str, text: str) -> str:
    if kind == "bident":
        inner = text[1:-1] if len(text) > 1 and text.endswith("`") else text[1:]
        return inner.replace("``", "`")
    return text


def extract_labels_and_types(query: str) -> tuple[list[str], list[str], list[str]]:
    """Return (node labels, relationship types, property keys) referenced by ``query``."""
    toks = _tokens(query)
    labels: list[str] = []
    types: list[str] = []
    keys: list[str] = []
    # stack of bracket kinds: "node", "rel", "list", "map"
    stack: list[str] = []
    for i, (kind, text) in enumerate(toks):
        if text == "(":
            stack.append("node")
        elif text == "[":
            prev = toks[i - 1][1] if i else ""
            stack.append("rel" if prev in ("-", "<-") else "list")
        elif text == "{":
            stack.append("map")
        elif text in (")", "]", "}"):
            if stack:
                stack.pop()
        elif text == ":":
            top = stack[-1] if stack else None
            if top == "map" or i + 1 >= len(toks):
                continue
            nxt_kind, nxt_text = toks[i + 1]
            if nxt_kind not in ("ident", "bident"):
                continue
            # "key: value" inside a map literal never reaches here; inside a
            # node/rel pattern the colon introduces a label or type
            bucket = types if top == "rel" else labels
            bucket.append(_name(nxt_kind, nxt_text))
            j = i + 2
            while j + 1 < len(toks) and toks[j][1] in ("|", "&", ":"):
                k = j + 1
                if toks[k][1] == ":" and k + 1 < len(toks):
                    k += 1
                if toks[k][0] in ("ident", "bident"):
                    bucket.append(_name(*toks[k]))
                    j = k + 1
                else:
                    break
        elif text == "." and i + 1 < len(toks) and toks[i + 1][0] in ("ident", "bident"):
            prev_kind = toks[i - 1][0] if i else ""
            if prev_kind in ("ident", "bident"):
                keys.append(_name(*toks[i + 1]))
    return labels, types, keys


def check(query: str, schema: GraphSchema) -> tuple[list[str], list[str]]:
    labels, types, keys = extract_labels_and_types(query)
    unknown: list[str] = []
    for name in labels:
        if name not in schema.node_labels and name not in unknown:
            unknown.append(name)
    for name in types:
        if name not in schema.relationship_types and name not in unknown:
            unknown.append(name)
    notes = [f"unknown property key {k}" for k in dict.fromkeys(keys) if schema.property_keys and k not in schema.property_keys]
    return unknown, notes
