"""SQL lexing, CREATE TABLE schema extraction and identifier grounding."""

from __future__ import annotations

import re
from dataclasses import dataclass

from polyroute.errors import ContextParse

KEYWORDS = frozenset(
    """
    abort action add after all alter analyze and as asc attach autoincrement before begin
    between by cascade case cast check collate column commit conflict constraint create cross
    current current_date current_time current_timestamp database default deferrable deferred
    delete desc detach distinct do drop each else end escape except exclude exists explain fail
    filter first following for foreign from full glob group groups having if ignore immediate in
    index indexed initially inner insert instead intersect into is isnull join key last left like
    limit match materialized natural no not nothing notnull null nulls of offset on or order
    others outer over partition plan pragma preceding primary query raise range recursive
    references regexp reindex release rename replace restrict returning right rollback row rows
    savepoint select set table temp temporary then ties to top transaction trigger true false
    unbounded union unique update using vacuum values view virtual when where window with without
    """.split()
)

FUNCTIONS = frozenset(
    """
    abs avg char coalesce count date datetime glob group_concat hex ifnull iif instr julianday
    last_insert_rowid length lower ltrim max min nullif printf quote random replace round rtrim
    sign strftime substr substring sum time total trim typeof unicode upper cast
    row_number rank dense_rank ntile lag lead first_value last_value nth_value
    cume_dist percent_rank concat concat_ws format like unixepoch json json_extract
    """.split()
)

# SQLite exposes these on every rowid table
IMPLICIT_COLUMNS = frozenset({"rowid", "_rowid_", "oid"})

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>--[^\n]*|/\*.*?(?:\*/|\Z))
  | (?P<string>'(?:[^']|'')*'?)
  | (?P<qident>"(?:[^"]|"")*"?|`(?:[^`]|``)*`?|\[[^\]]*\]?)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<param>[?:@$][A-Za-z0-9_]*)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_$]*)
  | (?P<op><>|<=|>=|!=|==|\|\||<<|>>|[-+*/%=<>(),.;~&|])
  | (?P<other>.)
    """,
    re.X | re.S,
)


@dataclass(frozen=True)
class Token:
    type: str  # ident, qident, string, number, param, op, other
    text: str

    @property
    def name(self) -> str:
        """Identifier text with quoting removed."""
        t = self.text
        if self.type == "qident":
            if t[0] == "[":
                return t[1:-1] if t.endswith("]") else t[1:]
            q = t[0]
            inner = t[1:-1] if len(t) > 1 and t.endswith(q) else t[1:]
            return inner.replace(q * 2, q)
        return t

    @property
    def is_name(self) -> bool:
        return self.type in ("ident", "qident")

    def kw(self) -> str:
        return self.text.lower() if self.type == "ident" else ""


def lex(sql: str) -> list[Token]:
    out = []
    for m in _TOKEN_RE.finditer(sql):
        kind = m.lastgroup
        if kind in ("ws", "comment"):
            continue
        out.append(Token(kind, m.group()))
    return out


@dataclass(frozen=True)
class RelationalSchema:
    tables: dict[str, frozenset[str]]  # table name -> column names (original spelling)

    def table(self, name: str) -> str | None:
        low = name.lower()
        for t in self.tables:
            if t.lower() == low:
                return t
        return None

    def all_columns_lower(self) -> set[str]:
        return {c.lower() for cols in self.tables.values() for c in cols}

    def columns_lower(self, table: str) -> set[str]:
        return {c.lower() for c in self.tables[table]}


_CONSTRAINT_WORDS = {"primary", "foreign", "unique", "constraint", "check", "key"}


def parse_schema(context_text: str) -> RelationalSchema:
    """Extract tables and columns from CREATE TABLE declarations."""
    toks = lex(context_text)
    tables: dict[str, frozenset[str]] = {}
    i = 0
    while i < len(toks):
        if toks[i].kw() != "create":
            i += 1
            continue
        j = i + 1
        while j < len(toks) and toks[j].kw() in ("temp", "temporary", "virtual"):
            j += 1
        if j >= len(toks) or toks[j].kw() != "table":
            i += 1
            continue
        j += 1
        if j + 2 < len(toks) and [t.kw() for t in toks[j : j + 3]] == ["if", "not", "exists"]:
            j += 3
        if j >= len(toks) or not toks[j].is_name:
            raise ContextParse("CREATE TABLE without a table name", _line_of(context_text, toks[i].text))
        name = toks[j].name
        while j + 2 < len(toks) and toks[j + 1].text == "." and toks[j + 2].is_name:
            j += 2
            name = toks[j].name
        j += 1
        if j >= len(toks) or toks[j].text != "(":
            raise ContextParse(f"CREATE TABLE {name} has no column list", name)
        columns, j = _column_list(toks, j + 1, name)
        tables[name] = frozenset(columns)
        i = j
    if not tables:
        first = context_text.strip().splitlines()[0] if context_text.strip() else ""
        raise ContextParse("no CREATE TABLE declarations found", first)
    return RelationalSchema(tables)


def _column_list(toks: list[Token], j: int, table: str) -> tuple[list[str], int]:
    columns: list[str] = []
    depth = 1
    at_item_start = True
    while j < len(toks):
        tok = toks[j]
        if tok.text == "(":
            depth += 1
        elif tok.text == ")":
            depth -= 1
            if depth == 0:
                return columns, j + 1
        elif tok.text == "," and depth == 1:
            at_item_start = True
            j += 1
            continue
        elif at_item_start and depth == 1:
            if tok.is_name and tok.kw() not in _CONSTRAINT_WORDS:
                columns.append(tok.name)
        at_item_start = False
        j += 1
    raise ContextParse(f"unterminated CREATE TABLE {table}", table)


def _line_of(text: str, needle: str) -> str:
    for line in text.splitlines():
        if needle in line:
            return line
    return needle


# -- query analysis ----------------------------------------------------------

_FROM_LIST_END = {
    "where", "group", "order", "having", "limit", "union", "intersect", "except", "on",
    "using", "window", "select", "offset", "returning", "values", "set",
}
_JOIN_WORDS = {"join"}
_VALUE_END = {"ident", "qident", "number", "string"}


@dataclass
class SqlRefs:
    tables: list[str]
    aliases: dict[str, str | None]  # lower alias -> table (None for derived tables)
    column_aliases: set[str]
    cte_names: set[str]
    columns: list[tuple[str | None, str]]
    notes: list[str]


def _matching_open(toks: list[Token], close: int) -> int:
    depth = 0
    for k in range(close, -1, -1):
        if toks[k].text == ")":
            depth += 1
        elif toks[k].text == "(":
            depth -= 1
            if depth == 0:
                return k
    return -1


def extract_refs(sql: str) -> SqlRefs:
    toks = lex(sql)
    n = len(toks)
    refs = SqlRefs([], {}, set(), set(), [], [])
    skip: set[int] = set()

    # CTE heads: name AS (  |  name(col, ...) AS (
    for j in range(1, n - 1):
        if toks[j].kw() == "as" and toks[j + 1].text == "(":
            prev = j - 1
            if toks[prev].text == ")":
                open_at = _matching_open(toks, prev)
                if open_at > 0 and toks[open_at - 1].is_name:
                    for k in range(open_at + 1, prev):
                        if toks[k].is_name:
                            refs.column_aliases.add(toks[k].name.lower())
                            skip.add(k)
                    prev = open_at - 1
                else:
                    continue
            if toks[prev].is_name and toks[prev].kw() not in KEYWORDS:
                refs.cte_names.add(toks[prev].name.lower())
                skip.add(prev)

    depth = 0
    in_from: dict[int, bool] = {}
    expect_table = False
    derived_opens: list[int] = []  # depths at which a derived table was opened
    expect_derived_alias = False
    i = 0
    while i < n:
        tok = toks[i]
        kw = tok.kw()
        prev = toks[i - 1] if i else None

        if i in skip:
            i += 1
            continue
        if tok.text == "(":
            if expect_table:
                derived_opens.append(depth)
                expect_table = False
            depth += 1
            in_from[depth] = False
            i += 1
            continue
        if tok.text == ")":
            depth -= 1
            if derived_opens and derived_opens[-1] == depth:
                derived_opens.pop()
                expect_derived_alias = True
            i += 1
            continue
        if expect_derived_alias:
            expect_derived_alias = False
            j = i + 1 if kw == "as" else i
            if j < n and toks[j].is_name and toks[j].kw() not in KEYWORDS:
                refs.aliases[toks[j].name.lower()] = None
                i = j + 1
                continue
        if tok.text == ",":
            if in_from.get(depth):
                expect_table = True
            i += 1
            continue
        if kw == "from":
            in_from[depth] = True
            expect_table = True
            i += 1
            continue
        if kw in _JOIN_WORDS:
            expect_table = True
            i += 1
            continue
        if kw in _FROM_LIST_END:
            in_from[depth] = False
            expect_table = False
            i += 1
            continue

        if expect_table and tok.is_name and (tok.type == "qident" or kw not in KEYWORDS):
            expect_table = False
            name = tok.name
            while i + 2 < n and toks[i + 1].text == "." and toks[i + 2].is_name:
                i += 2
                name = toks[i].name
            refs.tables.append(name)
            i += 1
            j = i + 1 if i < n and toks[i].kw() == "as" else i
            if j < n and toks[j].is_name and (toks[j].type == "qident" or toks[j].kw() not in KEYWORDS):
                refs.aliases[toks[j].name.lower()] = name
                i = j + 1
            continue

        if kw == "as":
            # column alias or CAST target type; never a reference
            if i + 1 < n and toks[i + 1].is_name:
                refs.column_aliases.add(toks[i + 1].name.lower())
                i += 2
            else:
                i += 1
            continue

        if tok.is_name:
            if tok.type == "ident" and i + 1 < n and toks[i + 1].text == "(":
                if kw not in FUNCTIONS and kw not in KEYWORDS:
                    refs.notes.append(f"unrecognised function {tok.text}")
                i += 1
                continue
            if tok.type == "ident" and kw in KEYWORDS:
                i += 1
                continue
            if i + 2 < n and toks[i + 1].text == "." and (toks[i + 2].is_name or toks[i + 2].text == "*"):
                parts = [tok.name]
                j = i
                while j + 2 < n and toks[j + 1].text == "." and (toks[j + 2].is_name or toks[j + 2].text == "*"):
                    j += 2
                    parts.append(toks[j].name if toks[j].is_name else "*")
                if parts[-1] != "*":
                    refs.columns.append((parts[-2], parts[-1]))
                else:
                    refs.columns.append((parts[-2], "*"))
                i = j + 1
                continue
            if prev is not None and (prev.type in _VALUE_END and prev.kw() not in KEYWORDS or prev.text == ")"):
                # bare alias after an expression: SELECT count(*) cnt
                refs.column_aliases.add(tok.name.lower())
                i += 1
                continue
            refs.columns.append((None, tok.name))
        i += 1
    return refs


def check(sql: str, schema: RelationalSchema) -> tuple[list[str], list[str]]:
    """Return (unknown identifiers, parse notes) for ``sql`` against ``schema``."""
    refs = extract_refs(sql)
    unknown: list[str] = []

    def flag(name: str) -> None:
        if name not in unknown:
            unknown.append(name)

    for t in refs.tables:
        if schema.table(t) is None and t.lower() not in refs.cte_names:
            flag(t)

    all_cols = schema.all_columns_lower() | IMPLICIT_COLUMNS
    for qualifier, col in refs.columns:
        low = col.lower()
        if qualifier is None:
            if low in all_cols or low in refs.column_aliases:
                continue
            if low in refs.aliases or schema.table(col) is not None or low in refs.cte_names:
                refs.notes.append(f"bare table reference {col}")
                continue
            flag(col)
            continue
        qlow = qualifier.lower()
        if qlow in refs.aliases:
            target = refs.aliases[qlow]
        elif schema.table(qualifier) is not None or qlow in refs.cte_names:
            target = qualifier
        else:
            flag(qualifier)
            continue
        if col == "*":
            continue
        table = schema.table(target) if target is not None else None
        if table is not None and target.lower() not in refs.cte_names:
            if low not in schema.columns_lower(table) and low not in IMPLICIT_COLUMNS:
                flag(f"{qualifier}.{col}")
        elif low not in all_cols and low not in refs.column_aliases:
            flag(col)
    return unknown, refs.notes
