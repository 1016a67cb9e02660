"""Result shapes returned by the per-backend executors."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Union

Scalar = Union[None, bool, int, float, str]


def normalize_value(value: Any) -> Scalar:
    """Coerce a driver value to a JSON-safe scalar; non-finite reals become text."""
    if value is None or isinstance(value, (bool, int, str)):
        return value
    if isinstance(value, float):
        return value if math.isfinite(value) else str(value)
    if isinstance(value, (bytes, bytearray, memoryview)):
        return "x'" + bytes(value).hex() + "'"
    return str(value)


@dataclass(frozen=True)
class ExecLimits:
    timeout: float = 30.0
    max_rows: int = 500


@dataclass(frozen=True)
class Rows:
    columns: tuple[str, ...]
    rows: tuple[tuple[Scalar, ...], ...]
    truncated: bool = False
    total: int | None = None

    def __post_init__(self) -> None:
        width = len(self.columns)
        for row in self.rows:
            if len(row) != width:
                raise ValueError(f"row has {len(row)} values, expected {width}")

    def __len__(self) -> int:
        return len(self.rows)


@dataclass(frozen=True)
class Bindings:
    vars: tuple[str, ...]
    bindings: tuple[dict[str, Scalar], ...] = ()
    ask: bool | None = None
    truncated: bool = False
    total: int | None = None

    def __post_init__(self) -> None:
        if self.ask is not None and self.bindings:
            raise ValueError("an ASK result carries no bindings")

    def __len__(self) -> int:
        return 1 if self.ask is not None else len(self.bindings)


@dataclass(frozen=True)
class Records:
    keys: tuple[str, ...]
    records: tuple[tuple[Scalar, ...], ...]
    truncated: bool = False
    total: int | None = None

    def __len__(self) -> int:
        return len(self.records)


@dataclass(frozen=True)
class Passage:
    doc_id: str
    score: float
    text: str
    title: str = ""


@dataclass(frozen=True)
class Passages:
    items: tuple[Passage, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        ordered = tuple(sorted(self.items, key=lambda p: (-p.score, p.doc_id)))
        object.__setattr__(self, "items", ordered)

    @property
    def truncated(self) -> bool:
        return False

    @property
    def total(self) -> int:
        return len(self.items)

    def __len__(self) -> int:
        return len(self.items)

    def doc_ids(self) -> list[str]:
        return [p.doc_id for p in self.items]


ExecOutcome = Union[Rows, Bindings, Records, Passages]


def is_empty(outcome: ExecOutcome) -> bool:
    """True when the outcome holds no answer items (an ASK result is never empty)."""
    return len(outcome) == 0


def outcome_to_dict(outcome: ExecOutcome) -> dict[str, Any]:
    if isinstance(outcome, Rows):
        return {"type": "rows", "columns": list(outcome.columns), "rows": [list(r) for r in outcome.rows],
                "truncated": outcome.truncated, "total": outcome.total}
    if isinstance(outcome, Bindings):
        return {"type": "bindings", "vars": list(outcome.vars), "bindings": [dict(b) for b in outcome.bindings],
                "ask": outcome.ask, "truncated": outcome.truncated, "total": outcome.total}
    if isinstance(outcome, Records):
        return {"type": "records", "keys": list(outcome.keys), "records": [list(r) for r in outcome.records],
                "truncated": outcome.truncated, "total": outcome.total}
    if isinstance(outcome, Passages):
        return {"type": "passages", "items": [
            {"doc_id": p.doc_id, "score": p.score, "text": p.text, "title": p.title} for p in outcome.items
        ]}
    raise TypeError(f"not an execution outcome: {type(outcome).__name__}")


def outcome_from_dict(d: dict[str, Any]) -> ExecOutcome:
    kind = d["type"]
    if kind == "rows":
        return Rows(tuple(d["columns"]), tuple(tuple(r) for r in d["rows"]), d.get("truncated", False), d.get("total"))
    if kind == "bindings":
        return Bindings(tuple(d["vars"]), tuple(dict(b) for b in d["bindings"]), d.get("ask"),
                        d.get("truncated", False), d.get("total"))
    if kind == "records":
        return Records(tuple(d["keys"]), tuple(tuple(r) for r in d["records"]), d.get("truncated", False),
                       d.get("total"))
    if kind == "passages":
        return Passages(tuple(Passage(p["doc_id"], p["score"], p["text"], p.get("title", "")) for p in d["items"]))
    raise ValueError(f"unknown outcome type {kind!r}")
