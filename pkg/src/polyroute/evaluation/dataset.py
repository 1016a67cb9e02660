"""Gold-annotated evaluation datasets (JSONL)."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from polyroute.errors import DatasetError
from polyroute.registry import BackendKind


@dataclass(frozen=True)
class GoldAnnotation:
    question_id: str
    question: str
    paradigm: BackendKind
    gold_kb: str
    gold_query: str | None = None
    qrels: dict[str, float] | None = field(default=None, hash=False)

    def __post_init__(self) -> None:
        if self.paradigm is BackendKind.SEARCH:
            if not self.qrels or self.gold_query is not None:
                raise DatasetError(f"{self.question_id}: search questions carry qrels and no gold_query")
        elif not self.gold_query or self.qrels is not None:
            raise DatasetError(f"{self.question_id}: {self.paradigm} questions carry a gold_query and no qrels")

    @classmethod
    def from_dict(cls, row: dict) -> GoldAnnotation:
        try:
            qrels = row.get("qrels")
            return cls(
                question_id=str(row["question_id"]),
                question=str(row["question"]),
                paradigm=BackendKind.parse(str(row["paradigm"])),
                gold_kb=str(row["gold_kb"]),
                gold_query=row.get("gold_query"),
                qrels={str(k): float(v) for k, v in qrels.items()} if qrels is not None else None,
            )
        except (KeyError, ValueError, AttributeError) as exc:
            raise DatasetError(f"bad dataset row {row!r}: {exc}") from None


def load_dataset(path: str | Path) -> list[GoldAnnotation]:
    golds = []
    seen: set[str] = set()
    for n, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            row = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DatasetError(f"{path}:{n}: {exc}") from None
        gold = GoldAnnotation.from_dict(row)
        if gold.question_id in seen:
            raise DatasetError(f"{path}:{n}: duplicate question_id {gold.question_id!r}")
        seen.add(gold.question_id)
        golds.append(gold)
    return golds
