"""Deterministic text rendering of executor outputs for the LLM stages."""

from __future__ import annotations

from dataclasses import dataclass

from polyroute.execution.outcomes import Bindings, ExecOutcome, Passages, Records, Rows, Scalar


@dataclass(frozen=True)
class VerbalizeCaps:
    max_items: int = 50
    max_chars: int = 2000


def format_scalar(value: Scalar) -> str:
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format(value, ".6g")
    return value.replace("\r", " ").replace("\n", " ")


def _clip(line: str, caps: VerbalizeCaps) -> str:
    return line if len(line) <= caps.max_chars else line[: caps.max_chars]


def _items(outcome: ExecOutcome) -> tuple[list[str], str | None]:
    """Return (item lines, optional header)."""
    if isinstance(outcome, Rows):
        header = "\t".join(outcome.columns)
        return ["\t".join(format_scalar(v) for v in row) for row in outcome.rows], header
    if isinstance(outcome, Bindings):
        if outcome.ask is not None:
            return ["true" if outcome.ask else "false"], None
        lines = []
        for solution in outcome.bindings:
            names = [v for v in outcome.vars if v in solution] + sorted(set(solution) - set(outcome.vars))
            lines.append("\t".join(f"{v}={format_scalar(solution[v])}" for v in names))
        return lines, None
    if isinstance(outcome, Records):
        return [
            "\t".join(f"{k}={format_scalar(v)}" for k, v in zip(outcome.keys, record))
            for record in outcome.records
        ], None
    if isinstance(outcome, Passages):
        return [
            f"{rank}. {p.doc_id} ({p.score:.4f}) {format_scalar(p.text)}"
            for rank, p in enumerate(outcome.items, 1)
        ], None
    raise TypeError(f"not an execution outcome: {type(outcome).__name__}")


def verbalize(outcome: ExecOutcome, caps: VerbalizeCaps = VerbalizeCaps()) -> str:
    items, header = _items(outcome)
    total = getattr(outcome, "total", None)
    total = max(total if total is not None else len(items), len(items))
    shown = items[: caps.max_items]
    lines = ([_clip(header, caps)] if header is not None else []) + [_clip(s, caps) for s in shown]
    if total > len(shown):
        lines.append(f"... ({total - len(shown)} more)")
    return "\n".join(lines)
