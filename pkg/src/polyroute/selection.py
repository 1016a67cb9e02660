"""Long-context source selection: read the whole catalog, return a ranked shortlist."""

from __future__ import annotations

import logging
from dataclasses import dataclass

from polyroute import prompts
from polyroute.errors import EmptySelection, JsonExtractError, SelectionFailed
from polyroute.llm import ChatRequest, Provider, extract_json_object
from polyroute.registry import BackendKind, Catalog, render_catalog

log = logging.getLogger(__name__)

TAG = "selection"


@dataclass(frozen=True)
class Decision:
    kind: BackendKind
    kb_id: str
    rank: int = 0

    def to_dict(self) -> dict:
        return {"route_type": self.kind.value, "kb_id": self.kb_id, "rank": self.rank}

    @classmethod
    def from_dict(cls, d: dict) -> Decision:
        return cls(BackendKind(d["route_type"]), d["kb_id"], d.get("rank", 0))


@dataclass(frozen=True)
class SelectionBudget:
    k: int = 3

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("k must be >= 1")


def render_selection_prompt(question: str, catalog: Catalog, budget: SelectionBudget) -> ChatRequest:
    system = prompts.SELECTION_SYSTEM.replace("<k>", str(budget.k))
    user = f"{render_catalog(catalog)}\n\nQuestion: {question}\n\n{prompts.SELECTION_RESPONSE_FORMAT}"
    return ChatRequest(system=system, user=user, tag=TAG)


def parse_decisions(
    raw: str,
    catalog: Catalog,
    budget: SelectionBudget,
    warnings: list[str] | None = None,
) -> list[Decision]:
    """Turn router output into validated decisions.

    Unknown kb_ids and route/kind mismatches are dropped (with a warning),
    duplicates keep their first occurrence, and the list is cut to ``k``.
    """
    warnings = warnings if warnings is not None else []
    payload = extract_json_object(raw)
    entries = payload.get("decisions")
    if not isinstance(entries, list):
        raise EmptySelection("response has no 'decisions' list")

    kept: list[Decision] = []
    seen: set[str] = set()
    for entry in entries:
        if not isinstance(entry, dict):
            warnings.append(f"dropped non-object decision {entry!r}")
            continue
        kb_id = str(entry.get("kb_id", ""))
        route = str(entry.get("route_type", "")).strip().upper()
        desc = catalog.get(kb_id)
        if desc is None:
            warnings.append(f"dropped unknown kb_id {kb_id!r}")
            continue
        if route != desc.kind.value:
            warnings.append(f"dropped {kb_id!r}: route_type {route!r} != {desc.kind.value}")
            continue
        if kb_id in seen:
            continue
        seen.add(kb_id)
        kept.append(Decision(desc.kind, kb_id, len(kept)))
        if len(kept) == budget.k:
            break
    if not kept:
        raise EmptySelection("no valid decisions survived filtering")
    return kept


def select_sources(
    question: str,
    catalog: Catalog,
    budget: SelectionBudget,
    provider: Provider,
    warnings: list[str] | None = None,
) -> list[Decision]:
    warnings = warnings if warnings is not None else []
    request = render_selection_prompt(question, catalog, budget)
    try:
        return parse_decisions(provider.complete(request).text, catalog, budget, warnings)
    except (JsonExtractError, EmptySelection) as exc:
        warnings.append(f"selection retry after: {exc}")
        log.debug("selection retry for %r: %s", question, exc)

    retry = ChatRequest(
        system=request.system,
        user=f"{request.user}\n{prompts.CORRECTIVE_INSTRUCTION}",
        temperature=request.temperature,
        max_tokens=request.max_tokens,
        tag=TAG,
    )
    try:
        return parse_decisions(provider.complete(retry).text, catalog, budget, warnings)
    except (JsonExtractError, EmptySelection) as exc:
        raise SelectionFailed(f"source selection failed twice: {exc}", exc) from exc
