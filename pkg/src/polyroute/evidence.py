"""Cross-source evidence selection over heterogeneous executor outputs."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from polyroute import prompts
from polyroute.errors import GatewayError, JsonExtractError, NoCandidates
from polyroute.execution import ExecOutcome, outcome_from_dict, outcome_to_dict
from polyroute.formulation import NativeQuery
from polyroute.llm import ChatRequest, Provider, extract_json_object
from polyroute.selection import Decision

log = logging.getLogger(__name__)

TAG = "evidence"


@dataclass(frozen=True)
class CandidateBundle:
    decision: Decision
    query: NativeQuery | None
    outcome: ExecOutcome | None
    verbalized: str
    error: str | None = None
    context: str = ""

    @property
    def ok(self) -> bool:
        return self.error is None and self.outcome is not None

    def to_dict(self) -> dict:
        return {
            "decision": self.decision.to_dict(),
            "query": self.query.to_dict() if self.query else None,
            "outcome": outcome_to_dict(self.outcome) if self.outcome is not None else None,
            "verbalized": self.verbalized,
            "error": self.error,
            "context": self.context,
        }

    @classmethod
    def from_dict(cls, d: dict) -> CandidateBundle:
        return cls(
            Decision.from_dict(d["decision"]),
            NativeQuery.from_dict(d["query"]) if d.get("query") else None,
            outcome_from_dict(d["outcome"]) if d.get("outcome") else None,
            d["verbalized"],
            d.get("error"),
            d.get("context", ""),
        )


@dataclass(frozen=True)
class EvidenceBundle:
    candidates: tuple[CandidateBundle, ...]
    selected_index: int
    warnings: tuple[str, ...] = field(default_factory=tuple)
    llm_calls: int = 0

    def __post_init__(self) -> None:
        if not 0 <= self.selected_index < len(self.candidates):
            raise ValueError("selected_index out of range")

    @property
    def selected(self) -> CandidateBundle:
        return self.candidates[self.selected_index]

    @property
    def evidence_text(self) -> str:
        return self.selected.verbalized

    def to_dict(self) -> dict:
        return {
            "candidates": [c.to_dict() for c in self.candidates],
            "selected_index": self.selected_index,
            "evidence_text": self.evidence_text,
            "warnings": list(self.warnings),
        }


def _candidate_block(i: int, cand: CandidateBundle) -> str:
    query_text = cand.query.text if cand.query is not None else ""
    lines = [f"[{i}] {cand.decision.kind.value} | {cand.decision.kb_id}", f"query: {query_text}"]
    if cand.context:
        lines.append(f"context: {cand.context}")
    if cand.error is not None:
        lines.append(f"error: {cand.error}")
    else:
        lines.append("result:")
        lines.append(cand.verbalized)
    return "\n".join(lines)


def render_evidence_prompt(question: str, candidates: list[CandidateBundle] | tuple[CandidateBundle, ...]) -> ChatRequest:
    if not candidates:
        raise NoCandidates("evidence selection needs at least one candidate")
    blocks = "\n\n".join(_candidate_block(i, c) for i, c in enumerate(candidates))
    user = (
        f"Question: {question}\n\n{prompts.EVIDENCE_HEADER}\n\n{blocks}\n\n{prompts.EVIDENCE_RESPONSE_FORMAT}"
    )
    return ChatRequest(system=prompts.EVIDENCE_SYSTEM, user=user, tag=TAG)


def _parse_selected(text: str, n: int) -> int:
    payload = extract_json_object(text)
    value = payload.get("selected")
    if isinstance(value, str) and value.strip().isdigit():
        value = int(value.strip())
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValueError(f"'selected' is not an integer: {value!r}")
    if not 0 <= value < n:
        raise ValueError(f"'selected' index {value} out of range 0..{n - 1}")
    return value


def select_evidence(
    question: str,
    candidates: list[CandidateBundle] | tuple[CandidateBundle, ...],
    provider: Provider,
) -> EvidenceBundle:
    """Pick the candidate whose result best answers ``question``.

    One candidate short-circuits without an LLM call. An unusable answer gets
    one corrective retry, then falls back to index 0 (the router's top pick).
    """
    candidates = tuple(candidates)
    if not candidates:
        raise NoCandidates("evidence selection needs at least one candidate")
    if len(candidates) == 1:
        return EvidenceBundle(candidates, 0)

    request = render_evidence_prompt(question, candidates)
    warnings: list[str] = []
    calls = 0
    attempts = (
        request,
        ChatRequest(request.system, f"{request.user}\n{prompts.CORRECTIVE_INSTRUCTION}",
                    request.temperature, request.max_tokens, TAG),
    )
    for attempt in attempts:
        calls += 1
        try:
            index = _parse_selected(provider.complete(attempt).text, len(candidates))
            return EvidenceBundle(candidates, index, tuple(warnings), calls)
        except (JsonExtractError, GatewayError, ValueError) as exc:
            warnings.append(f"evidence selection unusable response: {exc}")
    warnings.append("evidence selection fell back to candidate 0")
    log.warning("evidence selection fell back to candidate 0 for %r", question)
    return EvidenceBundle(candidates, 0, tuple(warnings), calls)
