"""Per-source native query generation grounded in each source's structural context."""

from __future__ import annotations

import re
from dataclasses import dataclass

from polyroute import prompts
from polyroute.errors import FormulationFailed
from polyroute.llm import ChatRequest, Provider
from polyroute.registry import BackendKind, SourceDescriptor
from polyroute.selection import Decision

_FENCE_RE = re.compile(r"\A(`{3,})[^\n`]*\n(.*?)\n?\1\Z", re.S)
# a one-line fence only drops a leading word that names a language, so "```SELECT 1```" keeps SELECT
_INLINE_FENCE_RE = re.compile(
    r"\A(`{3,})(?:(?i:sql|sqlite|sparql|cypher|json|text)[ \t]+)?([^\n]*?)\1\Z"
)


@dataclass(frozen=True)
class NativeQuery:
    kind: BackendKind
    kb_id: str
    text: str
    raw_llm_text: str = ""
    prompt: ChatRequest | None = None
    # None for Search (not validated)
    grounded: bool | None = None

    def to_dict(self) -> dict:
        return {
            "route_type": self.kind.value,
            "kb_id": self.kb_id,
            "text": self.text,
            "raw_llm_text": self.raw_llm_text,
            "grounded": self.grounded,
        }

    @classmethod
    def from_dict(cls, d: dict) -> NativeQuery:
        return cls(BackendKind(d["route_type"]), d["kb_id"], d["text"], d.get("raw_llm_text", ""),
                   None, d.get("grounded"))


def strip_code_fences(text: str) -> str:
    """Remove one outermost fenced-block wrapper, if present, and trim."""
    stripped = text.strip()
    m = _FENCE_RE.match(stripped)
    if m is None:
        m = _INLINE_FENCE_RE.match(stripped)
    if m is None:
        return stripped
    return m.group(2).strip()


def formulation_prompt(question: str, desc: SourceDescriptor) -> ChatRequest:
    if desc.kind is BackendKind.SEARCH:
        system = prompts.SEARCH_REWRITE_SYSTEM
    else:
        system = prompts.FORMULATION_SYSTEM[desc.kind.value]
    user = prompts.FORMULATION_USER.format(
        context=desc.context_text.rstrip("\n"), question=question, language=desc.kind.value
    )
    return ChatRequest(system=system, user=user, tag=f"formulation.{desc.kind.value.lower()}")


def rewrite_search_query(question: str, desc: SourceDescriptor, provider: Provider) -> NativeQuery:
    if desc.kind is not BackendKind.SEARCH:
        raise ValueError(f"{desc.kb_id} is not a search source")
    request = formulation_prompt(question, desc)
    raw = provider.complete(request).text
    text = strip_code_fences(raw)
    if not text:
        raise FormulationFailed(f"{desc.kb_id}: empty rewrite")
    return NativeQuery(desc.kind, desc.kb_id, ensure_question_first(question, text), raw, request)


def ensure_question_first(question: str, text: str) -> str:
    """Prepend the verbatim question unless the rewrite already starts with it."""
    if text == question or text.startswith(question + "\n"):
        return text
    return f"{question}\n{text}"


def formulate(
    question: str,
    decision: Decision,
    desc: SourceDescriptor,
    provider: Provider,
    validator=None,
) -> NativeQuery:
    """Generate one native query; ``validator`` maps a NativeQuery to a grounding verdict."""
    if decision.kb_id != desc.kb_id:
        raise ValueError(f"decision targets {decision.kb_id!r}, descriptor is {desc.kb_id!r}")
    if desc.kind is BackendKind.SEARCH:
        return rewrite_search_query(question, desc, provider)

    request = formulation_prompt(question, desc)
    raw = provider.complete(request).text
    text = strip_code_fences(raw)
    if not text:
        raise FormulationFailed(f"{desc.kb_id}: empty query from provider")
    query = NativeQuery(desc.kind, desc.kb_id, text, raw, request)
    if validator is None:
        from polyroute.validation import check_query_against

        validator = check_query_against
    report = validator(query, desc)
    return NativeQuery(desc.kind, desc.kb_id, text, raw, request, report.grounded)
