"""Per-question orchestration: select sources, formulate, execute, select evidence."""

from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any

from polyroute.errors import PolyrouteError
from polyroute.evidence import CandidateBundle, EvidenceBundle, select_evidence
from polyroute.execution import ExecLimits, Executor, VerbalizeCaps, verbalize
from polyroute.formulation import NativeQuery, formulate
from polyroute.llm import Provider
from polyroute.registry import BackendKind, Catalog
from polyroute.selection import Decision, SelectionBudget, select_sources

log = logging.getLogger(__name__)

DEFAULT_FANOUT = 4


@dataclass(frozen=True)
class RunMode:
    """One of ``omni`` (k candidates + evidence selection), ``kb-routing``,
    ``single`` (catalog pinned to one backend kind) or ``oracle`` (gold source)."""

    name: str
    k: int = 3
    kind: BackendKind | None = None

    def __post_init__(self) -> None:
        if self.name not in ("omni", "kb-routing", "single", "oracle"):
            raise ValueError(f"unknown run mode {self.name!r}")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.name == "single" and self.kind is None:
            raise ValueError("single-backend mode needs a backend kind")

    @classmethod
    def omni(cls, k: int = 3) -> RunMode:
        return cls("omni", k)

    @classmethod
    def kb_routing(cls) -> RunMode:
        return cls("kb-routing", 1)

    @classmethod
    def single(cls, kind: BackendKind) -> RunMode:
        return cls("single", 1, kind)

    @classmethod
    def oracle(cls) -> RunMode:
        return cls("oracle", 1)

    @classmethod
    def parse(cls, text: str, k: int = 3) -> RunMode:
        """Parse ``omni``, ``kb-routing``, ``oracle`` or ``single:<kind>``."""
        text = text.strip().lower()
        if text == "omni":
            return cls.omni(k)
        if text in ("kb-routing", "kb_routing"):
            return cls.kb_routing()
        if text == "oracle":
            return cls.oracle()
        if text.startswith("single:"):
            return cls.single(BackendKind.parse(text.split(":", 1)[1]))
        raise ValueError(f"unknown run mode {text!r}")

    def __str__(self) -> str:
        if self.name == "omni":
            return f"omni(k={self.k})"
        if self.name == "single":
            return f"single:{self.kind.value}"
        return self.name


@dataclass
class CandidateTiming:
    formulate_s: float = 0.0
    execute_s: float = 0.0


@dataclass
class QuestionTrace:
    question_id: str
    question: str
    mode: str
    decisions: list[Decision] = field(default_factory=list)
    candidates: list[CandidateBundle] = field(default_factory=list)
    timings: list[CandidateTiming] = field(default_factory=list)
    evidence: EvidenceBundle | None = None
    warnings: list[str] = field(default_factory=list)
    status: str = "ok"  # ok | no_evidence | selection_failed
    error: str | None = None

    @property
    def selected(self) -> CandidateBundle | None:
        return self.evidence.selected if self.evidence is not None else None

    @property
    def evidence_text(self) -> str:
        return self.evidence.evidence_text if self.evidence is not None else ""

    def to_dict(self, *, timings: bool = True) -> dict[str, Any]:
        d: dict[str, Any] = {
            "question_id": self.question_id,
            "question": self.question,
            "mode": self.mode,
            "status": self.status,
            "error": self.error,
            "decisions": [x.to_dict() for x in self.decisions],
            "candidates": [c.to_dict() for c in self.candidates],
            "evidence": self.evidence.to_dict() if self.evidence else None,
            "warnings": list(self.warnings),
        }
        if timings:
            d["timings"] = [vars(t).copy() for t in self.timings]
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> QuestionTrace:
        evidence = None
        if d.get("evidence"):
            ev = d["evidence"]
            evidence = EvidenceBundle(
                tuple(CandidateBundle.from_dict(c) for c in ev["candidates"]),
                ev["selected_index"],
                tuple(ev.get("warnings", [])),
            )
        return cls(
            question_id=d["question_id"],
            question=d["question"],
            mode=d["mode"],
            decisions=[Decision.from_dict(x) for x in d["decisions"]],
            candidates=[CandidateBundle.from_dict(c) for c in d["candidates"]],
            timings=[CandidateTiming(**t) for t in d.get("timings", [])],
            evidence=evidence,
            warnings=list(d.get("warnings", [])),
            status=d.get("status", "ok"),
            error=d.get("error"),
        )

    def answer_json(self) -> dict[str, Any]:
        """The public answer document."""
        sel = self.selected
        return {
            "question_id": self.question_id,
            "mode": self.mode,
            "status": self.status,
            "selected": {"route": sel.decision.kind.value, "kb": sel.decision.kb_id} if sel else None,
            "evidence_text": self.evidence_text,
            "candidates": [
                {
                    "route": c.decision.kind.value,
                    "kb": c.decision.kb_id,
                    "query": c.query.text if c.query else None,
                    "grounded": c.query.grounded if c.query else None,
                    "status": "ok" if c.ok else "error",
                    "error": c.error,
                }
                for c in self.candidates
            ],
            "warnings": list(self.warnings),
        }


def _run_candidate(
    question: str,
    decision: Decision,
    catalog: Catalog,
    provider: Provider,
    executor: Executor,
    limits: ExecLimits,
    caps: VerbalizeCaps,
) -> tuple[CandidateBundle, CandidateTiming]:
    desc = catalog.lookup(decision.kb_id)
    timing = CandidateTiming()
    t0 = time.perf_counter()
    query: NativeQuery | None = None
    try:
        query = formulate(question, decision, desc, provider)
    except PolyrouteError as exc:
        timing.formulate_s = time.perf_counter() - t0
        msg = f"formulation failed: {exc}"
        return CandidateBundle(decision, None, None, msg, msg, desc.catalog_line), timing
    timing.formulate_s = time.perf_counter() - t0

    t1 = time.perf_counter()
    try:
        outcome = executor.execute(desc, query, limits)
    except PolyrouteError as exc:
        timing.execute_s = time.perf_counter() - t1
        msg = f"{type(exc).__name__}: {exc}"
        return CandidateBundle(decision, query, None, msg, msg, desc.catalog_line), timing
    timing.execute_s = time.perf_counter() - t1
    return CandidateBundle(decision, query, outcome, verbalize(outcome, caps), None, desc.catalog_line), timing


def answer(
    question: str,
    catalog: Catalog,
    mode: RunMode,
    provider: Provider,
    limits: ExecLimits = ExecLimits(),
    *,
    question_id: str = "",
    gold_kb: str | None = None,
    executor: Executor | None = None,
    fanout: int = DEFAULT_FANOUT,
    caps: VerbalizeCaps = VerbalizeCaps(),
) -> QuestionTrace:
    """Answer one question under ``mode``; raises SelectionFailed when routing fails twice."""
    executor = executor or Executor()
    trace = QuestionTrace(question_id, question, str(mode))

    if mode.name == "oracle":
        if gold_kb is None:
            raise ValueError("oracle mode needs the gold kb_id")
        desc = catalog.lookup(gold_kb)
        trace.decisions = [Decision(desc.kind, desc.kb_id, 0)]
    else:
        pool = catalog.restrict(mode.kind) if mode.name == "single" else catalog
        if len(pool) == 0:
            trace.status = "no_evidence"
            trace.error = f"no {mode.kind} sources registered"
            return trace
        k = mode.k if mode.name == "omni" else 1
        trace.decisions = select_sources(question, pool, SelectionBudget(k), provider, trace.warnings)

    def run(decision: Decision) -> tuple[CandidateBundle, CandidateTiming]:
        return _run_candidate(question, decision, catalog, provider, executor, limits, caps)

    if len(trace.decisions) == 1:
        results = [run(trace.decisions[0])]
    else:
        with ThreadPoolExecutor(max_workers=max(1, min(fanout, len(trace.decisions)))) as pool_exec:
            results = list(pool_exec.map(run, trace.decisions))
    trace.candidates = [c for c, _ in results]
    trace.timings = [t for _, t in results]
    for cand in trace.candidates:
        if not cand.ok:
            trace.warnings.append(f"{cand.decision.kb_id}: {cand.error}")

    surviving = [c for c in trace.candidates if c.ok]
    if not surviving:
        trace.status = "no_evidence"
        trace.error = "all candidates failed"
        return trace
    if mode.name == "omni":
        trace.evidence = select_evidence(question, surviving, provider)
        trace.warnings.extend(trace.evidence.warnings)
    else:
        trace.evidence = EvidenceBundle(tuple(surviving[:1]), 0)
    return trace


class Engine:
    """Bundles the shared, read-only runtime state for many questions."""

    def __init__(self, catalog: Catalog, provider: Provider, *, limits: ExecLimits = ExecLimits(),
                 executor: Executor | None = None, fanout: int = DEFAULT_FANOUT,
                 caps: VerbalizeCaps = VerbalizeCaps()):
        self.catalog = catalog
        self.provider = provider
        self.limits = limits
        self.executor = executor or Executor()
        self.fanout = fanout
        self.caps = caps

    def answer(self, question: str, mode: RunMode, *, question_id: str = "",
               gold_kb: str | None = None) -> QuestionTrace:
        return answer(question, self.catalog, mode, self.provider, self.limits, question_id=question_id,
                      gold_kb=gold_kb, executor=self.executor, fanout=self.fanout, caps=self.caps)


__all__ = ["Engine", "PolyrouteError", "QuestionTrace", "RunMode", "answer"]
