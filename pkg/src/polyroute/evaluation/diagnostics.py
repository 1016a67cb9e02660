"""Analysis diagnostics over Omni traces: diversity, balance, evidence selection, gold inclusion."""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import asdict, dataclass
from typing import TYPE_CHECKING

from polyroute.registry import KIND_ORDER, BackendKind

if TYPE_CHECKING:
    from polyroute.evaluation.dataset import GoldAnnotation
    from polyroute.pipeline import QuestionTrace


@dataclass(frozen=True)
class DiagnosticsReport:
    questions: int
    mean_distinct_kinds: float
    mean_distinct_kbs: float
    evidence_selection_questions: int
    evidence_selection_accuracy: float | None
    random_baseline: float | None
    balance_rank0: dict[str, float]
    balance_all: dict[str, float]
    gold_inclusion_rate: float

    def to_dict(self) -> dict:
        return asdict(self)


def _gold_key(gold: GoldAnnotation) -> tuple[BackendKind, str]:
    return gold.paradigm, gold.gold_kb


def _balanced(per_question: list[tuple[BackendKind, dict[BackendKind, float]]]) -> dict[str, float]:
    """Average kind distributions within each gold paradigm, then across paradigms."""
    buckets: dict[BackendKind, list[dict[BackendKind, float]]] = {}
    for paradigm, dist in per_question:
        buckets.setdefault(paradigm, []).append(dist)
    out = {k.value: 0.0 for k in KIND_ORDER}
    if not buckets:
        return out
    for dists in buckets.values():
        for kind in KIND_ORDER:
            out[kind.value] += sum(d.get(kind, 0.0) for d in dists) / len(dists) / len(buckets)
    return out


def diagnostics(traces: Sequence[QuestionTrace], golds: Mapping[str, GoldAnnotation]) -> DiagnosticsReport:
    """Compute diagnostics for traces that have a gold annotation keyed by question_id."""
    paired = [(t, golds[t.question_id]) for t in sorted(traces, key=lambda t: t.question_id)
              if t.question_id in golds]
    n = len(paired)

    kinds = kbs = included = 0.0
    rank0: list[tuple[BackendKind, dict[BackendKind, float]]] = []
    spread: list[tuple[BackendKind, dict[BackendKind, float]]] = []
    hits = 0
    eligible = 0
    baseline = 0.0
    for trace, gold in paired:
        decisions = trace.decisions
        kinds += len({d.kind for d in decisions})
        kbs += len({d.kb_id for d in decisions})
        keys = [(d.kind, d.kb_id) for d in decisions]
        included += _gold_key(gold) in keys
        if decisions:
            rank0.append((gold.paradigm, {decisions[0].kind: 1.0}))
            dist: dict[BackendKind, float] = {}
            for d in decisions:
                dist[d.kind] = dist.get(d.kind, 0.0) + 1.0 / len(decisions)
            spread.append((gold.paradigm, dist))

        # evidence selection is judged over the candidates the selector actually saw
        if trace.evidence is not None:
            pool = [(c.decision.kind, c.decision.kb_id) for c in trace.evidence.candidates]
            if len(pool) >= 2 and _gold_key(gold) in pool:
                eligible += 1
                baseline += 1.0 / len(pool)
                hits += pool[trace.evidence.selected_index] == _gold_key(gold)

    return DiagnosticsReport(
        questions=n,
        mean_distinct_kinds=kinds / n if n else 0.0,
        mean_distinct_kbs=kbs / n if n else 0.0,
        evidence_selection_questions=eligible,
        evidence_selection_accuracy=hits / eligible if eligible else None,
        random_baseline=baseline / eligible if eligible else None,
        balance_rank0=_balanced(rank0),
        balance_all=_balanced(spread),
        gold_inclusion_rate=included / n if n else 0.0,
    )
