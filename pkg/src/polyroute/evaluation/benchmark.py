"""Benchmark harness: run a mode over a gold dataset and aggregate the metric suite."""

from __future__ import annotations

import csv
import io
import logging
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any

from polyroute.errors import DatasetError, GoldExecutionFailed, MissingParadigm, PolyrouteError
from polyroute.evaluation.dataset import GoldAnnotation
from polyroute.evaluation.diagnostics import DiagnosticsReport, diagnostics
from polyroute.evaluation.judge import JudgeSide, judge
from polyroute.evaluation.metrics import execution_match, final_source, macro_average, ndcg_at_10
from polyroute.execution import ExecLimits, ExecOutcome, Executor, Passage, Passages, VerbalizeCaps, is_empty, verbalize
from polyroute.formulation import NativeQuery
from polyroute.llm import Provider
from polyroute.pipeline import QuestionTrace, RunMode, answer
from polyroute.registry import KIND_ORDER, BackendKind, Catalog

log = logging.getLogger(__name__)

METRICS = ("source_selection", "retrieval", "judge")


@dataclass(frozen=True)
class QuestionRecord:
    question_id: str
    paradigm: BackendKind
    gold_kb: str
    selected_kind: str | None
    selected_kb: str | None
    status: str
    source_selection: float
    retrieval: float
    judge: float
    warnings: tuple[str, ...] = ()

    def to_dict(self) -> dict[str, Any]:
        return {
            "question_id": self.question_id,
            "paradigm": self.paradigm.value,
            "gold_kb": self.gold_kb,
            "selected_kind": self.selected_kind,
            "selected_kb": self.selected_kb,
            "status": self.status,
            "source_selection": self.source_selection,
            "retrieval": self.retrieval,
            "judge": self.judge,
            "warnings": list(self.warnings),
        }


@dataclass
class MetricsReport:
    """Per-paradigm values and macro averages, all in percent."""

    mode: str
    per_paradigm: dict[str, dict[str, float | None]]
    macro: dict[str, float | None]
    counts: dict[str, int]
    records: list[QuestionRecord]
    diagnostics: DiagnosticsReport
    excluded: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "mode": self.mode,
            "per_paradigm": self.per_paradigm,
            "macro": self.macro,
            "counts": self.counts,
            "excluded": list(self.excluded),
            "warnings": list(self.warnings),
            "diagnostics": self.diagnostics.to_dict(),
            "records": [r.to_dict() for r in self.records],
        }

    def records_csv(self) -> str:
        buf = io.StringIO()
        cols = ["question_id", "paradigm", "gold_kb", "selected_kind", "selected_kb", "status", *METRICS]
        writer = csv.DictWriter(buf, fieldnames=cols, extrasaction="ignore", lineterminator="\n")
        writer.writeheader()
        for rec in self.records:
            writer.writerow(rec.to_dict())
        return buf.getvalue()

    def summary_table(self) -> str:
        head = f"{'metric':<18}" + "".join(f"{k.value:>10}" for k in KIND_ORDER) + f"{'macro':>10}"
        lines = [f"mode: {self.mode}", head]

        def cell(v: float | None) -> str:
            return f"{'-':>10}" if v is None else f"{v:>10.2f}"

        for metric in METRICS:
            row = self.per_paradigm[metric]
            lines.append(f"{metric:<18}" + "".join(cell(row[k.value]) for k in KIND_ORDER) + cell(self.macro[metric]))
        return "\n".join(lines)


def gold_outcome(gold: GoldAnnotation, catalog: Catalog, executor: Executor, limits: ExecLimits) -> ExecOutcome:
    """Execute the gold side once. Search golds become the qrels-ideal ranking."""
    desc = catalog.lookup(gold.gold_kb)
    if gold.paradigm is BackendKind.SEARCH:
        try:
            docs = executor.index_for(desc).docs
        except PolyrouteError as exc:
            raise GoldExecutionFailed(f"{gold.question_id}: {exc}") from None
        return Passages(tuple(
            Passage(doc_id, gain, docs[doc_id].text if doc_id in docs else "",
                    docs[doc_id].title if doc_id in docs else "")
            for doc_id, gain in gold.qrels.items() if gain > 0
        ))
    query = NativeQuery(gold.paradigm, gold.gold_kb, gold.gold_query)
    try:
        return executor.execute(desc, query, limits)
    except PolyrouteError as exc:
        raise GoldExecutionFailed(f"{gold.question_id}: {type(exc).__name__}: {exc}") from None


def retrieval_accuracy(trace: QuestionTrace, gold: GoldAnnotation, gold_result: ExecOutcome) -> float:
    """NDCG@10 for search golds, execution match otherwise; 0 off the gold kb."""
    sel = trace.selected
    if sel is None or sel.outcome is None or final_source(trace) != (gold.paradigm, gold.gold_kb):
        return 0.0
    if gold.paradigm is BackendKind.SEARCH:
        if not isinstance(sel.outcome, Passages):
            return 0.0
        return ndcg_at_10(sel.outcome, gold.qrels)
    return float(execution_match(sel.outcome, gold_result))


def _answer_text(outcome: ExecOutcome | None, caps: VerbalizeCaps) -> str:
    if outcome is None or is_empty(outcome):
        return ""
    return verbalize(outcome, caps)


def judge_sides(trace: QuestionTrace, gold: GoldAnnotation, gold_result: ExecOutcome, catalog: Catalog,
                caps: VerbalizeCaps = VerbalizeCaps()) -> tuple[JudgeSide, JudgeSide]:
    gold_desc = catalog.lookup(gold.gold_kb)
    gold_side = JudgeSide(gold.paradigm.value, gold.gold_kb, gold.gold_query or trace.question,
                          gold_desc.context_text, _answer_text(gold_result, caps))
    sel = trace.selected
    if sel is None:
        return JudgeSide("", "", "", "", ""), gold_side
    desc = catalog.get(sel.decision.kb_id)
    pred_side = JudgeSide(
        sel.decision.kind.value,
        sel.decision.kb_id,
        sel.query.text if sel.query else "",
        desc.context_text if desc else "",
        _answer_text(sel.outcome, caps),
    )
    return pred_side, gold_side


def _run_one(gold: GoldAnnotation, catalog: Catalog, mode: RunMode, provider: Provider, limits: ExecLimits,
             executor: Executor) -> QuestionTrace:
    try:
        return answer(gold.question, catalog, mode, provider, limits, question_id=gold.question_id,
                      gold_kb=gold.gold_kb, executor=executor)
    except (PolyrouteError, ValueError, KeyError) as exc:
        trace = QuestionTrace(gold.question_id, gold.question, str(mode))
        trace.status = "selection_failed"
        trace.error = f"{type(exc).__name__}: {exc}"
        return trace


def _score(trace: QuestionTrace, gold: GoldAnnotation, gold_result: ExecOutcome, catalog: Catalog,
           judge_provider: Provider) -> QuestionRecord:
    warnings = list(trace.warnings)
    chosen = final_source(trace)
    src = 100.0 * (chosen == (gold.paradigm, gold.gold_kb))
    ret = 100.0 * retrieval_accuracy(trace, gold, gold_result)
    pred_side, gold_side = judge_sides(trace, gold, gold_result, catalog)
    if trace.selected is None:
        verdict_ok = False
    else:
        verdict = judge(trace.question, pred_side, gold_side, judge_provider)
        verdict_ok = verdict.correct
        if verdict.warning:
            warnings.append(verdict.warning)
    sel = trace.selected
    return QuestionRecord(
        question_id=gold.question_id,
        paradigm=gold.paradigm,
        gold_kb=gold.gold_kb,
        selected_kind=sel.decision.kind.value if sel else None,
        selected_kb=sel.decision.kb_id if sel else None,
        status=trace.status,
        source_selection=src,
        retrieval=ret,
        judge=100.0 * verdict_ok,
        warnings=tuple(warnings),
    )


@dataclass
class BenchmarkRun:
    report: MetricsReport
    traces: list[QuestionTrace]


def run_benchmark(
    dataset: Sequence[GoldAnnotation],
    catalog: Catalog,
    mode: RunMode,
    provider: Provider,
    limits: ExecLimits = ExecLimits(),
    *,
    judge_provider: Provider | None = None,
    concurrency: int = 4,
    executor: Executor | None = None,
    gold_cache: dict[str, ExecOutcome] | None = None,
) -> BenchmarkRun:
    """Answer and score every question. Per-question failures never abort the run.

    ``gold_cache`` (question_id -> gold outcome) is filled on first use so
    repeated runs over the same dataset skip gold execution.
    """
    if not dataset:
        raise DatasetError("dataset is empty")
    executor = executor or Executor()
    judge_provider = judge_provider or provider
    cache = gold_cache if gold_cache is not None else {}
    warnings: list[str] = []
    excluded: list[str] = []

    usable: list[GoldAnnotation] = []
    for gold in sorted(dataset, key=lambda g: g.question_id):
        desc = catalog.get(gold.gold_kb)
        if desc is None or desc.kind is not gold.paradigm:
            warnings.append(f"{gold.question_id}: gold kb {gold.gold_kb!r} is not a registered {gold.paradigm} source")
            excluded.append(gold.question_id)
            continue
        if gold.question_id not in cache:
            try:
                cache[gold.question_id] = gold_outcome(gold, catalog, executor, limits)
            except GoldExecutionFailed as exc:
                warnings.append(f"gold execution failed, question excluded: {exc}")
                excluded.append(gold.question_id)
                continue
        usable.append(gold)
    for w in warnings:
        log.warning("%s", w)

    def work(gold: GoldAnnotation) -> tuple[QuestionTrace, QuestionRecord]:
        trace = _run_one(gold, catalog, mode, provider, limits, executor)
        return trace, _score(trace, gold, cache[gold.question_id], catalog, judge_provider)

    with ThreadPoolExecutor(max_workers=max(1, concurrency)) as pool:
        results = list(pool.map(work, usable))
    traces = [t for t, _ in results]
    records = [r for _, r in results]  # already in question_id order

    per_paradigm: dict[str, dict[str, float | None]] = {}
    macro: dict[str, float | None] = {}
    counts = {k.value: sum(r.paradigm is k for r in records) for k in KIND_ORDER}
    counts["total"] = len(records)
    counts["excluded"] = len(excluded)
    for metric in METRICS:
        values: dict[BackendKind, float] = {}
        for kind in KIND_ORDER:
            bucket = [getattr(r, metric) for r in records if r.paradigm is kind]
            if bucket:
                values[kind] = sum(bucket) / len(bucket)
        per_paradigm[metric] = {k.value: values.get(k) for k in KIND_ORDER}
        try:
            macro[metric] = macro_average(values)
        except MissingParadigm as exc:
            macro[metric] = None
            warnings.append(f"macro {metric} undefined: {exc}")

    diag = diagnostics(traces, {g.question_id: g for g in usable})
    report = MetricsReport(str(mode), per_paradigm, macro, counts, records, diag, excluded, warnings)
    return BenchmarkRun(report, traces)
