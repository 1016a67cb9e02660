"""Metric suite, judge, benchmark harness and diagnostics."""

from __future__ import annotations

from polyroute.evaluation.benchmark import (
    BenchmarkRun,
    MetricsReport,
    QuestionRecord,
    gold_outcome,
    retrieval_accuracy,
    run_benchmark,
)
from polyroute.evaluation.dataset import GoldAnnotation, load_dataset
from polyroute.evaluation.diagnostics import DiagnosticsReport, diagnostics
from polyroute.evaluation.judge import JudgeSide, JudgeVerdict, judge, render_judge_prompt
from polyroute.evaluation.metrics import (
    execution_match,
    final_source,
    macro_average,
    ndcg_at_10,
    source_selection_accuracy,
)

__all__ = [
    "BenchmarkRun", "DiagnosticsReport", "GoldAnnotation", "JudgeSide", "JudgeVerdict", "MetricsReport",
    "QuestionRecord", "diagnostics", "execution_match", "final_source", "gold_outcome", "judge",
    "load_dataset", "macro_average", "ndcg_at_10", "render_judge_prompt", "retrieval_accuracy",
    "run_benchmark", "source_selection_accuracy",
]
