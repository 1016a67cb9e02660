"""Scoring functions: source selection, NDCG@10, execution match, macro averaging."""

from __future__ import annotations

import math
from collections.abc import Mapping, Sequence
from typing import TYPE_CHECKING

from polyroute.errors import MissingParadigm
from polyroute.execution import Bindings, ExecOutcome, Passages, Records, Rows
from polyroute.registry import KIND_ORDER, BackendKind

if TYPE_CHECKING:
    from polyroute.evaluation.dataset import GoldAnnotation
    from polyroute.pipeline import QuestionTrace

REL_TOL = 1e-6


def final_source(trace: QuestionTrace) -> tuple[BackendKind, str] | None:
    """The source a run finally committed to.

    The evidence-selected candidate when there is one, else the router's
    top decision (what index-0 fallback would have chosen).
    """
    if trace.selected is not None:
        d = trace.selected.decision
        return d.kind, d.kb_id
    if trace.decisions:
        return trace.decisions[0].kind, trace.decisions[0].kb_id
    return None


def source_selection_accuracy(trace: QuestionTrace, gold: GoldAnnotation) -> int:
    return int(final_source(trace) == (gold.paradigm, gold.gold_kb))


def ndcg_at_10(ranking: Passages | Sequence[str], qrels: Mapping[str, float]) -> float:
    doc_ids = ranking.doc_ids() if isinstance(ranking, Passages) else list(ranking)
    dcg = sum(qrels.get(doc, 0.0) / math.log2(i + 2) for i, doc in enumerate(doc_ids[:10]))
    ideal = sorted((g for g in qrels.values() if g > 0), reverse=True)[:10]
    idcg = sum(g / math.log2(i + 2) for i, g in enumerate(ideal))
    if idcg <= 0:
        return 0.0
    return dcg / idcg


def _is_number(v: object) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def values_equivalent(a: object, b: object) -> bool:
    if _is_number(a) and _is_number(b):
        if a == b:
            return True
        return abs(a - b) <= REL_TOL * max(abs(a), abs(b))
    if isinstance(a, bool) or isinstance(b, bool):
        return isinstance(a, bool) and isinstance(b, bool) and a == b
    if isinstance(a, str) and isinstance(b, str):
        return a.strip() == b.strip()
    return a is None and b is None


def _tuples_equivalent(x: tuple, y: tuple) -> bool:
    return len(x) == len(y) and all(values_equivalent(a, b) for a, b in zip(x, y))


def canonical_tuples(outcome: ExecOutcome) -> tuple[str, list[tuple]]:
    """Reduce an outcome to (shape tag, list of value tuples) for comparison."""
    if isinstance(outcome, Rows):
        return "rows", [tuple(r) for r in outcome.rows]
    if isinstance(outcome, Bindings):
        if outcome.ask is not None:
            return "ask", [(outcome.ask,)]
        names = sorted(set(outcome.vars).union(*[b.keys() for b in outcome.bindings]))
        return "bindings", [tuple(b.get(v) for v in names) for b in outcome.bindings]
    if isinstance(outcome, Records):
        return "records", [tuple(r) for r in outcome.records]
    if isinstance(outcome, Passages):
        return "passages", [(p.doc_id,) for p in outcome.items]
    raise TypeError(f"not an execution outcome: {type(outcome).__name__}")


def _sort_key(row: tuple) -> tuple:
    out = []
    for v in row:
        if v is None:
            out.append((0, 0.0, ""))
        elif isinstance(v, bool):
            out.append((1, float(v), ""))
        elif _is_number(v):
            out.append((2, float(v), ""))
        else:
            out.append((3, 0.0, str(v).strip()))
    return tuple(out)


def _multiset_match(xs: list[tuple], ys: list[tuple]) -> bool:
    if len(xs) != len(ys):
        return False
    xs_sorted = sorted(xs, key=_sort_key)
    ys_sorted = sorted(ys, key=_sort_key)
    if all(_tuples_equivalent(a, b) for a, b in zip(xs_sorted, ys_sorted)):
        return True
    # tolerance can defeat sorted pairing; settle it with bipartite matching
    adj = [[j for j, y in enumerate(ys) if _tuples_equivalent(x, y)] for x in xs]
    if any(not a for a in adj):
        return False
    match_of_y = [-1] * len(ys)

    def augment(i: int, seen: list[bool]) -> bool:
        for j in adj[i]:
            if seen[j]:
                continue
            seen[j] = True
            if match_of_y[j] == -1 or augment(match_of_y[j], seen):
                match_of_y[j] = i
                return True
        return False

    return all(augment(i, [False] * len(ys)) for i in range(len(xs)))


def execution_match(pred: ExecOutcome, gold: ExecOutcome) -> bool:
    """Order-insensitive result-set equivalence with numeric tolerance."""
    pred_shape, pred_rows = canonical_tuples(pred)
    gold_shape, gold_rows = canonical_tuples(gold)
    if pred_shape != gold_shape:
        return False
    return _multiset_match(pred_rows, gold_rows)


def macro_average(per_paradigm: Mapping[BackendKind, float]) -> float:
    missing = [k.value for k in KIND_ORDER if k not in per_paradigm]
    if missing:
        raise MissingParadigm(f"no value for {', '.join(missing)}")
    return sum(per_paradigm[k] for k in KIND_ORDER) / len(KIND_ORDER)
