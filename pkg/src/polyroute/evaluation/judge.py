"""LLM-as-a-judge scoring with deterministic empty-answer rules."""

from __future__ import annotations

from dataclasses import dataclass

from polyroute import prompts
from polyroute.errors import GatewayError, JsonExtractError
from polyroute.llm import ChatRequest, Provider, extract_json_object

TAG = "judge"


@dataclass(frozen=True)
class JudgeSide:
    route: str
    kb: str
    query: str
    context: str
    answer: str


@dataclass(frozen=True)
class JudgeVerdict:
    correct: bool
    reason: str = ""
    llm_calls: int = 0
    warning: str | None = None


def _side(label: str, side: JudgeSide) -> str:
    return (
        f"[{label}] route={side.route} | kb={side.kb}\n"
        f"query: {side.query}\n"
        f"context:\n{side.context.rstrip()}\n"
        f"answer:\n{side.answer}"
    )


def render_judge_prompt(question: str, pred: JudgeSide, gold: JudgeSide) -> ChatRequest:
    user = (
        f"Question: {question}\n\n{_side('PREDICTED', pred)}\n\n{_side('GOLD', gold)}\n\n"
        f"{prompts.JUDGE_RESPONSE_FORMAT}"
    )
    return ChatRequest(system=prompts.JUDGE_SYSTEM, user=user, tag=TAG)


def _parse_verdict(text: str) -> tuple[bool, str]:
    payload = extract_json_object(text)
    correct = payload.get("correct")
    if not isinstance(correct, bool):
        raise ValueError(f"'correct' is not a boolean: {correct!r}")
    return correct, str(payload.get("reason", ""))


def judge(question: str, pred: JudgeSide, gold: JudgeSide, provider: Provider) -> JudgeVerdict:
    pred_empty = not pred.answer.strip()
    gold_empty = not gold.answer.strip()
    if pred_empty and gold_empty:
        return JudgeVerdict(True, "both answers empty")
    if pred_empty:
        return JudgeVerdict(False, "predicted answer empty")

    request = render_judge_prompt(question, pred, gold)
    retry = ChatRequest(request.system, f"{request.user}\n{prompts.CORRECTIVE_INSTRUCTION}",
                        request.temperature, request.max_tokens, TAG)
    problems = []
    for calls, attempt in enumerate((request, retry), 1):
        try:
            correct, reason = _parse_verdict(provider.complete(attempt).text)
            return JudgeVerdict(correct, reason, calls)
        except (JsonExtractError, GatewayError, ValueError) as exc:
            problems.append(str(exc))
    return JudgeVerdict(False, "", 2, f"judge response unusable: {problems[-1]}")
