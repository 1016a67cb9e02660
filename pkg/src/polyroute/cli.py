"""Command-line entry point: ask, eval, validate-query, serve.

stdout carries JSON (or the eval summary table); logs and errors go to stderr.
Exit codes: 0 ok, 1 fatal, 2 no evidence.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import threading
from pathlib import Path
from typing import Any

from polyroute.config import EngineConfig, load_config
from polyroute.errors import PolyrouteError
from polyroute.pipeline import QuestionTrace, RunMode
from polyroute.registry import BackendKind

EXIT_OK = 0
EXIT_FATAL = 1
EXIT_NO_EVIDENCE = 2

log = logging.getLogger("polyroute")
_trace_lock = threading.Lock()


def _fail(message: str, kind: str = "error") -> int:
    print(json.dumps({"error": kind, "message": message}), file=sys.stderr)
    return EXIT_FATAL


def append_trace(cfg: EngineConfig, traces: list[QuestionTrace]) -> None:
    if cfg.trace_path is None:
        return
    with _trace_lock, open(cfg.trace_path, "a", encoding="utf-8") as fh:
        for trace in traces:
            fh.write(json.dumps(trace.to_dict(), sort_keys=True) + "\n")


def _mode(text: str, k: int) -> RunMode:
    try:
        return RunMode.parse(text, k)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def cmd_ask(args: argparse.Namespace) -> int:
    try:
        cfg = load_config(args.config)
        mode = _mode(args.mode, args.k or cfg.k)
        if mode.name == "oracle" and not args.gold_kb:
            return _fail("oracle mode needs --gold-kb")
        engine = cfg.build_engine()
        trace = engine.answer(args.question, mode, question_id=args.question_id, gold_kb=args.gold_kb)
    except (PolyrouteError, ValueError, KeyError, argparse.ArgumentTypeError) as exc:
        return _fail(f"{type(exc).__name__}: {exc}")
    append_trace(cfg, [trace])
    for w in trace.warnings:
        log.warning("%s", w)
    print(json.dumps(trace.answer_json(), indent=2))
    return EXIT_OK if trace.selected is not None else EXIT_NO_EVIDENCE


def cmd_eval(args: argparse.Namespace) -> int:
    from polyroute.evaluation import load_dataset, run_benchmark

    try:
        cfg = load_config(args.config)
        mode = _mode(args.mode, args.k or cfg.k)
        dataset = load_dataset(args.dataset)
        engine = cfg.build_engine()
        run = run_benchmark(dataset, engine.catalog, mode, engine.provider, cfg.limits,
                            judge_provider=cfg.build_judge(engine.provider), concurrency=cfg.questions,
                            executor=engine.executor)
    except (PolyrouteError, ValueError, argparse.ArgumentTypeError) as exc:
        return _fail(f"{type(exc).__name__}: {exc}")
    report = run.report
    append_trace(cfg, run.traces)
    Path(args.report).write_text(json.dumps(report.to_dict(), indent=2) + "\n", encoding="utf-8")
    if args.csv:
        Path(args.csv).write_text(report.records_csv(), encoding="utf-8")
    print(report.summary_table())
    return EXIT_OK


def cmd_validate_query(args: argparse.Namespace) -> int:
    from polyroute.validation import check_text, parse_context

    try:
        kind = BackendKind.parse(args.kind)
        context = Path(args.context).read_text(encoding="utf-8")
        query = Path(args.query[1:]).read_text(encoding="utf-8") if args.query.startswith("@") else args.query
        report = check_text(kind, query, parse_context(kind, context))
    except (PolyrouteError, ValueError, OSError) as exc:
        return _fail(f"{type(exc).__name__}: {exc}")
    out: dict[str, Any] = {"kind": kind.value, **report.to_dict()}
    print(json.dumps(out, indent=2))
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    from polyroute.service import serve

    try:
        cfg = load_config(args.config)
        host, _, port = args.addr.rpartition(":")
        return serve(cfg, host or "127.0.0.1", int(port))
    except (PolyrouteError, ValueError) as exc:
        return _fail(f"{type(exc).__name__}: {exc}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="polyroute", description="Route questions across heterogeneous knowledge sources.")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    ask = sub.add_parser("ask", help="answer one question")
    ask.add_argument("--config", required=True)
    ask.add_argument("--question", required=True)
    ask.add_argument("--k", type=int)
    ask.add_argument("--mode", default="omni", help="omni | kb-routing | single:<kind> | oracle")
    ask.add_argument("--gold-kb", help="source to use in oracle mode")
    ask.add_argument("--question-id", default="")
    ask.set_defaults(func=cmd_ask)

    ev = sub.add_parser("eval", help="run a benchmark over a gold dataset")
    ev.add_argument("--config", required=True)
    ev.add_argument("--dataset", required=True)
    ev.add_argument("--mode", default="omni")
    ev.add_argument("--k", type=int)
    ev.add_argument("--report", required=True)
    ev.add_argument("--csv", help="also write per-question records as CSV")
    ev.set_defaults(func=cmd_eval)

    vq = sub.add_parser("validate-query", help="check a query's identifiers against a context file")
    vq.add_argument("--kind", required=True)
    vq.add_argument("--context", required=True)
    vq.add_argument("--query", required=True, help="query text, or @file")
    vq.set_defaults(func=cmd_validate_query)

    srv = sub.add_parser("serve", help="run the HTTP service")
    srv.add_argument("--config", required=True)
    srv.add_argument("--addr", default="127.0.0.1:8080")
    srv.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "mode", None) is not None:
        try:
            RunMode.parse(args.mode)
        except ValueError as exc:
            parser.print_usage(sys.stderr)
            return _fail(str(exc), "usage")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
