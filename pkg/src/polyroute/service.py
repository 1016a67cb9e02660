"""HTTP service: POST /ask, GET /catalog, GET /healthz."""

from __future__ import annotations

import contextlib
import itertools
import logging
import threading
from collections.abc import Iterator
from typing import Any

import uvicorn
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, PlainTextResponse
from pydantic import BaseModel, Field, ValidationError
from starlette.concurrency import run_in_threadpool

from polyroute.cli import append_trace
from polyroute.config import EngineConfig
from polyroute.errors import PolyrouteError
from polyroute.pipeline import Engine, RunMode
from polyroute.registry import catalog_summary

log = logging.getLogger(__name__)


class AskBody(BaseModel):
    question: str = Field(min_length=1)
    k: int | None = Field(default=None, ge=1)
    mode: str = "omni"
    gold_kb: str | None = None


class ServiceState:
    def __init__(self, cfg: EngineConfig, engine: Engine):
        self.cfg = cfg
        self.engine = engine
        self.draining = threading.Event()
        self.slots = threading.BoundedSemaphore(cfg.requests)
        self.ids = itertools.count(1)


def create_app(cfg: EngineConfig, engine: Engine | None = None) -> FastAPI:
    state = ServiceState(cfg, engine or cfg.build_engine())
    app = FastAPI(title="polyroute")
    app.state.service = state

    @app.middleware("http")
    async def refuse_while_draining(request: Request, call_next):
        if state.draining.is_set() and request.url.path != "/healthz":
            return JSONResponse({"error": "draining"}, status_code=503)
        return await call_next(request)

    @app.get("/healthz", response_class=PlainTextResponse)
    def healthz() -> str:
        return "ok"

    @app.get("/catalog")
    def catalog() -> list[dict[str, str]]:
        return catalog_summary(state.engine.catalog)

    @app.post("/ask")
    async def ask(request: Request) -> JSONResponse:
        try:
            body = AskBody.model_validate_json(await request.body())
            mode = RunMode.parse(body.mode, body.k or cfg.k)
        except (ValidationError, ValueError) as exc:
            return JSONResponse({"error": "bad_request", "message": str(exc)}, status_code=400)
        if mode.name == "oracle" and not body.gold_kb:
            return JSONResponse({"error": "bad_request", "message": "oracle mode needs gold_kb"}, status_code=400)
        return await run_in_threadpool(_answer, state, body, mode)

    return app


def _answer(state: ServiceState, body: AskBody, mode: RunMode) -> JSONResponse:
    with state.slots:
        qid = f"req-{next(state.ids)}"
        try:
            trace = state.engine.answer(body.question, mode, question_id=qid, gold_kb=body.gold_kb)
        except (PolyrouteError, KeyError) as exc:
            return JSONResponse({"error": type(exc).__name__, "message": str(exc)}, status_code=500)
    append_trace(state.cfg, [trace])
    payload: dict[str, Any] = trace.answer_json()
    return JSONResponse(payload, status_code=200)


class _DrainingServer(uvicorn.Server):
    """Flags the app as draining on the first termination signal; uvicorn then
    waits for in-flight requests before exiting."""

    def __init__(self, config: uvicorn.Config, state: ServiceState):
        super().__init__(config)
        self._state = state

    def handle_exit(self, sig: int, frame: Any) -> None:
        self._state.draining.set()
        super().handle_exit(sig, frame)

    @contextlib.contextmanager
    def capture_signals(self) -> Iterator[None]:
        # a finished drain is a clean exit, so uvicorn must not re-raise the signal afterwards
        with super().capture_signals():
            try:
                yield
            finally:
                getattr(self, "_captured_signals", []).clear()


def serve(cfg: EngineConfig, host: str, port: int) -> int:
    app = create_app(cfg)
    config = uvicorn.Config(app, host=host, port=port, log_level="warning", timeout_graceful_shutdown=60)
    _DrainingServer(config, app.state.service).run()
    return 0
